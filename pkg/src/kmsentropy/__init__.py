"""Second-order relative entropy and entropy production for perturbed thermal states."""
__version__ = "0.1.0"
