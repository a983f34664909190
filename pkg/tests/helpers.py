"""Shared constructors for tests."""
from kmsentropy.functionals import GaussianProfile, SharedProfileFunctional

UNIT = GaussianProfile(1.0, 1.0)


def spf(coeffs, profile=UNIT):
    return SharedProfileFunctional(tuple(float(c) for c in coeffs), profile)
