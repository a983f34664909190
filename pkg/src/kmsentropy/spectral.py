"""Uniform signed-frequency grids and l-fold convolutions of line densities.

A second-order quantity at order ``l`` integrates over ``l`` on-shell
momenta. Because each generator kernel factorizes over its lines, the
integrand depends on the momenta only through the per-line densities and
the total frequency ``f = nu_1 + ... + nu_l``, so the ``3l``-dimensional
integral reduces to a 1-dimensional integral against ``mu_l``, the
``l``-fold convolution of the single-line density.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ConfigurationError, ResolutionError
from .functionals import GaussianProfile
from .thermal import ThermalParams, single_line_density, sinh_kernel

DEFAULT_POINTS = 2**14 + 1
MASS_TOL = 1e-3          # step-halving tolerance on the line mass
CONVOLUTION_TOL = 1e-3   # mass(mu_l) vs mass(rho)**l
PROFILE_DECAY = 40.0     # g(k)**2 drops by exp(-40) at the grid edge


@dataclass(frozen=True)
class GridSpec:
    """Resolution of the single-line grid: ``n_points`` samples on ``[-nu_max, nu_max]``.

    ``nu_max=None`` picks the edge from the profile decay (see :func:`default_nu_max`).
    """

    n_points: int = DEFAULT_POINTS
    nu_max: float | None = None

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 65 or self.n_points % 2 == 0:
            raise ConfigurationError("grid n_points must be an odd integer >= 65")
        if self.nu_max is not None and not (math.isfinite(self.nu_max) and self.nu_max > 0):
            raise ConfigurationError("grid nu_max must be positive")


@dataclass(frozen=True)
class SpectralGrid:
    """Samples ``values[j]`` at ``nu_min + j * step``."""

    nu_min: float
    step: float
    values: np.ndarray
    mass: float = 0.0

    @property
    def nu_max(self):
        return self.nu_min + self.step * (len(self.values) - 1)

    @property
    def nu(self):
        return self.nu_min + self.step * np.arange(len(self.values))

    def total_mass(self):
        """Trapezoid integral (the edge samples vanish to working precision)."""
        v = self.values
        return self.step * (v.sum() - 0.5 * (v[0] + v[-1]))

    def symmetry_defect(self):
        v = self.values
        return float(np.max(np.abs(v - v[::-1])) / max(np.max(np.abs(v)), 1e-300))


@dataclass(frozen=True)
class ConvolvedDensity:
    order: int
    grid: SpectralGrid


def default_nu_max(profile: GaussianProfile, params: ThermalParams):
    """On-shell frequency at which the profile weight ``g**2`` has decayed by ``exp(-40)``."""
    k = profile.decay_radius(PROFILE_DECAY)
    return math.sqrt(k * k + params.mass**2)


def single_line_grid(profile, params, spec: GridSpec = GridSpec()):
    """Single-line density sampled on a symmetric grid with ``0`` at the center."""
    nu_max = spec.nu_max if spec.nu_max is not None else default_nu_max(profile, params)
    if nu_max <= params.mass:
        raise ConfigurationError(f"grid edge {nu_max} must exceed the mass {params.mass}")
    half = (spec.n_points - 1) // 2
    step = nu_max / half
    nu = step * np.arange(-half, half + 1)
    vals = single_line_density(nu, profile, params)
    # enforce exact evenness so downstream convolutions inherit it
    vals = 0.5 * (vals + vals[::-1])
    return SpectralGrid(-nu_max, step, vals, params.mass)


def check_resolution(grid: SpectralGrid, tol=MASS_TOL):
    """Raise ``ResolutionError`` if the mass changes by more than ``tol`` when the step doubles."""
    fine = grid.total_mass()
    v = grid.values[::2]
    coarse = 2.0 * grid.step * (v.sum() - 0.5 * (v[0] + v[-1]))
    if fine <= 0:
        return 0.0
    rel = abs(fine - coarse) / fine
    if rel > tol:
        raise ResolutionError(
            f"line density under-resolved: mass changes by {rel:.2e} on step doubling "
            f"(step {grid.step:.3g}); increase grid n_points")
    return rel


def convolve_density(rho: SpectralGrid, l: int, backend=None):
    """``l``-fold convolution ``mu_l`` of an even density on the same step.

    The result lives on ``[l * nu_min, l * nu_max]``. Discrete convolution
    with step weighting preserves the trapezoid mass exactly, so a mass
    deviation beyond ``CONVOLUTION_TOL`` signals truncation at the grid edge.
    """
    if int(l) != l or l < 1:
        raise ConfigurationError(f"convolution order must be a positive integer, got {l!r}")
    kern = _backend.get_backend(backend)
    mu = rho.values
    for _ in range(l - 1):
        mu = rho.step * kern.even_convolve(mu, rho.values)
    out = SpectralGrid(l * rho.nu_min, rho.step, np.maximum(mu, 0.0), rho.mass)
    m1 = rho.total_mass()
    if m1 > 0:
        dev = abs(out.total_mass() - m1**l) / m1**l
        if dev > CONVOLUTION_TOL:
            raise ResolutionError(f"order-{l} convolution mass deviates by {dev:.2e} from mass**{l}")
    return ConvolvedDensity(int(l), out)


@dataclass(frozen=True)
class SpectralMeasure:
    """Frequencies ``f`` and trapezoid weights ``w = step * mu_l(f)`` of one order.

    ``kernel_w`` holds ``w * beta sinh(beta f / 2) / f``, the common factor of
    every second-order integrand.
    """

    order: int
    f: np.ndarray
    w: np.ndarray
    kernel_w: np.ndarray


def _freeze(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@functools.lru_cache(maxsize=32)
def _measure_stack(profile, params, spec, order, backend):
    rho = single_line_grid(profile, params, spec)
    check_resolution(rho)
    out = []
    for l in range(1, order + 1):
        g = convolve_density(rho, l, backend).grid
        keep = g.values > 0
        f = g.nu[keep]
        w = g.step * g.values[keep]
        if f.size and 0.5 * params.beta * np.max(np.abs(f)) > 700.0:
            raise ConfigurationError("beta * nu_max too large: the thermal kernel overflows")
        out.append(SpectralMeasure(l, _freeze(f), _freeze(w), _freeze(w * sinh_kernel(f, params))))
    return tuple(out)


def density_stack(profile, params, order, spec: GridSpec = GridSpec(), backend=None):
    """Spectral measures for orders ``1..order`` (cached per profile, params and grid).

    ``params.lambda_order`` does not influence the measures, so it is
    normalized out of the cache key.
    """
    key_params = ThermalParams(params.beta, params.mass)
    name = backend if backend is not None else _backend.ACTIVE
    return _measure_stack(profile, key_params, spec, int(order), name)


def clear_cache():
    _measure_stack.cache_clear()
