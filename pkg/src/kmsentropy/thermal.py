"""Thermal weights and kernels of the free massive scalar field.

Units: hbar = 1, energies and momenta share one unit, ``beta`` is its inverse.
Every function is vectorized over its first argument and pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

FOUR_PI = 4.0 * math.pi
INV_TWO_PI_CUBED = 1.0 / (2.0 * math.pi) ** 3

# crossover of the Taylor branch of sinh(y)/y, in units of y = beta*f/2
_SINHC_EPS = float(np.finfo(float).eps) ** 0.25


@dataclass(frozen=True)
class ThermalParams:
    """Inverse temperature, mass and coupling truncation order.

    All second-order quantities are computed at ``lambda_order`` 2; larger
    values are accepted so configs can record the intended truncation, but
    contributions beyond second order are not evaluated.
    """

    beta: float
    mass: float
    lambda_order: int = 2

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise DomainError(f"beta must be a positive finite number, got {self.beta!r}")
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise DomainError(f"mass must be positive (massless case unsupported), got {self.mass!r}")
        if int(self.lambda_order) != self.lambda_order or self.lambda_order < 2:
            raise DomainError(f"lambda_order must be an integer >= 2, got {self.lambda_order!r}")


@dataclass(frozen=True)
class OnShellPoint:
    """Signed frequency ``nu`` on the mass shell and its momentum magnitude ``k``."""

    nu: float
    k: float

    @classmethod
    def from_frequency(cls, nu, mass):
        if abs(nu) < mass:
            raise DomainError(f"|nu| = {abs(nu)} lies inside the mass gap (mass = {mass})")
        return cls(float(nu), math.sqrt(max(nu * nu - mass * mass, 0.0)))

    def residual(self, mass):
        """|k^2 + m^2 - nu^2| relative to nu^2."""
        return abs(self.k**2 + mass**2 - self.nu**2) / max(self.nu**2, 1.0)


def boltzmann_weight(w, params: ThermalParams):
    """Per-line weight ``exp(-beta w / 2) / (2 w (1 - exp(-beta w)))``.

    Raises ``DomainError`` when any ``w`` is below the mass.
    """
    w = np.asarray(w, dtype=float)
    if np.any(w < params.mass) or np.any(w <= 0):
        raise DomainError("boltzmann_weight requires w >= mass > 0")
    b = params.beta
    out = np.exp(-0.5 * b * w) / (2.0 * w * -np.expm1(-b * w))
    return out if out.ndim else float(out)


def bose_weight(p0, params: ThermalParams):
    """Fourier weight ``sign(p0) / (1 - exp(-beta p0))`` of the free two-point function.

    Positive on both mass shells. ``DomainError`` at ``p0 = 0``.
    """
    p0 = np.asarray(p0, dtype=float)
    if np.any(p0 == 0):
        raise DomainError("the Bose factor has a pole at p0 = 0")
    out = np.sign(p0) / -np.expm1(-params.beta * p0)
    return out if out.ndim else float(out)


def detailed_balance_residual(p0, pvec_mag, params: ThermalParams):
    """``|W(p0) - exp(beta p0) W(-p0)|`` for the two-point Fourier weight ``W``.

    ``pvec_mag`` only fixes the shell on which ``p0`` sits and must be
    nonnegative; the weight itself depends on ``p0`` alone. The residual is
    scaled by ``max(1, W(p0))`` so it reads as a relative error for large
    weights near the pole.
    """
    if np.any(np.asarray(pvec_mag) < 0):
        raise DomainError("spatial momentum magnitude must be nonnegative")
    p0 = np.asarray(p0, dtype=float)
    fwd = bose_weight(p0, params)
    bwd = np.exp(params.beta * p0) * bose_weight(-p0, params)
    out = np.abs(fwd - bwd) / np.maximum(1.0, np.abs(fwd))
    return out if np.ndim(out) else float(out)


def _sinhc(y):
    """sinh(y)/y with an even Taylor branch for |y| < eps**(1/4)."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    small = np.abs(y) < _SINHC_EPS
    ys = y[small] ** 2
    out[small] = 1.0 + ys / 6.0 * (1.0 + ys / 20.0 * (1.0 + ys / 42.0))
    yl = y[~small]
    out[~small] = np.sinh(yl) / yl
    return out


def sinh_kernel(f, params: ThermalParams):
    """``beta sinh(beta f / 2) / f``, equal to ``beta**2 / 2`` at ``f = 0``.

    Even in ``f`` and bounded below by ``beta**2 / 2``.
    """
    b = params.beta
    out = 0.5 * b * b * _sinhc(0.5 * b * np.asarray(f, dtype=float))
    return out if out.ndim else float(out)


def taylor_crossover(params: ThermalParams):
    """Frequency below which :func:`sinh_kernel` uses its Taylor branch."""
    return _SINHC_EPS * 2.0 / params.beta


def simplex_exp_integrals(a, params: ThermalParams):
    """Closed forms of the one- and two-variable imaginary-time integrals.

    Returns ``(single, double_symmetric)`` where::

        single           = int_0^beta exp(-u a + beta a / 2) du = 2 sinh(beta a / 2) / a
        double_symmetric = beta sinh(beta a / 2) / a

    The antisymmetric remainder of the ordered double integral cancels once
    the shell partitions are symmetrized and is not returned.
    """
    k = sinh_kernel(a, params)
    return 2.0 * k / params.beta, k


def single_line_density(nu, profile, params: ThermalParams):
    """On-shell spectral density of one propagator line.

    ``rho(nu) = (2 pi)^-3 4 pi k exp(-beta|nu|/2) / (2 (1 - exp(-beta|nu|))) g(k)^2``
    with ``k = sqrt(nu^2 - m^2)``; zero inside the gap ``|nu| < m``. The
    measure ``d^3p / (2w)`` of one shell becomes ``2 pi k dnu`` after the
    radial substitution, and both shells contribute, so ``rho`` is even.

    Parameters
    ----------
    nu : array_like
        Signed frequencies.
    profile : callable
        Real radial momentum profile ``g(k)``.
    params : ThermalParams
    """
    nu = np.asarray(nu, dtype=float)
    a = np.abs(nu)
    out = np.zeros_like(a)
    on = a > params.mass
    w = a[on]
    k = np.sqrt((w - params.mass) * (w + params.mass))
    g = np.asarray(profile(k), dtype=float)
    b = params.beta
    out[on] = INV_TWO_PI_CUBED * FOUR_PI * k * np.exp(-0.5 * b * w) / (2.0 * -np.expm1(-b * w)) * g * g
    return out if out.ndim else float(out)
