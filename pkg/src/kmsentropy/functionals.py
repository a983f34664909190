"""Shared-profile representation of the cocycle generators.

A generator is stored as per-order real coefficients ``c_l`` (``l = 1..L``)
and one radial Gaussian momentum profile ``g``, so that its order-``l``
kernel factorizes as ``c_l * prod_j g(|p_j|)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

MAX_ORDER = 3


@dataclass(frozen=True)
class GaussianProfile:
    """Radial momentum profile ``amplitude * exp(-k**2 / (2 width**2))``."""

    amplitude: float = 1.0
    width: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.amplitude):
            raise DomainError("profile amplitude must be finite")
        if not (math.isfinite(self.width) and self.width > 0):
            raise DomainError(f"profile width must be positive, got {self.width!r}")

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        return self.amplitude * np.exp(-0.5 * (k / self.width) ** 2)

    def decay_radius(self, digits=40.0):
        """Momentum beyond which ``g(k)**2`` has dropped by ``exp(-digits)``."""
        return self.width * math.sqrt(digits)


@dataclass(frozen=True)
class SharedProfileFunctional:
    """Generator with per-order coefficients ``coeffs[l-1]`` and a shared profile.

    Coefficients are real by construction, which is the formal
    self-adjointness of the generator in this representation.
    """

    coeffs: tuple
    profile: GaussianProfile = GaussianProfile()

    def __post_init__(self):
        c = tuple(float(x) for x in np.atleast_1d(np.asarray(self.coeffs, dtype=float)))
        if not 1 <= len(c) <= MAX_ORDER:
            raise ConfigurationError(f"number of orders must be in [1, {MAX_ORDER}], got {len(c)}")
        if not all(math.isfinite(x) for x in c):
            raise DomainError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self):
        return len(self.coeffs)

    @classmethod
    def zero(cls, order=1, profile=GaussianProfile()):
        return cls((0.0,) * order, profile)

    def scaled(self, s):
        return SharedProfileFunctional(tuple(s * c for c in self.coeffs), self.profile)

    def with_coeffs(self, coeffs):
        return SharedProfileFunctional(tuple(coeffs), self.profile)

    def __sub__(self, other):
        _check_compatible(self, other)
        return self.with_coeffs(a - b for a, b in zip(self.coeffs, other.coeffs))

    def __add__(self, other):
        _check_compatible(self, other)
        return self.with_coeffs(a + b for a, b in zip(self.coeffs, other.coeffs))

    def is_zero(self):
        return all(c == 0.0 for c in self.coeffs) or self.profile.amplitude == 0.0


@dataclass(frozen=True)
class FCoefficients:
    """Per-order coefficients of ``F = sin(ft/2) a + i cos(ft/2) b``."""

    a: tuple
    b: tuple

    @property
    def order(self):
        return len(self.a)


def _check_compatible(*funcs):
    first = funcs[0]
    for f in funcs[1:]:
        if f.profile != first.profile:
            raise ConfigurationError("functionals must share the same momentum profile")
        if f.order != first.order:
            raise ConfigurationError(
                f"functionals must have the same number of orders ({first.order} vs {f.order})")


def check_compatible(*funcs):
    """Raise ``ConfigurationError`` unless all functionals share profile and order."""
    _check_compatible(*funcs)
    return funcs[0].profile, funcs[0].order


def combine(K1, K2, K3):
    """Coefficients ``a_l = c1 + c3 - 2 c2`` and ``b_l = c1 - c3``.

    Examples
    --------
    >>> p = GaussianProfile()
    >>> fc = combine(SharedProfileFunctional((1, 0), p), SharedProfileFunctional((0, 0), p),
    ...              SharedProfileFunctional((0, 1), p))
    >>> fc.a, fc.b
    ((1.0, 1.0), (1.0, -1.0))
    """
    _check_compatible(K1, K2, K3)
    a = tuple(c1 + c3 - 2.0 * c2 for c1, c2, c3 in zip(K1.coeffs, K2.coeffs, K3.coeffs))
    b = tuple(c1 - c3 for c1, c3 in zip(K1.coeffs, K3.coeffs))
    return FCoefficients(a, b)


def validate_self_adjoint(K):
    """True iff all coefficients and the profile are real.

    The representation only admits real values, so this asserts the
    invariant rather than testing a property that can fail.
    """
    vals = np.asarray(K.coeffs)
    probe = np.asarray(K.profile(np.linspace(0.0, 4.0 * K.profile.width, 9)))
    return bool(np.isrealobj(vals) and np.isrealobj(probe)
                and np.all(np.isfinite(vals)) and np.all(np.isfinite(probe)))
