"""Truncated power series in the coupling and numerical Taylor coefficients."""
from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import chebyshev as C

from .errors import DomainError


class FormalSeries:
    """Truncated series ``sum_{k<=order} coeffs[k] * lam**k``.

    Coefficients may be scalars or square matrices; products of matrix
    series keep the factor order. Every operation truncates at the smaller
    order of its operands, so coefficient ``k`` of a result depends only on
    coefficients ``<= k`` of the inputs.
    """

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs, order=None):
        coeffs = [np.asarray(c) if np.ndim(c) else c for c in coeffs]
        if not coeffs:
            raise DomainError("a series needs at least one coefficient")
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise DomainError("series order must be nonnegative")
        zero = coeffs[0] * 0
        coeffs = list(coeffs[: order + 1]) + [zero] * (order + 1 - len(coeffs))
        self.coeffs = coeffs
        self.order = int(order)

    def __len__(self):
        return self.order + 1

    def __getitem__(self, k):
        return self.coeffs[k]

    def __repr__(self):
        return f"FormalSeries(order={self.order}, coeffs={self.coeffs!r})"

    def _coerce(self, other):
        if isinstance(other, FormalSeries):
            return other
        return FormalSeries([other], self.order)

    def __add__(self, other):
        other = self._coerce(other)
        n = min(self.order, other.order)
        return FormalSeries([self.coeffs[k] + other.coeffs[k] for k in range(n + 1)], n)

    __radd__ = __add__

    def __neg__(self):
        return FormalSeries([-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, FormalSeries):
            return FormalSeries([c * other for c in self.coeffs], self.order)
        n = min(self.order, other.order)
        out = []
        for k in range(n + 1):
            acc = _prod(self.coeffs[0], other.coeffs[k])
            for j in range(1, k + 1):
                acc = acc + _prod(self.coeffs[j], other.coeffs[k - j])
            out.append(acc)
        return FormalSeries(out, n)

    def __rmul__(self, other):
        return FormalSeries([other * c for c in self.coeffs], self.order)

    def __call__(self, lam):
        """Evaluate the truncated polynomial at ``lam`` (Horner)."""
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * lam + c
        return acc

    def exp(self):
        """``exp`` of a scalar series via ``b_n = (1/n) sum_k k a_k b_{n-k}``."""
        self._require_scalar("exp")
        a = self.coeffs
        b = [math.exp(a[0])]
        for n in range(1, self.order + 1):
            b.append(sum(k * a[k] * b[n - k] for k in range(1, n + 1)) / n)
        return FormalSeries(b, self.order)

    def log(self):
        """``log`` of a scalar series with positive constant term."""
        self._require_scalar("log")
        a = self.coeffs
        if not a[0] > 0:
            raise DomainError("log needs a positive constant term")
        b = [math.log(a[0])]
        for n in range(1, self.order + 1):
            s = sum(k * b[k] * a[n - k] for k in range(1, n))
            b.append((a[n] - s / n) / a[0])
        return FormalSeries(b, self.order)

    def _require_scalar(self, what):
        if any(np.ndim(c) for c in self.coeffs):
            raise DomainError(f"{what} is implemented for scalar series only")

    def truncation_error(self, exact, lam):
        """Norm of ``exact - self(lam)``."""
        return float(np.linalg.norm(np.asarray(exact) - np.asarray(self(lam))))


def _prod(a, b):
    if np.ndim(a) == 2 and np.ndim(b) == 2:
        return a @ b
    return a * b


def taylor_coefficients(fn, order, radius=0.25, nodes=14):
    """Taylor coefficients at 0 of an analytic ``fn(lam)`` up to ``order``.

    ``fn`` is sampled at Chebyshev points of ``[-radius, radius]`` and the
    interpolant is converted to monomial form. For entire functions of
    moderate growth the interpolation error is negligible at this node
    count and rounding dominates, roughly ``eps * max|fn| / radius**k``
    for the ``k``-th coefficient; the monomial conversion amplifies it
    quickly once ``nodes`` exceeds about 20. ``fn`` may return arrays; coefficients then have
    the same shape.
    """
    if order >= nodes:
        raise DomainError("need more interpolation nodes than the requested order")
    x = np.cos(np.pi * (np.arange(nodes) + 0.5) / nodes)
    vals = [np.asarray(fn(radius * xi)) for xi in x]
    shape = vals[0].shape
    Y = np.stack([v.reshape(-1) for v in vals])  # (nodes, n_entries)
    cheb = C.chebfit(x, Y, nodes - 1)
    out = []
    mono = np.stack([C.cheb2poly(cheb[:, j]) for j in range(Y.shape[1])], axis=1)
    for k in range(order + 1):
        c = mono[k] / radius**k
        out.append(c.reshape(shape) if shape else c[0])
    return out


def richardson_derivative(fn, order, h=1e-3):
    """``d^k fn / d lam^k`` at 0 for ``k`` in 1, 2 by Richardson-extrapolated central differences.

    Uses samples at ``+-h`` and ``+-2h``; accurate to about ``eps / h**k``,
    so it is meant for low orders only.
    """
    f = {j: np.asarray(fn(j * h)) for j in (-2, -1, 0, 1, 2)}
    if order == 1:
        d1 = (f[1] - f[-1]) / (2 * h)
        d2 = (f[2] - f[-2]) / (4 * h)
        return (4 * d1 - d2) / 3
    if order == 2:
        d1 = (f[1] - 2 * f[0] + f[-1]) / h**2
        d2 = (f[2] - 2 * f[0] + f[-2]) / (4 * h**2)
        return (4 * d1 - d2) / 3
    raise DomainError("central differences are provided for orders 1 and 2")
