"""Second-order relative entropy, Duhamel pairing and entropy production.

Every quantity is a sum over orders ``l`` of ``(1/l!)`` times a 1-dimensional
integral against the convolved line density ``mu_l``; see :mod:`.spectral`.
With ``kernel(f) = beta sinh(beta f / 2) / f``:

* static part   ``sum (1/l!) (c1 - c3)_l**2 int mu_l kernel``
* dynamic part  ``sum (1/l!) 2 (c1 - c2)_l (c3 - c2)_l int mu_l kernel (1 - cos f t)``
* production    ``sum (1/l!) 2 c1_l c3_l int mu_l kernel f sin(f t)``  (``K2 = 0``)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

from . import _backend
from .errors import ConfigurationError, DomainError
from .functionals import check_compatible, combine
from .spectral import GridSpec, density_stack
from .thermal import FOUR_PI, INV_TWO_PI_CUBED, ThermalParams, boltzmann_weight, sinh_kernel

BALANCE_QUAD_TOL = 1e-11


@dataclass(frozen=True)
class EntropyReport:
    t: float
    static_part: float
    dynamic_part: float
    total: float
    per_order: tuple = field(default=())

    def as_row(self):
        return [self.t, self.static_part, self.dynamic_part, self.total, *self.per_order]


def _measures(funcs, params, grid):
    profile, order = check_compatible(*funcs)
    return density_stack(profile, params, order, grid)


def _inv_fact(l):
    return 1.0 / math.factorial(l)


def _static_terms(ms, b):
    return [_inv_fact(m.order) * b[i] ** 2 * float(np.sum(m.kernel_w)) for i, m in enumerate(ms)]


def _dynamic_terms(ms, coef, t):
    kern = _backend.get_backend()
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = []
    for i, m in enumerate(ms):
        if coef[i] == 0.0:
            out.append(np.zeros_like(t_arr))
            continue
        out.append(_inv_fact(m.order) * coef[i] * kern.trig_moments(m.f, m.kernel_w, t_arr, 0))
    return out


def rel_entropy_static(K1, K3, params: ThermalParams, grid: GridSpec = GridSpec()):
    """t-independent part: ``sum_l (1/l!) (c1 - c3)_l**2 int mu_l kernel``; nonnegative."""
    ms = _measures((K1, K3), params, grid)
    b = [c1 - c3 for c1, c3 in zip(K1.coeffs, K3.coeffs)]
    return math.fsum(_static_terms(ms, b))


def duhamel_pairing(A, B, params: ThermalParams, grid: GridSpec = GridSpec(), n_u=None):
    """Duhamel pairing ``(A|B) = (1/beta) int_0^beta C(u) du`` of two real generators.

    ``C(u) = sum_l (1/l!) a_l b_l int mu_l(f) exp(-f (u - beta/2)) df`` is the
    imaginary-time connected two-point function. The ``u`` integral is done
    by Gauss-Legendre quadrature, independently of the closed form used by
    :func:`rel_entropy_static`, so that ``(beta**2 / 2) (K1 - K3 | K1 - K3)``
    cross-checks the static part.

    Parameters
    ----------
    n_u : int, optional
        Number of Gauss-Legendre nodes; by default enough to resolve the
        largest exponent ``beta * max|f| / 2`` on the grid.
    """
    ms = _measures((A, B), params, grid)
    beta = params.beta
    coef = [a * b for a, b in zip(A.coeffs, B.coeffs)]
    if all(c == 0.0 for c in coef):
        return 0.0
    fmax = max(float(np.max(np.abs(m.f))) for m in ms if m.f.size)
    if n_u is None:
        n_u = int(beta * fmax / 2.0) + 64
    x, wx = roots_legendre(n_u)
    u = 0.5 * beta * (x + 1.0)
    wu = 0.5 * beta * wx
    total = 0.0
    for i, m in enumerate(ms):
        if coef[i] == 0.0:
            continue
        c_u = np.exp(-np.outer(u - 0.5 * beta, m.f)) @ m.w
        total += _inv_fact(m.order) * coef[i] * float(wu @ c_u)
    return total / beta


def rel_entropy_static_duhamel(K1, K3, params, grid: GridSpec = GridSpec()):
    """Static part by the Duhamel route ``(beta**2 / 2) (K1 - K3 | K1 - K3)``."""
    d = K1 - K3
    return 0.5 * params.beta**2 * duhamel_pairing(d, d, params, grid)


def rel_entropy_dynamic(K1, K2, K3, t, params: ThermalParams, grid: GridSpec = GridSpec()):
    """Time-dependent part ``sum_l (1/l!) 2 (c1-c2)_l (c3-c2)_l int mu_l kernel (1 - cos f t)``.

    Vectorized over ``t``; returns exactly 0 at ``t = 0``. The value can be
    negative when ``(c1 - c2)(c3 - c2) < 0``.
    """
    ms = _measures((K1, K2, K3), params, grid)
    coef = [2.0 * (c1 - c2) * (c3 - c2) for c1, c2, c3 in zip(K1.coeffs, K2.coeffs, K3.coeffs)]
    res = np.sum(_dynamic_terms(ms, coef, t), axis=0)
    return float(res[0]) if np.ndim(t) == 0 else res


def antisymmetric_part(c1, c2, c3, t, profile, params, grid: GridSpec = GridSpec()):
    """Imaginary-coefficient term that the symmetrization of the dynamic part leaves over.

    For complex coefficient arrays the sum over both orderings of the two
    vertices leaves ``sum_l (1/l!) 2 Im[conj(c1-c2)_l (c3-c2)_l] int mu_l kernel sin(f t)``.
    Real coefficients make the prefactor, and hence the result, exactly 0.
    This is a debug aid; the public routines accept real coefficients only.
    """
    c1, c2, c3 = (np.asarray(c, dtype=complex) for c in (c1, c2, c3))
    if not c1.shape == c2.shape == c3.shape:
        raise ConfigurationError("coefficient arrays must have equal length")
    ms = density_stack(profile, params, len(c1), grid)
    pref = 2.0 * np.imag(np.conj(c1 - c2) * (c3 - c2))
    kern = _backend.get_backend()
    total = 0.0
    for i, m in enumerate(ms):
        if pref[i] == 0.0:
            continue
        total += _inv_fact(m.order) * pref[i] * float(kern.trig_moments(m.f, m.kernel_w, np.array([t]), 1)[0])
    return total


def rel_entropy_total(K1, K2, K3, t, params: ThermalParams, grid: GridSpec = GridSpec()):
    """Static plus dynamic part at one time, with per-order totals.

    ``total`` is literally ``static_part + dynamic_part``.
    """
    ms = _measures((K1, K2, K3), params, grid)
    b = [c1 - c3 for c1, c3 in zip(K1.coeffs, K3.coeffs)]
    coef = [2.0 * (c1 - c2) * (c3 - c2) for c1, c2, c3 in zip(K1.coeffs, K2.coeffs, K3.coeffs)]
    st = _static_terms(ms, b)
    dy = [float(d[0]) for d in _dynamic_terms(ms, coef, float(t))]
    static = math.fsum(st)
    dynamic = math.fsum(dy)
    return EntropyReport(float(t), static, dynamic, static + dynamic,
                         tuple(s + d for s, d in zip(st, dy)))


def rel_entropy_series(K1, K2, K3, t_values, params, grid: GridSpec = GridSpec()):
    """:func:`rel_entropy_total` over an array of times, sharing one convolution pass."""
    ms = _measures((K1, K2, K3), params, grid)
    t_arr = np.asarray(t_values, dtype=float)
    b = [c1 - c3 for c1, c3 in zip(K1.coeffs, K3.coeffs)]
    coef = [2.0 * (c1 - c2) * (c3 - c2) for c1, c2, c3 in zip(K1.coeffs, K2.coeffs, K3.coeffs)]
    st = _static_terms(ms, b)
    dy = _dynamic_terms(ms, coef, t_arr)
    static = math.fsum(st)
    out = []
    for j, t in enumerate(t_arr):
        d = [float(x[j]) for x in dy]
        dynamic = math.fsum(d)
        out.append(EntropyReport(float(t), static, dynamic, static + dynamic,
                                 tuple(s + x for s, x in zip(st, d))))
    return out


def f_form_total(K1, K2, K3, t, params: ThermalParams, grid: GridSpec = GridSpec()):
    """Total relative entropy from the squared modulus of ``F``.

    ``sum_l (1/l!) int mu_l kernel [sin(ft/2)**2 a_l**2 + cos(ft/2)**2 b_l**2]``,
    manifestly a sum of nonnegative terms.
    """
    ms = _measures((K1, K2, K3), params, grid)
    fc = combine(K1, K2, K3)
    total = 0.0
    for i, m in enumerate(ms):
        half = 0.5 * m.f * t
        s2 = np.sin(half) ** 2
        c2 = np.cos(half) ** 2
        total += _inv_fact(m.order) * float(m.kernel_w @ (s2 * fc.a[i] ** 2 + c2 * fc.b[i] ** 2))
    return total


def entropy_production(K1, K3, t, params: ThermalParams, grid: GridSpec = GridSpec()):
    """Time derivative of the relative entropy with ``K2 = 0``.

    ``sum_l (1/l!) 2 c1_l c3_l int mu_l beta sinh(beta f / 2) sin(f t) df``,
    the differentiated dynamic integrand. Vectorized over ``t``.
    """
    ms = _measures((K1, K3), params, grid)
    kern = _backend.get_backend()
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    res = np.zeros_like(t_arr)
    for i, m in enumerate(ms):
        coef = 2.0 * K1.coeffs[i] * K3.coeffs[i]
        if coef == 0.0:
            continue
        res += _inv_fact(m.order) * coef * kern.trig_moments(m.f, m.kernel_w * m.f, t_arr, 1)
    return float(res[0]) if np.ndim(t) == 0 else res


def entropy_balance_residual(K1, K3, t, params: ThermalParams, grid: GridSpec = GridSpec()):
    """``|S(t) - S(0) - int_0^t E(s) ds|`` with ``K2 = 0``.

    ``S`` comes from :func:`rel_entropy_total`; the time integral of
    :func:`entropy_production` is done by adaptive Gauss-Kronrod quadrature.
    """
    t = float(t)
    if t == 0.0:
        return 0.0
    K2 = K1.zero(K1.order, K1.profile)
    s_t = rel_entropy_total(K1, K2, K3, t, params, grid).total
    s_0 = rel_entropy_total(K1, K2, K3, 0.0, params, grid).total
    ms = _measures((K1, K3), params, grid)
    fmax = max(float(np.max(np.abs(m.f))) for m in ms if m.f.size)
    limit = max(200, int(4 * fmax * abs(t)))
    val, _ = integrate.quad(lambda s: entropy_production(K1, K3, s, params, grid), 0.0, t,
                            epsabs=BALANCE_QUAD_TOL, epsrel=BALANCE_QUAD_TOL, limit=limit)
    return abs(s_t - s_0 - val)


def rel_entropy_static_tensor(c1, c3, profile1, profile3, params: ThermalParams, n_k=96):
    """Static part with independent profiles by direct momentum quadrature (orders 1 and 2).

    Each generator's order-``l`` kernel is ``c_l prod_j g(|p_j|)`` with its own
    profile ``g``. The integrand depends on momenta only through ``|p_j|``, so
    the ``3l``-dimensional integral becomes an ``l``-dimensional radial
    Gauss-Legendre product rule, summed over the ``2**l`` shell signs.
    """
    c1 = tuple(float(x) for x in c1)
    c3 = tuple(float(x) for x in c3)
    if len(c1) != len(c3):
        raise ConfigurationError("coefficient lists must have equal length")
    if len(c1) > 2:
        from .errors import UnsupportedOrderError
        raise UnsupportedOrderError("tensor-grid static part is implemented for orders 1 and 2")
    kmax = max(profile1.decay_radius(), profile3.decay_radius())
    x, wx = roots_legendre(n_k)
    k = 0.5 * kmax * (x + 1.0)
    wk = 0.5 * kmax * wx
    w = np.sqrt(k * k + params.mass**2)
    # radial measure (2 pi)^-3 4 pi k^2 dk times the per-line thermal weight
    line = INV_TWO_PI_CUBED * FOUR_PI * k * k * wk * boltzmann_weight(w, params)
    g1, g3 = profile1(k), profile3(k)
    total = 0.0
    if len(c1) >= 1:
        amp = (c1[0] * g1 - c3[0] * g3) ** 2
        total += float(np.sum(line * amp * 2.0 * sinh_kernel(w, params)))
    if len(c1) == 2:
        amp = (c1[1] * np.outer(g1, g1) - c3[1] * np.outer(g3, g3)) ** 2
        ker = 2.0 * sinh_kernel(w[:, None] + w[None, :], params) + 2.0 * sinh_kernel(w[:, None] - w[None, :], params)
        total += 0.5 * float(line @ (amp * ker) @ line)
    return total


def check_time(t):
    if not math.isfinite(t):
        raise DomainError(f"time must be finite, got {t!r}")
    return float(t)
