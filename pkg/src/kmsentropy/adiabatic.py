"""Spatial cutoffs, per-unit-volume relative entropy and ergodic-mean entropy production.

In finite volume the order-``l`` generator kernel carries a vertex factor
``h_hat(p_1 + ... + p_l)``. Densitizing by ``I(h)`` and removing the cutoff
turns ``|h_hat(q)|**2 / I(h)`` into ``(2 pi)**3 delta(q)``; the *density
mode* functions below evaluate that limit in closed form, and
:func:`vanhove_density_series` checks it at order 1 along a cutoff sequence.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

from . import _backend
from .errors import ConfigurationError, ConvergenceError, DomainError, UnsupportedOrderError
from .functionals import check_compatible, combine
from .thermal import FOUR_PI, INV_TWO_PI_CUBED, ThermalParams, boltzmann_weight, sinh_kernel

_GL_NODES = 16


def smoothstep_ramp(x):
    """Quintic ramp ``1 - (10x^3 - 15x^4 + 6x^5)``: 1 at 0, 0 at 1, C2 at both ends."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return 1.0 - x**3 * (10.0 + x * (-15.0 + 6.0 * x))


def sharp_ramp(x):
    """Degenerate ramp that is identically 0; the cutoff becomes the indicator of the ball."""
    return np.zeros_like(np.asarray(x, dtype=float))


RAMPS = {"smoothstep": smoothstep_ramp, "sharp": sharp_ramp}


@dataclass(frozen=True)
class VanHoveCutoff:
    """Radial cutoff equal to 1 for ``|x| < n``, ``ramp(|x| - n)`` on the shell, 0 beyond ``n + 1``."""

    n: int
    ramp: object = "smoothstep"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"cutoff radius must be a positive integer, got {self.n!r}")
        if isinstance(self.ramp, str) and self.ramp not in RAMPS:
            raise ConfigurationError(f"unknown ramp {self.ramp!r}; choose from {sorted(RAMPS)}")

    @property
    def ramp_fn(self):
        return RAMPS[self.ramp] if isinstance(self.ramp, str) else self.ramp

    @property
    def is_sharp(self):
        return self.ramp == "sharp"

    def __call__(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        return np.where(r < self.n, 1.0, self.ramp_fn(np.clip(r - self.n, 0.0, 1.0)))

    def radial_nodes(self, panel=0.25):
        """Composite Gauss-Legendre nodes on ``[0, n + 1]`` with a panel edge at ``n``.

        Returns radii, weights and cutoff values.
        """
        top = self.n if self.is_sharp else self.n + 1
        n_pan = max(1, int(math.ceil(top / panel)))
        edges = np.linspace(0.0, top, n_pan + 1)
        if not self.is_sharp:
            edges = np.union1d(edges, [float(self.n)])
        r, w = _composite_gl(edges)
        return r, w, self(r)


def _composite_gl(edges, nodes=_GL_NODES):
    x, wx = roots_legendre(nodes)
    a, b = edges[:-1, None], edges[1:, None]
    r = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    w = (0.5 * (b - a) * wx).ravel()
    return r, w


def cutoff_volume(h: VanHoveCutoff, panel=0.25):
    """``I(h) = 4 pi int_0^{n+1} r^2 h(r) dr``."""
    r, w, hv = h.radial_nodes(panel)
    return float(FOUR_PI * np.sum(w * r * r * hv))


def cutoff_fourier(h: VanHoveCutoff, q, panel=None):
    """Radial Fourier transform ``4 pi int r^2 h(r) sin(q r)/(q r) dr``; equals ``I(h)`` at 0."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any(q < 0):
        raise DomainError("Fourier argument must be nonnegative")
    if panel is None:
        # keep at most ~one oscillation of sin(q r) per panel
        panel = min(0.25, 2.0 * math.pi / max(float(np.max(q)), 1e-12))
    r, w, hv = h.radial_nodes(panel)
    return _backend.get_backend().radial_sine_transform(q, r, FOUR_PI * w * r * r * hv)


def cutoff_fourier_sq(h: VanHoveCutoff, q):
    """``|h_hat(q)|**2``, nonnegative; scalar in, scalar out."""
    val = cutoff_fourier(h, q) ** 2
    return float(val[0]) if np.ndim(q) == 0 else val


def ball_fourier(R, q):
    """Closed-form transform of the indicator of the ball of radius ``R``."""
    q = np.asarray(q, dtype=float)
    qr = q * R
    with np.errstate(invalid="ignore", divide="ignore"):
        val = FOUR_PI * (np.sin(qr) - qr * np.cos(qr)) / q**3
    return np.where(q == 0, FOUR_PI * R**3 / 3.0, val)


# ---------------------------------------------------------------- density mode


@dataclass(frozen=True)
class DensityParts:
    static: float
    dynamic: float

    @property
    def total(self):
        return self.static + self.dynamic


def _density_inputs(funcs, params):
    profile, order = check_compatible(*funcs)
    if order > 2:
        raise UnsupportedOrderError("density mode is implemented for orders 1 and 2")
    return profile, order


def _pair_nodes(profile, params, t_max, refine=1):
    """Radial nodes for the order-2 integral, dense enough for ``cos(2 w t)`` up to ``t_max``."""
    kmax = profile.width * math.sqrt(0.5 * 40.0)  # g**4 decays by exp(-40)
    w_top = math.sqrt(kmax**2 + params.mass**2)
    n_osc = abs(t_max) * (w_top - params.mass) / math.pi
    n_pan = refine * max(16, int(math.ceil(2.0 * n_osc)))
    k, wk = _composite_gl(np.linspace(0.0, kmax, n_pan + 1))
    w = np.sqrt(k * k + params.mass**2)
    # (1/2!) (2 pi)^-3 4 pi k^2 dk weight(w)^2 g(k)^4
    line = 0.5 * INV_TWO_PI_CUBED * FOUR_PI * k * k * wk * boltzmann_weight(w, params) ** 2 * profile(k) ** 4
    return w, line


def _order1_scale(profile, params):
    """``2 weight(m) g(0)**2 kernel(m)``: both shells at zero momentum."""
    m = params.mass
    return 2.0 * boltzmann_weight(m, params) * float(profile(0.0)) ** 2 * sinh_kernel(m, params)


def rel_entropy_density_parts(K1, K2, K3, t, params: ThermalParams, refine=1):
    """Static and dynamic per-unit-volume parts in density mode.

    Order 1 sits at zero momentum with ``f = +-m``. Order 2 reduces to a radial
    integral over ``p_2 = -p_1`` with ``f`` in ``{2w, -2w, 0, 0}``; the
    ``f = 0`` pair contributes only to the static part. ``refine`` multiplies
    the number of radial panels.
    """
    _, order = _density_inputs((K1, K2, K3), params)
    profile = K1.profile
    t = float(t)
    b = [c1 - c3 for c1, c3 in zip(K1.coeffs, K3.coeffs)]
    coef = [2.0 * (c1 - c2) * (c3 - c2) for c1, c2, c3 in zip(K1.coeffs, K2.coeffs, K3.coeffs)]
    one = _order1_scale(profile, params)
    static = one * b[0] ** 2
    dynamic = one * coef[0] * 2.0 * math.sin(0.5 * params.mass * t) ** 2
    if order == 2:
        w, line = _pair_nodes(profile, params, t, refine)
        k2w = sinh_kernel(2.0 * w, params)
        k0 = sinh_kernel(0.0, params)
        static += b[1] ** 2 * float(np.sum(line * (2.0 * k2w + 2.0 * k0)))
        dynamic += coef[1] * float(np.sum(line * 2.0 * k2w * 2.0 * np.sin(w * t) ** 2))
    return DensityParts(static, dynamic)


def rel_entropy_density(K1, K2, K3, t, params: ThermalParams):
    """Second-order relative entropy per unit volume in the adiabatic limit."""
    return rel_entropy_density_parts(K1, K2, K3, t, params).total


def dynamic_density(K1, K3, t, params: ThermalParams):
    """Dynamic density with ``K2 = 0``, vectorized over ``t``."""
    _, order = _density_inputs((K1, K3), params)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    coef = [2.0 * c1 * c3 for c1, c3 in zip(K1.coeffs, K3.coeffs)]
    out = _order1_scale(K1.profile, params) * coef[0] * 2.0 * np.sin(0.5 * params.mass * t_arr) ** 2
    if order == 2 and coef[1] != 0.0:
        w, line = _pair_nodes(K1.profile, params, float(np.max(np.abs(t_arr))))
        kern = _backend.get_backend()
        # 1 - cos(2 w t) against weights line * 2 kernel(2w)
        out = out + coef[1] * kern.trig_moments(2.0 * w, line * 2.0 * sinh_kernel(2.0 * w, params), t_arr, 0)
    return float(out[0]) if np.ndim(t) == 0 else out


def production_density(K1, K3, t, params: ThermalParams):
    """Entropy production per unit volume, the time derivative of :func:`dynamic_density`."""
    _, order = _density_inputs((K1, K3), params)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    coef = [2.0 * c1 * c3 for c1, c3 in zip(K1.coeffs, K3.coeffs)]
    m = params.mass
    out = _order1_scale(K1.profile, params) * coef[0] * m * np.sin(m * t_arr)
    if order == 2 and coef[1] != 0.0:
        w, line = _pair_nodes(K1.profile, params, float(np.max(np.abs(t_arr))))
        kern = _backend.get_backend()
        out = out + coef[1] * kern.trig_moments(2.0 * w, line * 2.0 * sinh_kernel(2.0 * w, params) * 2.0 * w, t_arr, 1)
    return float(out[0]) if np.ndim(t) == 0 else out


def dynamic_density_bound(K1, K3, params: ThermalParams):
    """Uniform-in-time bound on ``|dynamic_density|``: the integral with ``1 - cos`` replaced by 2."""
    _, order = _density_inputs((K1, K3), params)
    coef = [abs(2.0 * c1 * c3) for c1, c3 in zip(K1.coeffs, K3.coeffs)]
    bound = _order1_scale(K1.profile, params) * coef[0] * 2.0
    if order == 2:
        w, line = _pair_nodes(K1.profile, params, 0.0)
        bound += coef[1] * float(np.sum(line * 2.0 * sinh_kernel(2.0 * w, params))) * 2.0
    return bound


def ness_entropy_production_density(K1, K3, t, params: ThermalParams):
    """Ergodic-mean entropy production per unit volume ``e(t) = (D(t) - D(0)) / t``.

    ``D`` is the dynamic density with ``K2 = 0``; the form follows from the
    balance between relative entropy and the time integral of its
    production. Vectorized over ``t > 0``.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(~np.isfinite(t_arr)) or np.any(t_arr <= 0):
        raise DomainError("the ergodic mean needs t > 0")
    # D(0) = 0 exactly
    e = dynamic_density(K1, K3, t_arr, params) / t_arr
    return float(e[0]) if np.ndim(t) == 0 else e


def ness_direct(K1, K3, t, params: ThermalParams):
    """``(1/t) int_0^t production_density(s) ds`` by adaptive quadrature (cross-check)."""
    t = float(t)
    if not t > 0:
        raise DomainError("the ergodic mean needs t > 0")
    limit = max(200, int(20 * t))
    with warnings.catch_warnings():
        # roundoff warnings near the requested tolerance are expected for long windows
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(lambda s: production_density(K1, K3, s, params), 0.0, t,
                                epsabs=1e-14, epsrel=1e-10, limit=limit)
    return val / t


def loglog_slope(t, y):
    """Least-squares slope, intercept and rms residual of ``log|y|`` against ``log t``."""
    x = np.log(np.asarray(t, dtype=float))
    z = np.log(np.abs(np.asarray(y, dtype=float)))
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, z, rcond=None)
    resid = float(np.sqrt(np.mean((A @ [slope, icpt] - z) ** 2)))
    return float(slope), float(icpt), resid


# ------------------------------------------------------------ van Hove series


@dataclass(frozen=True)
class DensityReport:
    n_values: tuple
    I_values: tuple
    densities: tuple
    limit_estimate: float
    density_mode_value: float

    @property
    def gaps(self):
        d = self.density_mode_value
        scale = abs(d) if d != 0 else 1.0
        return tuple(abs(x - d) / scale for x in self.densities)


def finite_volume_rel_entropy(K1, K2, K3, t, h: VanHoveCutoff, params: ThermalParams):
    """Order-1 relative entropy ``S(h)`` with the vertex factor ``|h_hat(p)|**2``.

    ``(2 pi)^-3 4 pi int p^2 G(p) |h_hat(p)|^2 dp`` where ``G`` collects the
    thermal weight, the profile and the ``F`` kernel summed over both shells.
    """
    profile, order = check_compatible(K1, K2, K3)
    if order != 1:
        raise UnsupportedOrderError("the finite-volume series is implemented at order 1")
    fc = combine(K1, K2, K3)
    a, b = fc.a[0], fc.b[0]
    if a == 0.0 and b == 0.0:
        return 0.0
    t = float(t)
    pmax = profile.decay_radius()
    # panels resolve both the 1/(n+1) peak of |h_hat|^2 and the time oscillation
    width = min(1.0 / (h.n + 1), math.pi / max(abs(t), 1e-12))
    p, wp = _composite_gl(np.linspace(0.0, pmax, int(math.ceil(pmax / width)) + 1))
    w = np.sqrt(p * p + params.mass**2)
    G = boltzmann_weight(w, params) * profile(p) ** 2 * 2.0 * sinh_kernel(w, params) * (
        np.sin(0.5 * w * t) ** 2 * a * a + np.cos(0.5 * w * t) ** 2 * b * b)
    hq = cutoff_fourier(h, p)
    return float(INV_TWO_PI_CUBED * FOUR_PI * np.sum(wp * p * p * G * hq * hq))


def vanhove_density_series(K1, K2, K3, t, n_max, params: ThermalParams, ramp="smoothstep"):
    """``S(h_n) / I(h_n)`` for ``n = 1..n_max`` next to the density-mode value.

    ``limit_estimate`` extrapolates the sequence with a fit
    ``d_inf + a/n + b/n**2`` over ``n >= 3``. Raises ``ConvergenceError``
    when the gap to the density-mode value grows three times in a row for
    ``n >= 3``.
    """
    if int(n_max) != n_max or n_max < 1:
        raise DomainError("n_max must be a positive integer")
    target = rel_entropy_density(K1, K2, K3, t, params)
    ns, Is, ds = [], [], []
    for n in range(1, int(n_max) + 1):
        h = VanHoveCutoff(n, ramp)
        I = cutoff_volume(h)
        ns.append(n)
        Is.append(I)
        ds.append(finite_volume_rel_entropy(K1, K2, K3, t, h, params) / I)
    scale = abs(target) if target != 0 else 1.0
    gaps = [abs(d - target) / scale for d in ds]
    grow = 0
    for i in range(1, len(ns)):
        if ns[i - 1] >= 3 and gaps[i] > gaps[i - 1]:
            grow += 1
            if grow >= 3:
                raise ConvergenceError(f"density gap increases for three consecutive n (up to n={ns[i]})")
        else:
            grow = 0
    sel = [i for i, n in enumerate(ns) if n >= 3]
    if len(sel) >= 3:
        n_arr = np.array([ns[i] for i in sel], dtype=float)
        A = np.vstack([np.ones_like(n_arr), 1.0 / n_arr, 1.0 / n_arr**2]).T
        coef, *_ = np.linalg.lstsq(A, np.array([ds[i] for i in sel]), rcond=None)
        limit = float(coef[0])
    else:
        limit = float(ds[-1])
    return DensityReport(tuple(ns), tuple(Is), tuple(ds), limit, float(target))
