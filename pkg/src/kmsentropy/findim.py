"""Exact finite-dimensional model of perturbed thermal states.

Conventions
-----------
* Heisenberg evolution ``alpha_t(X) = exp(itK) X exp(-itK)`` for a generator ``K``.
* Imaginary-time evolution ``alpha_{iu}(X) = exp(-uK) X exp(uK)``.
* State vectors live in the Hilbert-Schmidt space of ``d x d`` matrices with
  inner product ``tr(X^* Y)``; the algebra acts by left multiplication.
* ``K_i = H + P_i``. The evolved state ``psi = omega_1 o alpha_t^{K_2}`` has
  density matrix ``exp(-itK_2) rho_1 exp(itK_2)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

from .errors import DomainError, UnsupportedOrderError
from .series import FormalSeries

HERMITIAN_TOL = 1e-13
MAX_DIM = 16
MAX_CONNECTED = 5


def _is_hermitian(A, tol=HERMITIAN_TOL):
    A = np.asarray(A)
    return A.ndim == 2 and A.shape[0] == A.shape[1] and np.max(np.abs(A - A.conj().T), initial=0.0) <= tol * max(1.0, np.max(np.abs(A), initial=0.0))


def _herm(A, name="matrix"):
    A = np.asarray(A, dtype=complex)
    if not _is_hermitian(A):
        raise DomainError(f"{name} must be a square Hermitian matrix")
    return 0.5 * (A + A.conj().T)


def herm_function(A, fn):
    """``fn(A)`` for Hermitian ``A`` by eigendecomposition."""
    e, V = np.linalg.eigh(A)
    return (V * fn(e)) @ V.conj().T


def evolve(K, X, t):
    """Heisenberg evolution ``exp(itK) X exp(-itK)``."""
    e, V = np.linalg.eigh(K)
    U = (V * np.exp(1j * t * e)) @ V.conj().T
    return U @ X @ U.conj().T


def evolve_imag(K, X, u):
    """``exp(-uK) X exp(uK)``."""
    e, V = np.linalg.eigh(K)
    s = e - e.min()
    Xe = V.conj().T @ X @ V
    return V @ (np.exp(-u * s)[:, None] * Xe * np.exp(u * s)[None, :]) @ V.conj().T


@dataclass(frozen=True)
class FiniteSystem:
    """Hamiltonian ``H``, perturbations ``P1, P2, P3`` and inverse temperature."""

    H: np.ndarray
    P1: np.ndarray
    P2: np.ndarray
    P3: np.ndarray
    beta: float

    def __post_init__(self):
        d = np.asarray(self.H).shape[0] if np.ndim(self.H) == 2 else 0
        if not 2 <= d <= MAX_DIM:
            raise DomainError(f"dimension must lie in [2, {MAX_DIM}], got {d}")
        for name in ("H", "P1", "P2", "P3"):
            M = np.asarray(getattr(self, name))
            if M.shape != (d, d):
                raise DomainError(f"{name} must be {d}x{d}")
            object.__setattr__(self, name, _herm(M, name))
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise DomainError(f"beta must be positive, got {self.beta!r}")

    @property
    def dim(self):
        return self.H.shape[0]

    def K(self, i):
        """Interacting generator ``H + P_i`` (``i = 0`` gives ``H``)."""
        return self.H if i == 0 else self.H + getattr(self, f"P{i}")

    def scaled(self, lam):
        """Same system with every perturbation multiplied by ``lam``."""
        return FiniteSystem(self.H, lam * self.P1, lam * self.P2, lam * self.P3, self.beta)

    def with_perturbations(self, P1=None, P2=None, P3=None):
        return FiniteSystem(self.H, self.P1 if P1 is None else P1, self.P2 if P2 is None else P2,
                            self.P3 if P3 is None else P3, self.beta)


def random_hermitian(d, rng, scale=1.0):
    """GUE-like Hermitian matrix with spectral radius of order ``scale``."""
    X = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * (X + X.conj().T) / (2.0 * math.sqrt(2.0 * d))


def random_system(d, rng, beta=1.0, scale=0.5):
    """Random system with ``O(1)`` Hamiltonian and perturbations of size ``scale``."""
    return FiniteSystem(random_hermitian(d, rng), random_hermitian(d, rng, scale),
                        random_hermitian(d, rng, scale), random_hermitian(d, rng, scale), beta)


def gibbs_state(H, beta):
    """``exp(-beta H) / tr exp(-beta H)`` via eigendecomposition (energies shifted for stability)."""
    H = _herm(H, "H")
    e, V = np.linalg.eigh(H)
    p = np.exp(-beta * (e - e.min()))
    p /= p.sum()
    return (V * p) @ V.conj().T


def log_partition_ratio(H, P, beta):
    """``log tr exp(-beta (H + P)) - log tr exp(-beta H)``."""
    e0 = np.linalg.eigvalsh(H)
    e1 = np.linalg.eigvalsh(H + P)
    s = min(e0.min(), e1.min())
    return float(np.log(np.sum(np.exp(-beta * (e1 - s)))) - np.log(np.sum(np.exp(-beta * (e0 - s)))))


def expectation(rho, X):
    return complex(np.trace(rho @ X))


def kms_residual(H, beta, A, B):
    """``|omega(A alpha_{i beta}(B)) - omega(B A)|`` with ``alpha_{i beta}(B) = e^{-beta H} B e^{beta H}``."""
    rho = gibbs_state(H, beta)
    lhs = np.trace(rho @ A @ evolve_imag(H, B, beta))
    rhs = np.trace(rho @ B @ A)
    return float(abs(lhs - rhs))


# -------------------------------------------------------- vectors and entropy


@dataclass(frozen=True)
class ArakiVectors:
    omega0: np.ndarray
    omega1: np.ndarray
    omega3: np.ndarray
    N1: float
    N3: float


def cocycle(sys: FiniteSystem, i):
    """``U_i = exp(-beta (H + P_i) / 2) exp(beta H / 2)``."""
    b = sys.beta
    e0 = np.linalg.eigvalsh(sys.H)
    ei = np.linalg.eigvalsh(sys.K(i))
    # a common shift cancels between the two factors and keeps both bounded
    shift = 0.5 * (e0.min() + ei.min())
    left = herm_function(sys.K(i), lambda e: np.exp(-0.5 * b * (e - shift)))
    right = herm_function(sys.H, lambda e: np.exp(0.5 * b * (e - shift)))
    return left @ right


def araki_vectors(sys: FiniteSystem):
    """Unit vectors ``Omega_i = U_i Omega_0 / N_i`` with ``Omega_0 = rho_0^{1/2}``."""
    rho0 = gibbs_state(sys.H, sys.beta)
    om0 = herm_function(rho0, lambda e: np.sqrt(np.clip(e, 0.0, None)))
    out = []
    for i in (1, 3):
        v = cocycle(sys, i) @ om0
        n2 = float(np.real(np.trace(v.conj().T @ v)))
        out.append((v / math.sqrt(n2), math.sqrt(n2)))
    (om1, N1), (om3, N3) = out
    return ArakiVectors(om0, om1, om3, N1, N3)


def vector_state(omega):
    """Density matrix of the vector state ``X -> tr(Omega^* X Omega)``."""
    return omega @ omega.conj().T


def relative_entropy_exact(rho, sigma, tol=1e-14):
    """``tr rho (log rho - log sigma)`` for density matrices; ``DomainError`` for singular ``sigma``."""
    rho = _herm(rho, "rho")
    sigma = _herm(sigma, "sigma")
    es, Vs = np.linalg.eigh(sigma)
    if es.min() <= tol * max(es.max(), 1.0):
        raise DomainError("sigma is singular; the relative entropy is infinite")
    er, Vr = np.linalg.eigh(rho)
    er = np.clip(er, 0.0, None)
    pos = er > 0
    s_rr = float(np.sum(er[pos] * np.log(er[pos])))
    # tr rho log sigma in the eigenbasis of sigma
    rho_s = np.real(np.diag(Vs.conj().T @ rho @ Vs))
    s_rs = float(np.sum(rho_s * np.log(es)))
    return s_rr - s_rs


def evolved_state_vector(sys: FiniteSystem, t):
    """``W_2(t) Omega_1 = exp(-itK_2) Omega_1 exp(itK_2)``, the vector of ``omega_1 o alpha_t^{K_2}``."""
    av = araki_vectors(sys)
    return evolve(sys.K(2), av.omega1, -t), av


def relative_entropy_modular(sys: FiniteSystem, t):
    """Relative entropy of the evolved state to ``omega_3`` from the relative modular operator.

    ``Delta(X) = sigma X (Psi^* Psi)^{-1}`` on Hilbert-Schmidt space, with
    ``sigma`` the density of ``Omega_3``; the entropy is
    ``-<Psi, log(Delta) Psi>``. ``log(Delta)`` is assembled as a
    ``d^2 x d^2`` matrix from the two commuting tensor factors,
    ``log(sigma) x 1 - 1 x log(Psi^* Psi)^T``, and applied to the vector
    ``Psi``, so this route works with Araki vectors and never forms
    ``rho_psi``. Taking ``log`` of the assembled ``Delta`` instead loses
    about ``eps * cond(Delta)``, which reaches ``1e-9`` at ``beta ~ 4``.
    """
    psi, av = evolved_state_vector(sys, t)
    sigma = vector_state(av.omega3)
    comm = psi.conj().T @ psi  # commutant density of Psi
    d = sys.dim
    eye = np.eye(d)
    # row-major vec: vec(A X B) = (A kron B^T) vec(X)
    log_delta = (np.kron(herm_function(sigma, np.log), eye)
                 - np.kron(eye, herm_function(comm, np.log).T))
    v = psi.reshape(-1)
    return float(-np.real(v.conj() @ log_delta @ v))


def generalized_formula_findim(sys: FiniteSystem, t):
    """Second-route relative entropy from expectation values and normalizations.

    ``-beta omega_1(P1 - P2) + beta omega_1(alpha_t^{K_2}(P3 - P2)) - log N1^2 + log N3^2``.
    """
    b = sys.beta
    av = araki_vectors(sys)
    rho1 = vector_state(av.omega1)
    x = evolve(sys.K(2), sys.P3 - sys.P2, t)
    val = (-b * np.trace(rho1 @ (sys.P1 - sys.P2)) + b * np.trace(rho1 @ x)
           - 2.0 * math.log(av.N1) + 2.0 * math.log(av.N3))
    return float(np.real(val))


def relative_entropy_trace(sys: FiniteSystem, t):
    """``S(rho_psi || rho_3)`` from Gibbs states by the trace formula."""
    rho1 = gibbs_state(sys.K(1), sys.beta)
    rho_psi = evolve(sys.K(2), rho1, -t)
    return relative_entropy_exact(rho_psi, gibbs_state(sys.K(3), sys.beta))


def entropy_production_exact(sys: FiniteSystem, t):
    """``dS/dt = i beta tr(rho_1 alpha_t^{K_2}([K_2, P3 - P2]))``."""
    K2 = sys.K(2)
    X = sys.P3 - sys.P2
    rho1 = gibbs_state(sys.K(1), sys.beta)
    c = K2 @ X - X @ K2
    return float(np.real(1j * sys.beta * np.trace(rho1 @ evolve(K2, c, t))))


def balance_residual_exact(sys: FiniteSystem, t, tol=1e-13):
    """``|S(t) - S(0) - int_0^t E(s) ds|`` with both ``S`` values from the generalized formula."""
    t = float(t)
    if t == 0.0:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(lambda s: entropy_production_exact(sys, s), 0.0, t,
                                epsabs=tol, epsrel=tol, limit=200)
    return abs(generalized_formula_findim(sys, t) - generalized_formula_findim(sys, 0.0) - val)


def second_order_spectral(sys: FiniteSystem, t):
    """Lambda**2 coefficient of the relative entropy from the spectral decomposition of ``H``.

    With Boltzmann weights ``p_m``, Bohr frequencies ``w = E_n - E_m`` and
    ``kernel(w) = beta sinh(beta w / 2) / w``::

        static  = sum sqrt(p_m p_n) kernel(w) |D_nm|^2 - (beta^2 / 2) omega(D)^2,   D = P1 - P3
        dynamic = sum sqrt(p_m p_n) kernel(w) [2 Re(conj(A_nm) B_nm) (1 - cos wt)
                                              + 2 Im(conj(A_nm) B_nm) sin wt],      A = P1 - P2, B = P3 - P2

    the finite-dimensional counterpart of the field-theory integrals, where
    ``sqrt(p_m p_n)`` plays the role of the convolved line density.
    """
    from .thermal import ThermalParams, sinh_kernel

    b = sys.beta
    e, V = np.linalg.eigh(sys.H)
    p = np.exp(-b * (e - e.min()))
    p /= p.sum()
    w = e[None, :] - e[:, None]  # w[m, n] = E_n - E_m
    kern = sinh_kernel(w, ThermalParams(b, 1.0))
    sq = np.sqrt(p[:, None] * p[None, :])

    def el(X):
        return V.conj().T @ X @ V  # el(X)[m, n] = <m|X|n>

    D = el(sys.P1 - sys.P3)
    mean_d = float(np.real(np.sum(p * np.diag(D))))
    static = float(np.sum(sq * kern * np.abs(D) ** 2)) - 0.5 * b * b * mean_d**2
    A = el(sys.P1 - sys.P2)
    B = el(sys.P3 - sys.P2)
    prod_ab = np.conj(A.T) * B.T  # conj(A_nm) B_nm indexed [m, n]
    dyn = sq * kern * (2.0 * np.real(prod_ab) * (1.0 - np.cos(w * t)) + 2.0 * np.imag(prod_ab) * np.sin(w * t))
    return static + float(np.sum(dyn))


# ----------------------------------------------------- connected functions


def _set_partitions(n):
    from sympy.utilities.iterables import multiset_partitions

    return multiset_partitions(list(range(n)))


def _ordered_product(ops, idx):
    out = ops[idx[0]]
    for i in idx[1:]:
        out = out @ ops[i]
    return out


def connected_function(rho, operators):
    """Connected part of ``omega(A_1 ... A_n)`` by Moebius inversion over set partitions.

    ``omega^c = sum_pi (-1)^{|pi|-1} (|pi|-1)! prod_{B in pi} omega(prod_{i in B} A_i)``
    with the operators of each block multiplied in their original order.
    Operators may carry a leading batch axis, in which case the result is
    an array over the batch.
    """
    n = len(operators)
    if n < 1:
        raise DomainError("need at least one operator")
    if n > MAX_CONNECTED:
        raise UnsupportedOrderError(f"connected functions are limited to n <= {MAX_CONNECTED}")
    ops = [np.asarray(o) for o in operators]
    moments = {}

    def moment(block):
        key = tuple(block)
        if key not in moments:
            moments[key] = np.einsum("ij,...ji->...", rho, _ordered_product(ops, key))
        return moments[key]

    total = 0
    for part in _set_partitions(n):
        k = len(part)
        term = (-1) ** (k - 1) * math.factorial(k - 1)
        for block in part:
            term = term * moment(block)
        total = total + term
    return total


def connected_functions(state, operators, n=None):
    """``omega^c(A_1 x ... x A_n)`` for the density matrix ``state``."""
    if n is not None and n != len(operators):
        raise DomainError(f"expected {n} operators, got {len(operators)}")
    val = connected_function(np.asarray(state), list(operators))
    return complex(val) if np.ndim(val) == 0 else val


def resum_moment(rho, operators):
    """Rebuild ``omega(A_1 ... A_n)`` as the sum over partitions of products of connected parts."""
    n = len(operators)
    total = 0
    for part in _set_partitions(n):
        term = 1
        for block in part:
            term = term * connected_function(rho, [operators[i] for i in block])
        total = total + term
    return complex(total)


# ------------------------------------------------------ simplex expansions


def simplex_rule(n, T, nodes=16):
    """Quadrature on ``{0 <= u_1 <= ... <= u_n <= T}``.

    Collapsed-coordinate map ``u_n = T y_n``, ``u_k = u_{k+1} y_k`` with a
    tensor Gauss-Legendre rule in ``y``. Returns points of shape ``(N, n)``
    with increasing coordinates along each row (decreasing for ``T < 0``)
    and weights that include the Jacobian; for ``T < 0`` the weights carry
    the orientation sign ``sign(T)**n``.
    """
    if n == 0:
        return np.zeros((1, 0)), np.ones(1)
    x, wx = roots_legendre(nodes)
    y = 0.5 * (x + 1.0)
    wy = 0.5 * wx
    grids = np.array(list(product(range(nodes), repeat=n)))
    Y = y[grids]
    W = np.prod(wy[grids], axis=1)
    U = np.empty_like(Y)
    U[:, n - 1] = T * Y[:, n - 1]
    for k in range(n - 2, -1, -1):
        U[:, k] = U[:, k + 1] * Y[:, k]
    # d u = T^n prod_{k>=2} y_k^{k-1} d y
    jac = T**n * np.prod([Y[:, k] ** k for k in range(1, n)], axis=0) if n > 1 else np.full(len(Y), float(T))
    return U, W * jac


def _perturbation(sys, which):
    if which not in (1, 2, 3):
        raise DomainError("perturbation index must be 1, 2 or 3")
    return getattr(sys, f"P{which}")


def _batched_evolution(K, X, times, imaginary=False):
    """``exp(itK) X exp(-itK)`` (or ``exp(-uK) X exp(uK)``) for an array of times."""
    e, V = np.linalg.eigh(K)
    Xe = V.conj().T @ X @ V
    times = np.asarray(times, dtype=float)
    if imaginary:
        s = e - e.min()
        ph_l = np.exp(-np.multiply.outer(times, s))
        ph_r = np.exp(np.multiply.outer(times, s))
    else:
        ph_l = np.exp(1j * np.multiply.outer(times, e))
        ph_r = ph_l.conj()
    inner = ph_l[..., :, None] * Xe * ph_r[..., None, :]
    return V @ inner @ V.conj().T


def dyson_evolution(sys: FiniteSystem, A, t, order, which=2, nodes=16):
    """Series in ``lam`` of ``exp(it(H + lam P)) A exp(-it(H + lam P))``.

    Coefficient ``n`` is ``i^n int_{t S_n} [a_1, [a_2, ... [a_n, alpha_t(A)]]]``
    with ``a_k = alpha_{t_k}(P)`` and ``t_1 <= ... <= t_n``, the earliest
    time outermost.
    """
    if not 0 <= order <= 4:
        raise UnsupportedOrderError("Dyson expansion is provided up to order 4")
    A = np.asarray(A, dtype=complex)
    P = _perturbation(sys, which)
    H = sys.H
    At = evolve(H, A, t)
    coeffs = [At]
    for n in range(1, order + 1):
        U, W = simplex_rule(n, t, nodes)
        acc = np.broadcast_to(At, (len(W),) + At.shape)
        for k in range(n - 1, -1, -1):
            a = _batched_evolution(H, P, U[:, k])
            acc = a @ acc - acc @ a
        coeffs.append((1j) ** n * np.tensordot(W, acc, axes=1))
    return FormalSeries(coeffs, order)


def perturbed_kms_expansion(sys: FiniteSystem, A, order, which=1, nodes=16):
    """Series in ``lam`` of the Gibbs expectation of ``A`` for ``H + lam P``.

    Coefficient ``n`` is ``(-1)^n int_{beta S_n} omega^c(A x alpha_{iu_1}P x ... x alpha_{iu_n}P)``.
    """
    if not 0 <= order <= 3:
        raise UnsupportedOrderError("perturbed state expansion is provided up to order 3")
    A = np.asarray(A, dtype=complex)
    P = _perturbation(sys, which)
    rho = gibbs_state(sys.H, sys.beta)
    coeffs = [float(np.real(np.trace(rho @ A)))]
    for n in range(1, order + 1):
        U, W = simplex_rule(n, sys.beta, nodes)
        ops = [np.broadcast_to(A, (len(W),) + A.shape)]
        ops += [_batched_evolution(sys.H, P, U[:, k], imaginary=True) for k in range(n)]
        val = connected_function(rho, ops)
        coeffs.append(float(np.real((-1) ** n * np.dot(W, val))))
    return FormalSeries(coeffs, order)


def log_partition_expansion(sys: FiniteSystem, order, which=1, nodes=16):
    """Series in ``lam`` of ``log(Z(H + lam P) / Z(H))``.

    Coefficient ``n`` is ``(-1)^n int_{beta S_n} omega^c(alpha_{iu_1}P x ... x alpha_{iu_n}P)``;
    the first one is ``-beta omega(P)``.
    """
    if not 0 <= order <= 3:
        raise UnsupportedOrderError("log-partition expansion is provided up to order 3")
    P = _perturbation(sys, which)
    rho = gibbs_state(sys.H, sys.beta)
    coeffs = [0.0]
    for n in range(1, order + 1):
        U, W = simplex_rule(n, sys.beta, nodes)
        ops = [_batched_evolution(sys.H, P, U[:, k], imaginary=True) for k in range(n)]
        val = connected_function(rho, ops)
        coeffs.append(float(np.real((-1) ** n * np.dot(W, val))))
    return FormalSeries(coeffs, order)


# ------------------------------------------------------ exact references


def exact_perturbed_evolution(sys, A, t, lam, which=2):
    return evolve(sys.H + lam * _perturbation(sys, which), np.asarray(A, dtype=complex), t)


def exact_perturbed_expectation(sys, A, lam, which=1):
    rho = gibbs_state(sys.H + lam * _perturbation(sys, which), sys.beta)
    return float(np.real(np.trace(rho @ A)))


def exact_log_partition(sys, lam, which=1):
    return log_partition_ratio(sys.H, lam * _perturbation(sys, which), sys.beta)
