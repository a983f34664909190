import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kmsentropy import findim as fd
from kmsentropy.errors import DomainError, UnsupportedOrderError
from kmsentropy.series import richardson_derivative, taylor_coefficients


def _sys(rng, d=3, beta=1.0, scale=0.5):
    return fd.random_system(d, rng, beta, scale)


def _rand_ops(rng, d, n):
    return [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for _ in range(n)]


def _truncation_slope(series, exact, lams):
    errs = [series.truncation_error(exact(l), l) for l in lams]
    return np.polyfit(np.log(lams), np.log(errs), 1)[0]


LAMS = np.logspace(-2.0, -0.8, 7)


class TestGibbs:
    def test_maximally_mixed(self):
        assert np.allclose(fd.gibbs_state(np.zeros((3, 3)), 2.0), np.eye(3) / 3, atol=1e-15)

    def test_two_level(self):
        rho = fd.gibbs_state(np.diag([1.0, -1.0]), 1.0)
        # 1 / (1 + e^2) and e^2 / (1 + e^2)
        assert rho[0, 0].real == pytest.approx(0.119202922022117556, abs=1e-15)
        assert rho[1, 1].real == pytest.approx(0.880797077977882444, abs=1e-15)
        assert abs(rho[0, 1]) < 1e-16

    def test_non_hermitian(self):
        with pytest.raises(DomainError):
            fd.gibbs_state(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)

    def test_kms(self, rng):
        H = fd.random_hermitian(4, rng)
        worst = max(fd.kms_residual(H, 1.3, *_rand_ops(rng, 4, 2)) for _ in range(50))
        assert worst <= 1e-11

    def test_log_partition_ratio(self, rng):
        H, P = fd.random_hermitian(3, rng), fd.random_hermitian(3, rng)
        from scipy.linalg import expm
        ref = math.log(np.trace(expm(-2.0 * (H + P))).real / np.trace(expm(-2.0 * H)).real)
        assert fd.log_partition_ratio(H, P, 2.0) == pytest.approx(ref, rel=1e-12)


class TestSystem:
    def test_validation(self, rng):
        H = fd.random_hermitian(3, rng)
        with pytest.raises(DomainError):
            fd.FiniteSystem(np.zeros((1, 1)), *[np.zeros((1, 1))] * 3, 1.0)
        with pytest.raises(DomainError):
            fd.FiniteSystem(H, H, H, np.zeros((2, 2)), 1.0)
        with pytest.raises(DomainError):
            fd.FiniteSystem(H, H, H, H, 0.0)
        with pytest.raises(DomainError):
            fd.FiniteSystem(H, H + 1e-3 * np.triu(np.ones((3, 3)), 1), H, H, 1.0)


class TestAraki:
    def test_trivial_perturbation(self, rng):
        s = _sys(rng)
        s = s.with_perturbations(P1=np.zeros((3, 3)))
        av = fd.araki_vectors(s)
        assert av.N1 == pytest.approx(1.0, abs=1e-14)
        assert np.allclose(av.omega1, av.omega0, atol=1e-14)

    def test_two_level_state(self):
        H = np.diag([1.0, -1.0])
        P3 = 0.1 * np.array([[0.0, 1.0], [1.0, 0.0]])
        s = fd.FiniteSystem(H, np.zeros((2, 2)), np.zeros((2, 2)), P3, 1.0)
        av = fd.araki_vectors(s)
        assert np.max(np.abs(fd.vector_state(av.omega3) - fd.gibbs_state(H + P3, 1.0))) <= 1e-12

    @pytest.mark.parametrize("d", [2, 4, 6])
    def test_induced_states(self, rng, d):
        s = _sys(rng, d, beta=2.0)
        av = fd.araki_vectors(s)
        for om, i in ((av.omega1, 1), (av.omega3, 3)):
            assert np.linalg.norm(om) == pytest.approx(1.0, abs=1e-13)
            assert np.max(np.abs(fd.vector_state(om) - fd.gibbs_state(s.K(i), s.beta))) <= 1e-11

    def test_normalization(self, rng):
        s = _sys(rng, 4)
        av = fd.araki_vectors(s)
        U = fd.cocycle(s, 1)
        rho0 = fd.gibbs_state(s.H, s.beta)
        assert av.N1**2 == pytest.approx(np.trace(rho0 @ U.conj().T @ U).real, rel=1e-12)


class TestRelativeEntropy:
    def test_equal(self, rng):
        rho = fd.gibbs_state(fd.random_hermitian(4, rng), 1.0)
        assert abs(fd.relative_entropy_exact(rho, rho)) < 1e-14

    def test_classical(self):
        val = fd.relative_entropy_exact(np.diag([0.7, 0.3]), np.diag([0.5, 0.5]))
        assert val == pytest.approx(0.7 * math.log(1.4) + 0.3 * math.log(0.6), abs=1e-15)
        assert val == pytest.approx(0.0822828785050517816, abs=1e-15)

    def test_singular_sigma(self):
        with pytest.raises(DomainError):
            fd.relative_entropy_exact(np.diag([0.5, 0.5]), np.diag([1.0, 0.0]))

    def test_pure_rho_allowed(self):
        assert fd.relative_entropy_exact(np.diag([1.0, 0.0]), np.diag([0.5, 0.5])) == pytest.approx(math.log(2))

    @settings(max_examples=25)
    @given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1.0))
    def test_klein(self, seed, eps):
        rng = np.random.default_rng(seed)
        H = fd.random_hermitian(6, rng)
        rho = fd.gibbs_state(H, 1.0)
        sigma = fd.gibbs_state(H + eps * fd.random_hermitian(6, rng), 1.0)
        assert fd.relative_entropy_exact(rho, sigma) > 0
        assert fd.relative_entropy_exact(sigma, rho) > 0


class TestGeneralizedFormula:
    def test_equal_endpoints(self, rng):
        s = _sys(rng)
        s = s.with_perturbations(P3=s.P1)
        assert abs(fd.generalized_formula_findim(s, 0.0)) < 1e-13

    def test_time_zero(self, rng):
        s = _sys(rng, 4)
        rho1, rho3 = fd.gibbs_state(s.K(1), s.beta), fd.gibbs_state(s.K(3), s.beta)
        assert fd.generalized_formula_findim(s, 0.0) == pytest.approx(fd.relative_entropy_exact(rho1, rho3),
                                                                        abs=1e-10)

    def test_three_routes(self, rng):
        s = _sys(rng, 3)
        exact = fd.relative_entropy_trace(s, 1.7)
        assert abs(fd.generalized_formula_findim(s, 1.7) - exact) <= 1e-9
        assert abs(fd.relative_entropy_modular(s, 1.7) - exact) <= 1e-9

    def test_random_systems(self):
        worst = 0.0
        for i in range(100):
            rng = np.random.default_rng([7, i])
            d = int(rng.choice([2, 3, 4, 6]))
            s = _sys(rng, d, beta=float(rng.uniform(0.2, 4.0)))
            t = float(rng.uniform(-3, 3))
            mod = fd.relative_entropy_modular(s, t)
            worst = max(worst, abs(fd.generalized_formula_findim(s, t) - mod),
                        abs(fd.relative_entropy_trace(s, t) - mod))
        assert worst <= 1e-9

    def test_flat_when_p2_equals_p3(self, rng):
        s = _sys(rng)
        s = s.with_perturbations(P2=s.P3)
        v = [fd.generalized_formula_findim(s, t) for t in (0.0, 0.7, 3.1)]
        assert np.ptp(v) < 1e-12

    def test_nonnegative(self, rng):
        s = _sys(rng, 4)
        for t in np.linspace(-5, 5, 11):
            assert fd.generalized_formula_findim(s, t) >= -1e-12


class TestEntropyProduction:
    def test_vanishing(self, rng):
        s = _sys(rng)
        for t in (0.3, 2.0):
            assert abs(fd.entropy_production_exact(s.with_perturbations(P2=s.P3), t)) < 1e-14
            assert abs(fd.entropy_production_exact(s.with_perturbations(P2=s.P1), t)) < 1e-13

    def test_derivative(self, rng):
        s = _sys(rng)
        h = 1e-4
        for t in (0.4, 1.9):
            fdiff = (fd.generalized_formula_findim(s, t + h) - fd.generalized_formula_findim(s, t - h)) / (2 * h)
            assert fd.entropy_production_exact(s, t) == pytest.approx(fdiff, abs=1e-7)

    def test_balance(self, rng):
        s = _sys(rng, 3)
        assert fd.balance_residual_exact(s, 2.0) <= 1e-9
        assert fd.balance_residual_exact(s, -1.3) <= 1e-9
        assert fd.balance_residual_exact(s, 0.0) == 0.0


class TestConnected:
    def test_single(self, rng):
        rho = fd.gibbs_state(fd.random_hermitian(3, rng), 1.0)
        (A,) = _rand_ops(rng, 3, 1)
        assert fd.connected_functions(rho, [A], 1) == pytest.approx(np.trace(rho @ A), abs=1e-15)

    def test_pair(self, rng):
        rho = fd.gibbs_state(fd.random_hermitian(3, rng), 1.0)
        A, B = _rand_ops(rng, 3, 2)
        ref = np.trace(rho @ A @ B) - np.trace(rho @ A) * np.trace(rho @ B)
        assert fd.connected_functions(rho, [A, B], 2) == pytest.approx(ref, abs=1e-13)

    def test_identity_is_disconnected(self, rng):
        rho = fd.gibbs_state(fd.random_hermitian(3, rng), 1.0)
        A, B = _rand_ops(rng, 3, 2)
        assert abs(fd.connected_functions(rho, [A, np.eye(3), B])) < 1e-13

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_resummation(self, rng, n):
        rho = fd.gibbs_state(fd.random_hermitian(3, rng), 0.8)
        ops = _rand_ops(rng, 3, n)
        direct = np.trace(rho @ np.linalg.multi_dot(ops + [np.eye(3)]))
        assert fd.resum_moment(rho, ops) == pytest.approx(direct, abs=1e-11)

    def test_partition_count(self):
        assert [len(list(fd._set_partitions(n))) for n in range(1, 6)] == [1, 2, 5, 15, 52]

    def test_limits(self, rng):
        rho = np.eye(2) / 2
        with pytest.raises(UnsupportedOrderError):
            fd.connected_functions(rho, [np.eye(2)] * 6)
        with pytest.raises(DomainError):
            fd.connected_functions(rho, [np.eye(2)] * 2, 3)


class TestSimplex:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    @pytest.mark.parametrize("T", [1.5, -0.8])
    def test_volume(self, n, T):
        U, W = fd.simplex_rule(n, T)
        assert W.sum() == pytest.approx(T**n / math.factorial(n), rel=1e-13)
        if n > 1:
            diffs = np.diff(U, axis=1) * np.sign(T)
            assert np.all(diffs >= 0)

    def test_polynomial(self):
        # int_0^2 u2**2 int_0^u2 u1 du1 du2 = int_0^2 u2**4 / 2 = 2**5 / 10
        U, W = fd.simplex_rule(2, 2.0)
        assert W @ (U[:, 0] * U[:, 1] ** 2) == pytest.approx(2.0**5 / 10.0, rel=1e-13)


class TestExpansions:
    def test_dyson_order_zero(self, rng):
        s = _sys(rng)
        (A,) = _rand_ops(rng, 3, 1)
        ser = fd.dyson_evolution(s, A, 1.1, 0)
        assert np.allclose(ser[0], fd.evolve(s.H, A, 1.1), atol=1e-14)

    def test_dyson_coefficients(self, rng):
        s = _sys(rng, 3)
        (A,) = _rand_ops(rng, 3, 1)
        t = 1.3
        ser = fd.dyson_evolution(s, A, t, 4)
        ref = taylor_coefficients(lambda l: fd.exact_perturbed_evolution(s, A, t, l), 4)
        for k in range(5):
            assert np.max(np.abs(ser[k] - ref[k])) <= 1e-7

    def test_dyson_commuting(self, rng):
        e = np.array([0.3, -0.2, 1.1])
        H, P = np.diag(e), np.diag([0.5, 0.1, -0.4])
        s = fd.FiniteSystem(H, P, P, P, 1.0)
        (A,) = _rand_ops(rng, 3, 1)
        t = 0.9
        ser = fd.dyson_evolution(s, A, t, 1)
        # commuting case: exp(it lam P) alpha_t(A) exp(-it lam P), linear term i t [P, alpha_t(A)]
        At = fd.evolve(H, A, t)
        assert np.allclose(ser[1], 1j * t * (P @ At - At @ P), atol=1e-12)

    def test_dyson_truncation_slope(self, rng):
        s = _sys(rng, 3)
        (A,) = _rand_ops(rng, 3, 1)
        ser = fd.dyson_evolution(s, A, 1.0, 3)
        slope = _truncation_slope(ser, lambda l: fd.exact_perturbed_evolution(s, A, 1.0, l), LAMS)
        assert slope == pytest.approx(4.0, abs=0.2)

    def test_kms_expansion(self, rng):
        s = _sys(rng, 3)
        A = fd.random_hermitian(3, rng)
        ser = fd.perturbed_kms_expansion(s, A, 3)
        ref = taylor_coefficients(lambda l: fd.exact_perturbed_expectation(s, A, l), 3)
        for k in range(4):
            assert ser[k] == pytest.approx(ref[k], abs=1e-7)
        slope = _truncation_slope(ser, lambda l: fd.exact_perturbed_expectation(s, A, l), LAMS)
        assert slope == pytest.approx(4.0, abs=0.2)

    def test_kms_expansion_two_level_richardson(self, rng):
        s = _sys(rng, 2, beta=1.5)
        A = fd.random_hermitian(2, rng)
        ser = fd.perturbed_kms_expansion(s, A, 2)
        d2 = richardson_derivative(lambda l: fd.exact_perturbed_expectation(s, A, l), 2)
        assert ser[2] == pytest.approx(d2 / 2, abs=1e-7)

    def test_kms_expansion_central_shift(self, rng):
        s = _sys(rng, 3).with_perturbations(P1=0.7 * np.eye(3))
        A = fd.random_hermitian(3, rng)
        ser = fd.perturbed_kms_expansion(s, A, 3)
        assert max(abs(ser[k]) for k in (1, 2, 3)) < 1e-13

    def test_log_partition(self, rng):
        s = _sys(rng, 4, beta=0.9)
        ser = fd.log_partition_expansion(s, 3)
        rho = fd.gibbs_state(s.H, s.beta)
        assert ser[1] == pytest.approx(-s.beta * np.trace(rho @ s.P1).real, abs=1e-13)
        ref = taylor_coefficients(lambda l: fd.exact_log_partition(s, l), 3)
        for k in range(4):
            assert ser[k] == pytest.approx(ref[k], abs=1e-7)
        d2 = richardson_derivative(lambda l: fd.exact_log_partition(s, l), 2)
        assert ser[2] == pytest.approx(d2 / 2, abs=1e-7)
        for order in (1, 2, 3):
            slope = _truncation_slope(fd.log_partition_expansion(s, order),
                                      lambda l: fd.exact_log_partition(s, l), LAMS)
            assert slope == pytest.approx(order + 1, abs=0.2)

    def test_log_partition_zero(self, rng):
        s = _sys(rng, 3).with_perturbations(P1=np.zeros((3, 3)))
        assert all(c == 0.0 for c in fd.log_partition_expansion(s, 3).coeffs)

    def test_order_limits(self, rng):
        s = _sys(rng, 2)
        with pytest.raises(UnsupportedOrderError):
            fd.dyson_evolution(s, np.eye(2), 1.0, 5)
        with pytest.raises(UnsupportedOrderError):
            fd.perturbed_kms_expansion(s, np.eye(2), 4)
        with pytest.raises(UnsupportedOrderError):
            fd.log_partition_expansion(s, 4)


class TestSecondOrder:
    @pytest.mark.parametrize("t", [0.0, 0.8, -2.5])
    def test_matches_lambda_squared(self, rng, t):
        s = _sys(rng, 4, beta=1.2)
        c = taylor_coefficients(lambda l: fd.generalized_formula_findim(s.scaled(l), t), 3)
        assert abs(c[0]) < 1e-12 and abs(c[1]) < 1e-10
        assert fd.second_order_spectral(s, t) == pytest.approx(c[2], abs=1e-10)
