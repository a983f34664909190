import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kmsentropy.errors import ConfigurationError, DomainError
from kmsentropy.functionals import GaussianProfile, SharedProfileFunctional, combine, validate_self_adjoint

from helpers import spf

coef = st.floats(-5, 5)
triples = st.integers(1, 3).flatmap(lambda L: st.tuples(*[st.lists(coef, min_size=L, max_size=L)] * 3))


def test_profile_values():
    g = GaussianProfile(2.0, 0.5)
    assert g(0.0) == 2.0
    assert g(0.5) == pytest.approx(2.0 * np.exp(-0.5))


def test_profile_rejects_bad_width():
    with pytest.raises(DomainError):
        GaussianProfile(1.0, 0.0)


def test_order_limits():
    with pytest.raises(ConfigurationError):
        spf([])
    with pytest.raises(ConfigurationError):
        spf([1, 2, 3, 4])


def test_combine_examples():
    fc = combine(spf([1, 0]), spf([0, 0]), spf([0, 1]))
    assert fc.a == (1.0, 1.0)
    assert fc.b == (1.0, -1.0)
    k = spf([0.3, -1.2])
    assert combine(k, spf([5, 5]), k).b == (0.0, 0.0)
    fc = combine(k, k, k)
    assert fc.a == (0.0, 0.0) and fc.b == (0.0, 0.0)


def test_combine_rejects_mismatch():
    with pytest.raises(ConfigurationError):
        combine(spf([1]), spf([1]), SharedProfileFunctional((1,), GaussianProfile(1.0, 2.0)))
    with pytest.raises(ConfigurationError):
        combine(spf([1]), spf([1, 2]), spf([1]))


@given(triples)
def test_combine_linear_forms(cs):
    c1, c2, c3 = cs
    fc = combine(spf(c1), spf(c2), spf(c3))
    for l in range(len(c1)):
        assert fc.a[l] == c1[l] + c3[l] - 2.0 * c2[l]
        assert fc.b[l] == c1[l] - c3[l]


@given(triples)
def test_swap_negates_b(cs):
    c1, c2, c3 = cs
    fwd = combine(spf(c1), spf(c2), spf(c3))
    rev = combine(spf(c3), spf(c2), spf(c1))
    assert rev.a == fwd.a
    assert rev.b == tuple(-x for x in fwd.b)


@given(triples, st.floats(-3, 3))
def test_scaling_is_linear(cs, s):
    c1, c2, c3 = cs
    fc = combine(spf(c1), spf(c2), spf(c3))
    sc = combine(spf(c1).scaled(s), spf(c2).scaled(s), spf(c3).scaled(s))
    np.testing.assert_allclose(sc.b, np.multiply(s, fc.b), rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(sc.a, np.multiply(s, fc.a), rtol=1e-12, atol=1e-12)


def test_self_adjoint():
    assert validate_self_adjoint(spf([1.0, -2.0]))
    assert validate_self_adjoint(SharedProfileFunctional.zero(3))
    assert validate_self_adjoint(SharedProfileFunctional((1.0,), GaussianProfile(-3.0, 1.0)))


def test_arithmetic():
    a, b = spf([1, 2]), spf([0.5, -1])
    assert (a - b).coeffs == (0.5, 3.0)
    assert (a + b).coeffs == (1.5, 1.0)
    assert SharedProfileFunctional.zero(2).is_zero()
