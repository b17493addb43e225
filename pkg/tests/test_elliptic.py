import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bjj.elliptic import EllipticDomainError, EllipticModulus, complete_K, jacobi_sn, sn_unit_modulus
from oracles import K_agm_mp, sn_ode

moduli = st.floats(min_value=0.0, max_value=0.9999)


def test_K_at_zero():
    assert complete_K(0.0) == pytest.approx(math.pi / 2, rel=1e-15)


def test_K_at_root_half():
    # value frozen from a 25-digit AGM loop
    assert complete_K(math.sqrt(0.5)) == pytest.approx(1.8540746773013719, rel=1e-14)


def test_K_near_one_is_finite():
    k = complete_K(0.9999)
    assert math.isfinite(k) and k > 5
    assert k == pytest.approx(K_agm_mp(0.9999), rel=1e-14)


@given(moduli)
def test_K_matches_high_precision_agm(k):
    assert complete_K(k) == pytest.approx(K_agm_mp(k), rel=1e-14)


@given(st.floats(0.0, 0.998), st.floats(1e-4, 1e-3))
def test_K_strictly_increasing(k, dk):
    assert complete_K(k + dk) > complete_K(k)


def test_K_vectorized():
    ks = np.array([0.0, 0.5, 0.9])
    np.testing.assert_allclose(complete_K(ks), [complete_K(k) for k in ks], rtol=0)


@pytest.mark.parametrize("k", [1.0, 1.5, -0.1, math.nan])
def test_domain_errors(k):
    with pytest.raises(EllipticDomainError):
        complete_K(k)
    with pytest.raises(EllipticDomainError):
        jacobi_sn(0.3, k)
    with pytest.raises(EllipticDomainError):
        EllipticModulus(k)


def test_modulus_type():
    m = EllipticModulus(0.6)
    assert m.parameter == pytest.approx(0.36)
    assert complete_K(m) == complete_K(0.6)
    assert jacobi_sn(0.4, m) == jacobi_sn(0.4, 0.6)


def test_sn_examples():
    assert jacobi_sn(math.pi / 2, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert jacobi_sn(complete_K(0.6), 0.6) == pytest.approx(1.0, abs=1e-14)
    # frozen ODE-oracle value
    assert jacobi_sn(0.6, 0.8) == pytest.approx(0.5469687946882693, abs=1e-10)


def test_sn_zero_modulus_is_sine():
    u = np.linspace(0.0, 20.0, 2001)
    assert np.max(np.abs(jacobi_sn(u, 0.0) - np.sin(u))) < 1e-12


def test_sn_small_modulus_limit():
    u = np.linspace(0.0, 10.0, 1001)
    assert np.max(np.abs(jacobi_sn(u, 1e-8) - np.sin(u))) < 1e-7


@given(st.floats(-50, 50), moduli)
def test_sn_bounded(u, k):
    assert abs(jacobi_sn(u, k)) <= 1.0


@given(st.floats(-50, 50), moduli)
def test_sn_odd(u, k):
    assert jacobi_sn(-u, k) == pytest.approx(-jacobi_sn(u, k), abs=1e-12)


@given(st.floats(-20, 20), st.sampled_from([0.1, 0.5, 0.9, 0.99, 0.9999]))
def test_sn_period(u, k):
    assert jacobi_sn(u + 4 * complete_K(k), k) == pytest.approx(jacobi_sn(u, k), abs=1e-10)


def test_sn_against_ode_oracle():
    rng = np.random.default_rng(11)
    u = rng.uniform(-6, 6, 40)
    k = rng.uniform(0, 0.99, 40)
    ref = np.array([sn_ode(a, b) for a, b in zip(u, k)])
    assert np.max(np.abs(jacobi_sn(u, k) - ref)) < 1e-10


def test_sn_long_times_keep_precision():
    # omega t of order 1e5 after reduction modulo 4K
    k = 0.6
    period = 4 * complete_K(k)
    u = 0.3 + 25000 * period
    assert jacobi_sn(u, k) == pytest.approx(jacobi_sn(0.3, k), abs=1e-9)


def test_sn_broadcasting():
    u = np.linspace(0, 1, 5)[:, None]
    k = np.array([0.1, 0.5])
    out = jacobi_sn(u, k)
    assert out.shape == (5, 2)
    assert out[3, 1] == jacobi_sn(u[3, 0], 0.5)
    assert isinstance(jacobi_sn(0.2, 0.3), float)


def test_unit_modulus_helper():
    assert sn_unit_modulus(0.5) == pytest.approx(math.tanh(0.5))
    assert jacobi_sn(2.0, 0.999999) == pytest.approx(sn_unit_modulus(2.0), abs=1e-5)
