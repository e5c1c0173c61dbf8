import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellbench.errors import InvariantError
from bellbench.quantum import (
    IDENTITY,
    TwoQubitState,
    alpha2_state,
    as_direction,
    concurrence,
    correlation_tensor,
    make_alpha_beta_state,
    marginal_expectation,
    pauli_expectation,
    planar_direction,
    projector_expectation,
    random_direction,
    random_product_state,
    random_state,
)

from oracles import brute_marginal, brute_pauli, corr_closed

Z = np.array([0.0, 0.0, 1.0])
X = np.array([1.0, 0.0, 0.0])
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_alpha_beta_separable_corner():
    s = make_alpha_beta_state(1, 0)
    np.testing.assert_allclose(s.amplitudes, [0, 1, 0, 0], atol=1e-15)


def test_alpha_beta_maximal():
    s = make_alpha_beta_state(1, 1)
    r = 1 / math.sqrt(2)
    np.testing.assert_allclose(s.amplitudes, [0, r, -r, 0], atol=1e-15)


def test_alpha_beta_two_one():
    s = make_alpha_beta_state(2, 1)
    np.testing.assert_allclose(s.amplitudes, [0, 2 / math.sqrt(5), -1 / math.sqrt(5), 0], atol=1e-15)


def test_alpha_beta_complex_phases_normalized():
    s = make_alpha_beta_state(1 + 2j, -0.5j)
    assert abs(np.linalg.norm(s.amplitudes) - 1) < 1e-12


def test_alpha_beta_degenerate_rejected():
    with pytest.raises(ValueError):
        make_alpha_beta_state(0, 0)


def test_state_validation():
    with pytest.raises(ValueError):
        TwoQubitState(np.array([1, 1, 0, 0], dtype=complex))
    with pytest.raises(ValueError):
        TwoQubitState.from_amplitudes([np.nan, 1, 0, 0])
    with pytest.raises(ValueError):
        TwoQubitState.from_amplitudes([1, 0, 0])


def test_direction_validation():
    with pytest.raises(ValueError):
        as_direction([1, 1, 0])
    np.testing.assert_allclose(as_direction([1, 1, 0], normalize=True), [2**-0.5, 2**-0.5, 0])
    with pytest.raises(ValueError):
        as_direction([0, 0, 0], normalize=True)


@pytest.mark.parametrize("alpha2", [0.0, 0.1, 0.37, 0.5, 0.8, 1.0])
@pytest.mark.parametrize("theta,phi", [(0.3, 1.1), (math.pi / 4, math.pi / 2), (2.0, -0.7), (math.pi, 0.0)])
def test_pauli_expectation_closed_form(alpha2, theta, phi):
    alpha, beta = math.sqrt(alpha2), math.sqrt(1 - alpha2)
    s = alpha2_state(alpha2)
    a, b = planar_direction(theta), planar_direction(phi)
    got = pauli_expectation(s, a, b)
    assert got == pytest.approx(corr_closed(alpha, beta, theta, phi), abs=1e-12)
    assert got == pytest.approx(brute_pauli(s.amplitudes, a, b), abs=1e-12)


def test_pauli_expectation_singlet_zz():
    s = make_alpha_beta_state(1 / math.sqrt(2), 1 / math.sqrt(2))
    assert pauli_expectation(s, Z, Z) == pytest.approx(-1, abs=1e-12)


def test_pauli_expectation_product_factored():
    s = make_alpha_beta_state(1, 0)
    assert pauli_expectation(s, Z, Z) == pytest.approx(-1, abs=1e-15)


@pytest.mark.parametrize("alpha2", [0.2, 0.5, 0.9])
def test_marginals_closed_form(alpha2):
    s = alpha2_state(alpha2)
    assert marginal_expectation(s, Z, "first") == pytest.approx(alpha2 - (1 - alpha2), abs=1e-12)
    assert marginal_expectation(s, Z, "second") == pytest.approx((1 - alpha2) - alpha2, abs=1e-12)
    assert marginal_expectation(s, X, "first") == pytest.approx(0, abs=1e-12)


def test_marginal_second_qubit_down():
    assert marginal_expectation(make_alpha_beta_state(1, 0), Z, "second") == pytest.approx(-1)


def test_marginal_rejects_bad_side():
    with pytest.raises(ValueError):
        marginal_expectation(alpha2_state(0.5), Z, "third")


def test_projector_examples():
    r = 1 / math.sqrt(2)
    assert projector_expectation(make_alpha_beta_state(r, r), Z, Z) == pytest.approx(0, abs=1e-15)
    assert projector_expectation(make_alpha_beta_state(1, 0), Z, -Z) == pytest.approx(1, abs=1e-15)
    assert projector_expectation(make_alpha_beta_state(1, 0), IDENTITY, IDENTITY) == pytest.approx(1)


def test_projector_spectral_pair():
    # a.s = P(a) - P(-a) on either side
    rng = np.random.default_rng(4)
    for _ in range(50):
        s, a, b = random_state(rng), random_direction(rng), random_direction(rng)
        lhs = projector_expectation(s, a, IDENTITY) - projector_expectation(s, -a, IDENTITY)
        assert lhs == pytest.approx(marginal_expectation(s, a, "first"), abs=1e-12)
        joint = sum(
            ca * cb * projector_expectation(s, ca * a, cb * b) for ca in (1, -1) for cb in (1, -1)
        )
        assert joint == pytest.approx(pauli_expectation(s, a, b), abs=1e-12)


def test_correlation_tensor_alpha_beta():
    alpha2 = 0.3
    alpha, beta = math.sqrt(alpha2), math.sqrt(1 - alpha2)
    ct = correlation_tensor(alpha2_state(alpha2))
    np.testing.assert_allclose(ct.T, np.diag([-2 * alpha * beta, -2 * alpha * beta, -1]), atol=1e-12)
    np.testing.assert_allclose(ct.m1, [0, 0, alpha2 - beta**2], atol=1e-12)
    np.testing.assert_allclose(ct.m2, [0, 0, beta**2 - alpha2], atol=1e-12)


def test_correlation_tensor_product_corner():
    ct = correlation_tensor(make_alpha_beta_state(1, 0))
    np.testing.assert_allclose(ct.T, np.diag([0, 0, -1]), atol=1e-15)
    np.testing.assert_allclose(ct.T, np.outer(ct.m1, ct.m2), atol=1e-15)


def test_invariants_1000_random():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        s, a, b = random_state(rng), random_direction(rng), random_direction(rng)
        ct = correlation_tensor(s)
        e = pauli_expectation(s, a, b)
        assert abs(e - a @ ct.T @ b) <= 1e-12
        assert abs(e) <= 1 + 1e-12
        assert np.all(np.abs(ct.T) <= 1 + 1e-12)
        assert np.all(np.abs(ct.m1) <= 1 + 1e-12) and np.all(np.abs(ct.m2) <= 1 + 1e-12)
        proj = 4 * (
            projector_expectation(s, a, b)
            - projector_expectation(s, a, IDENTITY) * projector_expectation(s, IDENTITY, b)
        )
        cov = e - marginal_expectation(s, a, "first") * marginal_expectation(s, b, "second")
        assert abs(proj - cov) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_brute_force_agreement(seed):
    rng = np.random.default_rng(seed)
    s, a, b = random_state(rng), random_direction(rng), random_direction(rng)
    assert pauli_expectation(s, a, b) == pytest.approx(brute_pauli(s.amplitudes, a, b), abs=1e-12)
    for side in ("first", "second"):
        assert marginal_expectation(s, a, side) == pytest.approx(brute_marginal(s.amplitudes, a, side), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_product_states_factorize(seed):
    s = random_product_state(np.random.default_rng(seed))
    ct = correlation_tensor(s)
    np.testing.assert_allclose(ct.T, np.outer(ct.m1, ct.m2), atol=1e-12)
    assert concurrence(s) < 1e-12


def test_concurrence_examples():
    r = 1 / math.sqrt(2)
    assert concurrence(make_alpha_beta_state(r, r)) == pytest.approx(1, abs=1e-15)
    assert concurrence(make_alpha_beta_state(1, 0)) == 0
    assert concurrence(alpha2_state(0.2)) == pytest.approx(0.8, abs=1e-12)


def test_imaginary_residue_guard():
    s = alpha2_state(0.5)
    non_hermitian = np.zeros((4, 4), dtype=complex)
    non_hermitian[1, 2] = 1j
    with pytest.raises(InvariantError):
        s.expect(non_hermitian)
