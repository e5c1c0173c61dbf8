import math

import numpy as np
import pytest

from bellbench.criteria import ChshConfig, chsh_value, named_config
from bellbench.errors import InvariantError
from bellbench.hv import (
    CHUNK_SIZE,
    DELTA_CORRELATED,
    FACTORIZED,
    HvModel,
    conditional_density_demo,
    d2_mean,
    d2_response,
    derive_seed,
    ensemble_linearity_check,
    hv_chsh,
    hv_correlation,
    pointwise_linearity_failure,
    sample_sphere,
)
from bellbench.quantum import (
    IDENTITY,
    TwoQubitState,
    alpha2_state,
    make_alpha_beta_state,
    marginal_expectation,
    planar_direction,
    random_direction,
    random_product_state,
)

from oracles import d2_quadrature

X = np.array([1.0, 0.0, 0.0])
Y = np.array([0.0, 1.0, 0.0])
Z = np.array([0.0, 0.0, 1.0])
UP_UP = TwoQubitState.product([1, 0], [1, 0])


def test_tie_resolves_to_plus_one():
    a = random_direction(np.random.default_rng(0))
    assert d2_response(a, a, -a) == 1


def test_eigenstate_limit_is_deterministic():
    lam = sample_sphere(np.random.default_rng(1), 1000)
    assert np.all(d2_response(Z, Z, lam) == 1)


def test_response_array_shape():
    lam = sample_sphere(np.random.default_rng(2), 17)
    out = d2_response(0.3 * X, Y, lam)
    assert out.shape == (17,) and out.dtype == np.int8
    assert set(np.unique(out)) <= {-1, 1}


def test_sphere_samples_are_unit_and_centred():
    lam = sample_sphere(np.random.default_rng(3), 200_000)
    np.testing.assert_allclose(np.linalg.norm(lam, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(lam.mean(axis=0), 0.0, atol=0.01)
    np.testing.assert_allclose(lam.T @ lam / len(lam), np.eye(3) / 3, atol=0.01)


def test_unknown_model_kind():
    with pytest.raises(ValueError):
        HvModel("quantum")


@pytest.mark.parametrize("n,a", [(0.5 * Z, Z), (0.3 * X + 0.4 * Y, planar_direction(1.0)), (Z, -Z), (np.zeros(3), X)])
def test_d2_quadrature_law(n, a):
    assert d2_quadrature(d2_response, n, a) == pytest.approx(float(a @ n), abs=1e-6)


def test_d2_mean_matches_projection():
    rng = np.random.default_rng(4)
    for i in range(5):
        n = random_direction(rng) * rng.uniform(0, 1)
        a = random_direction(rng)
        est = d2_mean(n, a, 100_000, seed=i)
        assert est.consistent_with(float(a @ n))


def test_d2_mean_rejects_long_bloch_vector():
    with pytest.raises(ValueError):
        d2_mean(2 * Z, Z, 10, seed=0)


def test_zero_samples_rejected():
    with pytest.raises(ValueError):
        d2_mean(Z, Z, 0, seed=0)
    with pytest.raises(ValueError):
        hv_correlation(FACTORIZED, alpha2_state(1.0), Z, Z, 0, seed=0)


def test_any_64_bit_seed_accepted():
    for seed in (0, 2**64 - 1, -1, 2**70):
        est = d2_mean(0.2 * Z, Z, 1000, seed=seed)
        assert -1 <= est.mean <= 1


def test_reproducible_and_worker_independent():
    n = 3 * CHUNK_SIZE + 123
    one = hv_correlation(FACTORIZED, alpha2_state(0.3), X, Z, n, seed=42, workers=1)
    many = hv_correlation(FACTORIZED, alpha2_state(0.3), X, Z, n, seed=42, workers=3)
    again = hv_correlation(FACTORIZED, alpha2_state(0.3), X, Z, n, seed=42, workers=1)
    assert one.mean == many.mean == again.mean
    assert one.std_error == many.std_error
    other = hv_correlation(FACTORIZED, alpha2_state(0.3), X, Z, n, seed=43, workers=1)
    assert other.mean != one.mean


def test_derive_seed_is_stable():
    assert derive_seed(7, 3) == derive_seed(7, 3)
    assert derive_seed(7, 3) != derive_seed(7, 4)
    assert 0 <= derive_seed(7, 3) < 2**64


def test_factorized_product_state_eigen_case():
    est = hv_correlation(FACTORIZED, make_alpha_beta_state(1, 0), Z, Z, 1_000_000, seed=0)
    assert est.mean == -1.0
    assert est.metadata["product_state"]
    assert "warning" not in est.metadata


def test_factorized_matches_marginal_product():
    rng = np.random.default_rng(5)
    for i in range(5):
        s = random_product_state(rng)
        a, b = random_direction(rng), random_direction(rng)
        est = hv_correlation(FACTORIZED, s, a, b, 200_000, seed=i)
        target = marginal_expectation(s, a, "first") * marginal_expectation(s, b, "second")
        assert est.consistent_with(target)


def test_factorized_entangled_state_carries_warning():
    est = hv_correlation(FACTORIZED, alpha2_state(0.5), X, X, 1000, seed=0)
    assert not est.metadata["product_state"]
    assert "warning" in est.metadata
    # marginals of the maximally entangled state vanish
    assert est.consistent_with(0.0)


def test_delta_correlated_identical_responses():
    a = random_direction(np.random.default_rng(6))
    est = hv_correlation(DELTA_CORRELATED, UP_UP, a, a, 100_000, seed=1)
    assert est.mean == 1.0
    assert est.std_error == 0.0


def test_hv_chsh_per_sample_and_bound():
    rng = np.random.default_rng(7)
    for i in range(5):
        cfg = ChshConfig(*(random_direction(rng) for _ in range(4)))
        est = hv_chsh(FACTORIZED, random_product_state(rng), cfg, 100_000, seed=i)
        assert est.metadata["per_sample_pm2"]
        assert abs(est.mean) <= 2 + 5 * est.std_error


def test_hv_chsh_reproduces_product_state():
    s = make_alpha_beta_state(1, 0)
    est = hv_chsh(FACTORIZED, s, named_config("B"), 1_000_000, seed=3)
    assert est.consistent_with(chsh_value(s, named_config("B")))


def test_hv_chsh_detects_non_dichotomic_response():
    def bad(n, a, lam):
        return np.zeros(len(lam), dtype=np.int8)

    with pytest.raises(InvariantError):
        hv_chsh(HvModel("factorized", bad), UP_UP, named_config("A"), 100, seed=0)


def test_pointwise_examples():
    r = pointwise_linearity_failure(X, Y)
    assert r.norm_sum == pytest.approx(math.sqrt(2))
    assert r.unsatisfiable
    r120 = pointwise_linearity_failure(planar_direction(0.0), planar_direction(2 * math.pi / 3))
    assert r120.norm_sum == pytest.approx(1.0, abs=1e-12)
    assert r120.unsatisfiable


@pytest.mark.parametrize("b_prime", [Z, -Z])
def test_pointwise_rejects_collinear(b_prime):
    with pytest.raises(ValueError):
        pointwise_linearity_failure(Z, b_prime)


def test_pointwise_random_pairs():
    rng = np.random.default_rng(8)
    for _ in range(100):
        r = pointwise_linearity_failure(random_direction(rng), random_direction(rng))
        assert 0 < r.norm_sum < 2 and r.unsatisfiable


def test_ensemble_linearity_identity_case():
    rng = np.random.default_rng(9)
    s = random_product_state(rng)
    rep = ensemble_linearity_check(FACTORIZED, s, IDENTITY, X, Y, 200_000, seed=2)
    assert rep.consistent
    assert rep.discrepancy == pytest.approx(rep.lhs - rep.rhs, abs=1e-12)


def test_ensemble_linearity_full_case():
    rng = np.random.default_rng(10)
    s = random_product_state(rng)
    rep = ensemble_linearity_check(FACTORIZED, s, random_direction(rng), X, planar_direction(1.0), 200_000, seed=3)
    assert rep.consistent


def test_ensemble_linearity_adversarial_response_reports_discrepancy():
    def ignores_lambda(n, a, lam):
        return np.full(len(lam), 1 if float(a @ n) >= 0 else -1, dtype=np.int8)

    model = HvModel("delta_correlated", ignores_lambda)
    rep = ensemble_linearity_check(model, UP_UP, IDENTITY, X, Z, 10_000, seed=0)
    assert rep.discrepancy == pytest.approx(math.sqrt(2) - 2)
    assert not rep.consistent


def test_ensemble_linearity_rejects_collinear():
    with pytest.raises(ValueError):
        ensemble_linearity_check(FACTORIZED, UP_UP, IDENTITY, X, -X, 100, seed=0)


def test_conditional_density_half_acceptance():
    rep = conditional_density_demo(X, make_alpha_beta_state(1, 0), 200_000, seed=4)
    assert rep.acceptance == pytest.approx(0.5, abs=0.01)
    assert not rep.vacuous
    assert len(rep.rows) == 3
    assert rep.agree


def test_conditional_density_aligned_is_vacuous():
    rep = conditional_density_demo(Z, make_alpha_beta_state(1, 0), 50_000, seed=5)
    assert rep.vacuous and rep.n_accepted == 0 and rep.acceptance == 0
    assert not rep.agree


def test_conditional_density_delta_surrogate_runs():
    rep = conditional_density_demo(Z, alpha2_state(0.5), 50_000, seed=6, model=DELTA_CORRELATED, probes=[Z, X])
    assert not rep.vacuous
    assert [list(r.probe) for r in rep.rows] == [list(Z), list(X)]
