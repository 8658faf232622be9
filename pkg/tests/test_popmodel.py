import math

import numpy as np
import pytest
from scipy import stats

from wardpop.errors import DimensionMismatch, EmptyChain, InvalidInput
from wardpop.popmodel import (
    GroupKey,
    LocationRecord,
    MapConfig,
    MHConfig,
    Microcensus,
    ModelParams,
    chain_from_params,
    fit_map,
    fit_mh,
    log_joint,
    mu_linear,
    mu_vector,
    predict,
    predict_many,
    simulate_counts,
    simulate_dataset,
    simulate_location,
)
from wardpop.popmodel import io as pio

KEY0 = GroupKey(0, 0, 0, 0)


def true_params(sigma=0.3):
    p = ModelParams.zeros((2, 2, 1, 1), K=3, sigma=sigma)
    p.alpha0 = math.log(100.0)
    p.alpha_t[:] = [0.3, -0.3]
    p.alpha_r[:] = [-0.2, 0.2]
    p.beta[:] = [0.5, -0.3, 0.1]
    return p


# -- linear predictor and simulation ----------------------------------------

def test_mu_zero():
    p = ModelParams.zeros(K=2)
    assert mu_linear(p, LocationRecord(KEY0, (0.3, 0.7), 1.0)) == 0.0


def test_mu_intercept_only():
    p = ModelParams.zeros(K=2)
    p.alpha0 = math.log(100.0)
    assert mu_linear(p, LocationRecord(KEY0, (5.0, -2.0), 1.0)) == math.log(100.0)


def test_mu_dot_product():
    p = ModelParams.zeros(K=2)
    p.alpha0 = 1.0
    p.beta[:] = [2.0, -1.0]
    assert mu_linear(p, LocationRecord(KEY0, (0.5, 1.0), 1.0)) == 1.0


def test_mu_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        mu_linear(ModelParams.zeros(K=2), LocationRecord(KEY0, (1.0,), 1.0))


def test_location_record_validation():
    with pytest.raises(InvalidInput):
        LocationRecord(KEY0, (), 0.0)
    with pytest.raises(InvalidInput):
        LocationRecord(KEY0, (), 1.0, -1)


def test_zero_area_gives_zero_count():
    p = ModelParams.zeros(sigma=0.5)
    p.alpha0 = 5.0
    rng = np.random.default_rng(0)
    assert all(simulate_location(p, KEY0, (), 0.0, rng)[1] == 0 for _ in range(200))


def test_simulated_mean_matches_poisson_rate():
    p = ModelParams.zeros(sigma=1e-9)
    p.alpha0 = math.log(100.0)
    rng = np.random.default_rng(1)
    _, N = simulate_counts(p, np.zeros((10_000, 4), dtype=int), np.zeros((10_000, 0)), np.ones(10_000), rng)
    assert abs(N.mean() - 100.0) <= 1.0


def test_simulation_deterministic():
    p = true_params()
    a = simulate_dataset(p, 50, np.random.default_rng(42))
    b = simulate_dataset(p, 50, np.random.default_rng(42))
    assert np.array_equal(a[1], b[1]) and np.array_equal(a[0].N, b[0].N)


# -- log joint ---------------------------------------------------------------

def test_log_joint_prior_only():
    p = ModelParams.zeros((2, 1, 1, 1), K=2, sigma=1.0)
    data = Microcensus(np.zeros((0, 4), dtype=int), np.zeros((0, 2)), [], [], (2, 1, 1, 1))
    expected = (
        stats.norm.logpdf(0.0, scale=10.0)            # alpha0
        + 5 * stats.norm.logpdf(0.0, scale=1.0)       # five group effects
        + 2 * stats.norm.logpdf(0.0, scale=10.0)      # beta
        + stats.halfnorm.logpdf(1.0, scale=1.0)       # sigma
    )
    assert log_joint(p, data, []) == pytest.approx(expected, rel=1e-12)


def test_log_joint_single_record():
    p = ModelParams.zeros(K=1, sigma=0.4)
    p.alpha0 = 2.0
    p.beta[:] = [0.5]
    x, A, N, D = 1.2, 1.7, 9, 5.5
    data = Microcensus(np.zeros((1, 4), dtype=int), [[x]], [A], [N], (1, 1, 1, 1))
    mu = 2.0 + 0.5 * x
    prior = (
        stats.norm.logpdf(2.0, scale=10.0) + 4 * stats.norm.logpdf(0.0)
        + stats.norm.logpdf(0.5, scale=10.0) + stats.halfnorm.logpdf(0.4)
    )
    lik = stats.poisson.logpmf(N, D * A) + stats.lognorm.logpdf(D, s=0.4, scale=math.exp(mu))
    assert log_joint(p, data, [D]) == pytest.approx(prior + lik, rel=1e-12)


def test_log_joint_unobserved_count_skips_poisson_term():
    p = ModelParams.zeros(sigma=0.4)
    data = Microcensus(np.zeros((1, 4), dtype=int), np.zeros((1, 0)), [1.0], [-1], (1, 1, 1, 1))
    prior = stats.norm.logpdf(0.0, scale=10.0) + 4 * stats.norm.logpdf(0.0) + stats.halfnorm.logpdf(0.4)
    assert log_joint(p, data, [2.0]) == pytest.approx(prior + stats.lognorm.logpdf(2.0, s=0.4), rel=1e-12)


@pytest.mark.parametrize("sigma", [0.0, -0.5])
def test_log_joint_sigma_out_of_support(sigma):
    p = ModelParams.zeros(sigma=sigma)
    data = Microcensus(np.zeros((1, 4), dtype=int), np.zeros((1, 0)), [1.0], [3], (1, 1, 1, 1))
    assert log_joint(p, data, [1.0]) == -math.inf


def test_log_joint_dimension_mismatch():
    data = Microcensus(np.zeros((2, 4), dtype=int), np.zeros((2, 0)), [1.0, 1.0], [3, 4], (1, 1, 1, 1))
    with pytest.raises(DimensionMismatch):
        log_joint(ModelParams.zeros(), data, [1.0])


# -- MAP ---------------------------------------------------------------------

def test_map_recovers_intercept_single_group():
    p = ModelParams.zeros(K=2, sigma=0.05)
    p.alpha0 = math.log(80.0)
    data, _ = simulate_dataset(p, 400, np.random.default_rng(4))
    res = fit_map(data)
    # moment estimate from the same data
    oracle = math.log(float(data.N.sum() / data.A.sum()))
    assert abs(res.params.alpha0 - oracle) <= 0.05


def test_map_trace_non_decreasing():
    data, _ = simulate_dataset(true_params(), 300, np.random.default_rng(5))
    res = fit_map(data)
    assert res.converged
    assert all(b >= a for a, b in zip(res.trace, res.trace[1:]))


def test_map_local_optimality():
    data, _ = simulate_dataset(true_params(), 300, np.random.default_rng(6))
    res = fit_map(data)
    base = log_joint(res.params, data, res.D)
    vec = res.params.to_vector()
    for i in range(vec.size):
        for delta in (-0.1, 0.1):
            v = vec.copy()
            v[i] += delta
            q = ModelParams.from_vector(v, res.params.levels, 3, 1)
            assert log_joint(q, data, res.D) <= base
    for i in range(0, len(data), 37):
        for delta in (-0.1, 0.1):
            D = res.D.copy()
            D[i] *= math.exp(delta)
            assert log_joint(res.params, data, D) <= base


def test_map_per_type_sigma():
    p = true_params()
    p.sigma = np.array([0.2, 0.5])
    data, _ = simulate_dataset(p, 600, np.random.default_rng(8))
    res = fit_map(data, MapConfig(per_type_sigma=True))
    assert res.params.sigma.shape == (2,)
    assert res.params.sigma[0] < res.params.sigma[1]


def test_fit_rejects_empty():
    data = Microcensus(np.zeros((0, 4), dtype=int), np.zeros((0, 0)), [], [], (1, 1, 1, 1))
    with pytest.raises(InvalidInput):
        fit_map(data)


# -- MH ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def synthetic():
    return simulate_dataset(true_params(), 500, np.random.default_rng(10))[0]


@pytest.fixture(scope="module")
def chain(synthetic):
    return fit_mh(synthetic, MHConfig(draws=1500, burn_in=800, seed=3))


def test_zero_step_constant_chain(synthetic):
    c = fit_mh(synthetic, MHConfig(draws=50, burn_in=10, seed=1, step_params=0.0, step_latent=0.0))
    assert c.acceptance_rate == 1.0
    assert np.all(c.samples == c.samples[0])


def test_chain_shape_and_rates(chain):
    assert len(chain) == 1500
    assert 0.0 < chain.acceptance_rate < 1.0
    assert 0.0 < chain.latent_acceptance_rate < 1.0


def test_chain_seed_deterministic(synthetic):
    a = fit_mh(synthetic, MHConfig(draws=100, burn_in=50, seed=9))
    b = fit_mh(synthetic, MHConfig(draws=100, burn_in=50, seed=9))
    assert np.array_equal(a.samples, b.samples)


def test_chain_backends_identical(synthetic, monkeypatch):
    out = []
    for flag in ("0", "1"):
        monkeypatch.setenv("WARDPOP_DISABLE_NUMBA", flag)
        out.append(fit_mh(synthetic, MHConfig(draws=100, burn_in=50, seed=2)).samples)
    np.testing.assert_allclose(out[0], out[1], rtol=1e-12, atol=1e-12)


def test_beta_intervals_cover_truth(chain):
    for k, b in enumerate(true_params().beta):
        lo, hi = chain.interval(f"beta[{k}]")
        assert lo <= b <= hi


def test_posterior_beats_prior_draw(chain, synthetic):
    rng = np.random.default_rng(0)
    p = ModelParams.zeros(synthetic.levels, 3)
    p.alpha0 = rng.normal(0, 10)
    for eff in p.effects:
        eff[:] = rng.normal(0, 1, eff.size)
    p.beta[:] = rng.normal(0, 10, 3)
    p.sigma[:] = abs(rng.normal(0, 1))
    mu = mu_vector(p, synthetic.keys, synthetic.X)
    D = np.exp(mu + p.sigma[0] * rng.standard_normal(mu.size))
    assert chain.log_joint.mean() >= log_joint(p, synthetic, D)


def test_chain_csv_round_trip(chain):
    back = pio.read_chain_csv(pio.chain_csv(chain), pio.chain_manifest(chain))
    assert back.names == chain.names
    assert np.array_equal(back.samples, chain.samples)
    assert np.array_equal(back.log_joint, chain.log_joint)
    assert back.levels == chain.levels


def test_dataset_csv_round_trip(synthetic):
    back = pio.read_dataset_csv(pio.dataset_csv(synthetic))
    assert np.array_equal(back.X, synthetic.X)
    assert np.array_equal(back.A, synthetic.A)
    assert np.array_equal(back.N, synthetic.N)
    assert np.array_equal(back.keys, synthetic.keys)


# -- prediction ---------------------------------------------------------------

def _fixed_chain(sigma):
    p = ModelParams.zeros(sigma=sigma)
    p.alpha0 = math.log(100.0)
    return chain_from_params([p])


def test_predict_degenerate_sigma():
    mean, (lo, hi) = predict(_fixed_chain(1e-9), KEY0, (), 2.0, n_samples=20_000)
    assert mean == pytest.approx(200.0, rel=1e-12)
    # quantiles of Poisson(200)
    assert abs(lo - stats.poisson.ppf(0.025, 200)) <= 3
    assert abs(hi - stats.poisson.ppf(0.975, 200)) <= 3


def test_interval_widens_with_sigma():
    _, (lo1, hi1) = predict(_fixed_chain(0.1), KEY0, (), 1.0, seed=5)
    _, (lo6, hi6) = predict(_fixed_chain(0.6), KEY0, (), 1.0, seed=5)
    assert hi6 - lo6 > hi1 - lo1


def test_doubling_area_doubles_mean(chain, synthetic):
    keys, X, A = synthetic.keys[:20], synthetic.X[:20], synthetic.A[:20]
    m1, _, _ = predict_many(chain, keys, X, A)
    m2, _, _ = predict_many(chain, keys, X, 2.0 * A)
    assert np.array_equal(m2, 2.0 * m1)


def test_interval_ordering(chain, synthetic):
    mean, lo, hi = predict_many(chain, synthetic.keys, synthetic.X, synthetic.A)
    assert np.all(lo <= mean) and np.all(mean <= hi)


def test_calibration_on_held_out_locations(chain):
    rng = np.random.default_rng(77)
    held, _ = simulate_dataset(true_params(), 200, rng)
    _, lo, hi = predict_many(chain, held.keys, held.X, held.A, seed=1)
    coverage = np.mean((held.N >= lo) & (held.N <= hi))
    assert 0.90 <= coverage <= 1.0


def test_predict_errors(chain):
    empty = chain_from_params([ModelParams.zeros()])
    empty.samples = empty.samples[:0]
    with pytest.raises(EmptyChain):
        predict_many(empty, [KEY0], [[]], [1.0])
    with pytest.raises(InvalidInput):
        predict(chain, (5, 0, 0, 0), (0, 0, 0), 1.0)
    with pytest.raises(InvalidInput):
        predict(chain, KEY0, (0, 0, 0), 1.0, q=1.0)
