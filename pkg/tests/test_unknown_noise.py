from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import sim1
from polyeiv.bootstrap import TestConfig, run_test
from polyeiv.errors import InsufficientReplicationError
from polyeiv.moments import RegressionSample, fit_polynomial
from polyeiv.noise import GaussianNoise, LaplaceNoise
from polyeiv.unknown_noise import (
    EmpiricalNoise,
    ReplicatedSample,
    build_empirical_noise,
    cumulants_from_moments,
    empirical_cf_direct,
    empirical_cf_replicates,
    moments_from_cumulants,
    moments_from_direct,
    moments_from_replicates,
)


def pairs(rng, m, noise, x=None):
    x = rng.uniform(-3, 4, m) if x is None else x
    return ReplicatedSample(np.stack([x + noise.sample(rng, m), x + noise.sample(rng, m)], axis=1))


def test_direct_moment_examples():
    assert np.array_equal(moments_from_direct([1, -1], 2), [1, 0, 1])
    assert np.array_equal(moments_from_direct([2.5, 2.5, 2.5], 4), [1, 0, 0, 0, 0])
    u = np.random.default_rng(0).normal(size=100_000)
    assert abs(moments_from_direct(u, 4)[4] - 3) < 0.1


def test_cumulant_examples():
    s2 = Fraction(7, 3)
    assert cumulants_from_moments([0, s2, 0, 3 * s2**2]) == [0, s2, 0, 0]
    assert cumulants_from_moments([0, 2, 0, 12])[3] == 0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.fractions(min_value=-50, max_value=50, max_denominator=997),
                min_size=1, max_size=8))
def test_cumulant_round_trip_exact(mu):
    assert moments_from_cumulants(cumulants_from_moments(mu)) == mu
    kappa = mu
    assert cumulants_from_moments(moments_from_cumulants(kappa)) == kappa


def test_cumulants_match_known_law():
    # Poisson(2/3): every cumulant equals the rate
    lam = Fraction(2, 3)
    assert moments_from_cumulants([lam] * 4)[3] == lam + 7 * lam**2 + 6 * lam**3 + lam**4


def test_cumulant_order_limit():
    with pytest.raises(ValueError):
        cumulants_from_moments([0] * 9)


def test_replicate_moments_gaussian():
    reps = pairs(np.random.default_rng(1), 10_000, GaussianNoise(1.0))
    nu = moments_from_replicates(reps, 4)
    assert abs(nu[2] - 1) < 0.05 and abs(nu[4] - 3) < 0.2
    assert nu[1] == 0 and nu[3] == 0


def test_replicate_moments_laplace():
    reps = pairs(np.random.default_rng(2), 20_000, LaplaceNoise(0.5))
    nu = moments_from_replicates(reps, 4)
    assert nu[2] == pytest.approx(0.5, abs=0.03)
    assert nu[4] == pytest.approx(1.5, abs=0.3)


def test_single_group_and_degenerate():
    reps = ReplicatedSample([[3.0, 1.5]])
    assert np.mean(reps.differences() ** 2) == pytest.approx(2.25)
    assert reps.n_pairs == 2
    flat = ReplicatedSample([[1.0, 1.0], [4.0, 4.0, 4.0]])
    assert np.array_equal(moments_from_replicates(flat, 6), [1, 0, 0, 0, 0, 0, 0])
    with pytest.raises(InsufficientReplicationError):
        ReplicatedSample([[1.0], [2.0]]).differences()
    with pytest.raises(ValueError):
        moments_from_replicates(reps, 3)


def test_from_long():
    reps = ReplicatedSample.from_long([2, 1, 2, 1, 3], [10, 20, 11, 21, 5], [0, 1, 2, 3, 4])
    assert [g.tolist() for g in reps.w_groups] == [[20, 21], [10, 11], [5]]
    assert reps.pooled().n == 5
    assert sorted(np.abs(reps.differences())) == [1, 1]


def test_empirical_cf_examples():
    u = np.random.default_rng(3).normal(size=100_000)
    assert empirical_cf_direct(u, 0.0) == pytest.approx(1.0)
    assert abs(empirical_cf_direct(u, 1.0) - np.exp(-0.5)) < 0.01
    assert empirical_cf_direct(np.array([0.0, np.pi]), 1.0, ridge=0.05) == 0.05
    reps = pairs(np.random.default_rng(4), 10_000, LaplaceNoise(0.5))
    assert empirical_cf_replicates(reps, 0.0) == pytest.approx(1.0)
    assert abs(empirical_cf_replicates(reps, 2.0) - 0.5) < 0.02
    one = ReplicatedSample([[1.3, 1.3]])
    assert np.allclose(empirical_cf_replicates(one, np.linspace(0, 9, 10)), 1.0)


def test_empirical_noise_tracks_true_model():
    u = LaplaceNoise(0.5).sample(np.random.default_rng(5), 50_000)
    nz = build_empirical_noise(u, ridge=0.0)
    t = np.linspace(-3, 3, 13)
    assert np.max(np.abs(nz.cf(t) - LaplaceNoise(0.5).cf(t))) < 0.02
    for r in (1, 2):
        assert np.allclose(nz.phi(r, t), LaplaceNoise(0.5).phi(r, t), atol=0.1)
    assert np.allclose(nz.phi(0, t), 1.0)
    assert not nz.low_confidence


def test_empirical_phi_on_exact_table():
    # with the exact CF tabulated, the difference scheme reproduces phi_r
    t = 0.01 * np.arange(-1000, 1001)
    nz = EmpiricalNoise(GaussianNoise(1.0).moments(8), t, GaussianNoise(1.0).cf(t))
    s = np.array([-2.0, 0.5, 1.5])
    for r in range(4):
        assert np.allclose(nz.phi(r, s), GaussianNoise(1.0).phi(r, s), rtol=1e-3, atol=1e-3)


def test_fit_with_direct_noise():
    rng = np.random.default_rng(6)
    s, _ = sim1(rng, 10_000)
    nz = build_empirical_noise(rng.normal(size=10_000))
    assert np.max(np.abs(fit_polynomial(s, nz, 1).beta - [0, 1])) < 0.15


def test_fit_with_replicates():
    rng = np.random.default_rng(7)
    x = rng.uniform(-3, 4, 10_000)
    reps = pairs(rng, 10_000, GaussianNoise(1.0), x)
    y = x + rng.normal(size=10_000)
    sample = RegressionSample(np.array([g[0] for g in reps.w_groups]), y)
    nz = build_empirical_noise(reps)
    assert np.max(np.abs(fit_polynomial(sample, nz, 1).beta - [0, 1])) < 0.15


def test_low_confidence_flag():
    # a heavy spread of "noise" makes the CF estimate hit the floor almost at once
    u = np.random.default_rng(8).normal(0, 50, 400)
    nz = build_empirical_noise(u)
    assert nz.low_confidence
    assert nz.to_dict()["low_confidence"] is True


def test_surrogates_run_in_bootstrap():
    rng = np.random.default_rng(9)
    s, _ = sim1(rng, 80)
    u = rng.normal(size=500)
    for sur in ("resample", "gaussian"):
        nz = build_empirical_noise(u, surrogate=sur)
        rep = run_test(s, nz, TestConfig(B=10))
        assert rep.diagnostics["noise"]["family"] == "empirical"
    with pytest.raises(ValueError):
        build_empirical_noise(pairs(rng, 50, GaussianNoise(1.0)), surrogate="resample")
