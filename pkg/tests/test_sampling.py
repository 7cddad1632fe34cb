import math

import numpy as np
import pytest
from scipy import stats

from sdstein.catalog import exp_profile, gamma1d, rot_inv_stable
from sdstein.charfn import log_cf, log_cf_ratio
from sdstein.levy import ExponentialProfile, PolarLevyMeasure, TabulatedProfile, levy_moment
from sdstein.sampling import (
    SampleBatch,
    compound_poisson_approx,
    empirical_cf,
    flow_sample,
    jump_paths,
    sample_mu_t,
    sample_target,
)


def test_gamma_mean():
    n = 10**5
    x = sample_target(gamma1d(2, 1), n, seed=1).points[:, 0]
    assert abs(x.mean() - 2.0) <= 3 * x.std(ddof=1) / math.sqrt(n)


def test_determinism(catalog):
    for law in catalog.values():
        a = sample_target(law, 500, seed=9).points
        b = sample_target(law, 500, seed=9).points
        assert np.array_equal(a, b)
        c = sample_target(law, 500, seed=10).points
        assert not np.array_equal(a, c)


def test_stable_empirical_cf():
    law = rot_inv_stable(2, 1.5)
    n = 10**5
    x = sample_target(law, n, seed=2).points
    xi = np.random.default_rng(5).standard_normal((20, 2))
    err = np.abs(empirical_cf(x, xi) - np.exp(log_cf(law, xi)))
    assert np.max(err) <= 4 / math.sqrt(n)


def test_mu_t_large_t_matches_target_cf():
    law = rot_inv_stable(1, 1.5)
    n = 10**5
    x = sample_mu_t(law, 20.0, n, seed=3).points
    xi = np.linspace(-2, 2, 9)[:, None]
    err = np.abs(empirical_cf(x, xi) - np.exp(log_cf(law, xi)))
    assert np.max(err) <= 4 / math.sqrt(n)


def test_mu_t_mean_exp_profile():
    law = exp_profile(1.0, 1.0, directions=[[1.0]], weights=[1.0])
    n = 10**5
    x = sample_mu_t(law, 1.0, n, seed=4).points[:, 0]
    assert abs(x.mean() - (1 - math.exp(-1)) * law.mean[0]) <= 3 * x.std(ddof=1) / math.sqrt(n)


def test_mu_t_zero_time(catalog):
    for law in catalog.values():
        assert np.all(sample_mu_t(law, 0.0, 10, seed=0).points == 0)


def test_mu_t_cf_gamma():
    law = gamma1d(2, 1)
    n = 10**5
    x = sample_mu_t(law, 0.5, n, seed=5).points
    xi = np.linspace(-3, 3, 13)[:, None]
    err = np.abs(empirical_cf(x, xi) - np.exp(log_cf_ratio(law, xi, 0.5)))
    assert np.max(err) <= 4 / math.sqrt(n)


def test_jump_representation_target_against_gamma_cdf():
    # independent route: the jump representation versus the gamma distribution function
    x = jump_paths(gamma1d(2, 1), [math.inf], 20000, seed=6)[0][:, 0]
    assert stats.kstest(x, stats.gamma(2.0).cdf).pvalue > 1e-3


def test_flow_keeps_target():
    law = gamma1d(2, 1)
    x0 = sample_target(law, 20000, seed=7)
    y = flow_sample(law, x0, 0.7, seed=8).points[:, 0]
    assert stats.kstest(y, stats.gamma(2.0).cdf).pvalue > 1e-3


def test_cp_zero_truncated_mass_is_deterministic():
    p = TabulatedProfile([0.5, 1.0, 2.0], [2.0, 1.0, 0.0])
    nu = PolarLevyMeasure(1, [[1.0]], [1.0], p)
    b = compound_poisson_approx(nu, 3.0, 50, seed=1)
    assert np.all(b.points == b.points[0])
    assert b.meta["intensity"] == 0.0


def test_cp_second_moment_gamma():
    nu = gamma1d(2, 1).levy
    eps = 0.05
    n = 10**5
    b = compound_poisson_approx(nu, eps, n, seed=2, compensate="full")
    s2 = b.points[:, 0] ** 2
    p = nu.profiles[0]
    target = p.moment("m2_total") - p.int_rk(eps)
    assert abs(s2.mean() - target) <= 3 * s2.std(ddof=1) / math.sqrt(n)
    assert b.trunc_error == pytest.approx(math.sqrt(p.int_rk(eps)))


def test_cp_antipodal_mean_zero():
    nu = PolarLevyMeasure(1, [[1.0], [-1.0]], [0.5, 0.5], ExponentialProfile(1.0, 1.0))
    n = 10**5
    b = compound_poisson_approx(nu, 0.01, n, seed=3, compensate="none")
    x = b.points[:, 0]
    assert abs(x.mean()) <= 3 * x.std(ddof=1) / math.sqrt(n)


def test_batch_csv_roundtrip(tmp_path):
    b = sample_target(gamma1d(), 20, seed=1)
    path = b.to_csv(tmp_path / "x.csv")
    c = SampleBatch.from_csv(path)
    assert np.array_equal(b.points, c.points)
    assert c.sidecar() == b.sidecar()


def test_levy_moment_matches_sampled_jumps():
    # m2_total of an exponential profile against the radius sampler it ships with
    p = ExponentialProfile(1.0, 2.0)
    r2 = p.sample_r2(np.random.default_rng(0), 10**5)
    # U ~ |u|^2 nu / m2, radius Gamma(2, 1/beta): mean 2 / beta
    assert abs(r2.mean() - 1.0) <= 4 * r2.std() / math.sqrt(len(r2))
    assert levy_moment(PolarLevyMeasure(1, [[1.0]], [1.0], p), "m2_total") == pytest.approx(1 / 4)
