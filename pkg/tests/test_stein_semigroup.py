import math

import numpy as np
import pytest

from sdstein.catalog import gamma1d, multi_gamma, rot_inv_stable
from sdstein.semigroup import (
    apply_semigroup,
    characterization_identity,
    choose_tmax,
    compose_semigroup,
    estimate_mean_h,
    generator_apply,
    solve_stein,
    stein_residual,
    time_rule,
)
from sdstein.testfunctions import Constant, Cosine, GaussianBump, Linear, TanhRamp, sine

from oracles import GAMMA1D_GEN_SIN_AT_1


def test_time_zero_is_identity(catalog):
    for law in catalog.values():
        h = TanhRamp(np.ones(law.dimension) / math.sqrt(law.dimension), 0.5, 1.0, 0.3)
        x = np.linspace(-2, 2, 5)[:, None] * np.ones(law.dimension)
        assert np.array_equal(apply_semigroup(law, h, 0.0, x).value, h.value(x))


def test_large_time_gives_mean():
    law = gamma1d()
    h = TanhRamp([1.0], 0.5, 1.0, 2.0)
    p = apply_semigroup(law, h, 20.0, [[0.0], [5.0]], n=200000, seed=1)
    eh = estimate_mean_h(law, h, 10**6, seed=2)
    assert np.all(np.abs(p.value - eh.value) <= 3 * np.hypot(p.se, eh.se))


def test_composition():
    law = multi_gamma([1.0, 2.0])
    h = TanhRamp(np.ones(2) / math.sqrt(2), 0.5, 1.0, 2.0)
    x = np.array([[0.0, 0.0], [1.0, 3.0]])
    nested = compose_semigroup(law, h, 0.7, 0.3, x, 40000, seed=3)
    direct = apply_semigroup(law, h, 1.0, x, n=40000, seed=4)
    assert np.all(np.abs(nested.value - direct.value) <= 3 * np.hypot(nested.se, direct.se))


def test_fourier_route_matches_mc():
    law = rot_inv_stable(1, 1.5)
    b = GaussianBump([0.0], 1.0)
    x = np.array([[-1.0], [0.0], [2.0]])
    mc = apply_semigroup(law, b, 0.5, x, "mc", 100000, seed=5)
    fo = apply_semigroup(law, b, 0.5, x, "fourier")
    assert np.all(np.abs(mc.value - fo.value) <= 3 * np.hypot(mc.se, fo.se))


def test_generator_linear(catalog):
    for law in catalog.values():
        a = np.arange(1, law.dimension + 1, dtype=float)
        x = np.random.default_rng(0).standard_normal((4, law.dimension))
        got = generator_apply(law, Linear(a), x).value
        assert np.allclose(got, (law.mean - x) @ a, atol=1e-10)


def test_generator_sine_gamma_frozen_and_richardson():
    law = gamma1d(2, 1)
    got = float(generator_apply(law, sine(1.0), [[1.0]]).value[0])
    assert got == pytest.approx(GAMMA1D_GEN_SIN_AT_1, abs=1e-8)

    # exact P_t sin via the gamma CF: P_t sin(x) = Im(e^{i e^{-t} x} phi(1) / phi(e^{-t}))
    phi = lambda s: (1 - 1j * s) ** -2.0

    def p(t):
        return (np.exp(1j * math.exp(-t) * 1.0) * phi(1.0) / phi(math.exp(-t))).imag

    d = {t: (p(t) - math.sin(1.0)) / t for t in (0.02, 0.01, 0.005)}
    r1 = 2 * d[0.01] - d[0.02]
    r2 = 2 * d[0.005] - d[0.01]
    rich = (4 * r2 - r1) / 3
    assert abs(got - rich) < 5e-3


def test_generator_stable_closed_form():
    # A sin(wx) = -w x cos(wx) - alpha C w^alpha sin(wx) for the symmetric stable law
    law = rot_inv_stable(1, 1.5)
    C = law.closed_form["C"]
    for w in (0.5, 1.0, 2.0):
        x = np.array([[-1.0], [0.3], [2.0]])
        got = generator_apply(law, sine(w), x).value
        exp = -w * x[:, 0] * np.cos(w * x[:, 0]) - 1.5 * C * w**1.5 * np.sin(w * x[:, 0])
        assert np.allclose(got, exp, atol=1e-6)


def test_generator_drift_vanishes_at_mean():
    law = multi_gamma([1.0, 2.0])
    b = GaussianBump(law.mean, 1.0)
    full = generator_apply(law, b, law.mean[None, :]).value
    from sdstein.semigroup import jump_integral

    assert full == pytest.approx(jump_integral(law.levy, b, law.mean[None, :]), abs=1e-14)


def test_constant_h_gives_zero_solution():
    law = gamma1d()
    x = np.array([[0.0], [1.0], [3.0]])
    sol = solve_stein(law, Constant(1, 0.4), x, n_mc=200, seed=1)
    assert np.all(sol.f.value == 0) and np.all(sol.grad.value == 0) and np.all(sol.hess.value == 0)
    res = stein_residual(law, sol, x, n_eh=1000)
    assert np.all(res.value == 0)


def test_stein_residual_gamma():
    law = gamma1d(2, 1)
    h = TanhRamp([1.0], 0.5, 1.0, 0.0)
    x = np.array([[0.0], [1.0], [3.0]])
    sol = solve_stein(law, h, x, n_mc=2000, tol=1e-2, seed=0)
    res = stein_residual(law, sol, x)
    assert np.all(np.abs(res.value) <= 3 * (1e-2 + res.se))


def test_derivative_bounds_small_grid():
    law = rot_inv_stable(1, 1.5)
    x = np.linspace(-4, 4, 41)[:, None]
    h = Cosine([1.0], 1.0, 0.3)
    sol = solve_stein(law, h, x, n_mc=1000, seed=2)
    assert np.all(np.abs(sol.grad.value) <= 1 + 2 * sol.grad.se)
    assert np.all(np.abs(sol.hess.value) <= 0.5 + 2 * sol.hess.se)


def test_characterization_identity():
    law = gamma1d(2, 1)
    r = characterization_identity(law, TanhRamp([1.0], 0.5, 1.0, 2.3), n=10**5, seed=7)
    assert abs(r["difference"].value) <= 3 * r["difference"].se


def test_time_rule_integrates_exponentials():
    t, w = time_rule(40.0)
    for a in (0.05, 1.0, 5.0):
        assert np.sum(w * np.exp(-a * t)) == pytest.approx((1 - math.exp(-40 * a)) / a, rel=1e-8)


def test_horizon_grows_with_accuracy():
    law = gamma1d()
    T1, _ = choose_tmax(law, 1e-2, 1.0)
    T2, _ = choose_tmax(law, 1e-3, 1.0)
    assert T2 > T1 > 0
