import math

import numpy as np
import pytest

from sdstein.catalog import gamma1d, rot_inv_stable
from sdstein.distances import (
    TestFunctionDictionary,
    default_dictionary,
    dictionary_for,
    linear_seed,
    mollify,
    norm_cone,
    optimal_transport,
    smooth_wasserstein_lb,
    smoothing_curve,
    stable_abs_moment,
    wasserstein_empirical,
)
from sdstein.errors import EmptyDictionary, SizeMismatch, SizeTooLarge
from sdstein.testfunctions import TanhRamp, empirical_bounds

from oracles import STABLE15_ABS_MEAN


def test_same_points_any_order(rng):
    A = rng.standard_normal((200, 2))
    assert wasserstein_empirical(A, A[rng.permutation(200)], 1) == 0.0


def test_one_dimension_is_sorted_coupling(rng):
    a, b = rng.standard_normal(300), rng.exponential(size=300)
    for p in (1, 2):
        sorted_cost = np.mean(np.abs(np.sort(a) - np.sort(b)) ** p) ** (1 / p)
        assert wasserstein_empirical(a, b, p) == pytest.approx(sorted_cost, rel=1e-12)


def test_w1_below_w2(rng):
    A, B = rng.standard_normal((300, 2)), rng.standard_normal((300, 2)) + 0.3
    assert wasserstein_empirical(A, B, 1) <= wasserstein_empirical(A, B, 2) + 1e-12


def test_size_errors(rng):
    with pytest.raises(SizeMismatch):
        optimal_transport(rng.standard_normal((5, 1)), rng.standard_normal((6, 1)))
    with pytest.raises(SizeTooLarge):
        optimal_transport(np.zeros((5000, 1)), np.zeros((5000, 1)))


def test_lower_bound_basics(rng):
    A, B = rng.standard_normal((400, 1)), rng.standard_normal((400, 1)) + 0.5
    assert smooth_wasserstein_lb(A, A, 2).value == 0.0
    h = TanhRamp([1.0], 0.5, 1.0, 0.0)
    one = TestFunctionDictionary([h], 2)
    lb = smooth_wasserstein_lb(A, B, 2, one)
    assert lb.value == pytest.approx(abs(h.value(A).mean() - h.value(B).mean()), rel=1e-14)
    with pytest.raises(EmptyDictionary):
        smooth_wasserstein_lb(A, B, 2, TestFunctionDictionary([], 2))


def test_sandwich(rng):
    A, B = rng.standard_normal((500, 2)), rng.standard_normal((500, 2)) * 1.3
    lb2 = smooth_wasserstein_lb(A, B, 2).value
    lb1 = smooth_wasserstein_lb(A, B, 1).value
    w1 = wasserstein_empirical(A, B, 1)
    assert lb2 <= lb1 + 1e-12 <= w1 + 2e-12


def test_dictionaries_certified():
    for d in (1, 2):
        D2 = default_dictionary(d, 2)
        D1 = default_dictionary(d, 1)
        assert D2.certified() and D1.certified()
        assert len(D2) == 64 * d
        names2 = {(f.name, str(f.describe())) for f in D2}
        names1 = {(f.name, str(f.describe())) for f in D1}
        assert names2 <= names1
        rng = np.random.default_rng(d)
        pts = rng.standard_normal((300, d)) * 3
        for f in list(D2)[:: max(1, len(D2) // 16)]:
            m0, m1, m2 = empirical_bounds(f, pts)
            assert m0 <= 1 + 1e-9 and m1 <= 1 + 1e-9 and m2 <= 1 + 1e-9


def test_mollify_linear_is_exact():
    seed = linear_seed([0.6, -0.8], 0.1)
    h = mollify(seed, 0.3)
    x = np.random.default_rng(0).standard_normal((10, 2))
    assert np.allclose(h.value(x), x @ [0.6, -0.8] + 0.1, atol=1e-12)
    assert np.allclose(h.grad(x), [0.6, -0.8], atol=1e-10)
    assert np.allclose(h.hess(x), 0.0, atol=1e-8)


def test_mollify_deviation():
    cone = norm_cone([0.0], 1.0)
    x = np.linspace(-3, 3, 601)[:, None]
    devs = []
    for eps in (0.4, 0.2, 0.1):
        h = mollify(cone, eps, nodes=64)
        dev = float(np.max(np.abs(h.value(x) - cone(x))))
        assert dev <= 1 * eps
        devs.append(dev)
    assert devs[0] > devs[1] > devs[2]


def test_mollify_rejects_steep_seed():
    with pytest.raises(ValueError):
        mollify(linear_seed([2.0]), 1.0)


def test_stable_abs_moment_frozen():
    assert stable_abs_moment(rot_inv_stable(1, 1.5)) == pytest.approx(STABLE15_ABS_MEAN, rel=1e-10)


def test_smoothing_curve_stable_matches_scaling():
    law = rot_inv_stable(1, 1.5)
    t = np.array([0.5, 1.0, 2.0, 4.0])
    c = smoothing_curve(law, t, n=512, seed=3)
    assert c.coupling == "scaling"
    assert np.all(np.abs(c.estimate - c.oracle) <= 3 * c.oracle_se + 1e-12)
    assert c.slope < 0
    assert np.all(c.estimate <= c.fitted_bound() + 1e-12)


def test_smoothing_curve_gamma(tmp_path):
    law = gamma1d()
    c = smoothing_curve(law, [0.5, 1.0, 2.0, 4.0], n=512, seed=4)
    assert c.coupling == "self_decomposition"
    assert c.slope < 0 and math.isfinite(c.C_hat)
    c.to_csv(tmp_path / "c.csv")
    rows = np.loadtxt(tmp_path / "c.csv", delimiter=",", skiprows=1)
    assert rows.shape == (4, 4)


def test_dictionary_for_scales_with_sample(rng):
    A = rng.standard_normal((100, 1)) * 5 + 10
    D = dictionary_for(A, A, 2)
    assert D.recipe["scale"] == pytest.approx(float(A.std()), rel=1e-12)
