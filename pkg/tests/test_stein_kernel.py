import math

import numpy as np
import pytest

from sdstein.catalog import exp_profile, gamma1d, multi_gamma, rot_inv_stable
from sdstein.errors import DegenerateDenominator, InfiniteSecondMomentNu, MomentMismatch, SingularSystem
from sdstein.kernel import (
    LinearField,
    SteinKernelFn,
    bound_from_poincare,
    center,
    discrepancy,
    discrepancy_bound_from_poincare,
    discrepancy_squared,
    energy_identity,
    galerkin_solve,
    poincare_ratio,
    stein_bound,
)
from sdstein.levy import levy_moment
from sdstein.sampling import sample_target
from sdstein.testfunctions import Constant, TanhRamp


@pytest.fixture(scope="module")
def gamma_fit():
    law = gamma1d(2, 1)
    Y = sample_target(law, 200000, seed=1)
    tau, system = galerkin_solve(law, Y, seed=2)
    held = center(sample_target(law, 200000, seed=3))
    return law, tau, system, held


def test_identity_is_a_kernel_of_the_target(catalog):
    for name in ("gamma1d", "multi_gamma2", "exp_profile2"):
        law = catalog[name]
        Y = center(sample_target(law, 2000, seed=1))
        S = discrepancy(law, Y, SteinKernelFn.identity(law.dimension))
        assert S.value < 1e-12


def test_zero_kernel_gives_m2(catalog):
    for name in ("gamma1d", "multi_gamma2", "exp_profile1"):
        law = catalog[name]
        Y = center(sample_target(law, 500, seed=1))
        zero = SteinKernelFn.from_callable(law.dimension, lambda y: np.zeros_like(y))
        s2 = discrepancy_squared(law, Y, zero)
        assert s2.value == pytest.approx(levy_moment(law, "m2_total"), rel=1e-12)


def test_infinite_m2_rejected():
    law = rot_inv_stable(1, 1.5)
    with pytest.raises(InfiniteSecondMomentNu):
        discrepancy(law, np.zeros((10, 1)), SteinKernelFn.identity(1))


def test_galerkin_close_to_identity(gamma_fit):
    law, tau, system, held = gamma_fit
    S = discrepancy(law, held, tau, seed=4)
    S_id = discrepancy(law, held, SteinKernelFn.identity(1), seed=4)
    # noise of the fitted coefficients enters S at first order
    assert S.value <= S_id.value + 3 * S.se + 3 * system.meta["fit_noise"]
    assert system.min_eig > 0
    assert system.residual < 1e-8


def test_energy_identity(gamma_fit):
    law, tau, system, held = gamma_fit
    e = energy_identity(law, held, tau, seed=5)
    assert abs(e["difference"].value) <= 3 * e["difference"].se
    se = math.sqrt(e["A"].se ** 2 + e["second_moment"].se ** 2 + system.meta["energy_fit_se"] ** 2)
    assert e["A"].value <= e["second_moment"].value + 3 * se


def test_discrepancy_side_bound(gamma_fit):
    law, tau, system, held = gamma_fit
    S = discrepancy(law, held, tau, seed=6)
    m2 = levy_moment(law, "m2_total")
    sq = np.sum(held**2, axis=1)
    slack = 3 * sq.std(ddof=1) / math.sqrt(len(sq))
    bound = math.sqrt(max(m2 - sq.mean(), 0.0) + slack)
    assert discrepancy_bound_from_poincare(law, held, 1.0) <= bound
    assert S.value <= bound + 3 * system.meta["fit_noise"]


def test_singular_basis():
    law = gamma1d()
    Y = sample_target(law, 5000, seed=1)
    basis = [LinearField(1, 0, 0), LinearField(1, 0, 0)]
    with pytest.raises(SingularSystem):
        galerkin_solve(law, Y, basis=basis, ridge=0.0)


def test_system_json(tmp_path, gamma_fit):
    import json

    _, _, system, _ = gamma_fit
    system.to_json(tmp_path / "g.json")
    doc = json.loads((tmp_path / "g.json").read_text())
    assert np.allclose(np.array(doc["A"]) @ np.array(doc["coeffs"]), doc["L"], atol=1e-6)


def test_poincare_target(catalog):
    for name in ("gamma1d", "multi_gamma2", "exp_profile1"):
        law = catalog[name]
        Y = center(sample_target(law, 50000, seed=2))
        res = poincare_ratio(Y, law, seed=3)
        for row in res.rows:
            assert row["ratio"] <= 1 + 3 * row["se"], (name, row)
            if row["name"].startswith("coordinate_"):
                assert abs(row["ratio"] - 1) <= 3 * row["se"], (name, row)


def test_poincare_constant_rejected():
    law = gamma1d()
    Y = center(sample_target(law, 100, seed=1))
    with pytest.raises(DegenerateDenominator):
        poincare_ratio(Y, law, dictionary=[Constant(1, 1.0)])


def test_poincare_detects_heavier_spread():
    # Y = 2 (X - EX) has variance 4 m2 against nu: the coordinate ratio is about 4
    law = gamma1d()
    Y = 2 * center(sample_target(law, 50000, seed=4))
    res = poincare_ratio(Y, law, seed=5)
    assert res.value > 2


def test_poincare_bounds():
    law = multi_gamma([1.0, 2.0])
    Y = center(sample_target(law, 50000, seed=6))
    assert bound_from_poincare(law, Y, 1.0, "matched") == 0.0
    m2 = levy_moment(law, "m2_total")
    ey2 = float(np.mean(np.sum(Y**2, axis=1)))
    U = 1.7
    gen = bound_from_poincare(law, Y, U, "general")
    assert gen == pytest.approx(np.sqrt(m2) * math.sqrt(U * ey2 + m2 - 2 * ey2), rel=1e-12)
    # with E|Y|^2 = m2 the general form is the matched one
    Ys = Y * math.sqrt(m2 / ey2)
    assert bound_from_poincare(law, Ys, U, "general") == pytest.approx(
        bound_from_poincare(law, Ys, U, "matched"), rel=1e-10)
    with pytest.raises(MomentMismatch):
        bound_from_poincare(law, 3 * Y, U, "matched")


def test_stein_bound_scale():
    law = exp_profile(1.0, 1.0, d=2)
    from sdstein._estimate import Estimate

    b = stein_bound(law, Estimate(0.1, 0.01))
    k = math.sqrt(levy_moment(law, "m2_total"))
    assert b.value == pytest.approx(k * 0.1) and b.se == pytest.approx(k * 0.01)


def test_kernel_identity_for_test_fields():
    # E<Y, f(Y)> = E int <f(Y+u) - f(Y), u> nu(du) for Y = X, checked with the increments route
    law = gamma1d()
    Y = center(sample_target(law, 200000, seed=7))
    f = TanhRamp([1.0], 0.5, 1.0, 0.3)
    lhs = Y[:, 0] * (f.value(Y) - f.value(Y).mean())
    from sdstein.kernel import sample_r2_jumps
    from sdstein.streams import stream

    U, m2 = sample_r2_jumps(law, len(Y), stream(8, "test"))
    rhs = m2 * (f.value(Y + U) - f.value(Y)) / U[:, 0]
    diff = lhs.mean() - rhs.mean()
    se = math.hypot(lhs.std() / math.sqrt(len(Y)), rhs.std() / math.sqrt(len(Y)))
    assert abs(diff) <= 3 * se
