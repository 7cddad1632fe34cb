import math

import numpy as np
import pytest

from sdstein.catalog import exp_profile, gamma1d, multi_gamma, rot_inv_stable, symmetric_stable
from sdstein.errors import InvalidLevyMeasure, NonPositiveRadius, UnknownDirection
from sdstein.levy import (
    CallableProfile,
    ExponentialProfile,
    PolarLevyMeasure,
    PowerProfile,
    Profile,
    SDLawSpec,
    TabulatedProfile,
    check_admissible,
    levy_moment,
    radial_profile_eval,
)

from oracles import GAMMA1D_M2_TOTAL


def test_stable_profile_value():
    law = rot_inv_stable(2, 1.5)
    x = np.array([0.6, 0.8])
    assert radial_profile_eval(law, x, 2.0) == pytest.approx(2**-1.5, rel=1e-12)


def test_exponential_profile_value():
    law = exp_profile(1.0, 1.0, directions=[[1.0]], weights=[1.0])
    assert radial_profile_eval(law, [1.0], 0.5) == pytest.approx(math.exp(-0.5), rel=1e-12)


def test_profile_errors():
    law = gamma1d()
    with pytest.raises(NonPositiveRadius):
        radial_profile_eval(law, [1.0], 0.0)
    with pytest.raises(UnknownDirection):
        radial_profile_eval(law, [-1.0], 1.0)
    with pytest.raises(UnknownDirection):
        radial_profile_eval(multi_gamma([1, 1]), [0.6, 0.8], 1.0)


def test_gamma_moment_against_frozen_value():
    assert levy_moment(gamma1d(2, 1), "m2_total") == pytest.approx(GAMMA1D_M2_TOTAL, rel=1e-10)


def test_closed_and_generic_moments_agree():
    for p in (ExponentialProfile(2.0, 1.0), ExponentialProfile(0.7, 3.0), PowerProfile(1.5)):
        for which in ("m2_small", "m1_large"):
            assert p.moment(which) == pytest.approx(Profile.moment(p, which), rel=1e-7)


def test_stable_moments():
    law = rot_inv_stable(1, 1.5)
    assert levy_moment(law, "m2_total") == math.inf
    assert math.isfinite(levy_moment(law, "m2_small"))
    assert levy_moment(law, "m2_small") == pytest.approx(1 / 0.5, rel=1e-10)


def test_null_measure():
    nu = PolarLevyMeasure(1, [[1.0], [-1.0]], [0.0, 0.0], ExponentialProfile(1, 1))
    assert nu.is_null
    for which in ("m2_total", "m2_small", "m1_large"):
        assert levy_moment(nu, which) == 0.0


def test_admissibility_reports():
    assert check_admissible(gamma1d(1, 1))["all"]
    sym = symmetric_stable([[1.0], [-1.0]], [0.5, 0.5], 1.5)
    assert check_admissible(sym)["all"]
    bad = PolarLevyMeasure(1, [[1.0]], [1.0], CallableProfile(lambda r: np.asarray(r, float), 0.0),
                           validate=False)
    rep = check_admissible(bad)
    assert rep["profile_monotone"]["ok"] is False
    assert not rep["all"]


def test_validation_errors():
    with pytest.raises(InvalidLevyMeasure):
        PolarLevyMeasure(1, [[1.0]], [0.5], ExponentialProfile(1, 1))
    with pytest.raises(InvalidLevyMeasure):
        PolarLevyMeasure(2, [[1.0, 1.0]], [1.0], ExponentialProfile(1, 1))
    with pytest.raises(InvalidLevyMeasure):
        PolarLevyMeasure(1, [[1.0]], [1.0], CallableProfile(lambda r: np.asarray(r, float), 0.0))
    with pytest.raises(InvalidLevyMeasure):
        symmetric_stable([[1.0], [-1.0]], [0.7, 0.3])
    with pytest.raises(InvalidLevyMeasure):
        SDLawSpec(np.zeros(2), gamma1d().levy)


def test_tabulated_profile_moments_match_quadrature():
    r = np.array([0.25, 0.5, 1.0, 2.0, 4.0])
    k = np.array([3.0, 2.0, 1.0, 0.5, 0.0])
    p = TabulatedProfile(r, k)
    for which in ("m2_small", "m1_large", "m2_total"):
        assert p.moment(which) == pytest.approx(Profile.moment(p, which), rel=1e-6, abs=1e-12)
