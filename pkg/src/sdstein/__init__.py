"""Numerical toolkit for Stein's method on self-decomposable laws."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .levy import (  # noqa: F401
    CallableProfile,
    ExponentialProfile,
    PolarLevyMeasure,
    PowerProfile,
    SDLawSpec,
    TabulatedProfile,
    check_admissible,
    levy_moment,
    radial_profile_eval,
)
from .catalog import law_from_config, standard_catalog  # noqa: F401
from .charfn import density_by_inversion, log_cf, log_cf_ratio  # noqa: F401
from .sampling import flow_sample, sample_mu_t, sample_target  # noqa: F401
from .semigroup import apply_semigroup, generator_apply, solve_stein, stein_residual  # noqa: F401
from .kernel import discrepancy, galerkin_solve, poincare_ratio, stein_bound  # noqa: F401
from .distances import optimal_transport, smooth_wasserstein_lb, smoothing_curve  # noqa: F401
