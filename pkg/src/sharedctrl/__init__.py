"""Power and type-1-error engine for two-stage case-control designs that
share control (or case) cohorts between the discovery and replication
stages."""

__version__ = "0.1.0"

from .design import (  # noqa: F401
    CovarianceSet,
    EffectScenario,
    StratifiedDesign,
    Stratum,
    StudyDesign,
    ZetaVector,
    aberrant_scenario,
    covariance,
    covariance_simulated,
    covariance_stratified,
    scenario_from_or_maf,
    zeta,
)
from .gaussian import (  # noqa: F401
    CorrMatrix3,
    Orthant3Query,
    norm_cdf,
    norm_quantile,
    orthant2,
    orthant3,
)
from .thresholds import (  # noqa: F401
    DerivedThresholds,
    Thresholds,
    beta_star_asymptotic,
    p_joint,
    solve_beta_star,
)
from .analysis import (  # noqa: F401
    Method,
    aberrance_bounds,
    error_profile,
    hit_probability,
    power_curve,
    power_summary,
)
from .mc import MCConfig, MCResult, empirical_correlation, simulate  # noqa: F401
