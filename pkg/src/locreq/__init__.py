"""Location-data requirements for indoor localization functions.

Derive accuracy, update-rate and latency budgets from the geometry of an
Interest Space and Motion Space, check candidate localization systems against
them, and verify the confidence guarantee by Monte-Carlo simulation.
"""

__version__ = "0.1.0"

from .errors import ConfigError, LocreqError  # noqa: E402
from .requirements import (  # noqa: E402
    DataRequirements,
    LocalizationFunctionSpec,
    LocalizationType,
    Verdict,
    check_feasible,
    check_ils,
    deflate_to_device_frame,
    derive_requirements,
    solve_accuracy_budget,
    tabulate_tradeoff,
)
from .spatial import (  # noqa: E402
    AxisSpace,
    AxisVector,
    DofMask,
    MarginVector,
    Pose,
    RigidTransform,
    boundary_distance,
    contains,
    lever_arm_chord,
    requirement_margin,
    transform_pose,
)
from .uncertainty import (  # noqa: E402
    ConfidenceLevel,
    ErrorPercentiles,
    IlsSpec,
    StaticBasis,
    UpdateModel,
    VelocityBound,
    confidence_from_sigma,
    static_uncertainty,
    time_delay_margin,
    time_gap_margin,
    uncertainty_space,
)

__all__ = [
    "__version__",
    "# noqa: E402",
    "AxisSpace",
    "AxisVector",
    "ConfidenceLevel",
    "ConfigError",
    "DataRequirements",
    "DofMask",
    "ErrorPercentiles",
    "IlsSpec",
    "LocalizationFunctionSpec",
    "LocalizationType",
    "LocreqError",
    "MarginVector",
    "Pose",
    "RigidTransform",
    "StaticBasis",
    "UpdateModel",
    "VelocityBound",
    "Verdict",
    "boundary_distance",
    "check_feasible",
    "check_ils",
    "confidence_from_sigma",
    "contains",
    "deflate_to_device_frame",
    "derive_requirements",
    "lever_arm_chord",
    "requirement_margin",
    "solve_accuracy_budget",
    "static_uncertainty",
    "tabulate_tradeoff",
    "time_delay_margin",
    "time_gap_margin",
    "transform_pose",
    "uncertainty_space",
]
