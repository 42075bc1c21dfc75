"""Feasibility checks, accuracy budgets and the four-step derivation procedure.

Steps, as used in error labels:

A. specify the localization function (entity, spaces, DoF, type);
B. determine the requirement margin from Interest/Motion Space and safety margin;
C. estimate the uncertainty space (velocity, latency relevance, confidence, transform);
D. compute the data requirements, or prove that a given ILS meets them.

The governing inequality, per axis, is

    R(I, M, S) >= P_C + v_max * t_gap + v_max * t_delay

where ``P_C`` is the static uncertainty at the interest frame.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from .errors import (
    AxisMismatchError,
    BudgetExhaustedError,
    ConfidenceMismatchError,
    DomainError,
    InfeasibleTimingError,
    LocreqError,
    MissingAxisError,
)
from .spatial import (
    AXES,
    IDENTITY,
    AxisSpace,
    AxisVector,
    DofMask,
    MarginVector,
    RigidTransform,
    lever_arm_chord,
    requirement_margin,
    snap,
)
from .uncertainty import (
    ConfidenceLevel,
    IlsSpec,
    StaticBasis,
    UpdateModel,
    VelocityBound,
    select_percentiles,
    static_uncertainty,
    time_delay_margin,
    time_gap_margin,
    uncertainty_space,
)


class LocalizationType(str, enum.Enum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative"


@dataclass(frozen=True)
class LocalizationFunctionSpec:
    """Everything steps A-C need to know about one localization function.

    Per-axis fields must cover every axis in ``dof``.  Containment of the
    Motion Space in the Interest Space is checked in step B, not here.
    """

    name: str
    entity: str
    dof: DofMask
    interest_space: AxisSpace
    motion_space: AxisSpace
    max_velocity: VelocityBound
    confidence: ConfidenceLevel
    localization_type: LocalizationType = LocalizationType.ABSOLUTE
    safety_margin: MarginVector = field(default_factory=MarginVector)
    reference_basis: StaticBasis = StaticBasis.GROUND_TRUTH
    realtime_required: bool = False
    transform_L_to_I: RigidTransform = IDENTITY

    def __post_init__(self) -> None:
        object.__setattr__(self, "localization_type", LocalizationType(self.localization_type))
        object.__setattr__(self, "reference_basis", StaticBasis(self.reference_basis))
        if not isinstance(self.dof, DofMask):
            object.__setattr__(self, "dof", DofMask(self.dof))
        if not isinstance(self.max_velocity, VelocityBound):
            object.__setattr__(self, "max_velocity", VelocityBound(self.max_velocity))
        if not isinstance(self.safety_margin, MarginVector):
            object.__setattr__(self, "safety_margin", MarginVector(self.safety_margin))
        if not self.safety_margin:
            object.__setattr__(self, "safety_margin", MarginVector.zeros(self.dof))
        for axis in self.dof:
            for label, container in (
                ("interest_space", self.interest_space.axes),
                ("motion_space", self.motion_space.axes),
                ("max_velocity", self.max_velocity),
                ("safety_margin", self.safety_margin),
            ):
                if axis not in container:
                    raise MissingAxisError(f"{label} has no entry for dof axis {axis!r}",
                                           step="A", axis=axis)


@dataclass(frozen=True)
class Verdict:
    feasible: bool
    per_axis_slack: AxisVector
    binding_axis: str


@dataclass(frozen=True)
class DataRequirements:
    """Result of the derivation procedure, with every intermediate kept."""

    requirement_margin: MarginVector
    time_gap_margin: MarginVector
    time_delay_margin: MarginVector
    accuracy_budget_at_interest_frame: MarginVector
    accuracy_budget_at_device_frame: MarginVector | None
    time_gap_s: float
    latency_s: float
    confidence: ConfidenceLevel
    basis: StaticBasis
    update: UpdateModel


@dataclass(frozen=True)
class UncertaintyBreakdown:
    """Both sides of the feasibility inequality for one ILS."""

    requirement_margin: MarginVector
    static_uncertainty: MarginVector
    time_gap_margin: MarginVector
    time_delay_margin: MarginVector
    uncertainty: MarginVector
    verdict: Verdict


@dataclass(frozen=True)
class TradeoffTable:
    """Accuracy budget per axis for a grid of time gaps.

    A negative cell is infeasible: the motion terms alone exceed the margin.
    """

    t_gaps: tuple[float, ...]
    t_delay_s: float
    rows: Mapping[str, tuple[float, ...]]

    def feasible(self, axis: str, column: int) -> bool:
        return self.rows[axis][column] >= 0.0

    def column(self, column: int) -> dict[str, float | None]:
        return {a: (v[column] if v[column] >= 0 else None) for a, v in self.rows.items()}


def check_feasible(r: Mapping[str, float], u: Mapping[str, float]) -> Verdict:
    """Compare margin and uncertainty axis by axis.

    Slack within ``spatial.TOL`` of zero is snapped to exactly zero so a
    budget that saturates the margin is not rejected over rounding.
    """
    r = AxisVector(r)
    u = AxisVector(u)
    if r.axes != u.axes:
        raise AxisMismatchError(f"axis sets differ: {list(r.axes)} vs {list(u.axes)}")
    slack = AxisVector({a: snap(r[a] - u[a]) for a in r})
    binding = min(slack, key=lambda a: (slack[a], AXES.index(a)))
    return Verdict(
        feasible=all(s >= 0 for s in slack.values()),
        per_axis_slack=slack,
        binding_axis=binding,
    )


def _dynamic_budget(r: float, v: float, t_gap_s: float, t_delay_s: float) -> float:
    if math.isinf(r):
        return r
    return snap(r - v * t_gap_s - v * t_delay_s)


def solve_accuracy_budget(
    r: MarginVector, v: Mapping[str, float], t_gap_s: float, t_delay_s: float
) -> MarginVector:
    """Largest static uncertainty that still satisfies the inequality.

    Raises ``InfeasibleTimingError`` naming the first axis on which motion
    during the time gap and latency already uses up the margin.
    """
    if not (t_gap_s >= 0 and t_delay_s >= 0):
        raise DomainError(f"time gap and delay must be >= 0, got {t_gap_s}, {t_delay_s}")
    out = {}
    for axis, margin in r.items():
        if axis not in v:
            raise MissingAxisError(f"no velocity bound for axis {axis!r}", axis=axis)
        b = _dynamic_budget(margin, v[axis], t_gap_s, t_delay_s)
        if b < 0:
            raise InfeasibleTimingError(
                f"{axis}: motion of {v[axis] * (t_gap_s + t_delay_s):g} during time gap "
                f"{t_gap_s:g} s and delay {t_delay_s:g} s exceeds the margin {margin:g}",
                axis=axis,
            )
        out[axis] = b
    return MarginVector(out)


def deflate_to_device_frame(
    budget: MarginVector, t: RigidTransform, yaw_percentile: float
) -> MarginVector:
    """Translate an interest-frame budget back to the localization device.

    Inverse of the lever-arm inflation in ``static_uncertainty``: removes the
    chord from x and y.  A yaw budget, if present, has to cover the yaw
    percentile itself.
    """
    if yaw_percentile < 0:
        raise DomainError(f"yaw percentile must be >= 0, got {yaw_percentile}")
    chord = lever_arm_chord(t.lever_arm, yaw_percentile)
    out = {}
    for axis, b in budget.items():
        if axis in ("x", "y"):
            d = snap(b - chord)
            if d < 0:
                raise BudgetExhaustedError(
                    f"{axis}: lever arm {t.lever_arm:g} m at yaw error {yaw_percentile:g} rad "
                    f"displaces {chord:g} m, more than the budget {b:g} m",
                    axis=axis,
                )
            out[axis] = d
        else:
            if axis == "yaw" and snap(b - yaw_percentile) < 0:
                raise BudgetExhaustedError(
                    f"yaw: percentile {yaw_percentile:g} rad exceeds the yaw budget {b:g} rad",
                    axis=axis,
                )
            out[axis] = b
    return MarginVector(out)


def tabulate_tradeoff(
    r: MarginVector, v: Mapping[str, float], t_gap_grid: Sequence[float], t_delay_s: float = 0.0
) -> TradeoffTable:
    """Budget per axis for each time gap; infeasible cells stay in as negatives."""
    grid = tuple(float(t) for t in t_gap_grid)
    if not grid:
        raise DomainError("time-gap grid is empty")
    if any(t < 0 for t in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError(f"time-gap grid must be nonnegative and strictly increasing: {grid}")
    if t_delay_s < 0:
        raise DomainError(f"t_delay_s must be >= 0, got {t_delay_s}")
    rows = {}
    for axis, margin in r.items():
        if axis not in v:
            raise MissingAxisError(f"no velocity bound for axis {axis!r}", axis=axis)
        rows[axis] = tuple(_dynamic_budget(margin, v[axis], t, t_delay_s) for t in grid)
    return TradeoffTable(t_gaps=grid, t_delay_s=float(t_delay_s), rows=rows)


def _step(step: str, fn, *args):
    try:
        return fn(*args)
    except LocreqError as err:
        raise err.with_step(step) from err


def derive_requirements(
    spec: LocalizationFunctionSpec,
    update: UpdateModel,
    latency_s: float = 0.0,
    yaw_percentile: float | None = None,
) -> DataRequirements:
    """Run steps B to D for one localization function.

    The device-frame budget is computed only when the transform is the
    identity (it then equals the interest-frame budget) or a yaw percentile
    is given; otherwise it is ``None``.
    """
    r = _step("B", requirement_margin, spec.interest_space, spec.motion_space,
              spec.safety_margin, spec.dof)

    v = spec.max_velocity.restrict(spec.dof)
    tg = _step("C", time_gap_margin, v, update)
    td = _step("C", time_delay_margin, v, latency_s, spec.realtime_required)
    t_delay = latency_s if spec.realtime_required else 0.0

    budget = _step("D", solve_accuracy_budget, r, v, update.time_gap_s, t_delay)
    t = spec.transform_L_to_I
    if t.is_identity:
        device = budget
    elif yaw_percentile is not None:
        device = _step("D", deflate_to_device_frame, budget, t, yaw_percentile)
    else:
        device = None

    return DataRequirements(
        requirement_margin=r,
        time_gap_margin=tg,
        time_delay_margin=td,
        accuracy_budget_at_interest_frame=budget,
        accuracy_budget_at_device_frame=device,
        time_gap_s=update.time_gap_s,
        latency_s=t_delay,
        confidence=spec.confidence,
        basis=spec.reference_basis,
        update=update,
    )


# Percentiles quoted at a confidence this close below the target still count.
_CONFIDENCE_TOL = 1e-12


def assess_ils(spec: LocalizationFunctionSpec, ils: IlsSpec) -> UncertaintyBreakdown:
    """Both sides of the inequality for ``ils``, plus the verdict."""
    r = _step("B", requirement_margin, spec.interest_space, spec.motion_space,
              spec.safety_margin, spec.dof)
    p = _step("C", select_percentiles, ils, spec.reference_basis)
    need, have = spec.confidence.probability, p.confidence.probability
    if have < need - _CONFIDENCE_TOL:
        raise ConfidenceMismatchError(
            f"ILS {ils.name!r} quotes percentiles at confidence {have:.6g} "
            f"({p.confidence.label()}), below the required {need:.6g} ({spec.confidence.label()})",
            step="C",
        )
    u_s = _step("C", lambda: static_uncertainty(p, spec.transform_L_to_I,
                                                spec.reference_basis).restrict(spec.dof))
    v = spec.max_velocity.restrict(spec.dof)
    tg = time_gap_margin(v, ils.update)
    td = time_delay_margin(v, ils.latency_s, spec.realtime_required)
    u = uncertainty_space(u_s, tg, td)
    return UncertaintyBreakdown(
        requirement_margin=r,
        static_uncertainty=u_s,
        time_gap_margin=tg,
        time_delay_margin=td,
        uncertainty=u,
        verdict=check_feasible(r, u),
    )


def check_ils(spec: LocalizationFunctionSpec, ils: IlsSpec) -> Verdict:
    """Whether ``ils`` meets the data requirements of ``spec``."""
    return assess_ils(spec, ils).verdict
