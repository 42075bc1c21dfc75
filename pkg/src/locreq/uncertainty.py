"""ILS performance parameters and the Uncertainty Space at the interest frame.

The Uncertainty Space is the sum of three per-axis terms:

* static uncertainty: the accuracy (or repeatability) percentile, inflated by
  the lever arm between localization and interest frame under yaw error;
* time gap margin: distance covered at maximum velocity between two periodic
  updates;
* time delay margin: distance covered during system latency, only when the
  real-time location matters.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Mapping
from dataclasses import dataclass

from .errors import DomainError, MissingRepeatabilityError
from .normal import normal_cdf
from .spatial import MarginVector, RigidTransform, lever_arm_chord

# Long-term process drift assumed by the Six Sigma convention.
SIGMA_SHIFT = 1.5


def confidence_from_sigma(sigma_level: float) -> float:
    """Retention probability for a Six Sigma level, ``Phi(sigma_level - 1.5)``.

    >>> round(confidence_from_sigma(4.0), 4)
    0.9938
    """
    if not sigma_level > SIGMA_SHIFT:
        raise DomainError(
            f"sigma level must exceed {SIGMA_SHIFT} under the shifted convention, got {sigma_level}"
        )
    return normal_cdf(sigma_level - SIGMA_SHIFT)


@dataclass(frozen=True)
class ConfidenceLevel:
    """Either a plain percentile or a Six Sigma level; exactly one is set."""

    percentile: float | None = None
    sigma: float | None = None

    def __post_init__(self) -> None:
        if (self.percentile is None) == (self.sigma is None):
            raise DomainError("confidence needs exactly one of percentile or sigma")
        if self.percentile is not None and not 0.0 < self.percentile < 1.0:
            raise DomainError(f"percentile must be in (0, 1), got {self.percentile}")
        if self.sigma is not None:
            confidence_from_sigma(self.sigma)

    @classmethod
    def from_sigma(cls, sigma: float) -> "ConfidenceLevel":
        return cls(sigma=float(sigma))

    @classmethod
    def from_percentile(cls, p: float) -> "ConfidenceLevel":
        return cls(percentile=float(p))

    @property
    def probability(self) -> float:
        if self.percentile is not None:
            return self.percentile
        return confidence_from_sigma(self.sigma)

    def label(self) -> str:
        if self.sigma is not None:
            return f"{self.sigma:g}sigma"
        return f"p{self.percentile:g}"

    def to_dict(self) -> dict[str, float]:
        if self.sigma is not None:
            return {"sigma": self.sigma}
        return {"percentile": self.percentile}


@dataclass(frozen=True)
class ErrorPercentiles:
    """Per-axis C-percentiles of the absolute error, with their confidence."""

    values: MarginVector
    confidence: ConfidenceLevel

    def __post_init__(self) -> None:
        if not isinstance(self.values, MarginVector):
            object.__setattr__(self, "values", MarginVector(self.values))
        for a, v in self.values.items():
            if not math.isfinite(v):
                raise DomainError(f"percentile {a} must be finite", axis=a)

    @property
    def yaw(self) -> float:
        return self.values.get("yaw", 0.0)


class UpdateType(str, enum.Enum):
    PERIODIC = "periodic"
    ON_REQUEST = "on_request"
    ON_EVENT = "on_event"


@dataclass(frozen=True)
class UpdateModel:
    kind: UpdateType
    rate_hz: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", UpdateType(self.kind))
        if self.kind is UpdateType.PERIODIC:
            if self.rate_hz is None or not (self.rate_hz > 0 and math.isfinite(self.rate_hz)):
                raise DomainError(f"periodic update needs rate_hz > 0, got {self.rate_hz}")
            object.__setattr__(self, "rate_hz", float(self.rate_hz))
        elif self.rate_hz is not None:
            raise DomainError(f"{self.kind.value} updates take no rate_hz")

    @classmethod
    def periodic(cls, rate_hz: float) -> "UpdateModel":
        return cls(UpdateType.PERIODIC, rate_hz)

    @classmethod
    def on_request(cls) -> "UpdateModel":
        return cls(UpdateType.ON_REQUEST)

    @classmethod
    def on_event(cls) -> "UpdateModel":
        return cls(UpdateType.ON_EVENT)

    @property
    def time_gap_s(self) -> float:
        """Time between updates; zero when data is pulled on demand."""
        if self.kind is UpdateType.PERIODIC:
            return 1.0 / self.rate_hz
        return 0.0

    def to_dict(self) -> dict:
        if self.kind is UpdateType.PERIODIC:
            return {"type": "periodic", "rate_hz": self.rate_hz}
        return {"type": self.kind.value}


@dataclass(frozen=True)
class IlsSpec:
    """Performance of a candidate indoor localization system."""

    name: str
    accuracy: ErrorPercentiles
    update: UpdateModel
    latency_s: float = 0.0
    repeatability: ErrorPercentiles | None = None

    def __post_init__(self) -> None:
        if not (self.latency_s >= 0 and math.isfinite(self.latency_s)):
            raise DomainError(f"latency_s must be >= 0, got {self.latency_s}")


class VelocityBound(MarginVector):
    """Maximum speed of the interest frame per axis (m/s, rad/s for yaw)."""

    __slots__ = ()

    def _validate(self) -> None:
        super()._validate()
        for a, v in self._items:
            if not math.isfinite(v):
                raise DomainError(f"velocity {a} must be finite", axis=a)


class StaticBasis(str, enum.Enum):
    GROUND_TRUTH = "ground_truth"
    SAME_SYSTEM_MAP = "same_system_map"


def select_percentiles(ils: IlsSpec, basis: StaticBasis) -> ErrorPercentiles:
    """Accuracy for ground-truth references, repeatability for maps from the same ILS."""
    if StaticBasis(basis) is StaticBasis.SAME_SYSTEM_MAP:
        if ils.repeatability is None:
            raise MissingRepeatabilityError(
                f"ILS {ils.name!r} has no repeatability data but the reference basis is "
                "same_system_map"
            )
        return ils.repeatability
    return ils.accuracy


def static_uncertainty(
    p: ErrorPercentiles, t: RigidTransform, basis: StaticBasis = StaticBasis.GROUND_TRUTH
) -> MarginVector:
    """Percentiles moved to the interest frame.

    The yaw percentile swings the interest frame around the localization frame
    by at most the chord ``2 rho sin(yaw / 2)``.  The direction is unknown, so
    the chord is added in full to both x and y.  ``basis`` only documents which
    percentile set ``p`` came from.
    """
    StaticBasis(basis)
    chord = lever_arm_chord(t.lever_arm, p.yaw)
    out = {}
    for axis, v in p.values.items():
        out[axis] = v + chord if axis in ("x", "y") else v
    return MarginVector(out)


def time_gap_margin(v: Mapping[str, float], update: UpdateModel) -> MarginVector:
    return MarginVector({a: s * update.time_gap_s for a, s in v.items()})


def time_delay_margin(
    v: Mapping[str, float], latency_s: float, realtime_required: bool
) -> MarginVector:
    if latency_s < 0:
        raise DomainError(f"latency_s must be >= 0, got {latency_s}")
    t = latency_s if realtime_required else 0.0
    return MarginVector({a: s * t for a, s in v.items()})


def uncertainty_space(
    u_s: MarginVector, tg: MarginVector, td: MarginVector
) -> MarginVector:
    """Elementwise sum; all three must cover the same axes."""
    return MarginVector(u_s + tg + td)

