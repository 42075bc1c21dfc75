"""Poses, axis-aligned spaces, rigid transforms and requirement margins.

Conventions:
    Axes are ``x``, ``y``, ``z`` (meters) and ``yaw`` (radians); roll and pitch
    are not modeled.  Spaces are closed, axis-aligned intervals per axis and a
    side may be unbounded (``-inf``/``+inf``).  Yaw is kept in (-pi, pi].
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass

from .errors import (
    AxisMismatchError,
    ContainmentError,
    DomainError,
    MissingAxisError,
    NegativeMarginError,
)

AXES: tuple[str, ...] = ("x", "y", "z", "yaw")
LINEAR_AXES: tuple[str, ...] = ("x", "y", "z")

# Absolute tolerance below which a negative margin/slack is float noise.
TOL = 1e-9


def normalize_angle(angle: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = math.remainder(angle, math.tau)
    return math.pi if a == -math.pi else a


def snap(value: float, tol: float = TOL) -> float:
    """Map values within ``tol`` of zero to exactly zero."""
    return 0.0 if abs(value) < tol else value


class AxisVector(Mapping[str, float]):
    """Immutable per-axis values, keyed by axis name in canonical order."""

    __slots__ = ("_items",)

    def __init__(self, values: Mapping[str, float] | Iterable[tuple[str, float]] = (), **kw: float):
        raw = dict(values)
        raw.update(kw)
        unknown = set(raw) - set(AXES)
        if unknown:
            raise MissingAxisError(f"unknown axis name(s): {sorted(unknown)}")
        items = []
        for axis in AXES:
            if axis in raw:
                v = float(raw[axis])
                if math.isnan(v):
                    raise DomainError(f"{axis}: value is NaN", axis=axis)
                items.append((axis, v))
        self._items: tuple[tuple[str, float], ...] = tuple(items)
        self._validate()

    def _validate(self) -> None:
        pass

    def __getitem__(self, axis: str) -> float:
        for a, v in self._items:
            if a == axis:
                return v
        raise KeyError(axis)

    def __iter__(self) -> Iterator[str]:
        return (a for a, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __hash__(self) -> int:
        return hash((type(self).__name__, self._items))

    def __repr__(self) -> str:
        body = ", ".join(f"{a}={v:g}" for a, v in self._items)
        return f"{type(self).__name__}({body})"

    @property
    def axes(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self._items)

    def _check_axes(self, other: Mapping[str, float]) -> None:
        if tuple(self) != tuple(a for a in AXES if a in other) or len(other) != len(self):
            raise AxisMismatchError(
                f"axis sets differ: {list(self)} vs {list(other)}"
            )

    def __add__(self, other: Mapping[str, float]) -> "AxisVector":
        self._check_axes(other)
        return type(self)({a: v + other[a] for a, v in self._items})

    def scaled(self, factor: float) -> "AxisVector":
        return type(self)({a: v * factor for a, v in self._items})

    def restrict(self, axes: Iterable[str]) -> "AxisVector":
        """Keep only ``axes``; every requested axis must be present."""
        wanted = list(axes)
        missing = [a for a in wanted if a not in self]
        if missing:
            raise MissingAxisError(f"missing axis {missing[0]}", axis=missing[0])
        return type(self)({a: self[a] for a in wanted})

    def to_dict(self) -> dict[str, float]:
        return dict(self._items)


class MarginVector(AxisVector):
    """Per-axis nonnegative bound (meters on x/y/z, radians on yaw).

    ``+inf`` is allowed and means the axis imposes no constraint.
    """

    __slots__ = ()

    def _validate(self) -> None:
        for a, v in self._items:
            if v < 0:
                raise NegativeMarginError(f"{a}: component {v!r} is negative", axis=a)

    @classmethod
    def zeros(cls, axes: Iterable[str]) -> "MarginVector":
        return cls({a: 0.0 for a in axes})


@dataclass(frozen=True)
class Pose:
    """4-DoF location: position in meters and yaw in radians."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    yaw: float = 0.0

    def __post_init__(self) -> None:
        for name in AXES:
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"pose.{name} must be finite, got {v!r}", axis=name)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "yaw", normalize_angle(self.yaw))

    def coord(self, axis: str) -> float:
        if axis not in AXES:
            raise MissingAxisError(f"unknown axis {axis!r}", axis=axis)
        return getattr(self, axis)


@dataclass(frozen=True)
class DofMask:
    """Nonempty, duplicate-free subset of the four axes, stored in canonical order."""

    axes: tuple[str, ...]

    def __init__(self, axes: Iterable[str]):
        given = list(axes)
        if not given:
            raise DomainError("dof mask must include at least one axis")
        if len(set(given)) != len(given):
            raise DomainError(f"dof mask has duplicate axes: {given}")
        unknown = [a for a in given if a not in AXES]
        if unknown:
            raise MissingAxisError(f"unknown axis {unknown[0]!r} in dof mask", axis=unknown[0])
        object.__setattr__(self, "axes", tuple(a for a in AXES if a in given))

    def __iter__(self) -> Iterator[str]:
        return iter(self.axes)

    def __contains__(self, axis: object) -> bool:
        return axis in self.axes

    def __len__(self) -> int:
        return len(self.axes)


Interval = tuple[float, float]


def _check_interval(axis: str, iv: Interval) -> Interval:
    lo, hi = (float(v) for v in iv)
    if math.isnan(lo) or math.isnan(hi):
        raise DomainError(f"{axis}: interval bound is NaN", axis=axis)
    if lo == math.inf or hi == -math.inf:
        raise DomainError(f"{axis}: interval [{lo}, {hi}] is empty", axis=axis)
    if lo > hi:
        raise DomainError(f"{axis}: lower bound {lo} exceeds upper bound {hi}", axis=axis)
    if axis == "yaw" and (lo < -math.pi or hi > math.pi):
        raise DomainError(
            f"yaw: interval [{lo}, {hi}] leaves [-pi, pi]; wrap-around intervals are not supported",
            axis=axis,
        )
    return lo, hi


@dataclass(frozen=True)
class AxisSpace:
    """Closed axis-aligned box; an axis left as ``None`` is undefined."""

    x: Interval | None = None
    y: Interval | None = None
    z: Interval | None = None
    yaw: Interval | None = None

    def __post_init__(self) -> None:
        for axis in AXES:
            iv = getattr(self, axis)
            if iv is not None:
                object.__setattr__(self, axis, _check_interval(axis, iv))

    @classmethod
    def from_mapping(cls, intervals: Mapping[str, Interval]) -> "AxisSpace":
        unknown = set(intervals) - set(AXES)
        if unknown:
            raise MissingAxisError(f"unknown axis name(s): {sorted(unknown)}")
        return cls(**{a: tuple(iv) for a, iv in intervals.items()})

    @property
    def axes(self) -> tuple[str, ...]:
        return tuple(a for a in AXES if getattr(self, a) is not None)

    def interval(self, axis: str) -> Interval:
        iv = getattr(self, axis, None) if axis in AXES else None
        if iv is None:
            raise MissingAxisError(f"space does not define axis {axis!r}", axis=axis)
        return iv

    def to_dict(self) -> dict[str, Interval]:
        return {a: getattr(self, a) for a in self.axes}


@dataclass(frozen=True)
class RigidTransform:
    """Planar rigid transform from the localization frame to the interest frame.

    ``translation`` is the interest-frame origin expressed in the localization
    frame; ``yaw_offset`` is the heading of the interest frame relative to it.
    """

    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)
    yaw_offset: float = 0.0

    def __post_init__(self) -> None:
        t = tuple(float(v) for v in self.translation)
        if len(t) != 3:
            raise DomainError("translation must have three components")
        if not all(math.isfinite(v) for v in (*t, float(self.yaw_offset))):
            raise DomainError("transform components must be finite")
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "yaw_offset", float(self.yaw_offset))

    @property
    def lever_arm(self) -> float:
        """Planar distance between the two frame origins."""
        return math.hypot(self.translation[0], self.translation[1])

    @property
    def is_identity(self) -> bool:
        return self.translation == (0.0, 0.0, 0.0) and self.yaw_offset == 0.0

    def inverse(self) -> "RigidTransform":
        rx, ry, rz = self.translation
        c, s = math.cos(self.yaw_offset), math.sin(self.yaw_offset)
        # -R(-yaw_offset) @ r
        return RigidTransform(
            translation=(-(c * rx + s * ry), -(-s * rx + c * ry), -rz),
            yaw_offset=-self.yaw_offset,
        )


IDENTITY = RigidTransform()


def contains(space: AxisSpace, pose: Pose, dof: DofMask) -> bool:
    """True iff every included coordinate of ``pose`` lies in the closed interval."""
    for axis in dof:
        lo, hi = space.interval(axis)
        c = pose.coord(axis)
        if not lo <= c <= hi:
            return False
    return True


def boundary_distance(space: AxisSpace, pose: Pose, axis: str) -> float:
    """Signed distance to the nearer bound: positive inside, negative outside."""
    lo, hi = space.interval(axis)
    c = pose.coord(axis)
    return min(c - lo, hi - c)


def requirement_margin(
    interest: AxisSpace,
    motion: AxisSpace,
    safety: Mapping[str, float] | None,
    dof: DofMask,
) -> MarginVector:
    """Per-axis gap between Motion and Interest Space, less the safety margin.

    For each axis ``d`` in ``dof``::

        R_d = min(M_lo - I_lo, I_hi - M_hi) - S_d

    An unbounded Interest Space side contributes ``+inf``, so the bounded side
    governs.  Raises ``ContainmentError`` if the Motion Space pokes out of the
    Interest Space and ``NegativeMarginError`` if ``S_d`` exceeds the gap.
    """
    safety = {} if safety is None else safety
    out = {}
    for axis in dof:
        i_lo, i_hi = interest.interval(axis)
        m_lo, m_hi = motion.interval(axis)
        if m_lo < i_lo or m_hi > i_hi:
            raise ContainmentError(
                f"motion_space.{axis} [{m_lo}, {m_hi}] not contained in "
                f"interest_space.{axis} [{i_lo}, {i_hi}]",
                axis=axis,
            )
        gap_lo = math.inf if i_lo == -math.inf else m_lo - i_lo
        gap_hi = math.inf if i_hi == math.inf else i_hi - m_hi
        s = float(safety.get(axis, 0.0))
        if s < 0 or math.isnan(s):
            raise DomainError(f"safety_margin.{axis} must be >= 0, got {s}", axis=axis)
        r = snap(min(gap_lo, gap_hi) - s)
        if r < 0:
            raise NegativeMarginError(
                f"{axis}: safety margin {s} exceeds the gap {min(gap_lo, gap_hi)}",
                axis=axis,
            )
        out[axis] = r
    return MarginVector(out)


def transform_pose(t: RigidTransform, pose: Pose) -> Pose:
    """Map a localization-frame pose to the interest frame."""
    rx, ry, rz = t.translation
    c, s = math.cos(pose.yaw), math.sin(pose.yaw)
    return Pose(
        pose.x + c * rx - s * ry,
        pose.y + s * rx + c * ry,
        pose.z + rz,
        pose.yaw + t.yaw_offset,
    )


def lever_arm_chord(radius: float, angle: float) -> float:
    """Worst-case displacement of a point at ``radius`` rotated by ``angle``.

    Exact chord ``2 r sin(min(angle, pi) / 2)``; saturates at the diameter.
    """
    if radius < 0 or angle < 0 or math.isnan(radius) or math.isnan(angle):
        raise DomainError(f"lever_arm_chord needs radius, angle >= 0; got {radius}, {angle}")
    return 2.0 * radius * math.sin(min(angle, math.pi) / 2.0)
