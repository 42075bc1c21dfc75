"""Monte-Carlo check of the requirement inequality.

The simulator replays a true trajectory of the localization frame, samples
noisy periodic location updates and classifies each estimate against the
Interest Space, counting *false-outside* events: the estimate lies outside
the Interest Space on an axis while the true interest frame is inside the
Motion Space.

Timing of update ``k`` (``rate`` in Hz, ``latency`` in s):

    measured     t_k = k / rate
    available    t_k + latency
    classified   (k + eval_phase) / rate + latency

``eval_phase = 0`` classifies at availability.  ``eval_phase = 1`` checks the
estimate just before it is superseded, so the entity has moved for a full
time gap since the measurement; the worst-case experiment uses this.

Random numbers: trial ``i`` draws from ``numpy.random.PCG64`` seeded with
``SeedSequence(seed, spawn_key=(i,))``, one ``standard_normal((n, 4))`` block
per trial in axis order x, y, z, yaw.  Counts are integers, so the report
does not depend on how trials are scheduled across workers.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, LocreqError
from .normal import two_sided_z
from .requirements import LocalizationFunctionSpec, derive_requirements
from .spatial import (
    AXES,
    AxisSpace,
    AxisVector,
    DofMask,
    TOL,
    MarginVector,
    Pose,
    RigidTransform,
    normalize_angle,
    transform_pose,
)
from .uncertainty import UpdateModel, UpdateType, VelocityBound

_YAW = AXES.index("yaw")


class SimulationConfigError(LocreqError):
    """A simulation configuration violates an invariant."""


def calibrate_sigma(percentile_value: float, confidence: float) -> float:
    """Gaussian sigma whose absolute error stays below ``percentile_value`` with
    probability ``confidence``."""
    if percentile_value < 0 or math.isnan(percentile_value):
        raise DomainError(f"percentile value must be >= 0, got {percentile_value}")
    if percentile_value == 0:
        two_sided_z(confidence)
        return 0.0
    return percentile_value / two_sided_z(confidence)


def _wrap(a: np.ndarray) -> np.ndarray:
    """Vectorized ``normalize_angle``."""
    out = np.remainder(a + np.pi, 2.0 * np.pi) - np.pi
    return np.where(out <= -np.pi, np.pi, out)


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-linear true motion of the localization frame.

    ``max_velocity``, when given, is enforced between consecutive waypoints
    (yaw along the shortest arc).
    """

    waypoints: tuple[tuple[float, Pose], ...]
    max_velocity: VelocityBound | None = None

    def __post_init__(self) -> None:
        wps = tuple((float(t), p) for t, p in self.waypoints)
        if not wps:
            raise SimulationConfigError("trajectory needs at least one waypoint")
        times = [t for t, _ in wps]
        if not all(math.isfinite(t) for t in times):
            raise SimulationConfigError("waypoint times must be finite")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise SimulationConfigError("waypoint times must be strictly increasing")
        object.__setattr__(self, "waypoints", wps)
        if self.max_velocity is not None:
            self._check_speed(self.max_velocity)

    def _check_speed(self, vmax: Mapping[str, float]) -> None:
        arr, t = self._array, self.times
        dt = np.diff(t)
        for axis, bound in vmax.items():
            i = AXES.index(axis)
            d = np.diff(arr[:, i])
            if axis == "yaw":
                d = _wrap(d)
            speed = np.abs(d) / dt
            worst = int(np.argmax(speed)) if len(speed) else 0
            if len(speed) and speed[worst] > bound * (1 + 1e-9) + 1e-12:
                raise SimulationConfigError(
                    f"trajectory speed {speed[worst]:g} on {axis} between waypoints "
                    f"{worst} and {worst + 1} exceeds the bound {bound:g}",
                    axis=axis,
                )

    @cached_property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.waypoints])

    @cached_property
    def _array(self) -> np.ndarray:
        return np.array([[p.x, p.y, p.z, p.yaw] for _, p in self.waypoints])

    @cached_property
    def _unwrapped_yaw(self) -> np.ndarray:
        yaw = self._array[:, _YAW]
        steps = _wrap(np.diff(yaw))
        return np.concatenate([yaw[:1], yaw[0] + np.cumsum(steps)])

    @property
    def start(self) -> float:
        return self.waypoints[0][0]

    @property
    def end(self) -> float:
        return self.waypoints[-1][0]

    def poses_at(self, t: np.ndarray) -> np.ndarray:
        """Interpolated poses, shape ``(len(t), 4)``; yaw along the shortest arc."""
        t = np.asarray(t, dtype=float)
        if t.size and (t.min() < self.start or t.max() > self.end):
            raise DomainError(
                f"time outside trajectory range [{self.start}, {self.end}]"
            )
        arr = self._array
        out = np.empty((t.size, 4))
        for i in range(3):
            out[:, i] = np.interp(t, self.times, arr[:, i])
        out[:, _YAW] = _wrap(np.interp(t, self.times, self._unwrapped_yaw))
        # Waypoint instants return the stored pose bit-for-bit.
        idx = np.clip(np.searchsorted(self.times, t), 0, len(self.times) - 1)
        hit = self.times[idx] == t
        out[hit] = arr[idx[hit]]
        return out


def pose_at(trajectory: Trajectory, t: float) -> Pose:
    """True pose at time ``t``: linear in x, y, z, shortest arc in yaw."""
    x, y, z, yaw = trajectory.poses_at(np.array([t]))[0]
    return Pose(x, y, z, yaw)


def _transform_array(t: RigidTransform, poses: np.ndarray) -> np.ndarray:
    """Vectorized ``spatial.transform_pose``."""
    if t.is_identity:
        return poses
    rx, ry, rz = t.translation
    c, s = np.cos(poses[:, _YAW]), np.sin(poses[:, _YAW])
    out = np.empty_like(poses)
    out[:, 0] = poses[:, 0] + c * rx - s * ry
    out[:, 1] = poses[:, 1] + s * rx + c * ry
    out[:, 2] = poses[:, 2] + rz
    out[:, _YAW] = _wrap(poses[:, _YAW] + t.yaw_offset)
    return out


def _inside(space: AxisSpace, poses: np.ndarray, axis: str, tol: float = 0.0) -> np.ndarray:
    lo, hi = space.interval(axis)
    col = poses[:, AXES.index(axis)]
    return (col >= lo - tol) & (col <= hi + tol)


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean Gaussian error, independent per axis and per update."""

    sigma: MarginVector

    def __post_init__(self) -> None:
        if not isinstance(self.sigma, MarginVector):
            object.__setattr__(self, "sigma", MarginVector(self.sigma))
        if not all(math.isfinite(v) for v in self.sigma.values()):
            raise SimulationConfigError("noise sigma must be finite")

    def vector(self) -> np.ndarray:
        return np.array([self.sigma.get(a, 0.0) for a in AXES])

    def scaled(self, factors: Mapping[str, float]) -> "NoiseModel":
        return NoiseModel(MarginVector({a: v * factors.get(a, 1.0) for a, v in self.sigma.items()}))


@dataclass(frozen=True)
class SimConfig:
    function: LocalizationFunctionSpec
    noise: NoiseModel
    update: UpdateModel
    trajectory: Trajectory
    trials: int
    seed: int
    latency_s: float = 0.0
    eval_phase: float = 0.0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.update.kind is not UpdateType.PERIODIC:
            raise SimulationConfigError("only periodic updates can be simulated")
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise SimulationConfigError(f"trials must be a positive integer, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise SimulationConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not (self.latency_s >= 0 and math.isfinite(self.latency_s)):
            raise SimulationConfigError(f"latency_s must be >= 0, got {self.latency_s}")
        if not 0.0 <= self.eval_phase <= 1.0:
            raise SimulationConfigError(f"eval_phase must be in [0, 1], got {self.eval_phase}")
        if self.workers < 1:
            raise SimulationConfigError("workers must be >= 1")


@dataclass(frozen=True)
class SimReport:
    """Aggregate false-outside statistics over all trials.

    Rates use the classified updates (truth inside the Motion Space) as
    denominator.  ``passed`` requires every per-axis rate to stay below
    ``1 - confidence_target`` plus three standard errors of that target rate.
    """

    updates_total: int
    updates_classified: int
    false_outside_count: AxisVector
    false_outside_per_axis: AxisVector
    false_outside_joint: float
    confidence_target: float
    standard_error_per_axis: AxisVector
    union_bound: float
    passed: bool

    @property
    def threshold(self) -> AxisVector:
        p0 = 1.0 - self.confidence_target
        return AxisVector({a: p0 + 3.0 * se for a, se in self.standard_error_per_axis.items()})


def _update_indices(cfg: SimConfig) -> np.ndarray:
    rate = cfg.update.rate_hz
    traj = cfg.trajectory
    k0 = math.ceil(traj.start * rate)
    if k0 / rate < traj.start:
        k0 += 1
    k1 = math.floor((traj.end - cfg.latency_s) * rate - cfg.eval_phase) + 1
    ks = np.arange(k0, max(k0, k1 + 1), dtype=np.int64)
    t_class = (ks + cfg.eval_phase) / rate + cfg.latency_s
    return ks[t_class <= traj.end]


def run_simulation(cfg: SimConfig) -> SimReport:
    """Simulate ``cfg.trials`` replays of the trajectory and count false exits."""
    spec = cfg.function
    dof = spec.dof
    rate = cfg.update.rate_hz
    T = spec.transform_L_to_I

    ks = _update_indices(cfg)
    n = len(ks)
    t_meas = ks / rate
    t_class = (ks + cfg.eval_phase) / rate + cfg.latency_s

    truth_meas = cfg.trajectory.poses_at(t_meas)
    truth_class = _transform_array(T, cfg.trajectory.poses_at(t_class))
    counted = np.ones(n, dtype=bool)
    # Motion Space membership of the truth allows TOL so that frame round trips
    # do not push a pose that sits on the boundary just outside it.
    for axis in dof:
        counted &= _inside(spec.motion_space, truth_class, axis, TOL)
    sigma = cfg.noise.vector()
    axes = list(dof)

    def one_trial(i: int) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(i,))))
        est = truth_meas + rng.standard_normal((n, 4)) * sigma
        est[:, _YAW] = _wrap(est[:, _YAW])
        est = _transform_array(T, est)
        outside = np.stack([~_inside(spec.interest_space, est, a) for a in axes]) & counted
        return np.append(outside.sum(axis=1), outside.any(axis=0).sum())

    trials = range(cfg.trials)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            counts = sum(pool.map(one_trial, trials))
    else:
        counts = sum(one_trial(i) for i in trials)
    counts = np.asarray(counts, dtype=np.int64)

    classified = int(counted.sum()) * cfg.trials
    p0 = 1.0 - spec.confidence.probability
    if classified:
        rates = counts / classified
        se = math.sqrt(p0 * (1.0 - p0) / classified)
    else:
        rates = np.zeros(len(axes) + 1)
        se = math.inf
    per_axis = AxisVector(dict(zip(axes, rates[:-1].tolist())))
    passed = classified > 0 and all(r <= p0 + 3.0 * se for r in per_axis.values())
    return SimReport(
        updates_total=n * cfg.trials,
        updates_classified=classified,
        false_outside_count=AxisVector(dict(zip(axes, counts[:-1].tolist()))),
        false_outside_per_axis=per_axis,
        false_outside_joint=float(rates[-1]),
        confidence_target=spec.confidence.probability,
        standard_error_per_axis=AxisVector({a: se for a in axes}),
        union_bound=min(1.0, len(axes) * p0),
        passed=bool(passed),
    )


def _rest_value(space: AxisSpace, axis: str) -> float:
    if axis not in space.axes:
        return 0.0
    lo, hi = space.interval(axis)
    return float(np.clip(0.0, lo, hi))


def worst_case_trajectory(
    spec: LocalizationFunctionSpec,
    update: UpdateModel,
    latency_s: float = 0.0,
    cycles: int = 100,
) -> Trajectory:
    """Adversarial zig-zag along the Motion Space boundary.

    On each axis the interest frame runs inward at full speed from
    ``boundary + v * (t_gap + latency)`` (outward side, measured at an update
    instant) to the boundary itself, arriving exactly when that update is
    classified with ``eval_phase = 1``.  It then returns outward no faster
    than ``v`` and the cycle repeats every ``m`` updates.  The boundary side
    is the one with the smaller gap to the Interest Space (upper side on a
    tie).  Updates measured during the return leg are classified while the
    truth is outside the Motion Space and so drop out of the statistics.
    """
    if update.kind is not UpdateType.PERIODIC:
        raise SimulationConfigError("worst-case trajectory needs a periodic update model")
    if cycles < 1:
        raise SimulationConfigError("cycles must be >= 1")
    rate = update.rate_hz
    tg = 1.0 / rate
    D = tg + latency_s
    m = max(2, math.ceil(2.0 * D / tg - 1e-9))
    T = spec.transform_L_to_I

    boundary = {a: _rest_value(spec.motion_space, a) for a in AXES}
    offset = {a: 0.0 for a in AXES}
    for axis in spec.dof:
        i_lo, i_hi = spec.interest_space.interval(axis)
        m_lo, m_hi = spec.motion_space.interval(axis)
        gap_lo = m_lo - i_lo if math.isfinite(i_lo) else math.inf
        gap_hi = i_hi - m_hi if math.isfinite(i_hi) else math.inf
        if math.isinf(gap_lo) and math.isinf(gap_hi):
            continue
        side = 1.0 if gap_hi <= gap_lo else -1.0
        boundary[axis] = m_hi if side > 0 else m_lo
        offset[axis] = side * spec.max_velocity[axis] * D

    def pose(shift: Mapping[str, float]) -> Pose:
        return transform_pose(T.inverse(), Pose(**{a: boundary[a] + shift[a] for a in AXES}))

    out_pose, in_pose = pose(offset), pose({a: 0.0 for a in AXES})
    waypoints = []
    for j in range(cycles):
        c = j * m
        waypoints.append((c / rate, out_pose))
        waypoints.append(((c + 1) / rate + latency_s, in_pose))
    waypoints.append(((cycles * m) / rate, out_pose))
    return Trajectory(tuple(waypoints))


def random_trajectory(
    motion: AxisSpace,
    dof: DofMask,
    rng: np.random.Generator,
    n_waypoints: int = 20,
    max_velocity: Mapping[str, float] | None = None,
    dwell_s: float = 1.0,
) -> Trajectory:
    """Random walk through uniformly drawn points of a bounded Motion Space.

    Segments last ``dwell_s`` or longer if ``max_velocity`` demands it; an
    axis with zero speed bound stays at its interval center.
    """
    lows, highs = [], []
    for axis in AXES:
        if axis in dof:
            lo, hi = motion.interval(axis)
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise SimulationConfigError(f"motion_space.{axis} must be bounded", axis=axis)
            if max_velocity is not None and max_velocity.get(axis, math.inf) == 0:
                lo = hi = 0.5 * (lo + hi)
        else:
            lo = hi = _rest_value(motion, axis)
        lows.append(lo)
        highs.append(hi)
    pts = rng.uniform(lows, highs, size=(n_waypoints, 4))
    t = 0.0
    waypoints = [(t, Pose(*pts[0]))]
    for prev, cur in zip(pts, pts[1:]):
        seg = dwell_s
        if max_velocity is not None:
            for axis, v in max_velocity.items():
                i = AXES.index(axis)
                d = abs(normalize_angle(cur[i] - prev[i])) if axis == "yaw" else abs(cur[i] - prev[i])
                if v > 0:
                    seg = max(seg, d / v)
        t += seg
        waypoints.append((t, Pose(*cur)))
    return Trajectory(tuple(waypoints), max_velocity=None if max_velocity is None else VelocityBound(max_velocity))


def worst_case_config(
    spec: LocalizationFunctionSpec,
    ils_budget: Mapping[str, float],
    trials: int,
    seed: int,
    update: UpdateModel,
    latency_s: float = 0.0,
    cycles: int = 100,
    workers: int = 1,
) -> SimConfig:
    """Simulation setup for :func:`worst_case_experiment`.

    Raises whatever :func:`derive_requirements` raises when ``spec`` is
    infeasible for ``update``/``latency_s``.  Latency only delays
    classification when the function needs real-time data.
    """
    derive_requirements(spec, update, latency_s)
    c = spec.confidence.probability
    sigma = MarginVector({a: calibrate_sigma(p, c) for a, p in ils_budget.items()})
    delay = latency_s if spec.realtime_required else 0.0
    return SimConfig(
        function=spec,
        noise=NoiseModel(sigma),
        update=update,
        trajectory=worst_case_trajectory(spec, update, delay, cycles),
        trials=trials,
        seed=seed,
        latency_s=delay,
        eval_phase=1.0,
        workers=workers,
    )


def worst_case_experiment(
    spec: LocalizationFunctionSpec,
    ils_budget: Mapping[str, float],
    trials: int,
    seed: int,
    update: UpdateModel,
    latency_s: float = 0.0,
    cycles: int = 100,
    workers: int = 1,
) -> SimReport:
    """Empirically test whether ``ils_budget`` keeps false exits below ``1 - C``.

    ``ils_budget`` holds device-frame percentiles at the confidence of ``spec``;
    noise is calibrated so each axis meets its percentile exactly.
    """
    return run_simulation(
        worst_case_config(spec, ils_budget, trials, seed, update, latency_s, cycles, workers)
    )


def empirical_coverage(sigma: float, percentile_value: float, n: int, seed: int) -> float:
    """Fraction of ``n`` draws from N(0, sigma) with ``|e| <= percentile_value``."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    return float(np.mean(np.abs(rng.normal(0.0, sigma, size=n)) <= percentile_value))


__all__: Sequence[str] = (
    "NoiseModel",
    "SimConfig",
    "SimReport",
    "SimulationConfigError",
    "Trajectory",
    "calibrate_sigma",
    "empirical_coverage",
    "pose_at",
    "random_trajectory",
    "run_simulation",
    "two_sided_z",
    "worst_case_config",
    "worst_case_experiment",
    "worst_case_trajectory",
)
