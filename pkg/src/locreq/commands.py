"""The four user-facing commands: derive, check, tabulate, simulate.

Each returns a :class:`~locreq.report.Report`; ``check`` and ``simulate``
also return the process exit code.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .config import DEFAULT_GRID, ProjectConfig, TabulateGrid, config_to_dict
from .errors import ConfigError
from .report import Report, Table
from .requirements import (
    LocalizationType,
    assess_ils,
    derive_requirements,
    tabulate_tradeoff,
)
from .simulation import (
    NoiseModel,
    SimConfig,
    SimReport,
    calibrate_sigma,
    random_trajectory,
    run_simulation,
    worst_case_config,
)
from .spatial import MarginVector, requirement_margin

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_SIM_FAILED = 3

# Pallet-booking reference case: margin, velocity and the printed z-row.
_REF_MARGIN = {"x": 0.3, "y": 0.5, "z": 0.15}
_REF_VELOCITY = {"x": 0.1, "y": 0.7, "z": 0.1}
_REF_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
_REF_PRINTED_Z = (0.15, 0.14, 0.13, 0.13, 0.12, 0.12)
_REF_IMPLIED_VZ = 0.05


def config_digest(cfg: ProjectConfig) -> str:
    blob = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _matches(values, ref) -> bool:
    return all(a in values and abs(values[a] - v) <= 1e-6 for a, v in ref.items())


def _warnings(cfg: ProjectConfig, r: MarginVector) -> list[str]:
    out = []
    f = cfg.function
    if _matches(r, _REF_MARGIN) and _matches(f.max_velocity, _REF_VELOCITY):
        vz = f.max_velocity["z"]
        computed = ", ".join(f"{r['z'] - vz * t:.2f}" for t in _REF_GRID)
        printed = ", ".join(f"{v:.2f}" for v in _REF_PRINTED_Z)
        out.append(
            f"z-row discrepancy: with v_z = {vz:g} m/s the z budgets for t_g = 0.1..0.6 s are "
            f"({computed}); the printed pallet-booking reference table lists ({printed}), "
            f"which is consistent with v_z = {_REF_IMPLIED_VZ:g} m/s instead. Values here "
            f"follow the stated inputs."
        )
    if f.localization_type is LocalizationType.RELATIVE:
        out.append(
            "relative localization: percentiles must describe the error of the entity "
            "relative to the reference entity's frame"
        )
    return out


def _vec(v) -> dict:
    return None if v is None else v.to_dict()


def _margin(cfg: ProjectConfig) -> MarginVector:
    f = cfg.function
    return requirement_margin(f.interest_space, f.motion_space, f.safety_margin, f.dof)


def _effective_delay(cfg: ProjectConfig, latency_s: float) -> float:
    return latency_s if cfg.function.realtime_required else 0.0


def _report(cmd: str, cfg: ProjectConfig, results: dict, tables, warnings) -> Report:
    return Report(
        command=cmd,
        config_digest=config_digest(cfg),
        inputs=config_to_dict(cfg),
        results=results,
        tables=tuple(tables),
        warnings=tuple(warnings),
        title=f"{cmd}: {cfg.function.name}",
    )


def cmd_derive(cfg: ProjectConfig) -> Report:
    """Steps B-D for the configured update model and latency.

    Raises the engine's step-labeled error when the timing is infeasible.
    """
    d = cfg.derive
    req = derive_requirements(cfg.function, d.update, d.latency_s, d.yaw_percentile)
    warnings = _warnings(cfg, req.requirement_margin)
    if req.accuracy_budget_at_device_frame is None:
        warnings.append(
            "device-frame budget not computed: the transform is not the identity and "
            "derive.yaw_percentile is not set"
        )
    results = {
        "steps": {
            "B": {"requirement_margin": _vec(req.requirement_margin)},
            "C": {
                "time_gap_s": req.time_gap_s,
                "latency_s": req.latency_s,
                "confidence": req.confidence.probability,
                "time_gap_margin": _vec(req.time_gap_margin),
                "time_delay_margin": _vec(req.time_delay_margin),
            },
            "D": {
                "accuracy_budget_interest_frame": _vec(req.accuracy_budget_at_interest_frame),
                "accuracy_budget_device_frame": _vec(req.accuracy_budget_at_device_frame),
            },
        },
        "basis": req.basis.value,
    }
    device = req.accuracy_budget_at_device_frame
    rows = tuple(
        (a, req.requirement_margin[a], req.time_gap_margin[a], req.time_delay_margin[a],
         req.accuracy_budget_at_interest_frame[a], None if device is None else device[a])
        for a in req.requirement_margin
    )
    table = Table("requirements", ("axis", "R", "TG", "TD", "P_interest", "P_device"), rows)
    return _report("derive", cfg, results, [table], warnings)


def cmd_check(cfg: ProjectConfig) -> tuple[Report, int]:
    """One verdict per ILS; exit 0 iff every ILS is suitable, else 2."""
    if not cfg.ils:
        raise ConfigError("check needs at least one entry", path="ils")
    f = cfg.function
    verdicts, breakdown_rows, verdict_rows = [], [], []
    for ils in cfg.ils:
        b = assess_ils(f, ils)
        v = b.verdict
        verdicts.append({
            "ils": ils.name,
            "feasible": v.feasible,
            "binding_axis": v.binding_axis,
            "per_axis_slack": _vec(v.per_axis_slack),
            "requirement_margin": _vec(b.requirement_margin),
            "static_uncertainty": _vec(b.static_uncertainty),
            "time_gap_margin": _vec(b.time_gap_margin),
            "time_delay_margin": _vec(b.time_delay_margin),
            "uncertainty": _vec(b.uncertainty),
        })
        verdict_rows.append((ils.name, v.feasible, v.binding_axis,
                             *(v.per_axis_slack[a] for a in f.dof)))
        for a in f.dof:
            breakdown_rows.append((ils.name, a, b.requirement_margin[a], b.static_uncertainty[a],
                                   b.time_gap_margin[a], b.time_delay_margin[a],
                                   b.uncertainty[a], v.per_axis_slack[a]))
    all_ok = all(v["feasible"] for v in verdicts)
    tables = [
        Table("verdicts", ("ils", "feasible", "binding_axis", *(f"slack_{a}" for a in f.dof)),
              tuple(verdict_rows)),
        Table("breakdown", ("ils", "axis", "R", "U_s", "TG", "TD", "U", "slack"),
              tuple(breakdown_rows)),
    ]
    results = {"all_feasible": all_ok, "verdicts": verdicts}
    report = _report("check", cfg, results, tables, _warnings(cfg, _margin(cfg)))
    return report, EXIT_OK if all_ok else EXIT_INFEASIBLE


def _unit(axis: str) -> str:
    return "rad" if axis == "yaw" else "m"


def cmd_tabulate(cfg: ProjectConfig) -> Report:
    """Accuracy budget per axis over a grid of time gaps."""
    grid = cfg.tabulate or TabulateGrid(*DEFAULT_GRID)
    r = _margin(cfg)
    delay = _effective_delay(cfg, cfg.derive.latency_s)
    table = tabulate_tradeoff(r, cfg.function.max_velocity, grid.values(), delay)
    axes = list(r)
    columns = []
    rows = []
    for i, t in enumerate(table.t_gaps):
        cells = {a: (table.rows[a][i] if table.feasible(a, i) else "infeasible") for a in axes}
        columns.append({"t_g_s": t, "budget": cells})
        rows.append((t, *(cells[a] for a in axes)))
    results = {
        "requirement_margin": r.to_dict(),
        "t_delay_s": delay,
        "columns": columns,
    }
    header = ("t_g_s", *(f"P{a}_{_unit(a)}" for a in axes))
    out = Table("tradeoff", header, tuple(rows), markdown_layout="columns")
    return _report("tabulate", cfg, results, [out], _warnings(cfg, r))


def _sim_report_dict(rep: SimReport) -> dict:
    return {
        "updates_total": rep.updates_total,
        "updates_classified": rep.updates_classified,
        "false_outside_count": {a: int(n) for a, n in rep.false_outside_count.items()},
        "false_outside_per_axis": rep.false_outside_per_axis.to_dict(),
        "false_outside_joint": rep.false_outside_joint,
        "confidence_target": rep.confidence_target,
        "standard_error_per_axis": rep.standard_error_per_axis.to_dict(),
        "threshold_per_axis": rep.threshold.to_dict(),
        "union_bound": rep.union_bound,
        "pass": rep.passed,
    }


def build_sim_config(cfg: ProjectConfig) -> tuple[SimConfig, MarginVector]:
    """Simulation setup from a project config, plus the noise budget used."""
    sim = cfg.simulation
    if sim is None:
        raise ConfigError("simulate needs a simulation section", path="simulation")
    f = cfg.function
    update = sim.update or cfg.derive.update
    latency = cfg.derive.latency_s if sim.latency_s is None else sim.latency_s
    if update.time_gap_s == 0:
        raise ConfigError("simulation needs a periodic update model", path="simulation.update")
    req = derive_requirements(f, update, latency, cfg.derive.yaw_percentile)
    device = req.accuracy_budget_at_device_frame
    if device is None:
        raise ConfigError("device-frame budget unavailable; set derive.yaw_percentile",
                          path="derive.yaw_percentile")
    budget = MarginVector({a: v * sim.budget_scale for a, v in device.items()})
    if sim.trajectory == "worst_case":
        sc = worst_case_config(f, budget, sim.trials, sim.seed, update, latency, sim.cycles)
    else:
        # Trajectory stream uses a two-element spawn key, disjoint from the per-trial keys.
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(sim.seed, spawn_key=(0, 1))))
        c = f.confidence.probability
        sc = SimConfig(
            function=f,
            noise=NoiseModel(MarginVector({a: calibrate_sigma(p, c) for a, p in budget.items()})),
            update=update,
            trajectory=random_trajectory(f.motion_space, f.dof, rng, sim.cycles + 1,
                                         f.max_velocity.restrict(f.dof)),
            trials=sim.trials,
            seed=sim.seed,
            latency_s=_effective_delay(cfg, latency),
        )
    return sc, budget


def cmd_simulate(cfg: ProjectConfig) -> tuple[Report, int]:
    """Monte-Carlo validation; exit 0 on pass, 3 when a per-axis rate breaks the bound."""
    sc, budget = build_sim_config(cfg)
    rep = run_simulation(sc)
    axes = list(rep.false_outside_per_axis)
    thr = rep.threshold
    results = {
        "trajectory": cfg.simulation.trajectory,
        "update": sc.update.to_dict(),
        "latency_s": sc.latency_s,
        "eval_phase": sc.eval_phase,
        "trials": sc.trials,
        "seed": sc.seed,
        "budget_device_frame": budget.to_dict(),
        "noise_sigma": sc.noise.sigma.to_dict(),
        "report": _sim_report_dict(rep),
    }
    tables = [
        Table("false_outside", ("axis", "count", "rate", "threshold", "pass"),
              tuple((a, int(rep.false_outside_count[a]), rep.false_outside_per_axis[a], thr[a],
                     rep.false_outside_per_axis[a] <= thr[a]) for a in axes)),
        Table("summary", ("key", "value"), (
            ("updates_total", rep.updates_total),
            ("updates_classified", rep.updates_classified),
            ("false_outside_joint", rep.false_outside_joint),
            ("confidence_target", rep.confidence_target),
            ("union_bound", rep.union_bound),
            ("pass", rep.passed),
        )),
    ]
    report = _report("simulate", cfg, results, tables, _warnings(cfg, _margin(cfg)))
    return report, EXIT_OK if rep.passed else EXIT_SIM_FAILED

