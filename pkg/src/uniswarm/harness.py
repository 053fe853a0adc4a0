"""Seeded runs, Monte-Carlo campaigns, named scenarios, and file I/O.

A run is deterministic given (config, seed): repeating it produces
byte-identical output files.  Campaigns execute runs independently per
seed and aggregate.  All JSON outputs carry a ``schema_version`` field.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import (CONTROLLERS, LEADER_CONSTANT, LEADER_DYNAMIC, LEADERLESS,
                       ModelParams, Trajectory, run_epoch, sample_initial)
from .graphs import build_graph
from .metrics import (FAIL, EnvelopeAuditReport, RecursionAuditReport, StepMetrics,
                      geometric_envelope_audit, recursion_audit, step_metrics, sync_detect,
                      write_metrics_csv)
from .reference import ReferenceSchedule

SCHEMA_VERSION = 1

AUDIT_LEVELS = ("off", "sampled", "full")


@dataclass(frozen=True)
class Obstacle:
    """Axis-aligned ellipse recorded for a post-hoc intersection diagnostic.

    The controller never senses it; the geometry only feeds the
    ``obstacle_hit_fraction`` entry of the run metadata.
    """

    center: tuple[float, float] = (1.5, 0.5)
    semi_axes: tuple[float, float] = (0.4, 0.25)

    def contains(self, points: np.ndarray) -> np.ndarray:
        rel = (np.asarray(points, dtype=float) - np.asarray(self.center)) / np.asarray(self.semi_axes)
        return (rel ** 2).sum(axis=-1) < 1.0


@dataclass
class RunConfig:
    params: ModelParams
    steps: int
    seed: int
    mode: str = LEADERLESS
    schedule: ReferenceSchedule | None = None
    reference_heading: float = 0.0
    outputs: str | None = None
    audit_level: str = "sampled"
    substeps: int = 16
    obstacle: Obstacle | None = None

    def validate(self) -> None:
        self.params.validate()
        if self.mode not in CONTROLLERS:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == LEADER_DYNAMIC and self.schedule is None:
            raise ValueError("dynamic mode requires a schedule")
        if self.mode != LEADERLESS and self.params.leader_count == 0:
            raise ValueError(f"mode {self.mode!r} requires alpha_n > 0")
        if self.audit_level not in AUDIT_LEVELS:
            raise ValueError(f"audit_level must be one of {AUDIT_LEVELS}")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "params": asdict(self.params),
            "steps": self.steps,
            "seed": self.seed,
            "mode": self.mode,
            "reference_heading": self.reference_heading,
            "audit_level": self.audit_level,
            "substeps": self.substeps,
        }
        if self.schedule is not None:
            out["schedule"] = {"headings": list(self.schedule.headings),
                               "epsilon": self.schedule.epsilon,
                               "restrict_to_followers": self.schedule.restrict_to_followers}
        if self.obstacle is not None:
            out["obstacle"] = {"center": list(self.obstacle.center),
                               "semi_axes": list(self.obstacle.semi_axes)}
        if self.outputs is not None:
            out["outputs"] = self.outputs
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        try:
            params = ModelParams(**data["params"])
            schedule = None
            if "schedule" in data and data["schedule"] is not None:
                sched = data["schedule"]
                schedule = ReferenceSchedule(
                    headings=[float(h) for h in sched["headings"]],
                    epsilon=float(sched.get("epsilon", 0.05)),
                    restrict_to_followers=bool(sched.get("restrict_to_followers", False)))
            obstacle = None
            if "obstacle" in data and data["obstacle"] is not None:
                obs = data["obstacle"]
                obstacle = Obstacle(center=tuple(obs["center"]),
                                    semi_axes=tuple(obs["semi_axes"]))
            config = cls(params=params, steps=int(data["steps"]), seed=int(data.get("seed", 0)),
                         mode=data.get("mode", LEADERLESS), schedule=schedule,
                         reference_heading=float(data.get("reference_heading", 0.0)),
                         outputs=data.get("outputs"),
                         audit_level=data.get("audit_level", "sampled"),
                         substeps=int(data.get("substeps", 16)), obstacle=obstacle)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid run config: {exc}") from exc
        try:
            config.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return config

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)


class ConfigError(ValueError):
    """Config file is malformed or inconsistent."""


@dataclass
class RunResult:
    config: RunConfig
    trajectory: Trajectory
    metrics: list[StepMetrics]
    recursion: RecursionAuditReport | None
    envelope: EnvelopeAuditReport | None
    sync_index: int | None
    meta: dict

    @property
    def audit_failed(self) -> bool:
        if self.recursion is not None and not self.recursion.passed:
            return True
        return self.envelope is not None and self.envelope.verdict == FAIL


def run(config: RunConfig, out_dir: str | Path | None = None) -> RunResult:
    """Execute one run and (optionally) write all exports."""
    config.validate()
    started = time.time()
    params = config.params
    state = sample_initial(params, config.seed)
    schedule = config.schedule.copy() if config.schedule is not None else None

    integration_check = {"off": "off", "sampled": "sampled", "full": "full"}[config.audit_level]
    traj = run_epoch(state, params, config.steps, controller=config.mode,
                     schedule=schedule, reference_heading=config.reference_heading,
                     integration_check=integration_check)

    rows = _compute_metrics(traj, config, schedule)
    recursion = envelope = None
    if config.audit_level != "off":
        substeps = config.substeps
        recursion = recursion_audit(traj, substep_count=substeps)
        envelope = geometric_envelope_audit(traj, params)
    sync_index = sync_detect(traj, 1e-6, 1e-6)

    meta = {
        "schema_version": SCHEMA_VERSION,
        "seed": config.seed,
        "params": asdict(params),
        "mode": config.mode,
        "steps": config.steps,
        "reference_heading": config.reference_heading,
        "switch_log": traj.switch_log,
        "left_unit_square": traj.left_unit_square,
        "sync_index": sync_index,
        "wallclock": time.time() - started,
    }
    if config.obstacle is not None:
        hits = config.obstacle.contains(traj.positions.reshape(-1, 2))
        meta["obstacle"] = {"center": list(config.obstacle.center),
                            "semi_axes": list(config.obstacle.semi_axes),
                            "hit_fraction": float(hits.mean())}

    result = RunResult(config=config, trajectory=traj, metrics=rows,
                       recursion=recursion, envelope=envelope,
                       sync_index=sync_index, meta=meta)
    target = out_dir if out_dir is not None else config.outputs
    if target is not None:
        write_run_outputs(result, target)
    return result


def _compute_metrics(traj: Trajectory, config: RunConfig, schedule) -> list[StepMetrics]:
    params = config.params
    initial = traj.state_at(0)
    initial_graph = build_graph(initial.positions, params.r_n, params.self_inclusive)
    rows = []
    for k in range(traj.n_steps + 1):
        state = traj.state_at(k)
        graph = initial_graph if k == 0 else build_graph(state.positions, params.r_n,
                                                         params.self_inclusive)
        if config.mode == LEADERLESS:
            ref_theta, ref_v = float("nan"), float("nan")
        else:
            # for instant k > 0 the reference used over the previous interval
            idx = min(max(k - 1, 0), traj.n_steps - 1)
            ref_theta = float(traj.reference_headings[idx])
            ref_v = traj.reference_speed
        rows.append(step_metrics(state, initial, graph, initial_graph,
                                 reference_heading=ref_theta, reference_speed=ref_v))
    return rows


def write_run_outputs(result: RunResult, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "trajectory": out / "trajectory.csv",
        "metrics": out / "metrics.csv",
        "audits": out / "audits.json",
        "meta": out / "run_meta.json",
    }
    write_trajectory_csv(result.trajectory, paths["trajectory"])
    write_metrics_csv(result.metrics, paths["metrics"])
    audits = {"schema_version": SCHEMA_VERSION}
    if result.recursion is not None:
        audits["recursion"] = result.recursion.to_dict()
    if result.envelope is not None:
        audits["envelope"] = result.envelope.to_dict()
    with open(paths["audits"], "w") as fh:
        json.dump(audits, fh, indent=1)
    with open(paths["meta"], "w") as fh:
        json.dump(result.meta, fh, indent=1)
    return paths


ROLE_LABELS = ("follower", "leader")


def write_trajectory_csv(traj: Trajectory, path) -> None:
    roles = [ROLE_LABELS[int(x)] for x in traj.leader_mask]
    with open(path, "w", newline="") as fh:
        fh.write("k,t,agent,role,x,y,theta,v\n")
        for k in range(traj.n_steps + 1):
            t = traj.times[k]
            for i in range(len(roles)):
                fh.write(f"{k},{t:.17g},{i},{roles[i]},{traj.positions[k, i, 0]:.17g},"
                         f"{traj.positions[k, i, 1]:.17g},{traj.headings[k, i]:.17g},"
                         f"{traj.speeds[k, i]:.17g}\n")


def load_trajectory(run_dir) -> Trajectory:
    """Rebuild a trajectory record from a stored run directory."""
    run_dir = Path(run_dir)
    with open(run_dir / "run_meta.json") as fh:
        meta = json.load(fh)
    params = ModelParams(**meta["params"])
    data = np.genfromtxt(run_dir / "trajectory.csv", delimiter=",", names=True,
                         dtype=None, encoding="utf-8")
    ks = data["k"].astype(int)
    n_instants = ks.max() + 1
    m = int((ks == 0).sum())
    positions = np.empty((n_instants, m, 2))
    headings = np.empty((n_instants, m))
    speeds = np.empty((n_instants, m))
    agents = data["agent"].astype(int)
    positions[ks, agents, 0] = data["x"]
    positions[ks, agents, 1] = data["y"]
    headings[ks, agents] = data["theta"]
    speeds[ks, agents] = data["v"]
    leader_mask = np.zeros(m, dtype=bool)
    first = agents[ks == 0]
    leader_mask[first] = data["role"][ks == 0] == "leader"

    mode = meta.get("mode", LEADERLESS)
    steps = n_instants - 1
    refs = np.full(steps, np.nan)
    if mode == LEADER_CONSTANT:
        refs[:] = meta.get("reference_heading", 0.0)
    connected = np.zeros(n_instants, dtype=bool)  # recomputed by audits on demand
    return Trajectory(times=np.arange(n_instants) * params.tau_n, positions=positions,
                      headings=headings, speeds=speeds, leader_mask=leader_mask,
                      params=params, controller=mode, reference_headings=refs,
                      reference_speed=params.v_n if mode != LEADERLESS else float("nan"),
                      connected=connected, switch_log=meta.get("switch_log", []))


@dataclass
class CampaignSummary:
    per_run: list[dict]
    sync_fraction: float
    connectivity_fraction: float
    audit_verdicts: dict
    quantiles: dict
    errors: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "per_run": self.per_run,
                "sync_fraction": self.sync_fraction,
                "connectivity_fraction": self.connectivity_fraction,
                "audit_verdicts": self.audit_verdicts, "quantiles": self.quantiles,
                "errors": self.errors}


def campaign(base: RunConfig, seeds: list[int], out_dir: str | Path | None = None,
             keep_results: bool = False) -> CampaignSummary | tuple:
    """Run the base config once per seed and aggregate.

    Per-run failures are recorded, not fatal.  Aggregation is invariant to
    the order of the seed list (records are sorted by seed).
    """
    if not seeds:
        raise ValueError("campaign needs at least one seed")
    per_run: list[dict] = []
    errors: list[dict] = []
    results = []
    verdicts = {"recursion_fail": 0, "envelope_pass": 0, "envelope_skip": 0,
                "envelope_fail": 0, "envelope_report": 0}
    for seed in sorted(set(int(s) for s in seeds)):
        cfg = RunConfig(params=base.params, steps=base.steps, seed=seed, mode=base.mode,
                        schedule=base.schedule.copy() if base.schedule else None,
                        reference_heading=base.reference_heading, outputs=None,
                        audit_level=base.audit_level, substeps=base.substeps,
                        obstacle=base.obstacle)
        try:
            result = run(cfg)
        except Exception as exc:  # recorded per run, campaign continues
            errors.append({"seed": seed, "error": str(exc)})
            continue
        final = result.metrics[-1]
        record = {
            "seed": seed,
            "sync_index": result.sync_index,
            "final_delta_theta": final.delta_theta,
            "final_delta_v": final.delta_v,
            "final_tracking_theta": None if np.isnan(final.tracking_theta)
            else final.tracking_theta,
            "final_tracking_v": None if np.isnan(final.tracking_v) else final.tracking_v,
            "connected_all": bool(all(m.connected for m in result.metrics)),
            "switch_log": result.trajectory.switch_log,
        }
        if result.recursion is not None:
            record["recursion_fails"] = result.recursion.fail_count
            verdicts["recursion_fail"] += result.recursion.fail_count
        if result.envelope is not None:
            record["envelope_verdict"] = result.envelope.verdict
            verdicts[f"envelope_{result.envelope.verdict.lower()}"] += 1
        per_run.append(record)
        if keep_results:
            results.append(result)

    synced = [r["sync_index"] is not None for r in per_run]
    connected = [r["connected_all"] for r in per_run]
    final_dtheta = np.array([r["final_delta_theta"] for r in per_run]) if per_run else np.array([])
    quantiles = {}
    if len(final_dtheta):
        qs = np.quantile(final_dtheta, [0.0, 0.5, 0.9, 1.0])
        quantiles["final_delta_theta"] = {"min": qs[0], "median": qs[1],
                                          "q90": qs[2], "max": qs[3]}
    summary = CampaignSummary(per_run=per_run,
                              sync_fraction=float(np.mean(synced)) if synced else 0.0,
                              connectivity_fraction=float(np.mean(connected)) if connected else 0.0,
                              audit_verdicts=verdicts, quantiles=quantiles, errors=errors)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "campaign_summary.json", "w") as fh:
            json.dump(summary.to_dict(), fh, indent=1)
    return (summary, results) if keep_results else summary


def scenario_fig3(vartheta: float = 0.5, epsilon: float = 0.05, steps: int = 3000,
                  seed: int = 0) -> RunConfig:
    """Guide 20 followers with 3 leaders across an oval obstacle: the desired
    heading steps through {0, pi/2, 0, -pi/2, 0} as tracking is achieved.

    The obstacle is decorative (recorded for the intersection diagnostic
    only).  vartheta and epsilon default to 0.5 and 0.05.
    """
    params = ModelParams(n=20, alpha_n=3.0 / 20.0, r_n=0.3, v_n=0.3, tau_n=0.01,
                         vartheta=vartheta, epsilon=epsilon)
    schedule = ReferenceSchedule(headings=[0.0, np.pi / 2, 0.0, -np.pi / 2, 0.0],
                                 epsilon=epsilon)
    return RunConfig(params=params, steps=steps, seed=seed, mode=LEADER_DYNAMIC,
                     schedule=schedule, audit_level="sampled", obstacle=Obstacle())
