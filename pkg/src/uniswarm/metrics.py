"""Per-step synchronization/tracking diagnostics and proof-inequality audits.

Audits carry one of three verdicts: PASS (inequality holds), SKIP (its
premise is unmet on this trajectory) or FAIL (an unconditional inequality
was violated, which can only mean an implementation bug).  Asymptotic
envelopes are reported (verdict REPORT) but never failed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import ModelParams, SwarmState, Trajectory
from .graphs import (ProximityGraph, averaging_matrix, build_graph, connectivity,
                     pairwise_distances, ring_sets)

PASS, SKIP, FAIL, REPORT = "PASS", "SKIP", "FAIL", "REPORT"

_AUDIT_TOL = 1e-9


@dataclass(frozen=True)
class StepMetrics:
    k: int
    delta_theta: float  # max pairwise heading dissimilarity
    delta_v: float
    tracking_theta: float  # max |theta_i - theta_bar|; nan without a reference
    tracking_v: float
    max_distance_drift: float  # max |Delta_ij(t_k) - Delta_ij(0)|
    p_deviation: float  # ||P(t_k) - P(0)||
    alpha_drift: float  # max |alpha_i(t_k) - alpha_i(0)|; 0 without leaders
    connected: bool


def _alpha_fractions(graph: ProximityGraph, leader_mask: np.ndarray) -> np.ndarray:
    """Leader fraction of each agent's neighborhood, self excluded."""
    adj = graph.adjacency.copy()
    np.fill_diagonal(adj, False)
    n2 = adj @ leader_mask.astype(float)
    total = adj.sum(axis=1)
    return np.where(total > 0, n2 / np.where(total > 0, total, 1.0), 0.0)


def step_metrics(state: SwarmState, initial: SwarmState, graph: ProximityGraph,
                 initial_graph: ProximityGraph, reference_heading: float = float("nan"),
                 reference_speed: float = float("nan")) -> StepMetrics:
    if state.n_agents != initial.n_agents:
        raise ValueError("state and initial must have the same agent count")
    headings, speeds = state.headings, state.speeds
    delta_theta = float(headings.max() - headings.min())
    delta_v = float(speeds.max() - speeds.min())
    tracking_theta = float(np.abs(headings - reference_heading).max()) \
        if np.isfinite(reference_heading) else float("nan")
    tracking_v = float(np.abs(speeds - reference_speed).max()) \
        if np.isfinite(reference_speed) else float("nan")
    drift = float(np.abs(pairwise_distances(state.positions)
                         - pairwise_distances(initial.positions)).max())
    p_dev = float(np.linalg.norm(averaging_matrix(graph) - averaging_matrix(initial_graph), 2))
    alpha_drift = 0.0
    if state.leader_mask.any():
        alpha_drift = float(np.abs(_alpha_fractions(graph, state.leader_mask)
                                   - _alpha_fractions(initial_graph, initial.leader_mask)).max())
    return StepMetrics(k=state.sample_index, delta_theta=delta_theta, delta_v=delta_v,
                       tracking_theta=tracking_theta, tracking_v=tracking_v,
                       max_distance_drift=drift, p_deviation=p_dev,
                       alpha_drift=alpha_drift, connected=connectivity(graph))


def _envelope_integral(values_k: np.ndarray, values_k1: np.ndarray, tau: float,
                       substeps: int) -> float:
    """integral over the dwell interval of max_i x_i(t) - min_i x_i(t).

    Per-agent signals are linear in t, so the envelope is piecewise linear
    and convex; the trapezoid rule on the substep grid over-estimates it,
    which keeps the audit's right-hand side conservative.
    """
    s = np.linspace(0.0, 1.0, substeps + 1)
    interp = np.outer(1.0 - s, values_k) + np.outer(s, values_k1)  # (S+1, m)
    envelope = interp.max(axis=1) - interp.min(axis=1)
    return float(np.trapezoid(envelope, dx=1.0 / substeps) * tau)


@dataclass
class RecursionAuditReport:
    """Audit of the distance-change recursion between contiguous instants."""

    verdicts: list[str]
    slacks: np.ndarray  # rhs - lhs per step
    fail_count: int
    max_violation: float

    @property
    def passed(self) -> bool:
        return self.fail_count == 0

    def to_dict(self) -> dict:
        return {"verdicts": self.verdicts, "slacks": self.slacks.tolist(),
                "fail_count": self.fail_count, "max_violation": self.max_violation}


def recursion_audit(traj: Trajectory, substep_count: int = 16) -> RecursionAuditReport:
    """Checks, for every step and the maximizing pair,
    |Delta_ij(t_{k+1}) - Delta_ij(t_k)|
        <= 2 int delta_v dt + 2 max_i |v_i(t_k)| int delta_theta dt.

    The inequality follows from the triangle inequality and |sin x| <= |x|,
    so any violation beyond tolerance is an implementation bug.
    """
    if traj.n_steps < 1:
        raise ValueError("trajectory needs at least 2 sampling instants")
    tau = traj.params.tau_n
    verdicts: list[str] = []
    slacks = np.empty(traj.n_steps)
    fails = 0
    max_violation = 0.0
    dist_k = pairwise_distances(traj.positions[0])
    for k in range(traj.n_steps):
        dist_k1 = pairwise_distances(traj.positions[k + 1])
        lhs = float(np.abs(dist_k1 - dist_k).max())
        int_dv = _envelope_integral(traj.speeds[k], traj.speeds[k + 1], tau, substep_count)
        int_dth = _envelope_integral(traj.headings[k], traj.headings[k + 1], tau, substep_count)
        vmax = float(np.abs(traj.speeds[k]).max())
        rhs = 2.0 * int_dv + 2.0 * vmax * int_dth
        slack = rhs - lhs
        slacks[k] = slack
        if slack < -_AUDIT_TOL:
            verdicts.append(FAIL)
            fails += 1
            max_violation = max(max_violation, -slack)
        else:
            verdicts.append(PASS)
        dist_k = dist_k1
    return RecursionAuditReport(verdicts=verdicts, slacks=slacks, fail_count=fails,
                                max_violation=max_violation)


@dataclass
class EnvelopeAuditReport:
    verdict: str
    reason: str = ""
    violations: int = 0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "reason": self.reason,
                "violations": self.violations, "details": self.details}


def geometric_envelope_audit(traj: Trajectory, params: ModelParams | None = None,
                             tol: float = _AUDIT_TOL) -> EnvelopeAuditReport:
    """Leader runs: geometric decay of heading/speed deviations with rate
    gamma = max_i(1 - (alpha_i(0) - mu) * vartheta), mu the observed
    alpha-drift.  Valid whenever the observed premises hold; otherwise the
    audit is skipped.  Leaderless runs: the speed dissimilarity is compared
    against the (1 - r^2/288)^k envelope and reported, never failed, since
    that rate rests on an almost-sure spectral bound.
    """
    params = traj.params if params is None else params
    if not traj.leader_mask.any():
        return _leaderless_envelope_report(traj, params)

    refs = traj.reference_headings
    if not np.all(np.isfinite(refs)) or not np.all(refs == refs[0]):
        return EnvelopeAuditReport(verdict=SKIP, reason="reference heading is not constant")
    theta_bar = float(refs[0])
    v_bar = traj.reference_speed
    vartheta = params.vartheta

    mask = traj.leader_mask
    followers, leaders = ~mask, mask
    if traj.n_steps < 1:
        return EnvelopeAuditReport(verdict=SKIP, reason="trajectory too short")

    theta_dev = np.abs(traj.headings - theta_bar)
    v_dev = np.abs(traj.speeds - v_bar)
    big_a = float(theta_dev[1, followers].max())
    big_b = float(v_dev[1, followers].max())
    if theta_dev[1, leaders].max() > (1.0 - vartheta) * big_a + tol:
        return EnvelopeAuditReport(verdict=SKIP,
                                   reason="leader initial heading deviation exceeds (1-vartheta)A")
    if v_dev[1, leaders].max() > (1.0 - vartheta) * big_b + tol:
        return EnvelopeAuditReport(verdict=SKIP,
                                   reason="leader initial speed deviation exceeds (1-vartheta)B")

    alphas = np.empty((traj.n_steps + 1, traj.headings.shape[1]))
    for k in range(traj.n_steps + 1):
        graph = build_graph(traj.positions[k], params.r_n, params.self_inclusive)
        adj = graph.adjacency.copy()
        np.fill_diagonal(adj, False)
        totals = adj.sum(axis=1)
        if (totals == 0).any():
            return EnvelopeAuditReport(
                verdict=SKIP, reason=f"agent with empty neighborhood at step {k}")
        alphas[k] = (adj @ mask.astype(float)) / totals

    mu = float(np.abs(alphas - alphas[0]).max())
    gamma = float((1.0 - (alphas[0] - mu) * vartheta).max())

    violations = 0
    worst = 0.0
    power = 1.0  # gamma^{k-1}
    for k in range(1, traj.n_steps + 1):
        for dev, amp in ((theta_dev, big_a), (v_dev, big_b)):
            excess = max(dev[k, followers].max() - power * amp,
                         dev[k, leaders].max() - (1.0 - vartheta) * power * amp)
            if excess > tol:
                violations += 1
                worst = max(worst, float(excess))
        power *= gamma
    verdict = FAIL if violations else PASS
    return EnvelopeAuditReport(verdict=verdict, violations=violations,
                               details={"A": big_a, "B": big_b, "mu": mu, "gamma": gamma,
                                        "worst_excess": worst})


def _leaderless_envelope_report(traj: Trajectory, params: ModelParams) -> EnvelopeAuditReport:
    lambda_hat = 1.0 - params.r_n ** 2 / 288.0
    delta_v = traj.speeds.max(axis=1) - traj.speeds.min(axis=1)
    scale = 2.0 * np.sqrt(2.0) * float(np.linalg.norm(traj.speeds[1]))
    ks = np.arange(1, traj.n_steps + 1)
    envelope = scale * lambda_hat ** (ks - 1)
    within = delta_v[1:] <= envelope + _AUDIT_TOL
    return EnvelopeAuditReport(
        verdict=REPORT,
        reason="leaderless decay envelope relies on the almost-sure spectral bound",
        details={"lambda_hat": lambda_hat, "fraction_within": float(within.mean()),
                 "scale": scale})


def sync_detect(traj: Trajectory, tol_theta: float, tol_v: float) -> int | None:
    """First sampling index with both dissimilarities below tolerance."""
    if not (tol_theta > 0 and tol_v > 0):
        raise ValueError("tolerances must be positive")
    d_theta = traj.headings.max(axis=1) - traj.headings.min(axis=1)
    d_v = traj.speeds.max(axis=1) - traj.speeds.min(axis=1)
    hits = np.where((d_theta <= tol_theta) & (d_v <= tol_v))[0]
    return int(hits[0]) if len(hits) else None


def ring_containment_check(traj: Trajectory, params: ModelParams | None = None) -> dict:
    """If every pairwise distance stayed within the drift budget up to step K,
    the neighbor-set change at each instant must be contained in the initial
    ring sets.  Exact cross-check against the annulus membership."""
    params = traj.params if params is None else params
    budget = params.drift_budget
    dist0 = pairwise_distances(traj.positions[0])
    rings = ring_sets(traj.positions[0], params.r_n, params.eta_n_effective,
                      traj.leader_mask)
    ring_members = [set(r.followers.tolist()) | set(r.leaders.tolist()) for r in rings]
    adj0 = dist0 < params.r_n
    np.fill_diagonal(adj0, params.self_inclusive)

    holds_up_to = -1
    contained = True
    for k in range(traj.n_steps + 1):
        dist_k = pairwise_distances(traj.positions[k])
        if np.abs(dist_k - dist0).max() > budget:
            break
        holds_up_to = k
        adj_k = dist_k < params.r_n
        np.fill_diagonal(adj_k, params.self_inclusive)
        changed = adj_k != adj0
        for i, j in zip(*np.where(changed)):
            if j not in ring_members[i]:
                contained = False
    return {"drift_within_budget_up_to": holds_up_to, "containment_holds": contained}


def write_metrics_csv(rows: list[StepMetrics], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("k,delta_theta,delta_v,tracking_theta,tracking_v,drift,p_dev,alpha_drift,connected\n")
        for r in rows:
            fh.write(f"{r.k},{r.delta_theta:.17g},{r.delta_v:.17g},{r.tracking_theta:.17g},"
                     f"{r.tracking_v:.17g},{r.max_distance_drift:.17g},{r.p_deviation:.17g},"
                     f"{r.alpha_drift:.17g},{int(r.connected)}\n")
