"""Hybrid closed-loop evolution of a sampled-data unicycle swarm.

Headings and speeds are updated by neighbor averaging at sampling instants
t_k = k*tau and vary linearly in between (the zero-order-hold control makes
the within-interval signals exactly linear).  Positions integrate the
unicycle kinematics in closed form over each dwell interval.

Headings are unwrapped real consensus variables; no mod-2*pi wrapping is
applied, since wrapping would break the convexity of the averaging update.
Agents may leave the unit square: there are no walls, and excursions are
flagged by a diagnostic rather than clamped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .graphs import ProximityGraph, build_graph, connectivity

STRICT_C_MAX = 1.0 / (144.0 * 320.0)
STRICT_C_PRIME_MAX = 1.0 / 144.0
STRICT_ETA_MAX = 1.0 / 512.0


@dataclass(frozen=True)
class AgentState:
    """Position, heading, speed of one robot at a sampling instant."""

    x: float
    y: float
    heading: float
    speed: float


@dataclass
class ModelParams:
    """All model parameters.

    ``eta_n`` is the drift budget constant; when left as None it defaults
    to c * r_n**2.  The strict-mode constants (c, c_prime, eta) default to
    their most conservative admissible values.
    """

    n: int
    r_n: float
    v_n: float
    tau_n: float
    alpha_n: float = 0.0
    vartheta: float = 0.5
    eta: float = STRICT_ETA_MAX
    eta_n: float | None = None
    c: float = STRICT_C_MAX
    c_prime: float = STRICT_C_PRIME_MAX
    epsilon: float = 0.05
    self_inclusive: bool = True

    @property
    def leader_count(self) -> int:
        return int(math.ceil(self.n * self.alpha_n)) if self.alpha_n > 0 else 0

    @property
    def total_count(self) -> int:
        return self.n + self.leader_count

    @property
    def eta_n_effective(self) -> float:
        return self.eta_n if self.eta_n is not None else self.c * self.r_n ** 2

    @property
    def drift_budget(self) -> float:
        """Maximum allowed change of any pairwise distance: eta_n * r_n."""
        return self.eta_n_effective * self.r_n

    def validate(self, strict: bool = False) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        for name in ("r_n", "v_n", "tau_n"):
            value = getattr(self, name)
            if not value >= 0 or (name in ("r_n", "tau_n") and value == 0):
                raise ValueError(f"{name} must be positive, got {value}")
        if not 0 <= self.alpha_n <= 1:
            raise ValueError(f"alpha_n must be in [0, 1], got {self.alpha_n}")
        if not 0 <= self.vartheta <= 1:
            raise ValueError(f"vartheta must be in [0, 1], got {self.vartheta}")
        if strict:
            if not 0 < self.vartheta:
                raise ValueError("strict mode requires 0 < vartheta <= 1")
            if self.c > STRICT_C_MAX:
                raise ValueError(f"strict mode requires c <= 1/(144*320), got {self.c}")
            if self.c_prime > STRICT_C_PRIME_MAX:
                raise ValueError(f"strict mode requires c_prime <= 1/144, got {self.c_prime}")
            if self.eta > STRICT_ETA_MAX:
                raise ValueError(f"strict mode requires eta <= 1/512, got {self.eta}")


@dataclass
class SwarmState:
    """All agent states plus role labels at one sampling instant."""

    positions: np.ndarray  # (m, 2)
    headings: np.ndarray  # (m,) radians, unwrapped
    speeds: np.ndarray  # (m,)
    leader_mask: np.ndarray  # (m,) bool; followers are V_1, leaders V_2
    sample_index: int = 0

    @property
    def n_agents(self) -> int:
        return len(self.headings)

    @property
    def follower_indices(self) -> np.ndarray:
        return np.where(~self.leader_mask)[0]

    @property
    def leader_indices(self) -> np.ndarray:
        return np.where(self.leader_mask)[0]

    def agent(self, i: int) -> AgentState:
        return AgentState(x=float(self.positions[i, 0]), y=float(self.positions[i, 1]),
                          heading=float(self.headings[i]), speed=float(self.speeds[i]))

    def copy(self) -> "SwarmState":
        return SwarmState(positions=self.positions.copy(), headings=self.headings.copy(),
                          speeds=self.speeds.copy(), leader_mask=self.leader_mask.copy(),
                          sample_index=self.sample_index)


# RNG streams: one PCG64 generator per quantity, derived from the run seed
# via SeedSequence spawn keys 0 (positions), 1 (headings), 2 (speeds).
# Cross-language ports can match statistics via the documented streams;
# bit-exactness is promised only within this implementation.
_STREAM_POSITIONS, _STREAM_HEADINGS, _STREAM_SPEEDS = 0, 1, 2


def _stream(seed: int, key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(key,))))


def sample_initial(params: ModelParams, seed: int) -> SwarmState:
    """Initial states: positions u.i.d. on [0,1]^2, headings on [-pi, pi),
    speeds on [0, v_n].  Leaders are the last ceil(n*alpha_n) indices and
    follow the same distribution as followers."""
    m = params.total_count
    positions = _stream(seed, _STREAM_POSITIONS).random((m, 2))
    headings = _stream(seed, _STREAM_HEADINGS).uniform(-np.pi, np.pi, m)
    speeds = _stream(seed, _STREAM_SPEEDS).uniform(0.0, params.v_n, m)
    leader_mask = np.zeros(m, dtype=bool)
    if params.leader_count:
        leader_mask[params.n:] = True
    return SwarmState(positions=positions, headings=headings, speeds=speeds,
                      leader_mask=leader_mask, sample_index=0)


def _neighbor_average(values: np.ndarray, graph: ProximityGraph) -> np.ndarray:
    degrees = graph.degrees
    # isolated agents (possible only with self_inclusive=False) hold state
    safe = np.maximum(degrees, 1)
    avg = (graph.adjacency @ values) / safe
    return np.where(degrees > 0, avg, values)


def leaderless_discrete_step(state: SwarmState, graph: ProximityGraph) -> SwarmState:
    """theta(t_{k+1}) = P theta(t_k), v(t_{k+1}) = P v(t_k).

    Positions are not advanced here; see :func:`advance_positions`.
    """
    return SwarmState(positions=state.positions,
                      headings=_neighbor_average(state.headings, graph),
                      speeds=_neighbor_average(state.speeds, graph),
                      leader_mask=state.leader_mask,
                      sample_index=state.sample_index + 1)


def leader_discrete_step(state: SwarmState, graph: ProximityGraph, reference_heading: float,
                         reference_speed: float, vartheta: float) -> SwarmState:
    """Followers average neighbors; leaders mix the reference with the
    neighbor average via weight vartheta."""
    if not state.leader_mask.any():
        raise ValueError("leader_discrete_step requires at least one leader")
    headings = _neighbor_average(state.headings, graph)
    speeds = _neighbor_average(state.speeds, graph)
    mask = state.leader_mask
    headings[mask] = vartheta * reference_heading + (1.0 - vartheta) * headings[mask]
    speeds[mask] = vartheta * reference_speed + (1.0 - vartheta) * speeds[mask]
    return SwarmState(positions=state.positions, headings=headings, speeds=speeds,
                      leader_mask=mask, sample_index=state.sample_index + 1)


def interpolate(state_k: SwarmState, state_k1: SwarmState, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Headings and speeds at t_k + s*tau: linear between sampling instants."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    if s == 0.0:
        return state_k.headings.copy(), state_k.speeds.copy()
    if s == 1.0:
        return state_k1.headings.copy(), state_k1.speeds.copy()
    headings = (1.0 - s) * state_k.headings + s * state_k1.headings
    speeds = (1.0 - s) * state_k.speeds + s * state_k1.speeds
    return headings, speeds


# --- exact position integration -------------------------------------------
#
# Over one dwell interval the speed is a + b*s and the heading c + d*s, so
# displacement_x = integral_0^tau (a + b s) cos(c + d s) ds and the sine
# analogue for y.  With phi = d*tau and u = s/tau:
#   dx = a tau I0 + b tau^2 I1,  I0 = int_0^1 cos(c + phi u) du, etc.
# I0/J0 reduce to a stable sinc form; the u-weighted pieces switch to a
# Taylor series below |phi| = 0.05, where the exact expression loses digits
# to cancellation.

_PHI_SERIES_CUTOFF = 0.05


def _weighted_trig_integrals(phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """A = int_0^1 u cos(phi u) du, B = int_0^1 u sin(phi u) du."""
    phi = np.asarray(phi, dtype=float)
    small = np.abs(phi) < _PHI_SERIES_CUTOFF
    safe = np.where(small, 1.0, phi)
    p2 = phi * phi
    a_series = 0.5 - p2 / 8.0 + p2 * p2 / 144.0 - p2 * p2 * p2 / 5760.0
    b_series = phi * (1.0 / 3.0 - p2 / 30.0 + p2 * p2 / 840.0 - p2 * p2 * p2 / 45360.0)
    a_exact = np.sin(safe) / safe + (np.cos(safe) - 1.0) / (safe * safe)
    b_exact = -np.cos(safe) / safe + np.sin(safe) / (safe * safe)
    return np.where(small, a_series, a_exact), np.where(small, b_series, b_exact)


def closed_form_displacement(a, b, c, d, tau):
    """Displacement (dx, dy) for speed a+b*s, heading c+d*s over s in [0, tau]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    phi = d * tau
    half = c + phi / 2.0
    sinc_half = np.sinc(phi / (2.0 * np.pi))
    i0 = np.cos(half) * sinc_half
    j0 = np.sin(half) * sinc_half
    wa, wb = _weighted_trig_integrals(phi)
    i1 = np.cos(c) * wa - np.sin(c) * wb
    j1 = np.sin(c) * wa + np.cos(c) * wb
    tau2 = tau * tau
    return a * tau * i0 + b * tau2 * i1, a * tau * j0 + b * tau2 * j1


def advance_positions(state_k: SwarmState, state_k1: SwarmState, tau: float) -> np.ndarray:
    """Positions at t_{k+1} from the closed-form kinematic integral."""
    a = state_k.speeds
    b = (state_k1.speeds - state_k.speeds) / tau
    c = state_k.headings
    d = (state_k1.headings - state_k.headings) / tau
    dx, dy = closed_form_displacement(a, b, c, d, tau)
    return state_k.positions + np.stack([dx, dy], axis=1)


def integrate_position_oracle(a: float, b: float, c: float, d: float, tau: float,
                              abs_tol: float = 1e-12) -> tuple[float, float]:
    """Adaptive-quadrature oracle for the same displacement integrals."""
    from scipy.integrate import quad

    dx, err_x = quad(lambda s: (a + b * s) * math.cos(c + d * s), 0.0, tau,
                     epsabs=abs_tol, epsrel=1e-13, limit=300)
    dy, err_y = quad(lambda s: (a + b * s) * math.sin(c + d * s), 0.0, tau,
                     epsabs=abs_tol, epsrel=1e-13, limit=300)
    achieved = max(err_x, err_y)
    if achieved > 1e3 * abs_tol:
        raise RuntimeError(f"quadrature tolerance not reached, residual={achieved:.3e}")
    return dx, dy


# --- simulation loop --------------------------------------------------------

LEADERLESS, LEADER_CONSTANT, LEADER_DYNAMIC = "leaderless", "leader_constant", "leader_dynamic"
CONTROLLERS = (LEADERLESS, LEADER_CONSTANT, LEADER_DYNAMIC)

_CONVEXITY_TOL = 1e-12
_INTEGRATION_TOL = 1e-9


class ConvexityError(RuntimeError):
    """Leaderless max/min monotonicity violated; indicates a bug."""


@dataclass
class Trajectory:
    """Sampled trajectory record of one run."""

    times: np.ndarray  # (K+1,)
    positions: np.ndarray  # (K+1, m, 2)
    headings: np.ndarray  # (K+1, m)
    speeds: np.ndarray  # (K+1, m)
    leader_mask: np.ndarray  # (m,)
    params: ModelParams
    controller: str
    reference_headings: np.ndarray  # (K,) theta-bar used on each interval (nan if leaderless)
    reference_speed: float
    connected: np.ndarray  # (K+1,) connectivity of the graph at each instant
    switch_log: list = field(default_factory=list)
    left_unit_square: bool = False
    controls_omega: np.ndarray | None = None  # (K, m) when recorded
    controls_u: np.ndarray | None = None

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    def state_at(self, k: int) -> SwarmState:
        return SwarmState(positions=self.positions[k].copy(), headings=self.headings[k].copy(),
                          speeds=self.speeds[k].copy(), leader_mask=self.leader_mask.copy(),
                          sample_index=k)


def _check_convexity(old: np.ndarray, new: np.ndarray, label: str) -> None:
    if new.max() > old.max() + _CONVEXITY_TOL or new.min() < old.min() - _CONVEXITY_TOL:
        raise ConvexityError(f"{label} envelope expanded during a leaderless step")


def run_epoch(state: SwarmState, params: ModelParams, steps: int,
              controller: str = LEADERLESS, schedule=None, reference_heading: float = 0.0,
              record_controls: bool = False, integration_check: str = "sampled") -> Trajectory:
    """Run the hybrid loop: rebuild graph, discrete step, exact position advance.

    Graphs are rebuilt at sampling instants only; neighbor relations are
    frozen within dwell intervals.  ``integration_check`` is one of
    off/sampled/full and validates the closed-form position update against
    the quadrature oracle (one agent per checked step).
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if controller not in CONTROLLERS:
        raise ValueError(f"unknown controller {controller!r}")
    if controller == LEADER_DYNAMIC and schedule is None:
        raise ValueError("dynamic controller requires a reference schedule")
    if integration_check not in ("off", "sampled", "full"):
        raise ValueError(f"unknown integration_check {integration_check!r}")

    m = state.n_agents
    tau = params.tau_n
    positions = np.empty((steps + 1, m, 2))
    headings = np.empty((steps + 1, m))
    speeds = np.empty((steps + 1, m))
    references = np.full(steps, np.nan)
    connected = np.empty(steps + 1, dtype=bool)
    omegas = np.empty((steps, m)) if record_controls else None
    accels = np.empty((steps, m)) if record_controls else None

    current = state.copy()
    positions[0] = current.positions
    headings[0] = current.headings
    speeds[0] = current.speeds
    left_square = bool((current.positions < 0).any() or (current.positions > 1).any())

    for k in range(steps):
        graph = build_graph(current.positions, params.r_n, params.self_inclusive)
        connected[k] = connectivity(graph)

        if controller == LEADERLESS:
            nxt = leaderless_discrete_step(current, graph)
            _check_convexity(current.headings, nxt.headings, "heading")
            _check_convexity(current.speeds, nxt.speeds, "speed")
        else:
            if controller == LEADER_DYNAMIC:
                schedule.maybe_advance(current)
                theta_bar = schedule.current_heading
            else:
                theta_bar = reference_heading
            references[k] = theta_bar
            nxt = leader_discrete_step(current, graph, theta_bar, params.v_n, params.vartheta)

        new_positions = advance_positions(current, nxt, tau)

        if integration_check == "full" or (integration_check == "sampled" and k % 100 == 0):
            _verify_integration(current, nxt, new_positions, tau, agent=k % m)

        if record_controls:
            omegas[k] = (nxt.headings - current.headings) / tau
            accels[k] = (nxt.speeds - current.speeds) / tau

        current = replace(nxt, positions=new_positions)
        positions[k + 1] = new_positions
        headings[k + 1] = current.headings
        speeds[k + 1] = current.speeds
        left_square |= bool((new_positions < 0).any() or (new_positions > 1).any())

    final_graph = build_graph(current.positions, params.r_n, params.self_inclusive)
    connected[steps] = connectivity(final_graph)

    return Trajectory(times=np.arange(steps + 1) * tau, positions=positions,
                      headings=headings, speeds=speeds, leader_mask=state.leader_mask.copy(),
                      params=params, controller=controller, reference_headings=references,
                      reference_speed=params.v_n if controller != LEADERLESS else float("nan"),
                      connected=connected,
                      switch_log=list(schedule.switch_log) if schedule is not None else [],
                      left_unit_square=left_square,
                      controls_omega=omegas, controls_u=accels)


def _verify_integration(state_k: SwarmState, state_k1: SwarmState, new_positions: np.ndarray,
                        tau: float, agent: int) -> None:
    i = agent
    a = float(state_k.speeds[i])
    b = float(state_k1.speeds[i] - state_k.speeds[i]) / tau
    c = float(state_k.headings[i])
    d = float(state_k1.headings[i] - state_k.headings[i]) / tau
    ox, oy = integrate_position_oracle(a, b, c, d, tau)
    got = new_positions[i] - state_k.positions[i]
    if abs(got[0] - ox) > _INTEGRATION_TOL or abs(got[1] - oy) > _INTEGRATION_TOL:
        raise RuntimeError(
            f"closed-form position update deviates from quadrature oracle at agent {i}: "
            f"({got[0] - ox:.3e}, {got[1] - oy:.3e})")
