"""Distance-induced proximity graphs over planar agent positions.

Two agents are neighbors when their Euclidean distance is strictly below
the interaction radius.  Since an agent is at distance zero from itself,
the neighbor set is self-inclusive by default, which makes the averaging
matrix row-stochastic and ties its spectrum exactly to the normalized
Laplacian of the same adjacency.  A ``self_inclusive=False`` switch is
kept for sensitivity runs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist


class SpectralError(RuntimeError):
    """Eigen-solver failed to converge; carries the residual norm."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class ProximityGraph:
    radius: float
    adjacency: np.ndarray  # (m, m) bool, symmetric
    degrees: np.ndarray  # (m,) int
    self_inclusive: bool = True

    @property
    def node_count(self) -> int:
        return self.adjacency.shape[0]


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray  # non-decreasing, in [0, 2]
    spectral_gap: float  # max(|1 - lambda_1|, |1 - lambda_{n-1}|)
    is_connected: bool


@dataclass(frozen=True)
class RingSet:
    """Agents whose initial distance from ``node`` lies in [(1-eta)r, (1+eta)r].

    The annulus bounds how much the node's neighborhood can change while
    every pairwise distance stays within the drift budget.
    """

    node: int
    followers: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    leaders: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    @property
    def r_i1(self) -> int:
        return len(self.followers)

    @property
    def r_i2(self) -> int:
        return len(self.leaders)


def pairwise_distances(positions: np.ndarray) -> np.ndarray:
    positions = np.asarray(positions, dtype=float)
    return cdist(positions, positions)


def build_graph(positions: np.ndarray, radius: float, self_inclusive: bool = True) -> ProximityGraph:
    """Neighbor graph with edge (i, j) iff ||X_i - X_j|| < radius (strict)."""
    positions = np.asarray(positions, dtype=float)
    if positions.size == 0:
        raise ValueError("empty swarm")
    if positions.ndim != 2 or positions.shape[1] != 2:
        raise ValueError(f"positions must have shape (m, 2), got {positions.shape}")
    if not np.all(np.isfinite(positions)):
        raise ValueError("positions must be finite")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")

    adjacency = pairwise_distances(positions) < radius
    np.fill_diagonal(adjacency, self_inclusive)
    degrees = adjacency.sum(axis=1)
    return ProximityGraph(radius=float(radius), adjacency=adjacency,
                          degrees=degrees, self_inclusive=self_inclusive)


def connectivity(graph: ProximityGraph) -> bool:
    """True iff a single component spans all nodes (breadth-first traversal)."""
    adjacency = graph.adjacency
    m = graph.node_count
    seen = np.zeros(m, dtype=bool)
    seen[0] = True
    frontier = np.zeros(m, dtype=bool)
    frontier[0] = True
    while frontier.any():
        reached = adjacency[frontier].any(axis=0) & ~seen
        seen |= reached
        frontier = reached
    return bool(seen.all())


def averaging_matrix(graph: ProximityGraph) -> np.ndarray:
    """Row-stochastic P with P_ij = 1/d_i on edges.

    With the self-inclusive convention d_i >= 1 always.  When the
    convention is disabled, an isolated node holds its own state
    (identity row), extending the definition to degree zero.
    """
    degrees = graph.degrees.astype(float)
    isolated = degrees == 0
    p = graph.adjacency / np.where(isolated, 1.0, degrees)[:, None]
    if isolated.any():
        idx = np.where(isolated)[0]
        p[idx, idx] = 1.0
    return p


def normalized_laplacian(graph: ProximityGraph) -> np.ndarray:
    degrees = np.maximum(graph.degrees.astype(float), 1.0)
    inv_sqrt = 1.0 / np.sqrt(degrees)
    lap = -(graph.adjacency.astype(float) * np.outer(inv_sqrt, inv_sqrt))
    np.fill_diagonal(lap, np.diagonal(lap) + 1.0)
    return lap


# Dense eigendecomposition is exact and cheap up to a few thousand nodes;
# beyond the limit only the extremal eigenvalues are needed for the gap.
DENSE_EIG_LIMIT = 5000

_CONNECTED_TOL = 1e-9


def spectral_summary(graph: ProximityGraph) -> SpectralSummary:
    """Eigenvalues of the normalized Laplacian of the (self-inclusive) adjacency.

    The gap is max(|1 - lambda_1|, |1 - lambda_{n-1}|); the eigenvalues of
    the averaging matrix P equal 1 - lambda_i by similarity, so the gap
    computed here is exactly the consensus contraction rate.
    """
    m = graph.node_count
    if m == 1:
        return SpectralSummary(eigenvalues=np.zeros(1), spectral_gap=0.0, is_connected=True)

    if m <= DENSE_EIG_LIMIT:
        eigenvalues = np.linalg.eigvalsh(normalized_laplacian(graph))
        eigenvalues = np.sort(eigenvalues)
        lam1 = eigenvalues[1]
        lam_top = eigenvalues[-1]
    else:
        eigenvalues, lam1, lam_top = _extremal_eigenvalues(graph)

    gap = max(abs(1.0 - lam1), abs(1.0 - lam_top))
    return SpectralSummary(eigenvalues=eigenvalues, spectral_gap=float(gap),
                           is_connected=bool(lam1 > _CONNECTED_TOL))


def _extremal_eigenvalues(graph: ProximityGraph):
    from scipy.sparse import csr_matrix
    from scipy.sparse.linalg import ArpackNoConvergence, eigsh

    lap = csr_matrix(normalized_laplacian(graph))
    try:
        low = eigsh(lap, k=2, sigma=0, which="LM", return_eigenvectors=False)
        high = eigsh(lap, k=1, which="LA", return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        residual = float(np.linalg.norm(getattr(exc, "eigenvalues", np.array([np.inf]))))
        raise SpectralError("eigen-solver did not converge", residual) from exc
    low = np.sort(low)
    eigenvalues = np.array([low[0], low[1], high[0]])
    return eigenvalues, eigenvalues[1], eigenvalues[2]


def matrix_deviation(p_now: np.ndarray, p_initial: np.ndarray) -> float:
    """Spectral norm ||P(t_k) - P(0)||."""
    p_now = np.asarray(p_now, dtype=float)
    p_initial = np.asarray(p_initial, dtype=float)
    if p_now.shape != p_initial.shape:
        raise ValueError(f"dimension mismatch: {p_now.shape} vs {p_initial.shape}")
    return float(np.linalg.norm(p_now - p_initial, 2))


STRICT_ETA_MAX = 1.0 / 512.0


def ring_sets(initial_positions: np.ndarray, radius: float, eta: float,
              leader_mask: np.ndarray | None = None, strict: bool = False) -> list[RingSet]:
    """Per-node annulus membership [(1-eta)r, (1+eta)r], split by role.

    ``strict`` enforces eta <= 1/512; otherwise any eta in (0, 1) is allowed
    for sensitivity studies.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if strict and eta > STRICT_ETA_MAX:
        raise ValueError(f"strict mode requires eta <= 1/512, got {eta}")
    positions = np.asarray(initial_positions, dtype=float)
    m = positions.shape[0]
    if leader_mask is None:
        leader_mask = np.zeros(m, dtype=bool)
    leader_mask = np.asarray(leader_mask, dtype=bool)

    dist = pairwise_distances(positions)
    lo, hi = (1.0 - eta) * radius, (1.0 + eta) * radius
    in_annulus = (dist >= lo) & (dist <= hi)
    np.fill_diagonal(in_annulus, False)

    out = []
    for i in range(m):
        members = np.where(in_annulus[i])[0]
        out.append(RingSet(node=i,
                           followers=members[~leader_mask[members]],
                           leaders=members[leader_mask[members]]))
    return out


def write_edge_list_csv(graph: ProximityGraph, path) -> None:
    """Edge list as ``i,j`` rows with i < j; self-edges omitted on export."""
    ii, jj = np.where(np.triu(graph.adjacency, k=1))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for i, j in zip(ii.tolist(), jj.tolist()):
            writer.writerow([i, j])


def spectral_summary_record(graph: ProximityGraph, summary: SpectralSummary | None = None) -> dict:
    if summary is None:
        summary = spectral_summary(graph)
    eigs = summary.eigenvalues
    return {
        "n": graph.node_count,
        "radius": graph.radius,
        "lambda1": float(eigs[1]) if len(eigs) > 1 else 0.0,
        "lambdaN1": float(eigs[-1]),
        "gap": summary.spectral_gap,
        "connected": summary.is_connected,
    }
