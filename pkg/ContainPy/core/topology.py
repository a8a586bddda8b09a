"""
Interaction Topology
====================

Directed leader/follower graphs, Laplacian blocks and the spectral
certificates every containment result relies on.

Agents are indexed leaders first: agents 0..M-1 are leaders, agents
M..M+N-1 are followers. Entry ``adjacency[i, j]`` is the weight of the
edge from agent j to agent i, so row i lists the neighbours agent i
listens to. Public helpers that talk to users (scenario files, CLI
output) use 1-based agent numbers.

Authors: ContainPy Development Team
Version: 0.1.0
"""

from collections import deque
from dataclasses import dataclass
from typing import Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import CertificationError, TopologyError
from .utils import DEFAULT_TOLERANCES, Tolerances


# Type alias for the follower input weighting of discrete-time laws
Weighting = Literal["normalized", "uniform"]


def get_weighting_modes() -> list:
    """Return the available discrete-time input weightings."""
    return ["normalized", "uniform"]


# =============================================================================
# DOMAIN TYPES
# =============================================================================

@dataclass(frozen=True, eq=False)
class DirectedTopology:
    """
    Weighted directed graph over M leaders and N followers.

    Parameters
    ----------
    num_leaders : int
        Number of leaders M (agents with no parents).
    num_followers : int
        Number of followers N.
    adjacency : np.ndarray
        (M+N, M+N) nonnegative weights, ``adjacency[i, j]`` = weight of
        the edge from agent j to agent i.

    Raises
    ------
    TopologyError
        If the matrix has the wrong shape, negative or non-finite entries,
        self-loops, or a leader row with a nonzero entry.
    """

    num_leaders: int
    num_followers: int
    adjacency: np.ndarray

    def __post_init__(self):
        M, N = int(self.num_leaders), int(self.num_followers)
        if M < 1 or N < 1:
            raise TopologyError(
                f"Need at least one leader and one follower, got M={M}, N={N}"
            )
        adj = np.array(self.adjacency, dtype=np.float64, copy=True)
        if adj.shape != (M + N, M + N):
            raise TopologyError(
                f"Adjacency must be {(M + N, M + N)}, got {adj.shape}"
            )
        if not np.all(np.isfinite(adj)):
            raise TopologyError("Adjacency contains non-finite weights")
        if np.any(adj < 0):
            i, j = np.argwhere(adj < 0)[0]
            raise TopologyError(
                f"Negative weight {adj[i, j]} on edge {j + 1} -> {i + 1}"
            )
        if np.any(np.diag(adj) != 0):
            i = int(np.flatnonzero(np.diag(adj))[0])
            raise TopologyError(f"Self-loop on agent {i + 1}")
        if np.any(adj[:M] != 0):
            i = int(np.argwhere(adj[:M] != 0)[0][0])
            raise TopologyError(
                f"Leader {i + 1} has an incoming edge; leader rows must be zero"
            )
        adj.setflags(write=False)
        object.__setattr__(self, "num_leaders", M)
        object.__setattr__(self, "num_followers", N)
        object.__setattr__(self, "adjacency", adj)

    @property
    def num_agents(self) -> int:
        return self.num_leaders + self.num_followers

    @property
    def in_degrees(self) -> np.ndarray:
        """Weighted in-degree d_i of every agent."""
        return self.adjacency.sum(axis=1)

    @classmethod
    def from_edges(
        cls,
        num_leaders: int,
        num_followers: int,
        edges: Iterable[Sequence[float]],
    ) -> "DirectedTopology":
        """
        Build a topology from ``[from, to, weight]`` triples (1-based).

        Raises
        ------
        TopologyError
            If an entry is malformed, out of range, or targets a leader.
            The message names the offending entry.
        """
        M, N = int(num_leaders), int(num_followers)
        size = M + N
        adj = np.zeros((size, size), dtype=np.float64)
        for pos, entry in enumerate(edges):
            try:
                src, dst, weight = entry
                src_i, dst_i = int(src), int(dst)
                weight = float(weight)
            except (TypeError, ValueError):
                raise TopologyError(
                    f"Edge entry #{pos} {entry!r} is not a [from, to, weight] triple"
                ) from None
            if src_i != src or dst_i != dst:
                raise TopologyError(f"Edge entry #{pos} {entry!r} has non-integer agent index")
            if not (1 <= src_i <= size and 1 <= dst_i <= size):
                raise TopologyError(
                    f"Edge entry #{pos} {entry!r} references an agent outside 1..{size}"
                )
            if dst_i <= M:
                raise TopologyError(
                    f"Edge entry #{pos} {entry!r} points into leader {dst_i}"
                )
            adj[dst_i - 1, src_i - 1] += weight
        return cls(M, N, adj)

    def edges(self) -> List[Tuple[int, int, float]]:
        """All edges as 1-based ``(from, to, weight)``, sorted by (to, from)."""
        rows, cols = np.nonzero(self.adjacency)
        order = np.lexsort((cols, rows))
        return [
            (int(cols[k]) + 1, int(rows[k]) + 1, float(self.adjacency[rows[k], cols[k]]))
            for k in order
        ]

    def to_dict(self) -> dict:
        """JSON form used in scenario files."""
        return {
            "leaders": self.num_leaders,
            "followers": self.num_followers,
            "edges": [[s, d, w] for s, d, w in self.edges()],
        }

    def relabel_followers(self, order: Sequence[int]) -> "DirectedTopology":
        """
        Permute follower labels.

        ``order[k]`` is the old (0-based) follower index that becomes
        follower k.
        """
        M, N = self.num_leaders, self.num_followers
        order = np.asarray(order, dtype=int)
        if sorted(order.tolist()) != list(range(N)):
            raise ValueError(f"order must be a permutation of 0..{N - 1}")
        perm = np.concatenate([np.arange(M), M + order])
        return DirectedTopology(M, N, self.adjacency[np.ix_(perm, perm)])


@dataclass(frozen=True, eq=False)
class LaplacianBlocks:
    """Laplacian L = D - A of a topology and its follower-row blocks."""

    laplacian: np.ndarray
    l1: np.ndarray
    l2: np.ndarray
    in_degrees: np.ndarray
    num_leaders: int
    num_followers: int

    @property
    def follower_degrees(self) -> np.ndarray:
        return self.in_degrees[self.num_leaders:]


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """
    Spectral facts about L2 used by synthesis and certification.

    ``containment_weights`` is -L2^{-1} L1: row i holds the convex weights
    of the leader combination follower i converges to.
    """

    eigenvalues: np.ndarray
    lambda_min_real: float
    normalized_eigenvalues: np.ndarray
    gershgorin_margin: float
    containment_weights: np.ndarray
    weight_row_error: float
    weight_min: float

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "lambda_min_real": self.lambda_min_real,
            "normalized_eigenvalues": [
                [float(z.real), float(z.imag)] for z in self.normalized_eigenvalues
            ],
            "gershgorin_margin": self.gershgorin_margin,
            "containment_weights": self.containment_weights.tolist(),
            "weight_row_error": self.weight_row_error,
            "weight_min": self.weight_min,
        }


# =============================================================================
# OPERATIONS
# =============================================================================

def build_laplacian(
    topology: DirectedTopology,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> LaplacianBlocks:
    """
    Compute L = D - A and extract its follower-row blocks.

    Parameters
    ----------
    topology : DirectedTopology
        Validated interaction graph.

    Returns
    -------
    LaplacianBlocks
        ``l1`` is N x M (follower rows, leader columns), ``l2`` is N x N.

    Examples
    --------
    >>> topo = DirectedTopology.from_edges(1, 1, [[1, 2, 1.0]])
    >>> build_laplacian(topo).laplacian
    array([[ 0.,  0.],
           [-1.,  1.]])
    """
    adj = topology.adjacency
    degrees = adj.sum(axis=1)
    lap = np.diag(degrees) - adj
    row_error = float(np.max(np.abs(lap.sum(axis=1))))
    if row_error > tolerances.laplacian_row_sum * max(1.0, float(degrees.max())):
        raise CertificationError(f"Laplacian rows do not sum to zero (max |sum| = {row_error:.3e})")

    M = topology.num_leaders
    l1 = lap[M:, :M].copy()
    l2 = lap[M:, M:].copy()
    for arr in (lap, l1, l2, degrees):
        arr.setflags(write=False)
    return LaplacianBlocks(
        laplacian=lap,
        l1=l1,
        l2=l2,
        in_degrees=degrees,
        num_leaders=M,
        num_followers=topology.num_followers,
    )


def check_reachability(topology: DirectedTopology) -> Tuple[bool, List[int]]:
    """
    Check that every follower has a directed path from some leader.

    Breadth-first search from the leader set along edges j -> i with
    ``adjacency[i, j] > 0``.

    Returns
    -------
    ok : bool
        True iff every follower is reachable.
    unreachable : list of int
        1-based indices of the followers with no path from any leader.
    """
    adj = topology.adjacency
    M, size = topology.num_leaders, topology.num_agents
    children = [np.flatnonzero(adj[:, j] > 0) for j in range(size)]

    seen = np.zeros(size, dtype=bool)
    seen[:M] = True
    queue = deque(range(M))
    while queue:
        j = queue.popleft()
        for i in children[j]:
            if not seen[i]:
                seen[i] = True
                queue.append(int(i))

    unreachable = [int(i) + 1 for i in range(M, size) if not seen[i]]
    return len(unreachable) == 0, unreachable


def input_scale(
    blocks: LaplacianBlocks,
    weighting: Weighting = "normalized",
    mu: Optional[float] = None,
) -> np.ndarray:
    """
    Per-follower input weight of the discrete-time laws.

    ``normalized`` gives 1 / (1 + d_i); ``uniform`` gives mu for everyone.
    """
    if weighting == "normalized":
        return 1.0 / (1.0 + blocks.follower_degrees)
    if weighting == "uniform":
        if mu is None or not (0.0 < mu < 1.0):
            raise ValueError(f"Uniform weighting needs mu in (0, 1), got {mu}")
        return np.full(blocks.num_followers, float(mu))
    raise ValueError(
        f"Invalid weighting '{weighting}'. "
        f"Must be one of: {get_weighting_modes()}"
    )


def normalized_spectrum(
    blocks: LaplacianBlocks,
    weighting: Weighting = "normalized",
    mu: Optional[float] = None,
) -> np.ndarray:
    """
    Eigenvalues of the input-weighted follower Laplacian.

    ``normalized`` gives spec((I + D)^{-1} L2); ``uniform`` gives spec(mu L2).
    """
    scale = input_scale(blocks, weighting, mu)
    return scipy.linalg.eigvals(scale[:, None] * blocks.l2)


def choose_uniform_mu(eigenvalues: np.ndarray, grid_size: int = 9999) -> Tuple[float, float]:
    """
    Pick a uniform input gain mu in (0, 1) minimising max |1 - mu * lambda_i|.

    Grid search over ``grid_size`` interior points of (0, 1).

    Returns
    -------
    mu : float
        Best grid value.
    radius : float
        The attained max |1 - mu * lambda_i|; below 1 means the uniform
        law can be certified.
    """
    lam = np.asarray(eigenvalues, dtype=np.complex128).reshape(1, -1)
    grid = np.linspace(0.0, 1.0, grid_size + 2)[1:-1].reshape(-1, 1)
    worst = np.max(np.abs(1.0 - grid * lam), axis=1)
    best = int(np.argmin(worst))
    return float(grid[best, 0]), float(worst[best])


def containment_weights(blocks: LaplacianBlocks) -> np.ndarray:
    """Return -L2^{-1} L1 (N x M)."""
    return -scipy.linalg.solve(blocks.l2, blocks.l1)


def certify_spectrum(
    blocks: LaplacianBlocks,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> SpectrumReport:
    """
    Certify the spectral facts that make containment possible.

    Checks that every eigenvalue of L2 has positive real part, that
    -L2^{-1} L1 is entrywise nonnegative with unit row sums, and that the
    spectrum of (I + D)^{-1} L2 lies strictly inside the unit disk centred
    at 1.

    Parameters
    ----------
    blocks : LaplacianBlocks
        Laplacian of a topology in which every follower is reachable.
    tolerances : Tolerances
        ``weight_nonnegative`` and ``weight_row_sum`` are used.

    Returns
    -------
    SpectrumReport

    Raises
    ------
    CertificationError
        If any check fails. This signals an unreachable follower or a
        numerical breakdown.
    """
    eigs = scipy.linalg.eigvals(blocks.l2)
    lam_min = float(np.min(eigs.real))
    if lam_min <= 0:
        raise CertificationError(
            f"L2 has an eigenvalue with nonpositive real part (min Re = {lam_min:.3e}); "
            f"some follower is not reachable from the leaders"
        )

    weights = containment_weights(blocks)
    row_error = float(np.max(np.abs(weights.sum(axis=1) - 1.0)))
    weight_min = float(weights.min())
    if weight_min < -tolerances.weight_nonnegative:
        raise CertificationError(f"-L2^-1 L1 has a negative entry ({weight_min:.3e})")
    if row_error > tolerances.weight_row_sum:
        raise CertificationError(f"-L2^-1 L1 rows do not sum to one (error {row_error:.3e})")

    normalized = normalized_spectrum(blocks, "normalized")
    margin = 1.0 - float(np.max(np.abs(1.0 - normalized)))
    if margin <= 0:
        raise CertificationError(
            f"Normalized spectrum leaves the unit disk centred at 1 (margin {margin:.3e})"
        )

    return SpectrumReport(
        eigenvalues=eigs,
        lambda_min_real=lam_min,
        normalized_eigenvalues=normalized,
        gershgorin_margin=margin,
        containment_weights=weights,
        weight_row_error=row_error,
        weight_min=weight_min,
    )


def certify_topology(
    topology: DirectedTopology,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Tuple[LaplacianBlocks, SpectrumReport]:
    """
    Reachability check followed by spectral certification.

    Raises
    ------
    CertificationError
        Naming the unreachable followers, or forwarded from
        :func:`certify_spectrum`.
    """
    ok, unreachable = check_reachability(topology)
    if not ok:
        raise CertificationError(
            f"Followers {unreachable} have no directed path from any leader"
        )
    blocks = build_laplacian(topology, tolerances)
    return blocks, certify_spectrum(blocks, tolerances)


# =============================================================================
# RANDOM GRAPHS
# =============================================================================

def random_topology(
    num_leaders: int,
    num_followers: int,
    density: float = 0.3,
    seed: Optional[int] = None,
    weight_range: Tuple[float, float] = (0.5, 1.5),
    reachable: bool = True,
) -> DirectedTopology:
    """
    Draw a random leader/follower graph.

    With ``reachable=True`` each follower, visited in random order, is
    first given one parent among the leaders and the already visited
    followers, so every follower has a path from a leader. Extra edges
    (follower cycles included) are then added with probability ``density``.
    """
    rng = np.random.default_rng(seed)
    M, N = num_leaders, num_followers
    size = M + N
    lo, hi = weight_range
    adj = np.zeros((size, size))

    if reachable:
        visited = list(range(M))
        for i in M + rng.permutation(N):
            parent = visited[rng.integers(len(visited))]
            adj[i, parent] = rng.uniform(lo, hi)
            visited.append(int(i))

    extra = rng.random((N, size)) < density
    extra[np.arange(N), M + np.arange(N)] = False
    weights = rng.uniform(lo, hi, size=(N, size))
    fresh = extra & (adj[M:] == 0)
    adj[M:][fresh] = weights[fresh]
    return DirectedTopology(M, N, adj)
