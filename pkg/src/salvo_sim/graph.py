"""Directed communication topology, Laplacian, and mirror-graph spectrum."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import TopologyError


def _reachable(start: int, neighbours: Sequence[Sequence[int]]) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nxt in neighbours[node]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


@dataclass(frozen=True)
class DirectedTopology:
    """Digraph on ``n`` agents.

    ``adjacency[i, j] == 1`` iff agent ``i`` receives information from
    agent ``j`` (edge ``j -> i``).
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: np.ndarray = field(repr=False)
    in_degree: np.ndarray = field(repr=False)
    laplacian: np.ndarray = field(repr=False)

    @property
    def is_balanced(self) -> bool:
        return bool(np.array_equal(self.adjacency.sum(axis=1), self.adjacency.sum(axis=0)))

    def in_neighbours(self, i: int) -> list[int]:
        return [int(j) for j in np.flatnonzero(self.adjacency[i])]

    def subgraph(self, keep: Sequence[int]) -> "DirectedTopology":
        """Induced subgraph on ``keep`` (re-indexed in order). Raises if not strongly connected."""
        index = {old: new for new, old in enumerate(keep)}
        sub_edges = [(index[a], index[b]) for a, b in self.edges if a in index and b in index]
        return build_topology(sub_edges, len(keep))


def build_topology(edges: Iterable[Sequence[int]], n: int) -> DirectedTopology:
    """Build a topology from ``(from, to)`` pairs using zero-based indices."""
    if n < 1:
        raise TopologyError(f"agent count must be positive, got {n}")
    edge_list: list[tuple[int, int]] = []
    adjacency = np.zeros((n, n))
    for pair in edges:
        src, dst = (int(v) for v in pair)
        if not (0 <= src < n and 0 <= dst < n):
            raise TopologyError(f"edge ({src}, {dst}) has an index outside [0, {n})")
        if src == dst:
            raise TopologyError(f"self-loop on agent {src} is not allowed")
        if adjacency[dst, src]:
            continue
        adjacency[dst, src] = 1.0
        edge_list.append((src, dst))

    out_nbrs = [[int(i) for i in np.flatnonzero(adjacency[:, j])] for j in range(n)]
    in_nbrs = [[int(j) for j in np.flatnonzero(adjacency[i])] for i in range(n)]
    forward = _reachable(0, out_nbrs)
    backward = _reachable(0, in_nbrs)
    if len(forward) < n or len(backward) < n:
        component = sorted(forward & backward)
        raise TopologyError(
            f"digraph is not strongly connected; agent 0 only shares a strong "
            f"component with {component}"
        )

    in_degree = np.diag(adjacency.sum(axis=1))
    laplacian = in_degree - adjacency
    for arr in (adjacency, in_degree, laplacian):
        arr.setflags(write=False)
    return DirectedTopology(n, tuple(edge_list), adjacency, in_degree, laplacian)


@dataclass(frozen=True)
class MirrorSpectrum:
    mirror_laplacian: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def lambda2(self) -> float:
        if self.eigenvalues.size < 2:
            return float("inf")
        return float(self.eigenvalues[1])


def mirror_spectrum(topology: DirectedTopology) -> MirrorSpectrum:
    """Spectrum of the undirected mirror graph with adjacency ``(A + A^T) / 2``."""
    a_hat = 0.5 * (topology.adjacency + topology.adjacency.T)
    l_hat = np.diag(a_hat.sum(axis=1)) - a_hat
    eigenvalues = np.linalg.eigvalsh(l_hat)
    # the smallest eigenvalue is zero by construction; eigvalsh returns ~1e-16
    eigenvalues[0] = 0.0
    l_hat.setflags(write=False)
    eigenvalues.setflags(write=False)
    return MirrorSpectrum(l_hat, eigenvalues)


@dataclass(frozen=True)
class GainVerdict:
    admissible: bool
    alpha: float
    beta: float
    beta_bound: float
    beta_bound_weak: float
    reason: str = ""

    def __bool__(self) -> bool:
        return self.admissible


def validate_gains(alpha: float, beta: float, spectrum: MirrorSpectrum) -> GainVerdict:
    """Check ``alpha > 0`` and ``beta >= 1 / lambda2``.

    The weaker per-law bound ``1 / (2 lambda2)`` is reported alongside but
    never used for the verdict.
    """
    lam = spectrum.lambda2
    bound = 1.0 / lam
    reasons = []
    if not alpha > 0:
        reasons.append(f"alpha must be > 0 (got {alpha})")
    if not beta >= bound:
        reasons.append(f"beta must satisfy beta >= 1/lambda2 = {bound:.6g} (got {beta})")
    return GainVerdict(not reasons, alpha, beta, bound, 0.5 * bound, "; ".join(reasons))
