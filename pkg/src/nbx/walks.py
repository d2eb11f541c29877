"""Simple, non-backtracking and begrudgingly backtracking random walks.

Monte Carlo access-time estimates run through a compiled kernel; the tree
closed forms are computed from subtree edge counts along the unique path.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from nbx import _walk_kernels as kern
from nbx.errors import AllTruncated, DeadEnd, NotATree, WalkTruncated
from nbx.graph import Graph

DEFAULT_MAX_STEPS = 1_000_000


class WalkKind(enum.Enum):
    SRW = "srw"
    NBRW = "nbrw"
    BBRW = "bbrw"

    @property
    def code(self) -> int:
        return {"srw": kern.SRW, "nbrw": kern.NBRW, "bbrw": kern.BBRW}[self.value]


@dataclass(frozen=True)
class AccessTimeEstimate:
    mean: float
    stderr: float
    samples: int
    truncated: int
    dead_ends: int = 0

    @property
    def truncation_flagged(self) -> bool:
        """True when more than 0.1% of walks hit the step cap."""
        return self.truncated > 0.001 * self.samples


@dataclass(frozen=True)
class TreePath:
    nodes: tuple[int, ...]
    subtree_edge_counts: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.nodes) - 1


def _csr_arrays(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    indptr = np.zeros(g.n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(g.degrees)
    indices = np.fromiter((v for nb in g.adjacency for v in nb), dtype=np.int64, count=int(indptr[-1]))
    return indptr, indices


def _check_nodes(g: Graph, *nodes: int) -> None:
    for v in nodes:
        if not 0 <= v < g.n:
            raise ValueError(f"node {v} out of range for n={g.n}")


def simulate_walk(
    g: Graph,
    kind: WalkKind,
    start: int,
    target: int,
    max_steps: int = DEFAULT_MAX_STEPS,
    seed: int = 0,
) -> int:
    """Steps until the walk first hits ``target``.

    Raises ``DeadEnd`` when a NBRW enters a leaf, ``WalkTruncated`` at the cap.
    The walk is the sample-0 stream of ``mc_access_time`` with the same seed.
    """
    _check_nodes(g, start, target)
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if g.degree(start) == 0 and start != target:
        raise WalkTruncated(f"start node {start} is isolated")
    indptr, indices = _csr_arrays(g)
    steps = int(kern.walk_batch(indptr, indices, kind.code, start, target, max_steps, np.uint64(seed), 0, 1)[0])
    if steps == kern.DEAD_END:
        raise DeadEnd(f"{kind.value} walk from {start} dead-ended before reaching {target}")
    if steps == kern.TRUNCATED:
        raise WalkTruncated(f"walk did not reach {target} within {max_steps} steps")
    return steps


def sample_hitting_times(
    g: Graph,
    kind: WalkKind,
    start: int,
    target: int,
    samples: int,
    max_steps: int = DEFAULT_MAX_STEPS,
    seed: int = 0,
) -> np.ndarray:
    """Raw per-sample outcomes (steps, or the kernel's negative status codes)."""
    _check_nodes(g, start, target)
    if g.degree(start) == 0 and start != target:
        return np.full(samples, kern.TRUNCATED, dtype=np.int64)
    indptr, indices = _csr_arrays(g)
    return kern.walk_batch(indptr, indices, kind.code, start, target, max_steps, np.uint64(seed), 0, samples)


def mc_access_time(
    g: Graph,
    kind: WalkKind,
    i: int,
    j: int,
    samples: int,
    max_steps: int = DEFAULT_MAX_STEPS,
    seed: int = 0,
) -> AccessTimeEstimate:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    out = sample_hitting_times(g, kind, i, j, samples, max_steps, seed)
    hit = out[out >= 0].astype(float)
    truncated = int((out == kern.TRUNCATED).sum())
    dead = int((out == kern.DEAD_END).sum())
    if hit.size == 0:
        raise AllTruncated(f"no walk from {i} reached {j} ({truncated} truncated, {dead} dead ends)")
    std = hit.std(ddof=1) if hit.size > 1 else 0.0
    return AccessTimeEstimate(
        mean=float(hit.mean()),
        stderr=float(std / math.sqrt(hit.size)),
        samples=samples,
        truncated=truncated,
        dead_ends=dead,
    )


def check_tree(g: Graph) -> None:
    if g.n == 0 or g.m != g.n - 1 or not g.is_connected():
        raise NotATree(f"graph with n={g.n}, m={g.m} is not a connected acyclic graph")


def _parents_toward(g: Graph, root: int) -> tuple[np.ndarray, np.ndarray]:
    """Parent pointers and subtree node counts for the tree rooted at ``root``."""
    parent = np.full(g.n, -1, dtype=np.int64)
    order = [root]
    seen = np.zeros(g.n, dtype=bool)
    seen[root] = True
    for u in order:
        for v in g.adjacency[u]:
            if not seen[v]:
                seen[v] = True
                parent[v] = u
                order.append(v)
    size = np.ones(g.n, dtype=np.int64)
    for u in reversed(order[1:]):
        size[parent[u]] += size[u]
    return parent, size


def tree_path(g: Graph, i: int, j: int) -> TreePath:
    """Unique i-j path with ``|E(G_l)|`` for each hop ``v_l -> v_{l+1}``.

    ``G_l`` is the component of ``v_l`` after deleting edge ``(v_l, v_{l+1})``;
    rooting the tree at ``j`` makes it the subtree hanging below ``v_l``.
    """
    check_tree(g)
    _check_nodes(g, i, j)
    if i == j:
        raise ValueError("tree_path needs distinct endpoints")
    parent, size = _parents_toward(g, j)
    nodes = [i]
    while nodes[-1] != j:
        nodes.append(int(parent[nodes[-1]]))
    counts = tuple(int(size[v]) - 1 for v in nodes[:-1])
    return TreePath(nodes=tuple(nodes), subtree_edge_counts=counts)


def tree_access_time_srw(g: Graph, i: int, j: int) -> float:
    path = tree_path(g, i, j)
    return float(sum(1 + 2 * e for e in path.subtree_edge_counts))


def tree_access_time_bbrw(g: Graph, i: int, j: int) -> float:
    path = tree_path(g, i, j)
    v, E = path.nodes, path.subtree_edge_counts
    d = [g.degree(x) for x in v]
    total = sum(1 + 2 * E[n] * (d[n] - 1) / d[n] for n in range(path.length))
    total -= sum(2 * E[l - 1] / d[l] for l in range(1, path.length))
    total -= sum(2 / d[l] for l in range(1, path.length))
    return float(total)


def tree_return_time_bbrw(g: Graph, i: int) -> float:
    check_tree(g)
    _check_nodes(g, i)
    if g.degree(i) < 1:
        raise ValueError(f"node {i} has no neighbors")
    return 2 * g.m / g.degree(i)


def access_time_gap(g: Graph, i: int, j: int) -> float:
    """BBRW minus SRW access time on a tree, from the term-wise difference."""
    path = tree_path(g, i, j)
    v, E = path.nodes, path.subtree_edge_counts
    d = [g.degree(x) for x in v]
    gap = -sum(2 * E[n] / d[n] for n in range(path.length))
    gap -= sum(2 * E[l - 1] / d[l] for l in range(1, path.length))
    gap -= sum(2 / d[l] for l in range(1, path.length))
    return float(gap)
