"""Undirected simple graphs, directed-arc indexing and the arc-level operators.

Every undirected edge ``{u, v}`` yields two arcs.  Arc ids follow edge-list
order: edge ``k`` (as first seen) owns arc ``2k`` (``u -> v``, in the order it
was written) and arc ``2k + 1`` (``v -> u``).  The reverse of arc ``a`` is
therefore ``a ^ 1``.

Sparse matrices are ``scipy.sparse.csr_array`` with sorted indices and no
duplicate entries.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from nbx.errors import EmptyGraph, MalformedInput

SparseRealMatrix = sp.csr_array


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes ``0..n-1``.

    ``edges`` keeps the first-seen orientation of every edge in input order; it
    fixes arc ids.  ``adjacency[i]`` is the sorted neighbor tuple of node i.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.adjacency], dtype=np.int64)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adjacency[i]

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        return bool(np.isfinite(bfs_distances(self, 0)).all())

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with node ``i`` renamed to ``perm[i]``; edge order is kept."""
        return from_edges(((perm[u], perm[v]) for u, v in self.edges), n=self.n)


def drop_isolated(g: Graph) -> tuple[Graph, np.ndarray]:
    """Subgraph on nodes of degree >= 1, plus the kept original node ids."""
    keep = np.flatnonzero(g.degrees > 0)
    new_id = np.full(g.n, -1, dtype=np.int64)
    new_id[keep] = np.arange(keep.size)
    return from_edges(((new_id[u], new_id[v]) for u, v in g.edges), n=keep.size), keep


def from_edges(edges: Iterable[tuple[int, int]], n: int | None = None) -> Graph:
    """Build a Graph from (u, v) pairs; duplicates collapse, self-loops raise."""
    seen: set[tuple[int, int]] = set()
    kept: list[tuple[int, int]] = []
    max_id = -1
    for u, v in edges:
        u, v = int(u), int(v)
        if u < 0 or v < 0:
            raise MalformedInput(f"negative node id in edge ({u}, {v})")
        if u == v:
            raise MalformedInput(f"self-loop at node {u}")
        key = (u, v) if u < v else (v, u)
        max_id = max(max_id, u, v)
        if key in seen:
            continue
        seen.add(key)
        kept.append((u, v))
    if n is None:
        n = max_id + 1
    elif n <= max_id:
        raise MalformedInput(f"node id {max_id} out of range for n={n}")
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u, v in kept:
        nbrs[u].append(v)
        nbrs[v].append(u)
    return Graph(n=n, edges=tuple(kept), adjacency=tuple(tuple(sorted(x)) for x in nbrs))


def from_edge_list(text: str | bytes, n: int | None = None) -> Graph:
    """Parse the line-oriented ``u v`` edge-list format.

    Lines starting with ``#`` and blank lines are skipped; LF and CRLF are both
    accepted.  Without an explicit ``n`` the node count is ``max_id + 1``.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("ascii")
        except UnicodeDecodeError as exc:
            raise MalformedInput(f"edge list is not ASCII: {exc}") from None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise MalformedInput(f"line {lineno}: expected 2 tokens, got {len(tokens)}")
        try:
            u, v = (int(t, 10) for t in tokens)
        except ValueError:
            raise MalformedInput(f"line {lineno}: unparsable token in {line!r}") from None
        if not all(t.isdigit() for t in tokens):
            raise MalformedInput(f"line {lineno}: node ids must be non-negative integers")
        if u == v:
            raise MalformedInput(f"line {lineno}: self-loop at node {u}")
        pairs.append((u, v))
    return from_edges(pairs, n=n)


def to_edge_list(g: Graph) -> str:
    return "".join(f"{u} {v}\n" for u, v in g.edges)


@dataclass(frozen=True)
class ArcIndex:
    """Bijection between directed arcs and ids ``0..2m-1``."""

    tails: np.ndarray
    heads: np.ndarray
    arc_of: dict[tuple[int, int], int]

    @property
    def arcs(self) -> list[tuple[int, int]]:
        return list(zip(self.tails.tolist(), self.heads.tolist()))

    @property
    def size(self) -> int:
        return len(self.tails)

    def reverse_of(self, a: int) -> int:
        return a ^ 1

    @property
    def reverse(self) -> np.ndarray:
        return np.arange(self.size) ^ 1


def build_arc_index(g: Graph) -> ArcIndex:
    if g.m == 0:
        raise EmptyGraph("graph has no edges")
    e = np.asarray(g.edges, dtype=np.int64)
    tails = np.empty(2 * g.m, dtype=np.int64)
    heads = np.empty(2 * g.m, dtype=np.int64)
    tails[0::2], heads[0::2] = e[:, 0], e[:, 1]
    tails[1::2], heads[1::2] = e[:, 1], e[:, 0]
    arc_of = {(int(t), int(h)): a for a, (t, h) in enumerate(zip(tails, heads))}
    return ArcIndex(tails=tails, heads=heads, arc_of=arc_of)


def _csr(rows, cols, vals, shape) -> SparseRealMatrix:
    mat = sp.csr_array(
        (np.asarray(vals, dtype=float), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=shape,
    )
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def nb_transitions(g: Graph, ai: ArcIndex, begrudging: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """(predecessor, successor) arc-id pairs of the non-backtracking operator.

    A pair ``(k->j, j->i)`` with ``k != i``; with ``begrudging`` a leaf head
    additionally turns back along the reverse arc.
    """
    deg = g.degrees
    # group arcs by tail so successors of an arc are the arcs leaving its head
    order = np.argsort(ai.tails, kind="stable")
    start = np.searchsorted(ai.tails[order], np.arange(g.n + 1))
    counts = start[1:] - start[:-1]
    pred_parts, succ_parts = [], []
    for a in range(ai.size):
        h = ai.heads[a]
        succ = order[start[h] : start[h] + counts[h]]
        succ = succ[succ != (a ^ 1)]
        if succ.size == 0 and begrudging and deg[h] == 1:
            succ = np.array([a ^ 1])
        pred_parts.append(np.full(succ.size, a, dtype=np.int64))
        succ_parts.append(succ)
    if not pred_parts:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(pred_parts), np.concatenate(succ_parts)


def nb_matrix(g: Graph, ai: ArcIndex, begrudging: bool = False) -> SparseRealMatrix:
    """Non-backtracking matrix; row = predecessor arc, column = successor arc."""
    pred, succ = nb_transitions(g, ai, begrudging)
    return _csr(pred, succ, np.ones(pred.size), (ai.size, ai.size))


def nb_degree(B: SparseRealMatrix) -> SparseRealMatrix:
    """Diagonal matrix of out-transition counts (row sums of B)."""
    return sp.diags_array(np.asarray(B.sum(axis=1)).ravel(), format="csr")


def normalized_nb(B: SparseRealMatrix, D: SparseRealMatrix) -> SparseRealMatrix:
    """``(D + I)^{-1/2} (B + I) (D + I)^{-1/2}``."""
    scale = sp.diags_array(1.0 / np.sqrt(D.diagonal() + 1.0))
    eye = sp.eye_array(B.shape[0], format="csr")
    out = sp.csr_array(scale @ (B + eye) @ scale)
    out.sort_indices()
    return out


def incidence(g: Graph, ai: ArcIndex) -> tuple[SparseRealMatrix, SparseRealMatrix]:
    """Arc/node incidence ``C`` (1 at both endpoints) and ``C~ = C + C[rev]``."""
    rows = np.repeat(np.arange(ai.size), 2)
    cols = np.column_stack([ai.tails, ai.heads]).ravel()
    C = _csr(rows, cols, np.ones(rows.size), (ai.size, g.n))
    C_tilde = sp.csr_array(C + C[ai.reverse])
    C_tilde.sort_indices()
    return C, C_tilde


def adjacency_matrix(g: Graph) -> SparseRealMatrix:
    e = np.asarray(g.edges, dtype=np.int64).reshape(-1, 2)
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    return _csr(rows, cols, np.ones(rows.size), (g.n, g.n))


def normalized_adj(g: Graph) -> SparseRealMatrix:
    """GCN operator ``D~^{-1/2} (A + I) D~^{-1/2}`` with ``D~ = D + I``."""
    scale = sp.diags_array(1.0 / np.sqrt(g.degrees + 1.0))
    out = sp.csr_array(scale @ (adjacency_matrix(g) + sp.eye_array(g.n, format="csr")) @ scale)
    out.sort_indices()
    return out


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Hop distances from ``source``; unreachable nodes get ``inf``."""
    dist = np.full(g.n, np.inf)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.adjacency[u]:
            if dist[v] == np.inf:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def all_pairs_distances(g: Graph) -> np.ndarray:
    return np.vstack([bfs_distances(g, s) for s in range(g.n)])


def nb_transition_count(g: Graph) -> int:
    """Directed non-backtracking transition count ``sum_j d_j (d_j - 1)``."""
    d = g.degrees
    return int((d * (d - 1)).sum())


def matrix_power_apply(M: SparseRealMatrix, X: np.ndarray, k: int) -> np.ndarray:
    """``M^k @ X`` by repeated sparse matvec against a dense block."""
    out = np.asarray(X, dtype=float)
    for _ in range(k):
        out = M @ out
    return out
