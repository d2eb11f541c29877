import networkx as nx
import numpy as np
import pytest

from nbx.graph import from_edges


def path_graph(n):
    return from_edges([(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return from_edges([(i, (i + 1) % n) for i in range(n)])


def complete_graph(n):
    return from_edges([(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves):
    return from_edges([(0, k) for k in range(1, leaves + 1)])


def random_tree(n, rng):
    t = nx.random_labeled_tree(n, seed=int(rng.integers(2**31)))
    return from_edges(t.edges(), n=n)


def random_connected_graph(n, rng, extra=None):
    """Random spanning tree plus a handful of extra edges."""
    t = nx.random_labeled_tree(n, seed=int(rng.integers(2**31)))
    edges = set(map(tuple, map(sorted, t.edges())))
    extra = int(rng.integers(0, n)) if extra is None else extra
    for _ in range(extra):
        u, v = sorted(rng.choice(n, 2, replace=False).tolist())
        edges.add((u, v))
    return from_edges(sorted(edges), n=n)


def random_regular_graph(d, n, rng):
    g = nx.random_regular_graph(d, n, seed=int(rng.integers(2**31)))
    return from_edges(g.edges(), n=n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


P2 = path_graph(2)
P3 = path_graph(3)
K3 = complete_graph(3)
K4 = complete_graph(4)
S3 = star_graph(3)
C5 = cycle_graph(5)
