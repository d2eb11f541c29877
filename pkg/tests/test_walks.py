import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import K3, P2, P3, S3, cycle_graph, path_graph, random_tree
from oracles import bbrw_hitting_time, srw_hitting_time
from nbx.errors import AllTruncated, DeadEnd, NotATree, WalkTruncated
from nbx.graph import from_edges
from nbx.walks import (
    WalkKind,
    access_time_gap,
    mc_access_time,
    sample_hitting_times,
    simulate_walk,
    tree_access_time_bbrw,
    tree_access_time_srw,
    tree_path,
    tree_return_time_bbrw,
)


def test_bbrw_p2_single_step():
    assert simulate_walk(P2, WalkKind.BBRW, 0, 1, seed=7) == 1


def test_nbrw_dead_end():
    # from the middle of P3 the NB walk reaches one leaf and is stuck there
    g = path_graph(4)
    outcomes = set()
    for seed in range(40):
        try:
            outcomes.add(simulate_walk(g, WalkKind.NBRW, 1, 3, seed=seed))
        except DeadEnd:
            outcomes.add("dead")
    assert outcomes == {2, "dead"}


def test_nbrw_dead_end_star():
    g = from_edges([(0, 1), (1, 2), (1, 3)])
    with pytest.raises(DeadEnd):
        for seed in range(50):
            simulate_walk(g, WalkKind.NBRW, 1, 3, seed=seed)


@pytest.mark.parametrize("seed", range(10))
def test_bbrw_p3_forced(seed):
    assert simulate_walk(P3, WalkKind.BBRW, 0, 2, seed=seed) == 2


def test_truncation():
    with pytest.raises(WalkTruncated):
        simulate_walk(path_graph(200), WalkKind.SRW, 0, 199, max_steps=10)
    with pytest.raises(AllTruncated):
        mc_access_time(path_graph(200), WalkKind.SRW, 0, 199, samples=20, max_steps=10)
    est = mc_access_time(path_graph(6), WalkKind.SRW, 0, 5, samples=2000, max_steps=30)
    assert est.truncated > 0 and est.truncation_flagged


def test_walk_on_isolated_start_truncates():
    g = from_edges([(1, 2)], n=3)
    with pytest.raises(WalkTruncated):
        simulate_walk(g, WalkKind.SRW, 0, 1)


def test_simulate_matches_first_sample():
    g = cycle_graph(7)
    for kind in WalkKind:
        out = sample_hitting_times(g, kind, 0, 3, samples=5, seed=99)
        assert simulate_walk(g, kind, 0, 3, seed=99) == out[0]


def test_mc_p3_srw():
    est = mc_access_time(P3, WalkKind.SRW, 0, 2, samples=100_000, seed=1)
    assert abs(est.mean - 4.0) <= 3 * est.stderr
    assert est.truncated == 0 and not est.truncation_flagged


def test_mc_p3_bbrw_deterministic():
    est = mc_access_time(P3, WalkKind.BBRW, 0, 2, samples=1000, seed=1)
    assert est.mean == 2.0 and est.stderr == 0.0


def test_mc_star_srw():
    est = mc_access_time(S3, WalkKind.SRW, 1, 2, samples=100_000, seed=3)
    assert abs(est.mean - 6.0) <= 3 * est.stderr


def test_mc_determinism():
    g = cycle_graph(9)
    a = mc_access_time(g, WalkKind.NBRW, 0, 4, samples=5000, seed=2024)
    b = mc_access_time(g, WalkKind.NBRW, 0, 4, samples=5000, seed=2024)
    assert a == b
    c = mc_access_time(g, WalkKind.SRW, 0, 4, samples=5000, seed=2025)
    assert c != mc_access_time(g, WalkKind.SRW, 0, 4, samples=5000, seed=2024)


def test_mc_rejects_zero_samples():
    with pytest.raises(ValueError):
        mc_access_time(P3, WalkKind.SRW, 0, 2, samples=0)


def test_tree_path_examples():
    p = tree_path(P3, 0, 2)
    assert p.nodes == (0, 1, 2) and p.subtree_edge_counts == (0, 1)
    p = tree_path(S3, 1, 2)
    assert p.nodes == (1, 0, 2) and p.subtree_edge_counts == (0, 2)
    with pytest.raises(NotATree):
        tree_path(K3, 0, 1)
    with pytest.raises(NotATree):
        tree_path(from_edges([(0, 1), (2, 3)]), 0, 1)


@pytest.mark.parametrize(
    "g,i,j,srw,bbrw,gap",
    [
        (P3, 0, 2, 4.0, 2.0, -2.0),
        (P3, 0, 1, 1.0, 1.0, 0.0),
        (P3, 1, 2, 3.0, 2.0, -1.0),
        (S3, 1, 2, 6.0, 4.0, -2.0),
    ],
)
def test_closed_form_examples(g, i, j, srw, bbrw, gap):
    assert tree_access_time_srw(g, i, j) == pytest.approx(srw)
    assert tree_access_time_bbrw(g, i, j) == pytest.approx(bbrw)
    assert access_time_gap(g, i, j) == pytest.approx(gap)


def test_return_time_examples():
    assert tree_return_time_bbrw(S3, 0) == 2.0
    assert tree_return_time_bbrw(S3, 1) == 6.0
    assert tree_return_time_bbrw(P2, 0) == 2.0


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 25), st.integers(0, 2**32 - 1))
def test_closed_forms_match_markov_chain(n, seed):
    rng = np.random.default_rng(seed)
    g = random_tree(n, rng)
    i, j = rng.choice(n, 2, replace=False).tolist()
    srw = tree_access_time_srw(g, i, j)
    bbrw = tree_access_time_bbrw(g, i, j)
    assert srw == pytest.approx(srw_hitting_time(g, i, j), rel=1e-9)
    assert bbrw == pytest.approx(bbrw_hitting_time(g, i, j), rel=1e-9)
    assert access_time_gap(g, i, j) == pytest.approx(bbrw - srw, abs=1e-9)
    assert bbrw <= srw + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**32 - 1))
def test_srw_decomposes_over_hops(n, seed):
    rng = np.random.default_rng(seed)
    g = random_tree(n, rng)
    i, j = rng.choice(n, 2, replace=False).tolist()
    nodes = tree_path(g, i, j).nodes
    hops = sum(tree_access_time_srw(g, a, b) for a, b in zip(nodes, nodes[1:]))
    assert tree_access_time_srw(g, i, j) == hops


def test_bbrw_return_time_matches_chain():
    rng = np.random.default_rng(5)
    for _ in range(10):
        g = random_tree(int(rng.integers(2, 15)), rng)
        i = int(rng.integers(g.n))
        # first step is uniform over neighbors, then the chain runs back to i
        exact = np.mean([return_after_step(g, i, w) for w in g.adjacency[i]])
        assert tree_return_time_bbrw(g, i) == pytest.approx(exact, rel=1e-9)


def return_after_step(g, i, w):
    """Expected return time to i given the first step i -> w."""
    states = [(p, c) for c in range(g.n) if c != i for p in g.adjacency[c]]
    pos = {s: k for k, s in enumerate(states)}
    M = np.eye(len(states))
    for (p, c) in states:
        nxt = [x for x in g.adjacency[c] if x != p] or [p]
        for x in nxt:
            if x != i:
                M[pos[(p, c)], pos[(c, x)]] -= 1.0 / len(nxt)
    h = np.linalg.solve(M, np.ones(len(states)))
    return 1.0 + h[pos[(i, w)]]


def test_bbrw_never_dead_ends_on_trees():
    rng = np.random.default_rng(11)
    for _ in range(30):
        g = random_tree(int(rng.integers(2, 12)), rng)
        i, j = rng.choice(g.n, 2, replace=False).tolist()
        out = sample_hitting_times(g, WalkKind.BBRW, i, j, samples=500, seed=int(rng.integers(2**32)))
        assert (out >= 1).all()


def test_nbrw_on_trees_terminates():
    rng = np.random.default_rng(12)
    for _ in range(30):
        g = random_tree(int(rng.integers(3, 12)), rng)
        i, j = rng.choice(g.n, 2, replace=False).tolist()
        out = sample_hitting_times(g, WalkKind.NBRW, i, j, samples=500, max_steps=10 * g.n)
        # a NB walk on a tree never revisits a node, so it stops within n steps
        assert set(np.unique(out)) <= set(range(1, g.n)) | {-1}
