"""Exact hitting-time oracles from linear solves on small Markov chains."""

import numpy as np


def srw_hitting_time(g, i, j):
    n = g.n
    idx = [v for v in range(n) if v != j]
    pos = {v: k for k, v in enumerate(idx)}
    M = np.eye(len(idx))
    rhs = np.ones(len(idx))
    for v in idx:
        for w in g.adjacency[v]:
            if w != j:
                M[pos[v], pos[w]] -= 1.0 / g.degree(v)
    return float(np.linalg.solve(M, rhs)[pos[i]])


def bbrw_hitting_time(g, i, j):
    """First-step analysis over (previous, current) states."""
    states = [(p, c) for c in range(g.n) if c != j for p in g.adjacency[c]]
    pos = {s: k for k, s in enumerate(states)}
    M = np.eye(len(states))
    rhs = np.ones(len(states))
    for (p, c) in states:
        nxt = [w for w in g.adjacency[c] if w != p] or [p]
        for w in nxt:
            if w != j:
                M[pos[(p, c)], pos[(c, w)]] -= 1.0 / len(nxt)
    h = np.linalg.solve(M, rhs)
    # first step is uniform over all neighbors
    total = 0.0
    for w in g.adjacency[i]:
        total += 1.0 + (0.0 if w == j else h[pos[(i, w)]])
    return total / g.degree(i)
