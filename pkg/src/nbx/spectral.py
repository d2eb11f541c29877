"""Spectral analysis of the non-backtracking matrix on block-model graphs.

The leading eigenpairs come from plain orthogonal iteration: multiply the
block by B, re-orthonormalize the columns by Gram-Schmidt, repeat.  B is not
normal, so the final basis is a Schur basis; eigenvalue and eigenvector
estimates are extracted from the projected matrix ``Q^T B Q`` (Ritz values).
Bulk eigenvalues of B are typically complex and never settle, so the magnitude
of an unconverged column is measured by its average per-step growth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from nbx.errors import DegenerateStart, IsolatedNode, SpectrumNotConverged
from nbx.graph import ArcIndex, Graph, build_arc_index, from_edges, nb_matrix

DEFAULT_ITERS = 500
DEFAULT_TOL = 1e-8
DEFAULT_DELTA = 0.1


@dataclass(frozen=True)
class SbmParams:
    n: int
    K: int
    alpha: tuple[float, ...]
    P: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        P = np.asarray(self.P, dtype=float)
        if a.shape != (self.K,) or P.shape != (self.K, self.K):
            raise ValueError("alpha must have K entries and P must be K x K")
        if abs(a.sum() - 1.0) > 1e-12 or (a < 0).any():
            raise ValueError("alpha must be a probability vector")
        if not np.allclose(P, P.T) or (P < 0).any() or (P > 1).any():
            raise ValueError("P must be symmetric with entries in [0, 1]")

    @classmethod
    def two_block(cls, n: int, a: float, b: float, c: float | None = None) -> "SbmParams":
        """Balanced two-community SBM with within/between mean degrees a and b.

        ``c`` (default ``a``) sets the second community's within-degree.
        """
        c = a if c is None else c
        P = tuple(tuple(min(x / n, 1.0) for x in row) for row in ((a, b), (b, c)))
        return cls(n=n, K=2, alpha=(0.5, 0.5), P=P)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # real parts, descending
    magnitudes: np.ndarray  # |lambda| per column (growth rate when unconverged)
    eigenvectors: np.ndarray  # 2m x f, unit columns
    residuals: np.ndarray
    converged: np.ndarray
    iterations: int

    def to_dict(self) -> dict:
        return {
            "lambda": [float(x) for x in self.eigenvalues],
            "magnitude": [float(x) for x in self.magnitudes],
            "residuals": [float(x) for x in self.residuals],
            "converged": [bool(x) for x in self.converged],
            "iterations": self.iterations,
        }


@dataclass(frozen=True)
class Classification:
    decision: str  # "SBM" or "ER"
    lambda1: float
    lambda2: float  # estimate of |lambda_2|
    threshold: float
    spectrum: Spectrum

    def to_json(self) -> str:
        doc = {
            "lambda": [self.lambda1, self.lambda2],
            "residuals": [float(x) for x in self.spectrum.residuals],
            "converged": [bool(x) for x in self.spectrum.converged],
            "decision": self.decision,
            "threshold": self.threshold,
        }
        return json.dumps(doc, sort_keys=True)


def _bernoulli_edges(labels: np.ndarray, P: np.ndarray, rng: np.random.Generator) -> list[tuple[int, int]]:
    n = labels.size
    edges = []
    for u in range(n - 1):
        v = np.arange(u + 1, n)
        hit = rng.random(v.size) < P[labels[u], labels[v]]
        edges.extend((u, int(w)) for w in v[hit])
    return edges


def sample_sbm(p: SbmParams, seed: int = 0) -> tuple[Graph, np.ndarray]:
    """Draw communities from ``alpha``, then each pair independently."""
    rng = np.random.default_rng(seed)
    labels = rng.choice(p.K, size=p.n, p=np.asarray(p.alpha))
    edges = _bernoulli_edges(labels, np.asarray(p.P, dtype=float), rng)
    return from_edges(edges, n=p.n), labels


def sample_er(n: int, c: float, seed: int = 0) -> Graph:
    if c <= 0:
        raise ValueError("mean degree c must be positive")
    rng = np.random.default_rng(seed)
    P = np.array([[min(c / n, 1.0)]])
    return from_edges(_bernoulli_edges(np.zeros(n, dtype=np.int64), P, rng), n=n)


def _orthonormalize(Y: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Modified Gram-Schmidt; returns Q and the diagonal of R.

    A column whose remainder falls below 1e-12 is replaced by a fresh random
    column (its R entry is recorded as 0).
    """
    Q = Y.copy()
    r = np.zeros(Q.shape[1])
    for k in range(Q.shape[1]):
        for attempt in range(10):
            for i in range(k):
                Q[:, k] -= (Q[:, i] @ Q[:, k]) * Q[:, i]
            norm = np.linalg.norm(Q[:, k])
            if norm >= 1e-12:
                break
            Q[:, k] = rng.standard_normal(Q.shape[0])
        else:
            raise DegenerateStart("could not find a column independent of the current basis")
        if attempt == 0:
            r[k] = norm
        Q[:, k] /= norm
    return Q, r


def orthogonal_iteration(
    B: sp.csr_array,
    f: int = 2,
    iters: int = DEFAULT_ITERS,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    window: int | None = None,
) -> Spectrum:
    """Leading ``f`` eigen-directions of B by repeated multiply + Gram-Schmidt."""
    dim = B.shape[0]
    if not 1 <= f <= dim:
        raise ValueError(f"f must be in [1, {dim}]")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    window = window or max(1, min(100, iters // 2))
    rng = np.random.default_rng(seed)
    start = rng.standard_normal((dim, f))
    # B is nonnegative, so its Perron vector overlaps the all-ones vector
    start[:, 0] = 1.0
    Q, _ = _orthonormalize(start, rng)
    log_growth = np.zeros((iters, f))
    for it in range(iters):
        Q, r = _orthonormalize(np.asarray(B @ Q), rng)
        log_growth[it] = np.log(np.maximum(r, 1e-300))
    growth = np.exp(log_growth[-window:].mean(axis=0))

    BQ = np.asarray(B @ Q)
    H = Q.T @ BQ
    vals, vecs = np.linalg.eig(H)
    order = np.argsort(-vals.real, kind="stable")
    vals, vecs = vals[order], vecs[:, order]

    eigvecs = Q.copy()
    residuals = np.empty(f)
    eigenvalues = vals.real.copy()
    for k in range(f):
        if abs(vals[k].imag) > 1e-12 * max(1.0, abs(vals[k])):
            # complex Ritz pair: keep the Schur column and report its own residual
            lam = float(H[k, k])
            eigenvalues[k] = vals[k].real
            residuals[k] = np.linalg.norm(BQ[:, k] - lam * Q[:, k])
            continue
        v = Q @ vecs[:, k].real
        v /= np.linalg.norm(v)
        if v.sum() < 0:
            v = -v
        eigvecs[:, k] = v
        residuals[k] = np.linalg.norm(B @ v - vals[k].real * v)
    converged = residuals <= tol * np.maximum(np.abs(eigenvalues), 1e-300)
    magnitudes = np.where(converged, np.abs(vals), growth)
    return Spectrum(
        eigenvalues=eigenvalues,
        magnitudes=magnitudes,
        eigenvectors=eigvecs,
        residuals=residuals,
        converged=converged,
        iterations=iters,
    )


def head_projection(ai: ArcIndex, g: Graph) -> tuple[sp.csr_array, sp.csr_array]:
    """Arc-head indicator ``T`` (2m x n) and its pseudo-inverse ``D^{-1} T^T``."""
    d = g.degrees
    if (d == 0).any():
        raise IsolatedNode(f"node {int(np.argmin(d))} has no incoming arcs")
    arcs = np.arange(ai.size)
    T = sp.csr_array((np.ones(ai.size), (arcs, ai.heads)), shape=(ai.size, g.n))
    T_pinv = sp.csr_array((1.0 / d[ai.heads], (ai.heads, arcs)), shape=(g.n, ai.size))
    T_pinv.sort_indices()
    return T, T_pinv


def recover_communities(g: Graph, ai: ArcIndex, nu2: np.ndarray) -> np.ndarray:
    """Label 0 where the node average of ``nu2`` over incoming arcs is positive."""
    nu2 = np.asarray(nu2, dtype=float)
    if nu2.shape != (ai.size,):
        raise ValueError(f"nu2 must have {ai.size} entries")
    # isolated nodes carry no signal; they fall to label 1 like exact zeros
    d = g.degrees
    arcs = np.arange(ai.size)
    safe = np.where(d > 0, d, 1)
    T_pinv = sp.csr_array((1.0 / safe[ai.heads], (ai.heads, arcs)), shape=(g.n, ai.size))
    score = T_pinv @ nu2
    return np.where(score > 0, 0, 1)


def alignment(a: Sequence[int], b: Sequence[int]) -> float:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("labelings must have equal length")
    agree = float((a == b).mean())
    return max(agree, 1.0 - agree)


def classify_model(
    g: Graph,
    delta: float = DEFAULT_DELTA,
    seed: int = 0,
    iters: int = DEFAULT_ITERS,
    tol: float = DEFAULT_TOL,
) -> Classification:
    """Call the graph SBM when ``|lambda_2| > (1 + delta) sqrt(lambda_1)``."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    ai = build_arc_index(g)
    spec = orthogonal_iteration(nb_matrix(g, ai), f=2, iters=iters, tol=tol, seed=seed)
    lam1 = float(spec.eigenvalues[0])
    if not spec.converged[0] or lam1 <= 0:
        raise SpectrumNotConverged(f"leading eigenvalue did not converge (residual {spec.residuals[0]:.3g})")
    lam2 = float(spec.magnitudes[1])
    threshold = (1.0 + delta) * math.sqrt(lam1)
    return Classification(
        decision="SBM" if lam2 > threshold else "ER",
        lambda1=lam1,
        lambda2=lam2,
        threshold=threshold,
        spectrum=spec,
    )
