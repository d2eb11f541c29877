"""NBA-GCN: message passing on arcs with non-backtracking aggregation.

Hidden state lives on arcs, one row per arc id.  A layer updates arc ``j -> i``
from the arcs ``k -> j`` with ``k != i``:

    h'_{j->i} = h_{j->i} + relu(W mean_{k in N(j)-{i}} h_{k->j})

Arcs whose tail is a leaf have no predecessor; with ``begrudging`` they read
the reverse arc instead, otherwise they pass through unchanged.  Node outputs
average incoming and outgoing arc states through two separate linear heads.

Gradients are computed by hand (reverse accumulation) in float64.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from nbx.errors import IsolatedNode, NonFiniteLoss, ShapeError
from nbx.graph import ArcIndex, Graph, nb_matrix


@dataclass
class NbaGcnModel:
    encoder_w: np.ndarray  # F x (2 F_in + F_edge)
    encoder_b: np.ndarray  # F
    layers: list[np.ndarray]  # each F x F
    head_in: np.ndarray  # F_out x F
    head_out: np.ndarray  # F_out x F
    head_bias: np.ndarray  # F_out
    begrudging: bool = False
    f_edge: int = 0

    @property
    def F(self) -> int:
        return self.encoder_w.shape[0]

    @property
    def F_in(self) -> int:
        return (self.encoder_w.shape[1] - self.f_edge) // 2

    @property
    def F_out(self) -> int:
        return self.head_in.shape[0]

    def params(self) -> dict[str, np.ndarray]:
        out = {"encoder_w": self.encoder_w, "encoder_b": self.encoder_b}
        out.update({f"layer{t}": W for t, W in enumerate(self.layers)})
        out.update(head_in=self.head_in, head_out=self.head_out, head_bias=self.head_bias)
        return out

    def with_params(self, params: dict[str, np.ndarray]) -> "NbaGcnModel":
        return replace(
            self,
            encoder_w=params["encoder_w"],
            encoder_b=params["encoder_b"],
            layers=[params[f"layer{t}"] for t in range(len(self.layers))],
            head_in=params["head_in"],
            head_out=params["head_out"],
            head_bias=params["head_bias"],
        )

    def copy(self) -> "NbaGcnModel":
        return self.with_params({k: v.copy() for k, v in self.params().items()})

    def validate(self) -> None:
        F = self.F
        if (self.encoder_w.shape[1] - self.f_edge) % 2 or self.encoder_b.shape != (F,):
            raise ShapeError("encoder shapes inconsistent")
        if any(W.shape != (F, F) for W in self.layers):
            raise ShapeError("layer weights must be F x F")
        if self.head_in.shape != self.head_out.shape or self.head_in.shape[1] != F:
            raise ShapeError("head shapes inconsistent")
        if self.head_bias.shape != (self.F_out,):
            raise ShapeError("head_bias must have F_out entries")

    def to_json(self) -> str:
        doc = {
            "F_in": self.F_in,
            "F": self.F,
            "F_out": self.F_out,
            "F_edge": self.f_edge,
            "layers": [W.tolist() for W in self.layers],
            "encoder": {"weight": self.encoder_w.tolist(), "bias": self.encoder_b.tolist()},
            "head_in": self.head_in.tolist(),
            "head_out": self.head_out.tolist(),
            "head_bias": self.head_bias.tolist(),
            "begrudging": self.begrudging,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NbaGcnModel":
        doc = json.loads(text)
        arr = lambda x: np.asarray(x, dtype=float)  # noqa: E731
        F, F_out = doc["F"], doc["F_out"]
        model = cls(
            encoder_w=arr(doc["encoder"]["weight"]).reshape(F, -1),
            encoder_b=arr(doc["encoder"]["bias"]),
            layers=[arr(W).reshape(F, F) for W in doc["layers"]],
            head_in=arr(doc["head_in"]).reshape(F_out, F),
            head_out=arr(doc["head_out"]).reshape(F_out, F),
            head_bias=arr(doc["head_bias"]),
            begrudging=bool(doc["begrudging"]),
            f_edge=int(doc.get("F_edge", 0)),
        )
        model.validate()
        if model.F_in != doc["F_in"]:
            raise ShapeError("F_in does not match encoder width")
        return model


def init_model(
    F_in: int, F: int, F_out: int, n_layers: int, seed: int = 0, begrudging: bool = False, F_edge: int = 0
) -> NbaGcnModel:
    """Weights uniform in [-1/sqrt(F), 1/sqrt(F)], biases zero."""
    rng = np.random.default_rng(seed)
    s = 1.0 / np.sqrt(F)
    u = lambda *shape: rng.uniform(-s, s, size=shape)  # noqa: E731
    return NbaGcnModel(
        encoder_w=u(F, 2 * F_in + F_edge),
        encoder_b=np.zeros(F),
        layers=[u(F, F) for _ in range(n_layers)],
        head_in=u(F_out, F),
        head_out=u(F_out, F),
        head_bias=np.zeros(F_out),
        begrudging=begrudging,
        f_edge=F_edge,
    )


@dataclass(frozen=True)
class ArcOperators:
    """Sparse operators for one (graph, begrudging) pair.

    ``pred_mean``: arc x arc, row a averages the predecessors of a.
    ``in_mean`` / ``out_mean``: node x arc, averages over arcs entering / leaving.
    """

    pred_mean: sp.csr_array
    in_mean: sp.csr_array
    out_mean: sp.csr_array
    tails: np.ndarray
    heads: np.ndarray

    @classmethod
    def build(cls, g: Graph, ai: ArcIndex, begrudging: bool) -> "ArcOperators":
        B = nb_matrix(g, ai, begrudging=begrudging)
        npred = np.asarray(B.sum(axis=0)).ravel()
        inv = np.divide(1.0, npred, out=np.zeros_like(npred), where=npred > 0)
        pred_mean = sp.csr_array(sp.diags_array(inv) @ B.T)
        d = g.degrees.astype(float)
        inv_d = np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)
        arcs = np.arange(ai.size)
        in_mean = sp.csr_array((inv_d[ai.heads], (ai.heads, arcs)), shape=(g.n, ai.size))
        out_mean = sp.csr_array((inv_d[ai.tails], (ai.tails, arcs)), shape=(g.n, ai.size))
        return cls(pred_mean, in_mean, out_mean, ai.tails, ai.heads)


def _check_features(g: Graph, X: np.ndarray, E: np.ndarray | None, model: NbaGcnModel) -> None:
    if X.ndim != 2 or X.shape != (g.n, model.F_in):
        raise ShapeError(f"X must be {g.n} x {model.F_in}, got {X.shape}")
    if model.f_edge:
        if E is None or E.shape != (g.m, model.f_edge):
            raise ShapeError(f"E must be {g.m} x {model.f_edge}")
    elif E is not None and E.size:
        raise ShapeError("model has no edge-feature inputs")


def _arc_inputs(ai: ArcIndex, X: np.ndarray, E: np.ndarray | None) -> np.ndarray:
    parts = [X[ai.tails], X[ai.heads]]
    if E is not None and E.size:
        parts.append(np.repeat(E, 2, axis=0))
    return np.hstack(parts)


def init_messages(
    g: Graph, ai: ArcIndex, X: np.ndarray, E: np.ndarray | None, model: NbaGcnModel
) -> np.ndarray:
    """Initial arc states ``encoder([x_tail | x_head | e])``."""
    X = np.asarray(X, dtype=float)
    _check_features(g, X, E, model)
    return _arc_inputs(ai, X, E) @ model.encoder_w.T + model.encoder_b


def nba_gcn_layer(
    h: np.ndarray,
    g: Graph,
    ai: ArcIndex,
    W: np.ndarray,
    begrudging: bool = False,
    ops: ArcOperators | None = None,
) -> np.ndarray:
    ops = ops or ArcOperators.build(g, ai, begrudging)
    return h + np.maximum(ops.pred_mean @ h @ W.T, 0.0)


def aggregate_nodes(
    h: np.ndarray, g: Graph, ai: ArcIndex, model: NbaGcnModel, ops: ArcOperators | None = None
) -> np.ndarray:
    if (g.degrees == 0).any():
        raise IsolatedNode(f"node {int(np.argmin(g.degrees))} has no incident arcs")
    ops = ops or ArcOperators.build(g, ai, model.begrudging)
    return (ops.in_mean @ h) @ model.head_in.T + (ops.out_mean @ h) @ model.head_out.T + model.head_bias


@dataclass
class _Trace:
    Z: np.ndarray
    hs: list[np.ndarray] = field(default_factory=list)
    aggs: list[np.ndarray] = field(default_factory=list)
    pre: list[np.ndarray] = field(default_factory=list)


def _forward_trace(g, ai, X, E, model, ops) -> tuple[np.ndarray, _Trace]:
    X = np.asarray(X, dtype=float)
    _check_features(g, X, E, model)
    if (g.degrees == 0).any():
        raise IsolatedNode(f"node {int(np.argmin(g.degrees))} has no incident arcs")
    tr = _Trace(Z=_arc_inputs(ai, X, E))
    h = tr.Z @ model.encoder_w.T + model.encoder_b
    tr.hs.append(h)
    for W in model.layers:
        agg = ops.pred_mean @ h
        s = agg @ W.T
        h = h + np.maximum(s, 0.0)
        tr.aggs.append(agg)
        tr.pre.append(s)
        tr.hs.append(h)
    out = (ops.in_mean @ h) @ model.head_in.T + (ops.out_mean @ h) @ model.head_out.T + model.head_bias
    return out, tr


def forward(
    g: Graph,
    ai: ArcIndex,
    X: np.ndarray,
    model: NbaGcnModel,
    E: np.ndarray | None = None,
    ops: ArcOperators | None = None,
) -> np.ndarray:
    """Node outputs (n x F_out)."""
    ops = ops or ArcOperators.build(g, ai, model.begrudging)
    return _forward_trace(g, ai, X, E, model, ops)[0]


def propagate_arcs(h0: np.ndarray, model: NbaGcnModel, ops: ArcOperators) -> np.ndarray:
    """Run every layer on given initial arc states."""
    h = h0
    for W in model.layers:
        h = h + np.maximum(ops.pred_mean @ h @ W.T, 0.0)
    return h


def jacobian_fd(
    g: Graph,
    ai: ArcIndex,
    X: np.ndarray,
    model: NbaGcnModel,
    source: int,
    target: int,
    eps: float = 1e-6,
    E: np.ndarray | None = None,
) -> np.ndarray:
    """Central-difference ``d out[target] / d X[source]`` (F_out x F_in)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    ops = ArcOperators.build(g, ai, model.begrudging)
    X = np.asarray(X, dtype=float)
    J = np.empty((model.F_out, model.F_in))
    for c in range(model.F_in):
        Xp, Xm = X.copy(), X.copy()
        Xp[source, c] += eps
        Xm[source, c] -= eps
        J[:, c] = (forward(g, ai, Xp, model, E, ops)[target] - forward(g, ai, Xm, model, E, ops)[target]) / (2 * eps)
    return J


def softmax_xent(logits: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over masked rows and its gradient w.r.t. the logits."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise ValueError("mask selects no nodes")
    z = logits[idx]
    z = z - z.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    y = labels[idx]
    loss = -logp[np.arange(idx.size), y].mean()
    grad = np.zeros_like(logits)
    p = np.exp(logp)
    p[np.arange(idx.size), y] -= 1.0
    grad[idx] = p / idx.size
    return float(loss), grad


def _as_mask(mask, n: int) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.dtype == bool:
        return mask
    out = np.zeros(n, dtype=bool)
    out[mask.astype(np.int64)] = True
    return out


def loss_and_grads(
    model: NbaGcnModel,
    g: Graph,
    ai: ArcIndex,
    X: np.ndarray,
    labels: np.ndarray,
    mask,
    E: np.ndarray | None = None,
    ops: ArcOperators | None = None,
) -> tuple[float, NbaGcnModel]:
    """Masked softmax cross-entropy and exact gradients shaped like ``model``."""
    ops = ops or ArcOperators.build(g, ai, model.begrudging)
    mask = _as_mask(mask, g.n)
    labels = np.asarray(labels, dtype=np.int64)
    logits, tr = _forward_trace(g, ai, X, E, model, ops)
    loss, dY = softmax_xent(logits, labels, mask)

    h_last = tr.hs[-1]
    a_in, a_out = ops.in_mean @ h_last, ops.out_mean @ h_last
    grads = {
        "head_in": dY.T @ a_in,
        "head_out": dY.T @ a_out,
        "head_bias": dY.sum(axis=0),
    }
    G = ops.in_mean.T @ (dY @ model.head_in) + ops.out_mean.T @ (dY @ model.head_out)
    for t in reversed(range(len(model.layers))):
        dS = G * (tr.pre[t] > 0)  # relu'(0) := 0
        grads[f"layer{t}"] = dS.T @ tr.aggs[t]
        G = G + ops.pred_mean.T @ (dS @ model.layers[t])
    grads["encoder_w"] = G.T @ tr.Z
    grads["encoder_b"] = G.sum(axis=0)
    return loss, model.with_params(grads)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 100
    seed: int = 0
    mask: Sequence[int] | np.ndarray | None = None
    head_only: bool = False

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


_HEAD_PARAMS = ("head_in", "head_out", "head_bias")


def train(
    model: NbaGcnModel,
    g: Graph,
    ai: ArcIndex,
    X: np.ndarray,
    labels: np.ndarray,
    cfg: TrainConfig,
    E: np.ndarray | None = None,
) -> tuple[NbaGcnModel, list[float]]:
    """Full-batch gradient descent; returns the new model and per-epoch losses."""
    ops = ArcOperators.build(g, ai, model.begrudging)
    mask = np.ones(g.n, dtype=bool) if cfg.mask is None else _as_mask(cfg.mask, g.n)
    params = {k: v.copy() for k, v in model.params().items()}
    current = model.with_params(params)
    history: list[float] = []
    for epoch in range(cfg.epochs):
        loss, grads = loss_and_grads(current, g, ai, X, labels, mask, E, ops)
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"loss became {loss} at epoch {epoch} (lr={cfg.learning_rate})")
        history.append(loss)
        for name, gval in grads.params().items():
            if cfg.head_only and name not in _HEAD_PARAMS:
                continue
            params[name] -= cfg.learning_rate * gval
        current = model.with_params(params)
    return current, history


def predict(model: NbaGcnModel, g: Graph, ai: ArcIndex, X: np.ndarray, E: np.ndarray | None = None) -> np.ndarray:
    return forward(g, ai, X, model, E).argmax(axis=1)


def degree_features(g: Graph) -> np.ndarray:
    """Constant and mean-scaled degree columns."""
    d = g.degrees.astype(float)
    return np.column_stack([np.ones(g.n), d / max(d.mean(), 1.0)])
