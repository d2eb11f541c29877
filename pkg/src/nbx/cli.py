"""``nbx`` command line: every subcommand prints one canonical JSON report.

Domain errors become a report with ``"error"`` and exit code 1; usage errors
exit with 2.  Reports are byte-reproducible for a fixed ``--seed`` (wall-clock
timings are only included when ``NBX_REPORT_TIMINGS=1``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from nbx import graph as gcore
from nbx import nbagnn, sensitivity, spectral, walks
from nbx.errors import NbxError, UsageError

SCHEMA_VERSION = "1"
SUBCOMMANDS = ("gen", "walk", "access-time", "bounds", "spectral", "classify", "train", "forward", "info")


@dataclass
class Command:
    subcommand: str
    options: dict[str, Any]
    seed: int = 0
    argv: list[str] = field(default_factory=list)


@dataclass
class Report:
    command: list[str]
    results: dict[str, Any]
    timings_ms: dict[str, float] = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION
    warnings: list[str] = field(default_factory=list)
    table: list[dict[str, Any]] | None = None  # rows for --format csv


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be >= 1")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"{text} must be >= 0")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"{text} must be a positive number")
    return v


def _keyvals(required: Sequence[str], optional: Sequence[str] = ()):
    def parse(text: str) -> dict[str, float]:
        out = {}
        for part in text.split(","):
            key, sep, val = part.partition("=")
            if not sep or key not in (*required, *optional):
                raise argparse.ArgumentTypeError(f"bad item {part!r}; expected {','.join(k + '=..' for k in required)}")
            out[key] = float(val)
        missing = [k for k in required if k not in out]
        if missing:
            raise argparse.ArgumentTypeError(f"missing {', '.join(missing)}")
        if out["n"] < 1 or out["n"] != int(out["n"]):
            raise argparse.ArgumentTypeError("n must be a positive integer")
        return out

    return parse


def _build_parser() -> _Parser:
    p = _Parser(prog="nbx", description="Non-backtracking graph operators, walks, bounds and NBA-GCN.")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def add(name, help_):
        sp_ = sub.add_parser(name, help=help_)
        sp_.add_argument("--seed", type=_u64, default=0)
        sp_.add_argument("--out", type=Path)
        return sp_

    def graph_source(sp_, required=False):
        grp = sp_.add_mutually_exclusive_group(required=required)
        grp.add_argument("--graph", type=Path)
        grp.add_argument("--sbm", type=_keyvals(("n", "a", "b"), ("c",)))
        grp.add_argument("--er", type=_keyvals(("n", "c")))

    s = add("gen", "sample an SBM or ER graph and write it as an edge list")
    grp = s.add_mutually_exclusive_group(required=True)
    grp.add_argument("--sbm", type=_keyvals(("n", "a", "b"), ("c",)))
    grp.add_argument("--er", type=_keyvals(("n", "c")))

    s = add("walk", "Monte Carlo access time of one walk kind")
    s.add_argument("--graph", type=Path, required=True)
    s.add_argument("--kind", choices=("srw", "nbrw", "bbrw"), required=True)
    s.add_argument("--from", dest="source", type=_nonneg_int, required=True)
    s.add_argument("--to", dest="target", type=_nonneg_int, required=True)
    s.add_argument("--samples", type=_positive_int, default=10_000)
    s.add_argument("--max-steps", type=_positive_int, default=walks.DEFAULT_MAX_STEPS)

    s = add("access-time", "closed-form SRW/BBRW access times on a tree")
    s.add_argument("--graph", type=Path, required=True)
    s.add_argument("--from", dest="source", type=_nonneg_int)
    s.add_argument("--to", dest="target", type=_nonneg_int)
    s.add_argument("--format", choices=("json", "csv"), default="json")

    s = add("bounds", "sensitivity bounds for all pairs at distance T")
    s.add_argument("--graph", type=Path, required=True)
    s.add_argument("--T", type=_positive_int, required=True)
    s.add_argument("--format", choices=("json", "csv"), default="json")

    s = add("spectral", "leading eigenpairs of B and community recovery")
    graph_source(s, required=True)

    s = add("classify", "decide SBM vs ER from the spectrum of B")
    graph_source(s, required=True)
    s.add_argument("--delta", type=_positive_float, default=spectral.DEFAULT_DELTA)

    s = add("train", "train an NBA-GCN on degree features")
    graph_source(s, required=True)
    s.add_argument("--layers", type=_nonneg_int, default=2)
    s.add_argument("--hidden", type=_positive_int, default=4)
    s.add_argument("--epochs", type=_nonneg_int, default=500)
    s.add_argument("--lr", type=_positive_float, default=0.1)
    s.add_argument("--begrudging", choices=("on", "off"), default="off")

    s = add("forward", "node outputs of a seeded NBA-GCN on degree features")
    s.add_argument("--graph", type=Path, required=True)
    s.add_argument("--layers", type=_nonneg_int, default=2)
    s.add_argument("--hidden", type=_positive_int, default=4)
    s.add_argument("--begrudging", choices=("on", "off"), default="off")

    s = add("info", "graph size and non-backtracking counts")
    s.add_argument("--graph", type=Path, required=True)
    return p


def parse_args(argv: Sequence[str]) -> Command:
    """Validated Command; raises UsageError (``--help`` exits 0 via argparse)."""
    argv = list(argv)
    try:
        ns = _build_parser().parse_args(argv)
    except argparse.ArgumentTypeError as exc:  # pragma: no cover - argparse wraps these
        raise UsageError(str(exc)) from None
    opts = {k: v for k, v in vars(ns).items() if k not in ("subcommand", "seed")}
    return Command(subcommand=ns.subcommand, options=opts, seed=ns.seed, argv=argv)


def _read_graph(path: Path) -> gcore.Graph:
    return gcore.from_edge_list(Path(path).read_bytes())


def _labels_sidecar(path: Path) -> np.ndarray | None:
    side = Path(str(path) + ".labels")
    if not side.exists():
        return None
    return np.array([int(x) for x in side.read_text().split()], dtype=np.int64)


def _sbm_params(spec: dict[str, float]) -> spectral.SbmParams:
    return spectral.SbmParams.two_block(int(spec["n"]), spec["a"], spec["b"], spec.get("c"))


def _graph_and_labels(cmd: Command) -> tuple[gcore.Graph, np.ndarray | None]:
    o = cmd.options
    if o.get("graph") is not None:
        labels = _labels_sidecar(o["graph"])
        # trailing isolated nodes only survive through the sidecar's length
        n = None if labels is None else labels.size
        return gcore.from_edge_list(Path(o["graph"]).read_bytes(), n=n), labels
    if o.get("sbm") is not None:
        return spectral.sample_sbm(_sbm_params(o["sbm"]), seed=cmd.seed)
    return spectral.sample_er(int(o["er"]["n"]), o["er"]["c"], seed=cmd.seed), None


def _run_gen(cmd: Command, timer) -> dict:
    g, labels = _graph_and_labels(cmd)
    out = cmd.options.get("out")
    results = {"n": g.n, "m": g.m, "model": "sbm" if cmd.options.get("sbm") else "er"}
    if out is not None:
        with timer("write"):
            Path(out).write_text(f"# nodes: {g.n}\n" + gcore.to_edge_list(g))
            if labels is not None:
                Path(str(out) + ".labels").write_text("".join(f"{int(x)}\n" for x in labels))
        results["path"] = str(out)
    else:
        results["edges"] = [list(e) for e in g.edges]
        if labels is not None:
            results["labels"] = labels.tolist()
    return results


def _run_walk(cmd: Command, timer) -> dict:
    o = cmd.options
    g = _read_graph(o["graph"])
    kind = walks.WalkKind(o["kind"])
    with timer("simulate"):
        est = walks.mc_access_time(g, kind, o["source"], o["target"], o["samples"], o["max_steps"], cmd.seed)
    return {
        "kind": kind.value,
        "from": o["source"],
        "to": o["target"],
        "mean": est.mean,
        "stderr": est.stderr,
        "samples": est.samples,
        "truncated": est.truncated,
        "dead_ends": est.dead_ends,
        "truncation_flagged": est.truncation_flagged,
    }


def _run_access_time(cmd: Command, timer) -> tuple[dict, list[dict]]:
    o = cmd.options
    g = _read_graph(o["graph"])
    walks.check_tree(g)
    if (o["source"] is None) != (o["target"] is None):
        raise UsageError("--from and --to must be given together")
    pairs = (
        [(o["source"], o["target"])]
        if o["source"] is not None
        else [(i, j) for i in range(g.n) for j in range(g.n) if i != j]
    )
    rows = []
    for i, j in pairs:
        rows.append(
            {
                "from": i,
                "to": j,
                "srw": walks.tree_access_time_srw(g, i, j),
                "bbrw": walks.tree_access_time_bbrw(g, i, j),
                "gap": walks.access_time_gap(g, i, j),
            }
        )
    if len(rows) == 1:
        r = rows[0]
        return {"srw": r["srw"], "bbrw": r["bbrw"], "gap": r["gap"]}, rows
    return {"pairs": rows}, rows


def _run_bounds(cmd: Command, timer) -> tuple[dict, list[dict]]:
    g = _read_graph(cmd.options["graph"])
    T = cmd.options["T"]
    with timer("bounds"):
        reports = sensitivity.compare_bounds(g, T)
    rows = []
    for r in reports:
        if not r.nba_bound >= r.gnn_bound:
            raise ArithmeticError(f"nba < gnn at {r.pair}")
        rows.append(
            {
                "i": r.pair[0],
                "j": r.pair[1],
                "distance": r.distance,
                "nba": r.nba_bound,
                "gnn": r.gnn_bound,
                "paths_nb": r.path_count_nb,
                "paths_simple": r.path_count_simple,
            }
        )
    return {"T": T, "pairs": rows}, rows


def _run_spectral(cmd: Command, timer) -> dict:
    g, labels = _graph_and_labels(cmd)
    ai = gcore.build_arc_index(g)
    with timer("iterate"):
        spec = spectral.orthogonal_iteration(gcore.nb_matrix(g, ai), f=2, seed=cmd.seed)
    results = spec.to_dict()
    pred = spectral.recover_communities(g, ai, spec.eigenvectors[:, 1])
    results["labels"] = pred.tolist()
    if labels is not None:
        results["alignment"] = spectral.alignment(pred, labels)
    return results


def _run_classify(cmd: Command, timer) -> dict:
    g, _ = _graph_and_labels(cmd)
    with timer("classify"):
        c = spectral.classify_model(g, delta=cmd.options["delta"], seed=cmd.seed)
    return {
        "decision": c.decision,
        "lambda": [c.lambda1, c.lambda2],
        "threshold": c.threshold,
        "residuals": [float(x) for x in c.spectrum.residuals],
        "converged": [bool(x) for x in c.spectrum.converged],
    }


def _run_train(cmd: Command, timer) -> dict:
    o = cmd.options
    g, labels = _graph_and_labels(cmd)
    if labels is None:
        raise UsageError("train needs node labels (--sbm, or a --graph with a .labels sidecar)")
    n_raw = g.n
    g, keep = gcore.drop_isolated(g)
    labels = labels[keep]
    ai = gcore.build_arc_index(g)
    rng = np.random.default_rng(cmd.seed)
    mask = rng.random(g.n) < 0.1
    X = nbagnn.degree_features(g)
    n_classes = int(labels.max()) + 1
    model = nbagnn.init_model(X.shape[1], o["hidden"], n_classes, o["layers"], seed=cmd.seed, begrudging=o["begrudging"] == "on")
    cfg = nbagnn.TrainConfig(learning_rate=o["lr"], epochs=o["epochs"], seed=cmd.seed, mask=mask)
    with timer("train"):
        model, history = nbagnn.train(model, g, ai, X, labels, cfg)
    pred = nbagnn.predict(model, g, ai, X)
    return {
        "nodes": g.n,
        "dropped_isolated": n_raw - g.n,
        "train_nodes": int(mask.sum()),
        "loss_first": history[0] if history else None,
        "loss_last": history[-1] if history else None,
        "train_accuracy": float((pred[mask] == labels[mask]).mean()) if mask.any() else None,
        "test_accuracy": float((pred[~mask] == labels[~mask]).mean()) if (~mask).any() else None,
        "model": json.loads(model.to_json()),
    }


def _run_forward(cmd: Command, timer) -> dict:
    o = cmd.options
    g = _read_graph(o["graph"])
    ai = gcore.build_arc_index(g)
    X = nbagnn.degree_features(g)
    model = nbagnn.init_model(X.shape[1], o["hidden"], 1, o["layers"], seed=cmd.seed, begrudging=o["begrudging"] == "on")
    out = nbagnn.forward(g, ai, X, model)
    return {"outputs": out[:, 0].tolist()}


def _run_info(cmd: Command, timer) -> dict:
    g = _read_graph(cmd.options["graph"])
    nnz = int(gcore.nb_matrix(g, gcore.build_arc_index(g)).nnz) if g.m else 0
    return {"n": g.n, "m": g.m, "arcs": 2 * g.m, "nb_nnz": nnz}


_DISPATCH = {
    "gen": _run_gen,
    "walk": _run_walk,
    "access-time": _run_access_time,
    "bounds": _run_bounds,
    "spectral": _run_spectral,
    "classify": _run_classify,
    "train": _run_train,
    "forward": _run_forward,
    "info": _run_info,
}


class _Timer:
    def __init__(self):
        self.ms: dict[str, float] = {}

    def __call__(self, phase: str):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.ms[phase] = round((time.perf_counter() - self.t0) * 1000, 3)

        return _Ctx()


def run(cmd: Command) -> tuple[Report, int]:
    timer = _Timer()
    report = Report(command=["nbx", *cmd.argv], results={})
    code = 0
    try:
        out = _DISPATCH[cmd.subcommand](cmd, timer)
        if isinstance(out, tuple):
            report.results, report.table = out
        else:
            report.results = out
    except UsageError as exc:
        report.results = {"error": {"name": "UsageError", "message": str(exc)}}
        code = 2
    except NbxError as exc:
        report.results = {"error": {"name": type(exc).__name__, "message": str(exc)}}
        code = 1
    except OSError as exc:
        report.results = {"error": {"name": "IoError", "message": str(exc)}}
        code = 1
    except (ValueError, ArithmeticError) as exc:
        report.results = {"error": {"name": type(exc).__name__, "message": str(exc)}}
        code = 1
    if os.environ.get("NBX_REPORT_TIMINGS") == "1":
        report.timings_ms = timer.ms
    return report, code


def _canonical(obj: Any, path: str, warnings: list[str]) -> Any:
    if isinstance(obj, dict):
        return {str(k): _canonical(v, f"{path}.{k}", warnings) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v, f"{path}[{i}]", warnings) for i, v in enumerate(obj)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            warnings.append(f"non-finite value {x} at {path} rendered as null")
            return None
        return float(f"{x:.12g}")
    if isinstance(obj, Path):
        return str(obj)
    return obj


def emit_report(r: Report, pretty: bool = False) -> bytes:
    """Canonical JSON: sorted keys, LF-terminated UTF-8, <= 12 significant digits."""
    warnings = list(r.warnings)
    doc = {
        "schema_version": r.schema_version,
        "command": [str(x) for x in r.command],
        "results": _canonical(r.results, "results", warnings),
        "timings_ms": _canonical(r.timings_ms, "timings_ms", warnings),
    }
    if warnings:
        doc["warnings"] = warnings
    if pretty:
        text = json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)
    else:
        text = json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def emit_csv(rows: list[dict[str, Any]]) -> bytes:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue().encode("utf-8")


def _apply_thread_cap() -> None:
    cap = os.environ.get("NBX_THREADS")
    if not cap:
        return
    try:
        import numba

        numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))
    except (ValueError, ImportError):
        pass


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _apply_thread_cap()
    try:
        cmd = parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"nbx: error: {exc}\n")
        report = Report(command=["nbx", *argv], results={"error": {"name": "UsageError", "message": str(exc)}})
        sys.stdout.buffer.write(emit_report(report))
        return 2
    report, code = run(cmd)
    fmt = cmd.options.get("format", "json")
    if code == 0 and fmt == "csv" and report.table is not None:
        payload = emit_csv(report.table)
    else:
        payload = emit_report(report)
    out = cmd.options.get("out") if cmd.subcommand != "gen" else None
    if out is not None:
        Path(out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
    sys.stdout.flush()
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
