"""SRW vs BBRW access times on random trees: closed forms next to Monte Carlo.

    python scripts/access_time_table.py --trees 5 --pairs 4 --samples 20000
"""

import argparse
import csv
import sys
from dataclasses import dataclass

import networkx as nx
import numpy as np

from nbx.graph import from_edges
from nbx.walks import WalkKind, mc_access_time, tree_access_time_bbrw, tree_access_time_srw


@dataclass(frozen=True)
class Config:
    trees: int = 5
    pairs: int = 4
    min_n: int = 5
    max_n: int = 20
    samples: int = 20_000
    seed: int = 0


def run(cfg: Config):
    rng = np.random.default_rng(cfg.seed)
    for t in range(cfg.trees):
        n = int(rng.integers(cfg.min_n, cfg.max_n + 1))
        g = from_edges(nx.random_labeled_tree(n, seed=int(rng.integers(2**31))).edges(), n=n)
        for _ in range(cfg.pairs):
            i, j = rng.choice(n, 2, replace=False).tolist()
            srw = mc_access_time(g, WalkKind.SRW, i, j, cfg.samples, seed=int(rng.integers(2**63)))
            bbrw = mc_access_time(g, WalkKind.BBRW, i, j, cfg.samples, seed=int(rng.integers(2**63)))
            yield {
                "tree": t,
                "n": n,
                "from": i,
                "to": j,
                "srw_exact": tree_access_time_srw(g, i, j),
                "srw_mc": round(srw.mean, 4),
                "srw_se": round(srw.stderr, 4),
                "bbrw_exact": round(tree_access_time_bbrw(g, i, j), 6),
                "bbrw_mc": round(bbrw.mean, 4),
                "bbrw_se": round(bbrw.stderr, 4),
            }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(Config()).items():
        p.add_argument(f"--{name.replace('_', '-')}", type=type(default), default=default)
    cfg = Config(**vars(p.parse_args()))
    rows = list(run(cfg))
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


if __name__ == "__main__":
    main()
