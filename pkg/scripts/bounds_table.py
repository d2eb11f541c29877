"""Sensitivity bounds of GCN and NBA-GCN along a cycle and on random 3-regular graphs.

    python scripts/bounds_table.py --max-t 6
"""

import argparse
from dataclasses import dataclass

import networkx as nx
import numpy as np

from nbx.graph import all_pairs_distances, from_edges
from nbx.sensitivity import gnn_bound_matrix, nba_bound_matrix


@dataclass(frozen=True)
class Config:
    max_t: int = 6
    cycle_n: int = 20
    regular_n: int = 40
    seed: int = 0


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(Config()).items():
        p.add_argument(f"--{name.replace('_', '-')}", type=type(default), default=default)
    cfg = Config(**vars(p.parse_args()))

    cycle = from_edges([(i, (i + 1) % cfg.cycle_n) for i in range(cfg.cycle_n)])
    reg = nx.random_regular_graph(3, cfg.regular_n, seed=cfg.seed)
    reg = from_edges(reg.edges(), n=cfg.regular_n)
    D = all_pairs_distances(reg)
    print("T,cycle_nba,cycle_gnn,reg3_nba_mean,reg3_gnn_mean,reg3_ratio_mean")
    for T in range(1, cfg.max_t + 1):
        c_nba = nba_bound_matrix(cycle, T)[T, 0]
        c_gnn = gnn_bound_matrix(cycle, T)[T, 0]
        pairs = D == T
        if not pairs.any():
            break
        nba = nba_bound_matrix(reg, T)[pairs]
        gnn = gnn_bound_matrix(reg, T)[pairs]
        print(f"{T},{c_nba:.6g},{c_gnn:.6g},{nba.mean():.6g},{gnn.mean():.6g},{np.mean(nba / gnn):.4g}")


if __name__ == "__main__":
    main()
