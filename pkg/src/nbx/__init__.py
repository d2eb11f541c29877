"""Non-backtracking operators, random walks, sensitivity bounds, spectral recovery and NBA-GCN."""

__version__ = "0.1.0"
