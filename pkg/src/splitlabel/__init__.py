"""Budget-constrained active labeling by greedy split-and-label bound maximization."""

__version__ = "0.1.0"
