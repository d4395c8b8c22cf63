"""Hierarchical fast matrix-vector product on a dependency-aware task runtime."""

from .bench import BenchConfig, run_benchmark
from .dense import dense_matvec
from .fastmvp import mvp, mvp_serial, task_counts
from .geometry import BBox, CurveSpec, bounding_box, generate_sources
from .linalg import circle_points, gemv, kernel_eval, kernel_matrix, pinv
from .metrics import export_trace, gain, per_type_stats, speedup, utilization
from .operators import NesaParams, OperatorSet, build_all
from .quadtree import Tree, TreeParams, build_tree, tree_stats
from .runtime import (AccessMode, Handle, Runtime, RuntimeConfig, Task,
                      TraceEvent, create_runtime)

__version__ = "0.1.0"

__all__ = [
    "AccessMode", "BBox", "BenchConfig", "CurveSpec", "Handle", "NesaParams",
    "OperatorSet", "Runtime", "RuntimeConfig", "Task", "TraceEvent", "Tree",
    "TreeParams", "bounding_box", "build_all", "build_tree", "circle_points",
    "create_runtime", "dense_matvec", "export_trace", "gain",
    "generate_sources", "gemv", "kernel_eval", "kernel_matrix", "mvp",
    "mvp_serial", "per_type_stats", "pinv", "run_benchmark", "speedup",
    "task_counts", "tree_stats", "utilization",
]
