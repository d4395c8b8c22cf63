"""Benchmark metrics and trace export."""

from __future__ import annotations

import json

from .runtime import TraceEvent


def speedup(t1: float, tp: float) -> float:
    """S_p = T_1 / T_p."""
    if t1 <= 0 or tp <= 0:
        raise ValueError("durations must be positive")
    return t1 / tp


def utilization(trace: list[TraceEvent], p: int, tp_ns: float) -> float:
    """Fraction of total worker time spent inside task bodies."""
    if p < 1 or tp_ns <= 0:
        raise ValueError("need p >= 1 and a positive wall time")
    busy = sum(e.duration_ns for e in trace)
    return busy / (p * tp_ns)


def gain(t_baseline: float, t_this: float) -> float:
    """Relative wall-time advantage over a baseline run: T_b / T - 1."""
    if t_baseline <= 0 or t_this <= 0:
        raise ValueError("durations must be positive")
    return t_baseline / t_this - 1.0


def total_task_time_ns(trace: list[TraceEvent]) -> int:
    return sum(e.duration_ns for e in trace)


def per_type_stats(trace: list[TraceEvent],
                   baseline: list[TraceEvent] | None = None) -> dict:
    """Mean/min/max task duration per task kind, in milliseconds.

    With a baseline trace (typically the p=1 run), a slowdown ratio of
    the means is included per kind.
    """
    def collect(events):
        acc: dict[str, list[int]] = {}
        for e in events:
            acc.setdefault(e.kind, []).append(e.duration_ns)
        return acc

    stats = {}
    base_means = {}
    if baseline is not None:
        for kind, durs in collect(baseline).items():
            base_means[kind] = sum(durs) / len(durs)
    for kind, durs in collect(trace).items():
        mean_ns = sum(durs) / len(durs)
        entry = {
            "count": len(durs),
            "mean_ms": mean_ns / 1e6,
            "min_ms": min(durs) / 1e6,
            "max_ms": max(durs) / 1e6,
        }
        if kind in base_means and base_means[kind] > 0:
            entry["slowdown"] = mean_ns / base_means[kind]
        stats[kind] = entry
    return stats


def trace_to_chrome(trace: list[TraceEvent]) -> list[dict]:
    """Chrome trace event format: complete ("X") events, microseconds."""
    return [
        {
            "name": e.kind,
            "ph": "X",
            "ts": e.start_ns / 1e3,
            "dur": e.duration_ns / 1e3,
            "pid": 1,
            "tid": e.worker,
        }
        for e in trace
    ]


def export_trace(trace: list[TraceEvent], path: str) -> None:
    """Write the trace as a Chrome-trace-viewer loadable JSON array."""
    with open(path, "w") as f:
        json.dump(trace_to_chrome(trace), f)
