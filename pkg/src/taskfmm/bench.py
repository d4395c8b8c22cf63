"""Benchmark harness: build a problem, time the MVP modes, write reports."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .dense import dense_matvec
from .fastmvp import make_stage_vectors, mvp, mvp_serial, task_counts
from .geometry import CurveSpec, generate_sources
from .metrics import (export_trace, gain, per_type_stats, speedup,
                      total_task_time_ns, utilization)
from .operators import NesaParams, build_all
from .quadtree import TreeParams, build_tree, tree_stats

VALID_MODES = ("dense", "serial", "parallel", "verify")
CSV_HEADER = "p,T_ms,S,U"


@dataclass(frozen=True)
class BenchConfig:
    n: int = 100_000
    p_avg: int = 50  # tree parameter P
    q_aux: int = 10  # equivalent sources per group, Q
    threads: tuple[int, ...] = (1,)
    seed: int = 0
    curve: CurveSpec = field(default_factory=CurveSpec)
    modes: tuple[str, ...] = ("parallel",)
    repeats: int = 3
    # Limit the timed span to the near or far part of the product.
    part: str = "combined"  # combined | near | far
    report_out: str | None = None
    trace_out: str | None = None
    csv_out: str | None = None
    baseline_report: str | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        for m in self.modes:
            if m not in VALID_MODES:
                raise ValueError(f"unknown mode {m!r}")
        if "parallel" in self.modes and not self.threads:
            raise ValueError("parallel mode needs a nonempty thread list")
        if self.part not in ("combined", "near", "far"):
            raise ValueError("part must be combined, near or far")


def _ms(seconds: float) -> float:
    return 1e3 * seconds


def run_benchmark(config: BenchConfig) -> dict:
    """Run the configured modes and return (and optionally write) a report.

    Reported T_p is the minimum over repeats; all raw samples are kept in
    the report so every derived number can be recomputed.
    """
    from .runtime import Runtime, RuntimeConfig

    near = config.part in ("combined", "near")
    far = config.part in ("combined", "far")

    points = generate_sources(config.curve, config.n)
    rng = np.random.default_rng(config.seed)
    q = rng.standard_normal(config.n)

    report: dict = {
        "config": {
            "n": config.n, "P": config.p_avg, "Q": config.q_aux,
            "threads": list(config.threads), "seed": config.seed,
            "curve": config.curve.kind, "modes": list(config.modes),
            "repeats": config.repeats, "part": config.part,
        },
    }

    needs_fast = any(m in config.modes for m in ("serial", "parallel", "verify"))
    tree = ops = None
    if needs_fast:
        t0 = time.perf_counter()
        tree = build_tree(points, TreeParams(P=config.p_avg))
        t1 = time.perf_counter()
        ops = build_all(tree, NesaParams(Q=config.q_aux))
        t2 = time.perf_counter()
        report["tree_stats"] = tree_stats(tree)
        report["task_counts"] = task_counts(tree)
        report["build"] = {"tree_ms": _ms(t1 - t0), "operators_ms": _ms(t2 - t1)}

    dense_ref = None
    if "dense" in config.modes or "verify" in config.modes:
        samples = []
        for _ in range(config.repeats if "dense" in config.modes else 1):
            t0 = time.perf_counter()
            dense_ref = dense_matvec(points, q)
            samples.append(_ms(time.perf_counter() - t0))
        if "dense" in config.modes:
            report["dense"] = {"samples_ms": samples, "T_ms": min(samples)}

    serial_phi = None
    if "serial" in config.modes or "verify" in config.modes:
        samples = []
        for _ in range(config.repeats):
            t0 = time.perf_counter()
            serial_phi = mvp_serial(tree, ops, q, near=near, far=far)
            samples.append(_ms(time.perf_counter() - t0))
        report["serial"] = {"samples_ms": samples, "T_ms": min(samples)}

    last_trace = None
    if "parallel" in config.modes:
        parallel: dict[int, dict] = {}
        base_trace = None
        for p in config.threads:
            samples = []
            best = None
            for _ in range(config.repeats):
                with Runtime(RuntimeConfig(workers=p)) as rt:
                    vec = make_stage_vectors(tree, config.q_aux, rt)
                    t0 = time.perf_counter()
                    phi = mvp(tree, ops, q, rt, vec=vec, near=near, far=far)
                    dt = time.perf_counter() - t0
                    trace = rt.trace()
                samples.append(_ms(dt))
                if best is None or _ms(dt) < best[0]:
                    best = (_ms(dt), trace, phi)
            t_ms, trace, phi = best
            parallel[p] = {
                "samples_ms": samples,
                "T_ms": t_ms,
                "U": utilization(trace, p, t_ms * 1e6),
                "task_time_ms": total_task_time_ns(trace) / 1e6,
                "tasks": len(trace),
                "per_type": per_type_stats(trace, baseline=base_trace),
            }
            if p == 1:
                base_trace = trace
            last_trace = trace
            if "verify" in config.modes or serial_phi is not None:
                ref = serial_phi if serial_phi is not None else None
                if ref is not None:
                    parallel[p]["vs_serial_rel_l2"] = float(
                        np.linalg.norm(phi - ref) / np.linalg.norm(ref))
            report.setdefault("_phi_parallel", {})[p] = phi
        t1 = parallel.get(1, {}).get("T_ms")
        for p, row in parallel.items():
            row["S"] = speedup(t1, row["T_ms"]) if t1 else None
        report["parallel"] = parallel

    if "verify" in config.modes:
        fast = None
        phis = report.get("_phi_parallel", {})
        if phis:
            fast = phis[max(phis)]
        elif serial_phi is not None:
            fast = serial_phi
        else:
            fast = mvp_serial(tree, ops, q, near=near, far=far)
        report["accuracy_rel_l2"] = float(
            np.linalg.norm(fast - dense_ref) / np.linalg.norm(dense_ref))
    report.pop("_phi_parallel", None)

    if config.baseline_report:
        with open(config.baseline_report) as f:
            base = json.load(f)
        base_parallel = base.get("parallel", {})
        gains = {}
        for p, row in report.get("parallel", {}).items():
            brow = base_parallel.get(str(p)) or base_parallel.get(p)
            if brow:
                gains[p] = gain(brow["T_ms"], row["T_ms"])
        report["gain_vs_baseline"] = gains

    if config.report_out:
        with open(config.report_out, "w") as f:
            json.dump(report, f, indent=2)
    if config.trace_out and last_trace is not None:
        export_trace(last_trace, config.trace_out)
    if config.csv_out and "parallel" in report:
        with open(config.csv_out, "w") as f:
            f.write(CSV_HEADER + "\n")
            for p, row in report["parallel"].items():
                s = "" if row["S"] is None else f"{row['S']:.4f}"
                f.write(f"{p},{row['T_ms']:.4f},{s},{row['U']:.4f}\n")
    return report
