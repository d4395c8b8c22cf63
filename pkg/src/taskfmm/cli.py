"""Command line entry points.

taskfmm-bench runs the benchmark harness, either in-process or as a thin
client against a running taskfmm service (--server). taskfmm-serve
starts the service.
"""

from __future__ import annotations

import dataclasses
import json

import click

from .bench import CSV_HEADER, BenchConfig, run_benchmark
from .geometry import parse_curve_spec


def _write_outputs(report: dict, report_out, trace_out, csv_out) -> None:
    # Used on the client path; the in-process path writes inside
    # run_benchmark (where the raw trace is still available).
    if report_out:
        with open(report_out, "w") as f:
            json.dump(report, f, indent=2)
    if csv_out and "parallel" in report:
        with open(csv_out, "w") as f:
            f.write(CSV_HEADER + "\n")
            for p, row in report["parallel"].items():
                s = "" if row.get("S") is None else f"{row['S']:.4f}"
                f.write(f"{p},{row['T_ms']:.4f},{s},{row['U']:.4f}\n")


@click.command(name="taskfmm-bench")
@click.option("--n", type=int, default=100_000, show_default=True,
              help="Number of source points.")
@click.option("--p-avg", type=int, default=50, show_default=True,
              help="Target average points per leaf group (P).")
@click.option("--q", type=int, default=10, show_default=True,
              help="Equivalent sources per group (Q).")
@click.option("--threads", default="1", show_default=True,
              help="Comma-separated worker counts for parallel mode.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--curve", default="wave", show_default=True,
              help='Curve spec, e.g. "wave" or "annulus-random:inner_radius=1,outer_radius=2".')
@click.option("--mode", default="parallel", show_default=True,
              help="Comma-separated modes: dense, serial, parallel, verify.")
@click.option("--repeats", type=int, default=3, show_default=True)
@click.option("--part", type=click.Choice(["combined", "near", "far"]),
              default="combined", show_default=True,
              help="Restrict the timed computation to one part.")
@click.option("--report-out", type=click.Path(), default=None,
              help="Write the JSON report here.")
@click.option("--trace-out", type=click.Path(), default=None,
              help="Write a Chrome trace event file here.")
@click.option("--csv-out", type=click.Path(), default=None,
              help="Write a p,T_ms,S,U table here.")
@click.option("--baseline-report", type=click.Path(exists=True), default=None,
              help="Previous JSON report to compute per-p gain against.")
@click.option("--server", default=None,
              help="Run on a taskfmm service at this URL instead of in-process.")
def bench_main(n, p_avg, q, threads, seed, curve, mode, repeats, part,
               report_out, trace_out, csv_out, baseline_report, server):
    """Benchmark the hierarchical fast MVP against its dense oracle."""
    thread_list = tuple(int(t) for t in threads.split(",") if t)
    modes = tuple(m.strip() for m in mode.split(",") if m.strip())
    curve_spec = parse_curve_spec(curve, seed=seed)

    if server is None:
        config = BenchConfig(
            n=n, p_avg=p_avg, q_aux=q, threads=thread_list, seed=seed,
            curve=curve_spec, modes=modes, repeats=repeats, part=part,
            report_out=report_out, trace_out=trace_out, csv_out=csv_out,
            baseline_report=baseline_report)
        report = run_benchmark(config)
    else:
        import httpx

        payload = {
            "n": n, "p_avg": p_avg, "q_aux": q, "threads": list(thread_list),
            "seed": seed, "curve": dataclasses.asdict(curve_spec),
            "modes": list(modes), "repeats": repeats, "part": part,
        }
        resp = httpx.post(f"{server.rstrip('/')}/benchmarks", json=payload,
                          timeout=None)
        resp.raise_for_status()
        report = resp.json()
        _write_outputs(report, report_out, trace_out, csv_out)
        if trace_out:
            click.echo("note: --trace-out is unavailable via --server; "
                       "run in-process for traces", err=True)

    summary = {k: v for k, v in report.items()
               if k in ("config", "dense", "serial", "parallel",
                        "accuracy_rel_l2", "gain_vs_baseline")}
    click.echo(json.dumps(summary, indent=2, default=str))


@click.command(name="taskfmm-serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve_main(host, port):
    """Start the taskfmm HTTP service."""
    import uvicorn

    uvicorn.run("taskfmm.service:app", host=host, port=port)


if __name__ == "__main__":
    bench_main()
