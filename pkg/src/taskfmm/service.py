"""FastAPI service exposing problem building, MVP evaluation and benchmarks.

State is in-memory: a problem (points, tree, operators) is built once and
can then serve many MVP or benchmark requests.
"""

from __future__ import annotations

import itertools
import threading

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .bench import BenchConfig, run_benchmark
from .dense import dense_matvec
from .fastmvp import mvp, mvp_serial, task_counts
from .geometry import CurveSpec, generate_sources
from .operators import NesaParams, build_all
from .quadtree import TreeParams, build_tree, tree_stats
from .runtime import Runtime, RuntimeConfig


class CurveModel(BaseModel):
    kind: str = "wave"
    amplitude: float = 0.35
    frequency: float = 1.5
    radius: float = 1.0
    inner_radius: float = 1.0
    outer_radius: float = 2.0
    seed: int = 0

    def to_spec(self) -> CurveSpec:
        return CurveSpec(**self.model_dump())


class ProblemRequest(BaseModel):
    n: int = Field(ge=2)
    p_avg: int = Field(default=50, ge=1)
    q_aux: int = Field(default=10, ge=3)
    curve: CurveModel = CurveModel()


class ProblemInfo(BaseModel):
    problem_id: int
    n: int
    p_avg: int
    q_aux: int
    tree_stats: dict
    task_counts: dict


class MvpRequest(BaseModel):
    seed: int = 0
    charges: list[float] | None = None
    workers: int = Field(default=1, ge=1)
    mode: str = "parallel"  # parallel | serial | dense
    compare_dense: bool = False
    return_phi: bool = False


class MvpResponse(BaseModel):
    mode: str
    workers: int
    wall_ms: float
    rel_l2_vs_dense: float | None = None
    phi: list[float] | None = None


class BenchRequest(BaseModel):
    n: int = Field(ge=2)
    p_avg: int = Field(default=50, ge=1)
    q_aux: int = Field(default=10, ge=3)
    threads: list[int] = [1]
    seed: int = 0
    curve: CurveModel = CurveModel()
    modes: list[str] = ["parallel"]
    repeats: int = Field(default=3, ge=1)
    part: str = "combined"


class _Problem:
    def __init__(self, req: ProblemRequest):
        self.req = req
        self.points = generate_sources(req.curve.to_spec(), req.n)
        self.tree = build_tree(self.points, TreeParams(P=req.p_avg))
        self.ops = build_all(self.tree, NesaParams(Q=req.q_aux))


app = FastAPI(title="taskfmm", version="0.1.0")
_problems: dict[int, _Problem] = {}
_ids = itertools.count(1)
_store_lock = threading.Lock()


def _get(problem_id: int) -> _Problem:
    with _store_lock:
        prob = _problems.get(problem_id)
    if prob is None:
        raise HTTPException(status_code=404, detail="unknown problem id")
    return prob


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/problems", response_model=ProblemInfo)
def create_problem(req: ProblemRequest):
    try:
        prob = _Problem(req)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    with _store_lock:
        pid = next(_ids)
        _problems[pid] = prob
    return ProblemInfo(
        problem_id=pid, n=req.n, p_avg=req.p_avg, q_aux=req.q_aux,
        tree_stats=tree_stats(prob.tree), task_counts=task_counts(prob.tree))


@app.get("/problems/{problem_id}", response_model=ProblemInfo)
def problem_info(problem_id: int):
    prob = _get(problem_id)
    return ProblemInfo(
        problem_id=problem_id, n=prob.req.n, p_avg=prob.req.p_avg,
        q_aux=prob.req.q_aux, tree_stats=tree_stats(prob.tree),
        task_counts=task_counts(prob.tree))


@app.delete("/problems/{problem_id}")
def delete_problem(problem_id: int):
    with _store_lock:
        if _problems.pop(problem_id, None) is None:
            raise HTTPException(status_code=404, detail="unknown problem id")
    return {"deleted": problem_id}


@app.post("/problems/{problem_id}/mvp", response_model=MvpResponse)
def run_mvp(problem_id: int, req: MvpRequest):
    import time

    prob = _get(problem_id)
    n = prob.req.n
    if req.charges is not None:
        if len(req.charges) != n:
            raise HTTPException(status_code=422,
                                detail=f"charges must have length {n}")
        q = np.asarray(req.charges, dtype=float)
    else:
        q = np.random.default_rng(req.seed).standard_normal(n)

    t0 = time.perf_counter()
    if req.mode == "dense":
        phi = dense_matvec(prob.points, q)
    elif req.mode == "serial":
        phi = mvp_serial(prob.tree, prob.ops, q)
    elif req.mode == "parallel":
        with Runtime(RuntimeConfig(workers=req.workers)) as rt:
            phi = mvp(prob.tree, prob.ops, q, rt)
    else:
        raise HTTPException(status_code=422, detail="unknown mvp mode")
    wall_ms = 1e3 * (time.perf_counter() - t0)

    rel = None
    if req.compare_dense and req.mode != "dense":
        ref = dense_matvec(prob.points, q)
        rel = float(np.linalg.norm(phi - ref) / np.linalg.norm(ref))
    return MvpResponse(mode=req.mode, workers=req.workers, wall_ms=wall_ms,
                       rel_l2_vs_dense=rel,
                       phi=phi.tolist() if req.return_phi else None)


@app.post("/benchmarks")
def run_bench(req: BenchRequest):
    try:
        config = BenchConfig(
            n=req.n, p_avg=req.p_avg, q_aux=req.q_aux,
            threads=tuple(req.threads), seed=req.seed,
            curve=req.curve.to_spec(), modes=tuple(req.modes),
            repeats=req.repeats, part=req.part)
        return run_benchmark(config)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
