"""Hierarchical fast matrix-vector product, serial or as runtime tasks.

The product is the near-field dense-block sum plus the five far-field
stages (radiation, source transfer, translation, potential transfer,
reception). In task mode every small gemv is one task; inter-stage
ordering comes solely from the registered handle accesses, so the
scheduler is free to mix near- and far-field work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import OperatorSet
from .quadtree import Tree
from .runtime import AccessMode, Handle, Runtime, Task

READ = AccessMode.READ
ADD = AccessMode.ADD


@dataclass
class StageVectors:
    """Global and per-group work vectors with their protecting handles.

    phi gets one handle per leaf slice; s and o one handle per group.
    q is read-only but still handle-protected per leaf, matching the
    task registration discipline.
    """

    q: np.ndarray  # tree-ordered charges, length N
    phi: np.ndarray  # tree-ordered potentials, length N
    s: np.ndarray  # (n_groups, Q) outgoing equivalent sources
    o: np.ndarray  # (n_groups, Q) incoming representations
    hq: dict[int, Handle]  # leaf id -> handle
    hphi: dict[int, Handle]
    hs: list[Handle]  # group id -> handle
    ho: list[Handle]

    def reset(self) -> None:
        self.phi[:] = 0.0
        self.s[:] = 0.0
        self.o[:] = 0.0


def make_stage_vectors(tree: Tree, Q: int, runtime: Runtime) -> StageVectors:
    n_groups = len(tree.groups)
    return StageVectors(
        q=np.zeros(tree.n_points),
        phi=np.zeros(tree.n_points),
        s=np.zeros((n_groups, Q)),
        o=np.zeros((n_groups, Q)),
        hq={g.id: runtime.create_handle() for g in tree.leaves()},
        hphi={g.id: runtime.create_handle() for g in tree.leaves()},
        hs=[runtime.create_handle() for _ in range(n_groups)],
        ho=[runtime.create_handle() for _ in range(n_groups)],
    )


def _gemv_body(A, x, y):
    def run():
        np.add(y, A @ x, out=y)
    return run


def mvp_near_field(tree: Tree, ops: OperatorSet, vec: StageVectors,
                   runtime: Runtime) -> None:
    """Submit one task per ordered near pair: phi_a += K_ab q_b."""
    for a in tree.leaves():
        phi_a = vec.phi[a.start:a.stop]
        for bid in a.neighbors:
            b = tree.groups[bid]
            runtime.submit(Task(
                "near",
                [(vec.hq[bid], READ), (vec.hphi[a.id], ADD)],
                _gemv_body(ops.near[(a.id, bid)], vec.q[b.start:b.stop], phi_a),
            ))


def mvp_far_field(tree: Tree, ops: OperatorSet, vec: StageVectors,
                  runtime: Runtime) -> None:
    """Submit the five far-field stages in pipeline order."""
    for b in tree.leaves():  # radiation
        runtime.submit(Task(
            "radiation",
            [(vec.hq[b.id], READ), (vec.hs[b.id], ADD)],
            _gemv_body(ops.V[b.id], vec.q[b.start:b.stop], vec.s[b.id]),
        ))
    for level in range(tree.L, tree.l0, -1):  # source transfer, up
        for gid in tree.level_ids[level]:
            g = tree.groups[gid]
            runtime.submit(Task(
                "source-transfer",
                [(vec.hs[gid], READ), (vec.hs[g.parent], ADD)],
                _gemv_body(ops.C[gid], vec.s[gid], vec.s[g.parent]),
            ))
    for level in range(tree.l0, tree.L + 1):  # translation
        for aid in tree.level_ids[level]:
            a = tree.groups[aid]
            for bid in a.interaction:
                runtime.submit(Task(
                    "translation",
                    [(vec.hs[bid], READ), (vec.ho[aid], ADD)],
                    _gemv_body(ops.D[(aid, bid)], vec.s[bid], vec.o[aid]),
                ))
    for level in range(tree.l0 + 1, tree.L + 1):  # potential transfer, down
        for gid in tree.level_ids[level]:
            g = tree.groups[gid]
            runtime.submit(Task(
                "potential-transfer",
                [(vec.ho[g.parent], READ), (vec.ho[gid], ADD)],
                _gemv_body(ops.B[gid], vec.o[g.parent], vec.o[gid]),
            ))
    for a in tree.leaves():  # reception
        runtime.submit(Task(
            "reception",
            [(vec.ho[a.id], READ), (vec.hphi[a.id], ADD)],
            _gemv_body(ops.U[a.id], vec.o[a.id], vec.phi[a.start:a.stop]),
        ))


def mvp(tree: Tree, ops: OperatorSet, q: np.ndarray, runtime: Runtime,
        vec: StageVectors | None = None, near: bool = True,
        far: bool = True) -> np.ndarray:
    """Full task-parallel product; returns phi in the original point order."""
    if q.shape != (tree.n_points,):
        raise ValueError("q must have one charge per point")
    if vec is None:
        vec = make_stage_vectors(tree, ops.params.Q, runtime)
    vec.q[:] = q[tree.perm]
    vec.reset()
    if near:
        mvp_near_field(tree, ops, vec, runtime)
    if far:
        mvp_far_field(tree, ops, vec, runtime)
    runtime.barrier()
    return vec.phi[tree.inverse_perm()]


def mvp_serial(tree: Tree, ops: OperatorSet, q: np.ndarray, near: bool = True,
               far: bool = True) -> np.ndarray:
    """Immediate execution in submission order; no runtime involved."""
    if q.shape != (tree.n_points,):
        raise ValueError("q must have one charge per point")
    Q = ops.params.Q
    qt = q[tree.perm]
    phi = np.zeros(tree.n_points)
    s = np.zeros((len(tree.groups), Q))
    o = np.zeros((len(tree.groups), Q))
    if near:
        for a in tree.leaves():
            for bid in a.neighbors:
                b = tree.groups[bid]
                phi[a.start:a.stop] += ops.near[(a.id, bid)] @ qt[b.start:b.stop]
    if far:
        for b in tree.leaves():
            s[b.id] += ops.V[b.id] @ qt[b.start:b.stop]
        for level in range(tree.L, tree.l0, -1):
            for gid in tree.level_ids[level]:
                s[tree.groups[gid].parent] += ops.C[gid] @ s[gid]
        for level in range(tree.l0, tree.L + 1):
            for aid in tree.level_ids[level]:
                for bid in tree.groups[aid].interaction:
                    o[aid] += ops.D[(aid, bid)] @ s[bid]
        for level in range(tree.l0 + 1, tree.L + 1):
            for gid in tree.level_ids[level]:
                o[gid] += ops.B[gid] @ o[tree.groups[gid].parent]
        for a in tree.leaves():
            phi[a.start:a.stop] += ops.U[a.id] @ o[a.id]
    return phi[tree.inverse_perm()]


def task_counts(tree: Tree) -> dict[str, int]:
    """Number of tasks each stage will submit, from the tree's own lists."""
    n_leaves = len(tree.level_ids[tree.L])
    n_edges = sum(len(tree.level_ids[level])
                  for level in range(tree.l0 + 1, tree.L + 1))
    return {
        "near": sum(len(g.neighbors) for g in tree.leaves()),
        "radiation": n_leaves,
        "source-transfer": n_edges,
        "translation": sum(len(g.interaction) for g in tree.groups),
        "potential-transfer": n_edges,
        "reception": n_leaves,
    }
