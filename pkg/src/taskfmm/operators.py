"""Equivalent-source operator construction.

Each group carries two circles of auxiliary sources centered at its box
center: an outgoing circle holding the group's equivalent sources and an
incoming circle holding fictitious sources that represent the field
arriving from well-separated groups. Operators are fitted by matching
potentials on oversampled check circles through a truncated-SVD
pseudoinverse:

  V (radiation)           leaf charges        -> outgoing sources
  C (source transfer)     child outgoing      -> parent outgoing
  D (translation)         source outgoing     -> target incoming
  B (potential transfer)  parent incoming     -> child incoming
  U (reception)           incoming sources    -> potentials at leaf points

All circles scale with the group half-side h, so the fitted matrices are
translation invariant and are cached per level (and per relative offset
for C, B and D).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_PINV_CUTOFF, circle_points, kernel_matrix, pinv
from .quadtree import Group, Tree

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class NesaParams:
    """Auxiliary geometry parameters; ratios multiply the group half-side."""

    Q: int = 10
    oversampling: int = 2
    rho_out_aux: float = 1.45
    rho_out_check: float = 2.5
    rho_in_check: float = 1.45
    rho_in_aux: float = 2.8
    pinv_cutoff: float = DEFAULT_PINV_CUTOFF

    def __post_init__(self):
        if self.Q < 3:
            raise ValueError("Q must be >= 3")
        if self.oversampling < 1:
            raise ValueError("oversampling must be >= 1")
        # The outgoing aux circle must enclose the box, the check circle
        # the aux circle, and the geometry must stay valid for the
        # closest same-level interaction pair (center distance 4h).
        if not SQRT2 < self.rho_out_aux < self.rho_out_check:
            raise ValueError("need sqrt(2) < rho_out_aux < rho_out_check")
        if not self.rho_in_check > SQRT2:
            raise ValueError("rho_in_check must exceed sqrt(2)")
        if not self.rho_in_aux > self.rho_in_check:
            raise ValueError("rho_in_aux must exceed rho_in_check")
        if not self.rho_out_check < 4.0 - self.rho_in_check:
            raise ValueError("rho_out_check too large for 4h separation")
        if not self.rho_out_aux + self.rho_in_check < 4.0:
            raise ValueError("rho_out_aux + rho_in_check must be < 4")

    @property
    def n_check(self) -> int:
        return self.oversampling * self.Q


@dataclass(frozen=True)
class GroupAux:
    """Auxiliary point sets of one group."""

    center: tuple[float, float]
    half_side: float
    out_aux: np.ndarray  # Q points
    out_check: np.ndarray  # oversampling * Q points
    in_aux: np.ndarray  # Q points
    in_check: np.ndarray  # oversampling * Q points


def build_group_aux(g: Group, params: NesaParams) -> GroupAux:
    return _aux_at(g.center, g.half_side, params)


def _aux_at(center, h: float, params: NesaParams) -> GroupAux:
    return GroupAux(
        center=(center[0], center[1]),
        half_side=h,
        out_aux=circle_points(center, params.rho_out_aux * h, params.Q),
        out_check=circle_points(center, params.rho_out_check * h, params.n_check),
        in_aux=circle_points(center, params.rho_in_aux * h, params.Q),
        in_check=circle_points(center, params.rho_in_check * h, params.n_check),
    )


def outgoing_fit(aux: GroupAux, params: NesaParams) -> np.ndarray:
    """pinv of the outgoing aux -> check map (shared by V and C fits)."""
    return pinv(kernel_matrix(aux.out_check, aux.out_aux), params.pinv_cutoff)


def incoming_fit(aux: GroupAux, params: NesaParams) -> np.ndarray:
    """pinv of the incoming aux -> check map (shared by D and B fits)."""
    return pinv(kernel_matrix(aux.in_check, aux.in_aux), params.pinv_cutoff)


def build_radiation(aux: GroupAux, points: np.ndarray, params: NesaParams,
                    fit: np.ndarray | None = None) -> np.ndarray:
    """V: fit outgoing equivalent sources to the leaf's actual charges."""
    if fit is None:
        fit = outgoing_fit(aux, params)
    return fit @ kernel_matrix(aux.out_check, points)


def build_source_transfer(parent_aux: GroupAux, child_aux: GroupAux,
                          params: NesaParams,
                          fit: np.ndarray | None = None) -> np.ndarray:
    """C: re-expand a child's outgoing sources on the parent's circle."""
    if fit is None:
        fit = outgoing_fit(parent_aux, params)
    return fit @ kernel_matrix(parent_aux.out_check, child_aux.out_aux)


def build_translation(alpha_aux: GroupAux, beta_aux: GroupAux,
                      params: NesaParams,
                      fit: np.ndarray | None = None) -> np.ndarray:
    """D: represent a far group's outgoing field as incoming sources."""
    dist = math.hypot(alpha_aux.center[0] - beta_aux.center[0],
                      alpha_aux.center[1] - beta_aux.center[1])
    min_dist = (params.rho_out_aux + params.rho_in_check) * alpha_aux.half_side
    if dist <= min_dist * (1.0 + 1e-12):
        raise ValueError("groups not well separated for translation")
    if fit is None:
        fit = incoming_fit(alpha_aux, params)
    return fit @ kernel_matrix(alpha_aux.in_check, beta_aux.out_aux)


def build_potential_transfer(child_aux: GroupAux, parent_aux: GroupAux,
                             params: NesaParams,
                             fit: np.ndarray | None = None) -> np.ndarray:
    """B: restrict a parent's incoming field to one of its children."""
    if fit is None:
        fit = incoming_fit(child_aux, params)
    return fit @ kernel_matrix(child_aux.in_check, parent_aux.in_aux)


def build_reception(aux: GroupAux, points: np.ndarray) -> np.ndarray:
    """U: evaluate the incoming fictitious sources at the actual points."""
    return kernel_matrix(points, aux.in_aux)


def build_near_block(points_a: np.ndarray, points_b: np.ndarray,
                     same: bool) -> np.ndarray:
    """Dense kernel block between two touching leaves (zero diag if same)."""
    return kernel_matrix(points_a, points_b, same_set=same)


@dataclass
class OperatorSet:
    """All operators of one tree, keyed by group id / id pair."""

    params: NesaParams
    V: dict[int, np.ndarray] = field(default_factory=dict)
    U: dict[int, np.ndarray] = field(default_factory=dict)
    C: dict[int, np.ndarray] = field(default_factory=dict)  # child id -> C
    B: dict[int, np.ndarray] = field(default_factory=dict)  # child id -> B
    D: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    near: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)

    def entry_count(self) -> int:
        total = 0
        for table in (self.V, self.U, self.C, self.B, self.D, self.near):
            total += sum(m.size for m in table.values())
        return total


def build_all(tree: Tree, params: NesaParams) -> OperatorSet:
    """Build the complete operator set for a tree.

    Translation invariance of the kernel lets every level share one
    outgoing/incoming fit, four C/B matrices (one per child quadrant) and
    one D matrix per integer offset, so the build cost is linear in the
    number of groups plus the number of distinct offsets.
    """
    ops = OperatorSet(params=params)
    side = tree.root_side

    ref_aux = {}
    out_fits = {}
    in_fits = {}
    for level in range(tree.l0, tree.L + 1):
        h = side / (1 << (level + 1))
        ref_aux[level] = _aux_at((0.0, 0.0), h, params)
        out_fits[level] = outgoing_fit(ref_aux[level], params)
        in_fits[level] = incoming_fit(ref_aux[level], params)

    # Leaf radiation/reception use the leaf's true center.
    for g in tree.leaves():
        aux = build_group_aux(g, params)
        pts = tree.points[g.start:g.stop]
        ops.V[g.id] = build_radiation(aux, pts, params, fit=out_fits[g.level])
        ops.U[g.id] = build_reception(aux, pts)

    # Transfer operators: one per (level, child quadrant).
    c_cache: dict[tuple[int, int, int], np.ndarray] = {}
    b_cache: dict[tuple[int, int, int], np.ndarray] = {}
    for level in range(tree.l0 + 1, tree.L + 1):
        h = side / (1 << (level + 1))
        for qx in (0, 1):
            for qy in (0, 1):
                # Child center relative to its parent's center.
                off = ((2 * qx - 1) * h, (2 * qy - 1) * h)
                child = _aux_at(off, h, params)
                parent = _aux_at((0.0, 0.0), 2 * h, params)
                c_cache[(level, qx, qy)] = build_source_transfer(
                    parent, child, params, fit=out_fits[level - 1])
                b_cache[(level, qx, qy)] = build_potential_transfer(
                    child, parent, params, fit=in_fits[level])
    for g in tree.groups:
        if g.parent is not None:
            key = (g.level, g.ix & 1, g.iy & 1)
            ops.C[g.id] = c_cache[key]
            ops.B[g.id] = b_cache[key]

    # Translation operators: one per (level, integer center offset).
    d_cache: dict[tuple[int, int, int], np.ndarray] = {}
    for g in tree.groups:
        for bid in g.interaction:
            b = tree.groups[bid]
            key = (g.level, b.ix - g.ix, b.iy - g.iy)
            D = d_cache.get(key)
            if D is None:
                h = side / (1 << (g.level + 1))
                alpha = ref_aux[g.level]
                beta = _aux_at((2 * h * (b.ix - g.ix), 2 * h * (b.iy - g.iy)),
                               h, params)
                D = build_translation(alpha, beta, params, fit=in_fits[g.level])
                d_cache[key] = D
            ops.D[(g.id, bid)] = D

    # Near-field dense blocks; the transposed partner is shared.
    for g in tree.leaves():
        for nid in g.neighbors:
            if nid < g.id:
                continue
            b = tree.groups[nid]
            block = build_near_block(tree.points[g.start:g.stop],
                                     tree.points[b.start:b.stop],
                                     same=(g.id == nid))
            ops.near[(g.id, nid)] = block
            if nid != g.id:
                ops.near[(nid, g.id)] = block.T
    return ops
