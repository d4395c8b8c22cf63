"""Sparse adaptive quadtree with neighbor and far-field interaction lists.

The tree covers a square root region whose side equals the longest
bounding-box dimension of the input points. Level l has 2**l boxes per
side; only nonempty boxes are materialized and all leaves live at the
same finest level L. The coarsest level l0 puts a fixed number of groups
(default 4) along the longest dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import BBox, bounding_box

MAX_LEVEL = 30


@dataclass(frozen=True)
class TreeParams:
    """P is the target average number of points per leaf group."""

    P: int = 50
    l0_groups_longest: int = 4

    def __post_init__(self):
        if self.P < 1:
            raise ValueError("P must be >= 1")
        k = self.l0_groups_longest
        if k < 2 or (k & (k - 1)) != 0:
            raise ValueError("l0_groups_longest must be a power of two >= 2")


@dataclass
class Group:
    """One active box of the spatial partition."""

    id: int
    level: int
    ix: int
    iy: int
    box: BBox
    parent: int | None = None
    children: list[int] = field(default_factory=list)
    start: int = 0  # range into the tree-ordered point array
    stop: int = 0
    neighbors: list[int] = field(default_factory=list)  # leaves only
    interaction: list[int] = field(default_factory=list)

    @property
    def n_points(self) -> int:
        return self.stop - self.start

    @property
    def center(self) -> tuple[float, float]:
        return (
            0.5 * (self.box.xmin + self.box.xmax),
            0.5 * (self.box.ymin + self.box.ymax),
        )

    @property
    def half_side(self) -> float:
        return 0.5 * (self.box.xmax - self.box.xmin)

    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class Tree:
    params: TreeParams
    l0: int
    L: int
    root_origin: tuple[float, float]
    root_side: float
    groups: list[Group]
    level_ids: dict[int, list[int]]  # level -> group ids
    perm: np.ndarray  # tree order -> original index
    points: np.ndarray  # tree-ordered copy of the input points

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def leaves(self) -> list[Group]:
        return [self.groups[i] for i in self.level_ids[self.L]]

    def inverse_perm(self) -> np.ndarray:
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.size)
        return inv


def _morton(ix: np.ndarray, iy: np.ndarray) -> np.ndarray:
    """Interleave the bits of two coordinate arrays (Z-order key)."""

    def spread(v):
        v = v.astype(np.uint64)
        v = (v | (v << 16)) & np.uint64(0x0000FFFF0000FFFF)
        v = (v | (v << 8)) & np.uint64(0x00FF00FF00FF00FF)
        v = (v | (v << 4)) & np.uint64(0x0F0F0F0F0F0F0F0F)
        v = (v | (v << 2)) & np.uint64(0x3333333333333333)
        v = (v | (v << 1)) & np.uint64(0x5555555555555555)
        return v

    return spread(ix) | (spread(iy) << np.uint64(1))


def _cell_coords(points, origin, side, level):
    """Integer box coordinates of each point at the given level.

    Boundary points land in the larger-index box (floor), except at the
    top edge of the root region where they are clamped back inside.
    """
    n_cells = 1 << level
    cell = side / n_cells
    ij = np.floor((points - origin) / cell).astype(np.int64)
    return np.clip(ij, 0, n_cells - 1)


def build_tree(points: np.ndarray, params: TreeParams) -> Tree:
    """Build the sparse quadtree and fill in neighbor/interaction lists."""
    points = np.ascontiguousarray(points, dtype=float)
    n = points.shape[0]
    if n < params.l0_groups_longest:
        raise ValueError("too few points for the coarsest level")
    if np.unique(points, axis=0).shape[0] != n:
        raise ValueError("points must be pairwise distinct")

    bb = bounding_box(points)
    side = bb.longest_side
    if side <= 0:
        raise ValueError("degenerate point set (zero extent)")
    origin = np.array([bb.xmin, bb.ymin])

    l0 = int(params.l0_groups_longest).bit_length() - 1

    # Subdivide while the average leaf occupancy stays >= P and the
    # subdivision still separates at least one group.
    L = l0
    count = np.unique(_morton(*_cell_coords(points, origin, side, l0).T)).size
    while L < MAX_LEVEL:
        nxt = np.unique(_morton(*_cell_coords(points, origin, side, L + 1).T)).size
        if nxt <= count or n / nxt < params.P:
            break
        L += 1
        count = nxt

    # Tree-order the points by Z-order at the leaf level, which keeps the
    # descendants of every group contiguous.
    leaf_ij = _cell_coords(points, origin, side, L)
    keys = _morton(leaf_ij[:, 0], leaf_ij[:, 1])
    perm = np.argsort(keys, kind="stable")
    sorted_keys = keys[perm]
    sorted_ij = leaf_ij[perm]
    tpoints = points[perm]

    groups: list[Group] = []
    level_ids: dict[int, list[int]] = {}

    def make_group(level, ix, iy, start, stop):
        h = side / (1 << level)
        box = BBox(
            origin[0] + ix * h,
            origin[1] + iy * h,
            origin[0] + (ix + 1) * h,
            origin[1] + (iy + 1) * h,
        )
        g = Group(id=len(groups), level=level, ix=int(ix), iy=int(iy), box=box,
                  start=start, stop=stop)
        groups.append(g)
        level_ids.setdefault(level, []).append(g.id)
        return g

    # Leaves from runs of equal Morton keys.
    starts = np.flatnonzero(np.r_[True, sorted_keys[1:] != sorted_keys[:-1]])
    stops = np.r_[starts[1:], n]
    cur = [
        make_group(L, sorted_ij[a, 0], sorted_ij[a, 1], int(a), int(b))
        for a, b in zip(starts, stops)
    ]

    # Ancestors level by level; children of one parent are consecutive in
    # Z-order, so parent ranges stay contiguous.
    for level in range(L - 1, l0 - 1, -1):
        nxt: list[Group] = []
        for child in cur:
            cx, cy = child.ix >> 1, child.iy >> 1
            if nxt and nxt[-1].ix == cx and nxt[-1].iy == cy:
                parent = nxt[-1]
                parent.stop = child.stop
            else:
                parent = make_group(level, cx, cy, child.start, child.stop)
                nxt.append(parent)
            child.parent = parent.id
            parent.children.append(child.id)
        cur = nxt

    tree = Tree(params=params, l0=l0, L=L, root_origin=(origin[0], origin[1]),
                root_side=side, groups=groups, level_ids=level_ids,
                perm=perm, points=tpoints)
    _fill_lists(tree)
    return tree


def _fill_lists(tree: Tree) -> None:
    """Populate leaf neighbor lists and per-level interaction lists."""
    coord_maps = {
        level: {(tree.groups[i].ix, tree.groups[i].iy): i for i in ids}
        for level, ids in tree.level_ids.items()
    }

    for gid in tree.level_ids[tree.L]:
        g = tree.groups[gid]
        cmap = coord_maps[tree.L]
        g.neighbors = sorted(
            cmap[(g.ix + dx, g.iy + dy)]
            for dx in (-1, 0, 1)
            for dy in (-1, 0, 1)
            if (g.ix + dx, g.iy + dy) in cmap
        )

    for level in range(tree.l0, tree.L + 1):
        cmap = coord_maps[level]
        for gid in tree.level_ids[level]:
            g = tree.groups[gid]
            if level == tree.l0:
                cand = tree.level_ids[level]
            else:
                # Children of the groups touching this group's parent.
                p = tree.groups[g.parent]
                pmap = coord_maps[level - 1]
                cand = []
                for dx in (-1, 0, 1):
                    for dy in (-1, 0, 1):
                        pn = pmap.get((p.ix + dx, p.iy + dy))
                        if pn is not None:
                            cand.extend(tree.groups[pn].children)
            g.interaction = sorted(
                b for b in cand
                if max(abs(tree.groups[b].ix - g.ix),
                       abs(tree.groups[b].iy - g.iy)) >= 2
            )


def neighbor_list(tree: Tree, g: Group) -> list[Group]:
    """Same-level groups touching a leaf's box, including the leaf itself."""
    if not g.is_leaf():
        raise ValueError("neighbor lists are defined for leaves only")
    return [tree.groups[i] for i in g.neighbors]


def interaction_list(tree: Tree, g: Group) -> list[Group]:
    """Far-field partners of g at its own level."""
    return [tree.groups[i] for i in g.interaction]


def tree_stats(tree: Tree) -> dict:
    """Occupancy and list-size statistics of a built tree."""
    counts = {level: len(ids) for level, ids in sorted(tree.level_ids.items())}
    n_parents = sum(counts[level] for level in range(tree.l0, tree.L))
    n_children = sum(counts[level] for level in range(tree.l0 + 1, tree.L + 1))
    leaves = tree.leaves()
    inter_sizes = [len(g.interaction) for g in tree.groups]
    return {
        "levels": list(range(tree.l0, tree.L + 1)),
        "groups_per_level": counts,
        "n_leaves": counts[tree.L],
        "n_transfer_edges": n_children,  # N_c
        "avg_children": (n_children / n_parents) if n_parents else 0.0,
        "avg_neighbors": float(np.mean([len(g.neighbors) for g in leaves])),
        "avg_interaction": float(np.mean(inter_sizes)),
        "avg_interaction_per_level": {
            level: float(np.mean([len(tree.groups[i].interaction)
                                  for i in ids]))
            for level, ids in sorted(tree.level_ids.items())
        },
        "avg_leaf_points": tree.n_points / counts[tree.L],
    }
