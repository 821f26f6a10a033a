"""Adaptive mean-linkage engine.

Each iteration computes a minimax cut-off distance (the largest
nearest-neighbor distance in the current point set), builds per-point
neighborhoods under that cut-off, finds all maximal *extremely close* sets
(groups whose members share identical leading sub-neighborhoods), and merges
every group simultaneously into a pseudo-point whose coordinates are the
arithmetic mean of its members' coordinates. The loop repeats until a single
pseudo-point remains, so several points can join a cluster in one step and
the full tree typically needs far fewer levels than one-merge-at-a-time
agglomeration.

Two engine options control the working coordinate frame (see README for the
rationale and the reference tabulation they reproduce):

* ``restandardize`` (default on): re-z-score the active coordinates at the
  start of every iteration, so the shrinking point set keeps zero-mean,
  unit-s.d. columns;
* ``working_decimals`` (default 6): round each freshly standardized frame to
  a fixed decimal grid, which resolves equal-distance ties identically on
  every platform (equal-step descriptor series otherwise tie at the last
  bit of the mantissa).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_DOWN, Decimal

import numpy as np

from . import _kernels
from .core import (
    ClusteringError,
    DistanceMatrix,
    NormalizedDataset,
    SdMode,
    TooFewPoints,
    _readonly,
    matrix_from_coords,
)


class OutOfRange(ClusteringError):
    """A sub-neighborhood size is outside [1, len(neighborhood)]."""


class StaleIndex(ClusteringError):
    """A merge referenced a point that is not active (or was already consumed)."""


def format_cutoff(x: float) -> str:
    """Two-decimal display of a cut-off, truncated toward zero (not rounded)."""
    return str(Decimal(repr(float(x))).quantize(Decimal("0.01"), rounding=ROUND_DOWN))


@dataclass(frozen=True)
class EngineConfig:
    """Options for the adaptive engine loop."""

    restandardize: bool = True
    working_decimals: int | None = 6
    sd_mode: SdMode | None = None  # None: inherit the dataset's mode


@dataclass(frozen=True)
class Neighborhood:
    """All points within ``cutoff`` of ``center``, nearest first."""

    center: int
    members: tuple[int, ...]
    distances: tuple[float, ...]
    cutoff: float


@dataclass(frozen=True)
class MergeGroup:
    """An extremely close set: every member's leading sub-neighborhood equals it."""

    members: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(self.members)))
        if len(self.members) < 2:
            raise ValueError("merge groups have at least two members")
        if len(set(self.members)) != len(self.members):
            raise ValueError("merge group members must be distinct")


@dataclass(frozen=True)
class PseudoPoint:
    """An active point: an original leaf or the mean of previously merged points."""

    id: int
    coords: np.ndarray
    leaves: frozenset[int]
    formed_at_depth: int

    def __post_init__(self):
        object.__setattr__(self, "coords", _readonly(self.coords).ravel())
        object.__setattr__(self, "leaves", frozenset(self.leaves))
        if not self.leaves:
            raise ValueError("a pseudo-point covers at least one leaf")


@dataclass(frozen=True)
class ClusterState:
    """Active points and their distance matrix at one depth of the loop."""

    depth: int
    points: tuple[PseudoPoint, ...]
    matrix: DistanceMatrix | None
    labels: tuple[str, ...]
    config: EngineConfig
    sd_mode: SdMode


@dataclass(frozen=True)
class DepthRecord:
    """One level of the trace: the cut-off used and the groups it merged."""

    depth: int
    cutoff: float
    display: str
    groups: tuple[frozenset[str], ...]


@dataclass(frozen=True)
class TreeNode:
    """Dendrogram node; leaves carry a label, merges carry depth and cut-off."""

    leaves: frozenset[str]
    children: tuple["TreeNode", ...] = ()
    label: str | None = None
    depth: int = 0
    cutoff: float | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class Dendrogram:
    """Clustering result: the tree, the per-depth trace, and run metadata."""

    labels: tuple[str, ...]
    root: TreeNode
    trace: tuple[DepthRecord, ...]
    meta: dict = field(default_factory=dict)


def cutoff_distance(m: DistanceMatrix) -> float:
    """Max over points of the distance to their nearest other point."""
    if m.n < 2:
        raise TooFewPoints(f"cut-off needs n >= 2, got {m.n}")
    return _kernels.cutoff_from_condensed(m.entries, m.n)


def neighborhood(m: DistanceMatrix, i: int, d_u: float) -> Neighborhood:
    """Ordered neighborhood of point i under cut-off d_u (center first).

    Members are every j with d(i, j) <= d_u, sorted by (distance, index)
    ascending; the index component makes tied distances (e.g. duplicate rows)
    resolve deterministically.
    """
    if not 0 <= i < m.n:
        raise OutOfRange(f"center index {i} outside [0, {m.n})")
    row = m.row(i)
    others = sorted(
        (j for j in range(m.n) if j != i and row[j] <= d_u),
        key=lambda j: (row[j], j),
    )
    return Neighborhood(
        center=i,
        members=(i, *others),
        distances=(0.0, *(float(row[j]) for j in others)),
        cutoff=float(d_u),
    )


def sub_neighborhood(nb: Neighborhood, v: int) -> tuple[int, ...]:
    """First v members of a neighborhood."""
    if not 1 <= v <= len(nb.members):
        raise OutOfRange(f"v={v} outside [1, {len(nb.members)}]")
    return nb.members[:v]


def extremely_close_sets(neighborhoods: list[Neighborhood]) -> list[MergeGroup]:
    """All maximal extremely close sets, pairwise disjoint, sorted by smallest member.

    A set S of size v qualifies when, for every member i, the first v entries
    of i's neighborhood equal S as a set. Candidates are exactly the prefixes
    of each neighborhood, so enumerating prefixes of length 2..|members| per
    point and keeping the set-maximal survivors finds them all.
    """
    members_of = {nb.center: nb.members for nb in neighborhoods}
    candidates: set[frozenset[int]] = set()
    for nb in neighborhoods:
        for v in range(2, len(nb.members) + 1):
            s = frozenset(nb.members[:v])
            if s in candidates:
                continue
            if all(frozenset(members_of[c][:v]) == s for c in s):
                candidates.add(s)
    maximal = [s for s in candidates if not any(s < t for t in candidates)]
    maximal.sort(key=min)
    seen: set[int] = set()
    for s in maximal:
        if seen & s:
            raise RuntimeError("internal invariant violated: overlapping maximal sets")
        seen |= s
    return [MergeGroup(members=tuple(sorted(s))) for s in maximal]


def merge_group(state: ClusterState, g: MergeGroup, new_depth: int) -> PseudoPoint:
    """Merge a group into one pseudo-point: coords = mean of member coords.

    The mean is taken over the *member* coordinates in the state's current
    frame — merging a pseudo-point with a singleton weights them equally,
    regardless of how many leaves each covers.
    """
    n_active = len(state.points)
    if len(set(g.members)) != len(g.members) or any(
        not 0 <= k < n_active for k in g.members
    ):
        raise StaleIndex(
            f"group {g.members} does not reference distinct active points "
            f"(n={n_active})"
        )
    pts = [state.points[k] for k in sorted(g.members)]
    coords = np.mean(np.stack([p.coords for p in pts]), axis=0)
    return PseudoPoint(
        id=min(p.id for p in pts),
        coords=coords,
        leaves=frozenset().union(*(p.leaves for p in pts)),
        formed_at_depth=new_depth,
    )


def _standardize_working(coords: np.ndarray, mode: SdMode) -> np.ndarray:
    """Z-score a working frame; columns that collapsed to a constant become 0."""
    out = np.empty_like(coords)
    ddof = 1 if mode is SdMode.SAMPLE else 0
    for k in range(coords.shape[1]):
        col = coords[:, k]
        if (col == col[0]).all():
            out[:, k] = 0.0
        else:
            out[:, k] = (col - col.mean()) / col.std(ddof=ddof)
    return out


def _next_frame(coords: np.ndarray, config: EngineConfig, mode: SdMode) -> np.ndarray:
    if not config.restandardize or coords.shape[0] < 2:
        return coords
    w = _standardize_working(coords, mode)
    if config.working_decimals is not None:
        w = np.round(w, config.working_decimals)
    return w


def _apply_groups(
    state: ClusterState, groups: list[MergeGroup], new_depth: int
) -> tuple[tuple[PseudoPoint, ...], list[tuple[int, ...]]]:
    """Replace each group with its pseudo-point at the smallest member's slot."""
    consumed: set[int] = set()
    owner_at: dict[int, MergeGroup] = {}
    for g in groups:
        for k in g.members:
            if k in consumed:
                raise StaleIndex(f"point {k} consumed by two groups at depth {new_depth}")
            consumed.add(k)
        owner_at[min(g.members)] = g
    new_points: list[PseudoPoint] = []
    index_groups: list[tuple[int, ...]] = []
    for idx, pt in enumerate(state.points):
        if idx in owner_at:
            g = owner_at[idx]
            new_points.append(merge_group(state, g, new_depth))
            index_groups.append(g.members)
        elif idx not in consumed:
            new_points.append(pt)
    return tuple(new_points), index_groups


def _step(
    state: ClusterState,
) -> tuple[ClusterState, DepthRecord, list[tuple[int, ...]]]:
    if state.matrix is None or len(state.points) < 2:
        raise TooFewPoints("cluster step needs at least two active points")
    d_u = cutoff_distance(state.matrix)
    nbs = [neighborhood(state.matrix, i, d_u) for i in range(len(state.points))]
    groups = extremely_close_sets(nbs)
    if not groups:
        raise RuntimeError("internal invariant violated: no extremely close set")
    new_depth = state.depth + 1
    merged_points, index_groups = _apply_groups(state, groups, new_depth)
    group_leafsets = [
        frozenset().union(*(state.points[k].leaves for k in g)) for g in index_groups
    ]
    record = DepthRecord(
        depth=new_depth,
        cutoff=float(d_u),
        display=format_cutoff(d_u),
        groups=tuple(
            frozenset(state.labels[i] for i in ls) for ls in group_leafsets
        ),
    )
    if len(merged_points) > 1:
        frame = _next_frame(
            np.stack([p.coords for p in merged_points]), state.config, state.sd_mode
        )
        points = tuple(
            PseudoPoint(p.id, frame[k], p.leaves, p.formed_at_depth)
            for k, p in enumerate(merged_points)
        )
        matrix = matrix_from_coords(frame)
    else:
        points, matrix = merged_points, None
    next_state = ClusterState(
        depth=new_depth,
        points=points,
        matrix=matrix,
        labels=state.labels,
        config=state.config,
        sd_mode=state.sd_mode,
    )
    return next_state, record, index_groups


def cluster_step(state: ClusterState) -> tuple[ClusterState, DepthRecord]:
    """One iteration: cut-off, neighborhoods, maximal groups, simultaneous merge."""
    next_state, record, _ = _step(state)
    return next_state, record


def initial_state(
    nd: NormalizedDataset, config: EngineConfig | None = None
) -> ClusterState:
    """Depth-0 state over the dataset's coordinates (grid-rounded per config)."""
    config = config or EngineConfig()
    sd_mode = config.sd_mode or nd.stats.mode
    coords = np.asarray(nd.coords, dtype=np.float64)
    if config.working_decimals is not None:
        coords = np.round(coords, config.working_decimals)
    points = tuple(
        PseudoPoint(id=i, coords=coords[i], leaves=frozenset({i}), formed_at_depth=0)
        for i in range(nd.n)
    )
    matrix = matrix_from_coords(coords) if nd.n >= 2 else None
    return ClusterState(
        depth=0,
        points=points,
        matrix=matrix,
        labels=nd.labels,
        config=config,
        sd_mode=sd_mode,
    )


def build_dendrogram(
    nd: NormalizedDataset, config: EngineConfig | None = None
) -> Dendrogram:
    """Run the adaptive loop to a single root and record every depth.

    A single-point dataset yields a leaf-only tree with an empty trace. The
    loop always terminates: every iteration merges at least one group, so at
    most n-1 iterations occur.
    """
    config = config or EngineConfig()
    state = initial_state(nd, config)
    nodes = [
        TreeNode(leaves=frozenset({lab}), label=lab, depth=0) for lab in nd.labels
    ]
    records: list[DepthRecord] = []
    while len(state.points) > 1:
        state, record, index_groups = _step(state)
        records.append(record)
        owner_at = {g[0]: g for g in index_groups}
        consumed = {k for g in index_groups for k in g}
        new_nodes: list[TreeNode] = []
        for idx, node in enumerate(nodes):
            if idx in owner_at:
                children = tuple(nodes[k] for k in owner_at[idx])
                new_nodes.append(
                    TreeNode(
                        leaves=frozenset().union(*(c.leaves for c in children)),
                        children=children,
                        depth=record.depth,
                        cutoff=record.cutoff,
                    )
                )
            elif idx not in consumed:
                new_nodes.append(node)
        nodes = new_nodes
    meta = {
        "method": "adaptive",
        "sd_mode": state.sd_mode.value,
        "normalized": nd.normalized,
        "restandardize": config.restandardize,
        "working_decimals": config.working_decimals,
        "columns": list(nd.column_names),
        "dataset_sha256": nd.source_hash,
    }
    return Dendrogram(
        labels=nd.labels, root=nodes[0], trace=tuple(records), meta=meta
    )
