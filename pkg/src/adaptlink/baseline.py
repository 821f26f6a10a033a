"""Classical stepwise agglomerative baselines (single/complete/average/centroid).

One closest pair merges per step, n-1 binary merges total — the yardstick the
adaptive engine's level count is compared against.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .adaptive import DepthRecord, TreeNode, format_cutoff
from .core import (
    ClusteringError,
    NormalizedDataset,
    TooFewPoints,
    matrix_from_coords,
)


class LeafMismatch(ClusteringError):
    """Compared dendrograms cover different leaf sets."""


class LinkageMethod(str, enum.Enum):
    SINGLE = "single"
    COMPLETE = "complete"
    AVERAGE = "average"
    CENTROID = "centroid"


@dataclass(frozen=True)
class StepwiseDendrogram:
    """Stepwise result: binary tree (or forest under a stop threshold) + step trace."""

    labels: tuple[str, ...]
    roots: tuple[TreeNode, ...]
    trace: tuple[DepthRecord, ...]
    method: LinkageMethod
    meta: dict = field(default_factory=dict)

    @property
    def root(self) -> TreeNode | None:
        return self.roots[0] if len(self.roots) == 1 else None


def _lw_update(method: LinkageMethod, d_ai, d_bi, na: int, nb: int):
    if method is LinkageMethod.SINGLE:
        return np.minimum(d_ai, d_bi)
    if method is LinkageMethod.COMPLETE:
        return np.maximum(d_ai, d_bi)
    return (na * d_ai + nb * d_bi) / (na + nb)


def stepwise_cluster(
    nd: NormalizedDataset,
    method: LinkageMethod,
    stop_threshold: float | None = None,
) -> StepwiseDendrogram:
    """Merge the closest pair repeatedly; ties break on the clusters' smallest leaves.

    With ``stop_threshold`` the loop stops before any merge whose distance
    exceeds it, leaving a forest; by default it runs to a single root.
    """
    method = LinkageMethod(method)
    if nd.n < 2:
        raise TooFewPoints(f"stepwise clustering needs n >= 2, got {nd.n}")
    n = nd.n
    dist = np.array(matrix_from_coords(nd.coords)._square)
    np.fill_diagonal(dist, np.inf)
    nodes: list[TreeNode | None] = [
        TreeNode(leaves=frozenset({lab}), label=lab, depth=0) for lab in nd.labels
    ]
    sizes = [1] * n
    min_leaf = list(range(n))
    centroids = np.array(nd.coords) if method is LinkageMethod.CENTROID else None
    active = set(range(n))
    records: list[DepthRecord] = []
    step = 0
    while len(active) > 1:
        act = sorted(active)
        best: tuple | None = None
        for ai, a in enumerate(act):
            for b in act[ai + 1 :]:
                lo, hi = sorted((min_leaf[a], min_leaf[b]))
                key = (dist[a, b], lo, hi)
                if best is None or key < best[0:3]:
                    best = (*key, a, b)
        d, _, _, a, b = best
        if stop_threshold is not None and d > stop_threshold:
            break
        step += 1
        if min_leaf[b] < min_leaf[a]:
            a, b = b, a
        children = sorted((nodes[a], nodes[b]), key=lambda t: min(t.leaves))
        merged_leaves = nodes[a].leaves | nodes[b].leaves
        nodes[a] = TreeNode(
            leaves=merged_leaves,
            children=tuple(children),
            depth=step,
            cutoff=float(d),
        )
        nodes[b] = None
        records.append(
            DepthRecord(
                depth=step,
                cutoff=float(d),
                display=format_cutoff(d),
                groups=(frozenset(merged_leaves),),
            )
        )
        na, nb = sizes[a], sizes[b]
        sizes[a] = na + nb
        min_leaf[a] = min(min_leaf[a], min_leaf[b])
        active.remove(b)
        others = [i for i in sorted(active) if i != a]
        if method is LinkageMethod.CENTROID:
            centroids[a] = (na * centroids[a] + nb * centroids[b]) / (na + nb)
            for i in others:
                dist[a, i] = dist[i, a] = _kernels.sq_distance(
                    centroids[a], centroids[i]
                )
        elif others:
            idx = np.array(others)
            updated = _lw_update(method, dist[a, idx], dist[b, idx], na, nb)
            dist[a, idx] = updated
            dist[idx, a] = updated
        dist[b, :] = np.inf
        dist[:, b] = np.inf
    roots = tuple(nodes[i] for i in sorted(active, key=lambda i: min_leaf[i]))
    meta = {
        "method": method.value,
        "sd_mode": nd.stats.mode.value,
        "normalized": nd.normalized,
        "stop_threshold": stop_threshold,
        "columns": list(nd.column_names),
        "dataset_sha256": nd.source_hash,
    }
    return StepwiseDendrogram(
        labels=nd.labels, roots=roots, trace=tuple(records), method=method, meta=meta
    )


def _max_arity(node: TreeNode) -> int:
    if node.is_leaf:
        return 0
    return max(len(node.children), *(_max_arity(c) for c in node.children))


@dataclass(frozen=True)
class ComparisonReport:
    """Compactness comparison between an adaptive run and a stepwise run."""

    adaptive_levels: int
    stepwise_steps: int
    stepwise_method: str
    adaptive_max_arity: int
    stepwise_max_arity: int
    groups_per_level: tuple[int, ...]

    @property
    def adaptive_more_compact(self) -> bool:
        return self.adaptive_levels < self.stepwise_steps

    def __str__(self) -> str:
        lines = [
            f"adaptive: {self.adaptive_levels} levels, "
            f"{self.stepwise_method}-linkage: {self.stepwise_steps} steps",
            f"max merge arity: adaptive {self.adaptive_max_arity}, "
            f"{self.stepwise_method} {self.stepwise_max_arity}",
            "groups per adaptive level: "
            + (
                " ".join(str(c) for c in self.groups_per_level)
                if self.groups_per_level
                else "(none)"
            ),
        ]
        return "\n".join(lines)


def compare_compactness(adaptive, stepwise: StepwiseDendrogram) -> ComparisonReport:
    """Levels-vs-steps report; both runs must cover the same leaves."""
    if frozenset(adaptive.labels) != frozenset(stepwise.labels):
        raise LeafMismatch("dendrograms cover different leaf sets")
    stepwise_arity = max(
        (_max_arity(r) for r in stepwise.roots if not r.is_leaf), default=0
    )
    return ComparisonReport(
        adaptive_levels=len(adaptive.trace),
        stepwise_steps=len(stepwise.trace),
        stepwise_method=stepwise.method.value,
        adaptive_max_arity=_max_arity(adaptive.root),
        stepwise_max_arity=stepwise_arity,
        groups_per_level=tuple(len(rec.groups) for rec in adaptive.trace),
    )
