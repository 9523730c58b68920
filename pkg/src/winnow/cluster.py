"""Recursive bi-clustering.

Each node picks two mutually distant rows (poles A and B: a random row's
furthest neighbor, then that neighbor's furthest neighbor), projects every
member onto the pole axis with the cosine rule

    x = (a^2 + c^2 - b^2) / (2c),   a, b, c = dist(X,A), dist(X,B), dist(A,B)

and splits at the median projection. Recursion stops at min_leaf rows
(default: ceil(sqrt(N)) of the root) or when all rows are duplicates.
Everything is seeded and deterministic; no objective column is ever read.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .data import Dataset, Row, dist, dist_to_many

__all__ = [
    "ClusterConfig",
    "ClusterNode",
    "Poles",
    "cluster",
    "leaf_sizes",
    "pick_poles",
    "project",
    "project_many",
    "split",
    "tree_to_text",
]


@dataclass(slots=True)
class Poles:
    """The two distant rows spanning a node's projection axis."""

    a: Row
    b: Row
    c: float  # dist(a, b)


@dataclass
class ClusterConfig:
    min_leaf: int | None = None     # None: ceil(sqrt(N)) of the root
    pole_sample: int | None = None  # None: scan every row for the furthest neighbor
    seed: int = 0
    p_dist: float = 2.0

    def __post_init__(self) -> None:
        if self.min_leaf is not None and self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.pole_sample is not None and self.pole_sample < 2:
            raise ValueError("pole_sample must be >= 2")


@dataclass
class ClusterNode:
    node_id: int
    depth: int
    row_ids: list[int]
    poles: Poles | None = None
    split_x: float | None = None
    west: "ClusterNode | None" = None
    east: "ClusterNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.west is None

    def nodes(self) -> Iterator["ClusterNode"]:
        yield self
        if not self.is_leaf:
            yield from self.west.nodes()
            yield from self.east.nodes()

    def leaves(self) -> Iterator["ClusterNode"]:
        for node in self.nodes():
            if node.is_leaf:
                yield node

    def find(self, node_id: int) -> "ClusterNode | None":
        for node in self.nodes():
            if node.node_id == node_id:
                return node
        return None


def _furthest(src: Row, candidates: Sequence[Row], ds: Dataset, p: float) -> Row:
    """The candidate furthest from src; ties broken by lowest row id."""
    d = dist_to_many(src, candidates, ds, p)
    top = d.max()
    return min((r for r, di in zip(candidates, d) if di == top), key=lambda r: r.id)


def pick_poles(
    rows: Sequence[Row], ds: Dataset, cfg: ClusterConfig, rng: random.Random
) -> Poles | None:
    """Pick poles for one node; None when all rows coincide (degenerate)."""
    if len(rows) < 2:
        raise ValueError("need at least two rows to pick poles")
    r0 = rows[rng.randrange(len(rows))]

    def candidates(excluded: Row) -> list[Row]:
        pool = [r for r in rows if r.id != excluded.id]
        if cfg.pole_sample is not None and cfg.pole_sample < len(pool):
            pool = rng.sample(pool, cfg.pole_sample)
        return pool

    a = _furthest(r0, candidates(r0), ds, cfg.p_dist)
    b = _furthest(a, candidates(a), ds, cfg.p_dist)
    c = dist(a, b, ds, cfg.p_dist)
    if c == 0.0:
        return None
    return Poles(a, b, c)


def project(row: Row, poles: Poles, ds: Dataset, p: float = 2.0) -> float:
    a = dist(row, poles.a, ds, p)
    b = dist(row, poles.b, ds, p)
    c = poles.c
    return (a * a + c * c - b * b) / (2.0 * c)


def project_many(rows: Sequence[Row], poles: Poles, ds: Dataset, p: float = 2.0) -> np.ndarray:
    a = dist_to_many(poles.a, rows, ds, p)
    b = dist_to_many(poles.b, rows, ds, p)
    c = poles.c
    return (a * a + c * c - b * b) / (2.0 * c)


def split(
    rows: Sequence[Row], ds: Dataset, cfg: ClusterConfig, rng: random.Random
) -> "tuple[list[Row], list[Row], Poles, float] | None":
    """Median split: west gets the lower ceil(n/2) projections, ties by
    (x, row id). None when the poles are degenerate."""
    poles = pick_poles(rows, ds, cfg, rng)
    if poles is None:
        return None
    xs = project_many(rows, poles, ds, cfg.p_dist)
    order = sorted(range(len(rows)), key=lambda i: (xs[i], rows[i].id))
    cut = math.ceil(len(rows) / 2)
    west = [rows[i] for i in order[:cut]]
    east = [rows[i] for i in order[cut:]]
    split_x = float(xs[order[cut - 1]])
    return west, east, poles, split_x


def cluster(
    ds: Dataset, cfg: ClusterConfig | None = None, rows: Sequence[Row] | None = None
) -> ClusterNode:
    """Build the bi-cluster tree over all rows (or a subset of them).
    Uses only decision columns."""
    cfg = cfg or ClusterConfig()
    rows = list(rows) if rows is not None else list(ds.rows)
    if not rows:
        raise ValueError("cannot cluster an empty dataset")
    min_leaf = cfg.min_leaf if cfg.min_leaf is not None else math.ceil(math.sqrt(len(rows)))
    rng = random.Random(cfg.seed)
    counter = itertools.count()

    def build(rows: list[Row], depth: int) -> ClusterNode:
        node = ClusterNode(next(counter), depth, [r.id for r in rows])
        if len(rows) <= min_leaf:
            return node
        parts = split(rows, ds, cfg, rng)
        if parts is None:  # all duplicates: leaf, common in option grids
            return node
        west, east, node.poles, node.split_x = parts
        node.west = build(west, depth + 1)
        node.east = build(east, depth + 1)
        return node

    return build(rows, 0)


def leaf_sizes(root: ClusterNode) -> list[int]:
    return [len(leaf.row_ids) for leaf in root.leaves()]


def tree_to_text(root: ClusterNode) -> str:
    """One node per line, comma separated:
    depth,nodeId,leaf,poleAId,poleBId,c,split_x,rowId,rowId,...
    Leaves carry the placeholders -1,-1,0.0,0.0.
    """
    lines = []
    for node in root.nodes():
        if node.poles is None:
            a_id, b_id, c, sx = -1, -1, 0.0, 0.0
        else:
            a_id, b_id = node.poles.a.id, node.poles.b.id
            c, sx = node.poles.c, node.split_x
        head = f"{node.depth},{node.node_id},{int(node.is_leaf)},{a_id},{b_id},{c!r},{sx!r}"
        lines.append(head + "," + ",".join(str(i) for i in node.row_ids))
    return "\n".join(lines) + "\n"
