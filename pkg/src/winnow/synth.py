"""Seeded synthetic benchmark tables.

Desk-scale stand-ins for a real sweep over thousands of candidate
configurations: many decision columns, one or two objective columns, and a
landscape interesting enough to separate a guided search from a random one.

* sphere: k uniform decisions in [0,1] and one minimized objective, the
  Euclidean distance to a hidden seeded optimum (single convex valley).
* tradeoff: two minimized objectives, f1 = v1 and f2 = 1 - sqrt(v1) plus a
  small perturbation from the remaining decisions, so no candidate wins on
  both and a Pareto front appears.
"""

from __future__ import annotations

import math
import random

from .data import ColumnSpec, Dataset, Goal, Role, Row

__all__ = ["gen_synthetic"]

FAMILIES = ("sphere", "tradeoff")


def gen_synthetic(
    family: str,
    n: int,
    k: int = 5,
    seed: int = 0,
    inject_optimum: bool = False,
) -> Dataset:
    """Generate a synthetic dataset; same arguments give identical bytes
    after to_csv. inject_optimum (sphere only) appends one row exactly at
    the hidden optimum, whose d2h is therefore 0."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}, want one of {FAMILIES}")
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    rng = random.Random(seed)
    decisions = [ColumnSpec(f"x{i + 1}", Role.NUMERIC) for i in range(k)]

    if family == "sphere":
        optimum = [rng.random() for _ in range(k)]
        columns = decisions + [ColumnSpec("cost-", Role.OBJECTIVE, Goal.MINIMIZE)]

        def make(i: int, vs: list[float]) -> Row:
            cost = math.sqrt(sum((v - o) ** 2 for v, o in zip(vs, optimum)))
            return Row(i, vs + [cost])

        rows = [make(i, [rng.random() for _ in range(k)]) for i in range(n)]
        if inject_optimum:
            rows.append(make(n, list(optimum)))
        return Dataset(columns, rows)

    columns = decisions + [
        ColumnSpec("f1-", Role.OBJECTIVE, Goal.MINIMIZE),
        ColumnSpec("f2-", Role.OBJECTIVE, Goal.MINIMIZE),
    ]
    rows = []
    for i in range(n):
        vs = [rng.random() for _ in range(k)]
        f1 = vs[0]
        perturb = 0.1 * (sum(vs[1:]) / (k - 1) - 0.5) if k > 1 else 0.0
        f2 = 1.0 - math.sqrt(vs[0]) + perturb
        rows.append(Row(i, vs + [f1, f2]))
    return Dataset(columns, rows)
