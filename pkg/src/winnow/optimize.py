"""Budget-capped search over the bi-cluster structure.

Two oracle flavors share one hard budget contract: an objective oracle
scores rows by d2h (cached, so a re-evaluated row is charged once), and a
preference oracle forwards a pairwise question to a callback (a human, a
surrogate, or a scripted answer file) at one charge per question. No call
ever exceeds the budget silently.

greedy_descend evaluates the two poles at each level and keeps the median
half on the winner's side, so a pool of N rows costs at most
2*ceil(log2(N)) evaluations. non_greedy first builds the whole tree for
free, spends evaluations pruning the largest, most self-similar subtrees
until about sqrt(N) rows survive, then finishes greedily.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .cluster import ClusterConfig, ClusterNode, cluster, split
from .data import Dataset, Row, d2h, dist_to_many

__all__ = [
    "BudgetExhausted",
    "ObjectiveOracle",
    "Oracle",
    "PreferenceOracle",
    "SearchResult",
    "compare",
    "d2h_chooser",
    "greedy_descend",
    "non_greedy",
    "prototypes",
    "random_search",
    "scripted_answers",
]


class BudgetExhausted(RuntimeError):
    """Raised when a call would push an oracle past its budget."""


class Oracle:
    """Bookkeeping shared by both oracle kinds: a hard call budget."""

    kind = "abstract"

    def __init__(self, budget: int):
        if budget < 0:
            raise ValueError("budget must be >= 0")
        self.budget = int(budget)
        self.calls_used = 0

    @property
    def remaining(self) -> int:
        return self.budget - self.calls_used

    def _charge(self, n: int = 1) -> None:
        if self.calls_used + n > self.budget:
            raise BudgetExhausted(
                f"budget {self.budget} exhausted ({self.calls_used} used, {n} more needed)"
            )
        self.calls_used += n


class ObjectiveOracle(Oracle):
    """Scores rows by d2h over the dataset's objective columns. Scoring the
    same row twice is served from the cache and charged once."""

    kind = "objective"

    def __init__(self, ds: Dataset, budget: int):
        super().__init__(budget)
        self.ds = ds
        self._cache: dict[int, float] = {}
        self._rows: dict[int, Row] = {}

    def score(self, row: Row) -> float:
        if row.id not in self._cache:
            self._charge(1)
            self._cache[row.id] = d2h(row, self.ds)
            self._rows[row.id] = row
        return self._cache[row.id]

    def cost(self, rows: Iterable[Row]) -> int:
        return sum(1 for r in rows if r.id not in self._cache)

    def best(self) -> "tuple[Row, float] | None":
        if not self._cache:
            return None
        best_id = min(self._cache, key=lambda i: (self._cache[i], i))
        return self._rows[best_id], self._cache[best_id]


class PreferenceOracle(Oracle):
    """Forwards each A-versus-B question to a callback returning "A" or "B";
    one charge per question."""

    kind = "preference"

    def __init__(self, choose: Callable[[Row, Row], str], budget: int):
        super().__init__(budget)
        self.choose = choose

    def ask(self, a: Row, b: Row) -> str:
        self._charge(1)
        answer = self.choose(a, b)
        if answer not in ("A", "B"):
            raise ValueError(f"preference callback returned {answer!r}, want 'A' or 'B'")
        return answer

    def cost(self, rows: Iterable[Row]) -> int:
        return 1


def scripted_answers(script: "str | Iterable[str]") -> Callable[[Row, Row], str]:
    """Turn a scripted answer file (one 'A' or 'B' per line, consumed in
    order) into a preference callback. Running past the script raises."""
    if isinstance(script, str):
        lines = script.splitlines()
    else:
        lines = list(script)
    answers = [ln.strip() for ln in lines if ln.strip()]
    state = {"next": 0}

    def choose(a: Row, b: Row) -> str:
        i = state["next"]
        if i >= len(answers):
            raise RuntimeError(f"scripted answers exhausted after {i} questions")
        state["next"] = i + 1
        return answers[i]

    return choose


def d2h_chooser(ds: Dataset) -> Callable[[Row, Row], str]:
    """A surrogate reviewer that answers pairwise questions from true d2h
    (ties prefer A). Useful for benchmarks and replayable tests."""

    def choose(a: Row, b: Row) -> str:
        return "A" if d2h(a, ds) <= d2h(b, ds) else "B"

    return choose


def compare(a: Row, b: Row, oracle: Oracle) -> str:
    """Decide the better of two rows: lower d2h for objective oracles (tie
    -> A), the callback's answer for preference oracles."""
    if isinstance(oracle, ObjectiveOracle):
        return "A" if oracle.score(a) <= oracle.score(b) else "B"
    if isinstance(oracle, PreferenceOracle):
        return oracle.ask(a, b)
    raise TypeError(f"unknown oracle {oracle!r}")


@dataclass
class SearchResult:
    best_row: Row | None
    best_leaf: list[int]                    # surviving pool at the end
    trace: list[tuple[int, int, str]]       # (A id, B id, winner) per level
    evals: int
    truncated: bool = False
    survivors: "list[int] | None" = None    # non_greedy: pool handed to the greedy phase


def _finish(oracle: Oracle, last_winner: Row | None) -> Row | None:
    if isinstance(oracle, ObjectiveOracle):
        found = oracle.best()
        return found[0] if found else None
    return last_winner


def greedy_descend(
    ds: Dataset,
    cfg: ClusterConfig | None = None,
    oracle: Oracle | None = None,
    stop_leaf: int = 4,
    rows: Sequence[Row] | None = None,
) -> SearchResult:
    """Descend by evaluated poles: at each level compare A and B, keep the
    median half on the winner's side. Stops at stop_leaf rows, on
    degenerate poles, or when the budget cannot pay for another level
    (then the result is flagged truncated, never an exception)."""
    if oracle is None:
        raise ValueError("greedy_descend needs an oracle")
    cfg = cfg or ClusterConfig()
    pool = list(rows) if rows is not None else list(ds.rows)
    rng = random.Random(cfg.seed)
    trace: list[tuple[int, int, str]] = []
    last_winner: Row | None = None
    truncated = False

    while len(pool) > stop_leaf:
        parts = split(pool, ds, cfg, rng)
        if parts is None:
            break
        west, east, poles, _ = parts
        if oracle.cost((poles.a, poles.b)) > oracle.remaining:
            truncated = True
            break
        winner = compare(poles.a, poles.b, oracle)
        winner_row = poles.a if winner == "A" else poles.b
        last_winner = winner_row
        trace.append((poles.a.id, poles.b.id, winner))
        west_ids = {r.id for r in west}
        pool = west if winner_row.id in west_ids else east

    return SearchResult(
        best_row=_finish(oracle, last_winner),
        best_leaf=[r.id for r in pool],
        trace=trace,
        evals=oracle.calls_used,
        truncated=truncated,
    )


def _homogeneity(row_ids: Sequence[int], ds: Dataset, top_cols: np.ndarray, global_std: np.ndarray) -> float:
    """Within-pool spread over the globally most variable numeric decision
    columns, relative to the global spread. Lower = more alike."""
    if top_cols.size == 0:
        return 0.0
    sel = np.asarray([ds._pos[i] for i in row_ids], dtype=np.intp)
    sub = ds._num[np.ix_(sel, top_cols)]
    stds = np.array(
        [0.0 if np.isnan(sub[:, k]).all() else np.nanstd(sub[:, k]) for k in range(sub.shape[1])]
    )
    g = global_std[top_cols]
    ratios = np.divide(stds, g, out=np.zeros_like(stds), where=g > 0)
    return float(ratios.mean())


@dataclass
class _Pool:
    """One live region during non-greedy pruning: its rows, the tree node
    whose poles and children can be reused (when one still applies), and
    whether it can be pruned further."""

    rows: list[Row]
    node: ClusterNode | None
    prunable: bool = True


def non_greedy(
    ds: Dataset,
    cfg: ClusterConfig | None = None,
    oracle: Oracle | None = None,
    stop_leaf: int = 4,
) -> SearchResult:
    """Build the whole tree without evaluations, then spend the budget
    pruning: repeatedly take the largest live region (ties: the most
    self-similar over the top-variance columns), evaluate its poles, drop
    its losing half. Pruning starts on the root's maximal proper subtrees
    and continues inside leaves with freshly picked poles once no internal
    subtree is live, until about sqrt(N) rows survive (or pruning must stop
    to afford the final phase); greedy_descend then finishes on the pool."""
    if oracle is None:
        raise ValueError("non_greedy needs an oracle")
    cfg = cfg or ClusterConfig()
    n = len(ds.rows)
    target = math.ceil(math.sqrt(n))
    root = cluster(ds, cfg)

    per_level = 2 if isinstance(oracle, ObjectiveOracle) else 1
    greedy_levels = max(0, math.ceil(math.log2(max(1, target / stop_leaf))))
    reserve = per_level * greedy_levels

    def pool_of(node: ClusterNode) -> _Pool:
        return _Pool([ds.row(i) for i in node.row_ids], node)

    # Start at the root's maximal proper subtrees so pruning can pick
    # different regions of the tree (the root itself would just replay the
    # greedy descent).
    if root.is_leaf:
        live = [pool_of(root)]
    else:
        live = [pool_of(root.west), pool_of(root.east)]

    global_std = np.array(
        [
            0.0 if np.isnan(ds._num[:, k]).all() else np.nanstd(ds._num[:, k])
            for k in range(ds._num.shape[1])
        ]
    )
    n_top = math.ceil(len(ds.decision_columns) / 2)
    top_cols = np.argsort(-global_std, kind="stable")[:n_top] if global_std.size else np.zeros(0, dtype=np.intp)
    prng = random.Random(cfg.seed)

    trace: list[tuple[int, int, str]] = []
    last_winner: Row | None = None
    while True:
        pool_size = sum(len(p.rows) for p in live)
        if pool_size <= target:
            break
        candidates = [
            (i, p) for i, p in enumerate(live) if p.prunable and len(p.rows) >= 2
        ]
        if not candidates:
            break
        idx, pick = min(
            candidates,
            key=lambda ip: (
                -len(ip[1].rows),
                _homogeneity([r.id for r in ip[1].rows], ds, top_cols, global_std),
                ip[0],
            ),
        )
        if pick.node is not None and not pick.node.is_leaf:
            poles = pick.node.poles
            west = [ds.row(i) for i in pick.node.west.row_ids]
            east = [ds.row(i) for i in pick.node.east.row_ids]
            children = (pick.node.west, pick.node.east)
        else:
            parts = split(pick.rows, ds, cfg, prng)
            if parts is None:  # duplicates: nothing left to tell apart
                pick.prunable = False
                continue
            west, east, poles, _ = parts
            children = (None, None)
        need = oracle.cost((poles.a, poles.b))
        if need > oracle.remaining or oracle.remaining - need < reserve:
            break
        winner = compare(poles.a, poles.b, oracle)
        winner_row = poles.a if winner == "A" else poles.b
        last_winner = winner_row
        trace.append((poles.a.id, poles.b.id, winner))
        west_ids = {r.id for r in west}
        if winner_row.id in west_ids:
            live[idx] = _Pool(west, children[0])
        else:
            live[idx] = _Pool(east, children[1])

    survivors = [r for p in live for r in p.rows]
    inner = greedy_descend(ds, cfg, oracle, stop_leaf=stop_leaf, rows=survivors)
    if isinstance(oracle, ObjectiveOracle):
        best = _finish(oracle, None)
    else:
        best = inner.best_row if inner.best_row is not None else last_winner
    return SearchResult(
        best_row=best,
        best_leaf=inner.best_leaf,
        trace=trace + inner.trace,
        evals=oracle.calls_used,
        truncated=inner.truncated,
        survivors=[r.id for r in survivors],
    )


def random_search(
    ds: Dataset, oracle: ObjectiveOracle, budget: int, seed: int = 0
) -> SearchResult:
    """Baseline: score `budget` distinct uniformly sampled rows, return the
    best. Capped by the pool and the oracle so it can never blow the budget."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rng = random.Random(seed)
    take = min(budget, len(ds.rows), oracle.remaining)
    picks = rng.sample(ds.rows, take)
    best_row: Row | None = None
    best_score = math.inf
    for row in picks:
        s = oracle.score(row)
        if s < best_score or (s == best_score and row.id < best_row.id):
            best_row, best_score = row, s
    return SearchResult(
        best_row=best_row,
        best_leaf=[r.id for r in picks],
        trace=[],
        evals=oracle.calls_used,
    )


def prototypes(tree: ClusterNode, ds: Dataset, p: float = 2.0) -> list[Row]:
    """One representative per leaf: the medoid (member minimizing the total
    distance to its leaf-mates), ties by lowest row id."""
    reps: list[Row] = []
    for leaf in tree.leaves():
        rows = [ds.row(i) for i in leaf.row_ids]
        if len(rows) == 1:
            reps.append(rows[0])
            continue
        totals = np.zeros(len(rows))
        for i, row in enumerate(rows):
            totals[i] = dist_to_many(row, rows, ds, p).sum()
        best = min(range(len(rows)), key=lambda i: (totals[i], rows[i].id))
        reps.append(rows[best])
    return reps
