"""Contrast rules: the minimal decision differences between two clusters.

The desired and current clusters form a two-class sample. Each numeric
decision column is cut into ranges by recursive entropy minimization with
the MDL stopping rule (a split must buy more information than it costs to
encode); symbolic columns get one range per observed token. A range that
matches a fraction x of the desired rows and y of the current rows scores
x^2/(x+y), so high coverage of the desired and low coverage of the current
both help. Rules are conjunctions across columns of disjunctions within a
column, found by scoring every non-empty subset of the top-ranked ranges.

Frequencies are per-class proportions (not raw counts) so the score is
comparable across clusters of different sizes. Missing cells never match
a range or a rule.

Rendered rule grammar (stable, machine-checkable):

    rule      = clause { " AND " clause }
    clause    = column " ∈ " spans | column " ∈ " symbols
    spans     = span { " ∪ " span }
    span      = "[" number ", " number ")"
    symbols   = "{" token { ", " token } "}"

Numbers use Python float repr; open ends render as -inf / inf.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cluster import ClusterNode
from .data import ColumnSpec, Dataset, EvaluationError, Role, Row, d2h

__all__ = [
    "Range",
    "Rule",
    "build_rules",
    "contrast_rules",
    "contrast_score",
    "discretize",
    "parse_rule",
    "pick_desired_current",
    "rank_ranges",
]

INF = math.inf


def contrast_score(x: float, y: float) -> float:
    """x^2/(x+y) over per-class match proportions; 0 when nothing desired
    matches. Equals 1 iff x=1 and y=0."""
    if x <= 0.0:
        return 0.0
    return x * x / (x + y)


@dataclass(frozen=True)
class Range:
    """One discretized attribute condition: a half-open numeric interval
    [lo, hi) or a symbol set, with its per-class match proportions."""

    column: str
    lo: float = -INF
    hi: float = INF
    symbols: "frozenset[str] | None" = None
    x_freq: float = 0.0
    y_freq: float = 0.0
    score: float = 0.0

    @property
    def is_numeric(self) -> bool:
        return self.symbols is None

    def span_key(self) -> tuple:
        if self.is_numeric:
            return (0, self.lo, self.hi)
        return (1, tuple(sorted(self.symbols)))

    def matches(self, row: Row, ds: Dataset) -> bool:
        v = row.cells[ds.column_index(self.column)]
        if v is None:
            return False
        if self.is_numeric:
            return self.lo <= v < self.hi
        return v in self.symbols

    def render_span(self) -> str:
        if self.is_numeric:
            return f"[{self.lo!r}, {self.hi!r})"
        return "{" + ", ".join(sorted(self.symbols)) + "}"


def _scored(column: str, lo: float, hi: float, symbols, desired_hits: int,
            current_hits: int, n_desired: int, n_current: int) -> Range:
    x = desired_hits / n_desired
    y = current_hits / n_current
    return Range(column, lo, hi, symbols, x, y, contrast_score(x, y))


def _entropy(c0: int, c1: int) -> float:
    n = c0 + c1
    if n == 0:
        return 0.0
    e = 0.0
    for c in (c0, c1):
        if c:
            p = c / n
            e -= p * math.log2(p)
    return e


def _mdl_accepts(n: int, e: float, e1: float, e2: float, n1: int, n2: int, gain: float) -> bool:
    """Fayyad-Irani stop: keep a cut only if its information gain beats the
    cost of encoding the cut."""
    k = 2 if e > 0 else 1
    k1 = 2 if e1 > 0 else 1
    k2 = 2 if e2 > 0 else 1
    delta = math.log2(3**k - 2) - (k * e - k1 * e1 - k2 * e2)
    return gain > (math.log2(n - 1) + delta) / n


def _best_cut(values: np.ndarray, labels: np.ndarray) -> "tuple[float, float, float, float, int, int] | None":
    """Best midpoint cut by information gain over a sorted two-class sample.
    Returns (cut, gain, left entropy, right entropy, n_left, n_right); ties
    go to the lowest cut. None when the values cannot be cut."""
    n = len(values)
    total1 = int(labels.sum())
    total0 = n - total1
    e_all = _entropy(total0, total1)
    best = None
    ones = np.cumsum(labels)
    for i in range(n - 1):
        if values[i] == values[i + 1]:
            continue
        n_left = i + 1
        left1 = int(ones[i])
        left0 = n_left - left1
        right1 = total1 - left1
        right0 = total0 - left0
        e1 = _entropy(left0, left1)
        e2 = _entropy(right0, right1)
        gain = e_all - (n_left / n) * e1 - ((n - n_left) / n) * e2
        if best is None or gain > best[1]:
            cut = (float(values[i]) + float(values[i + 1])) / 2.0
            best = (cut, gain, e1, e2, n_left, n - n_left)
    return best


def _fi_cuts(values: np.ndarray, labels: np.ndarray) -> list[float]:
    """All cuts accepted by recursive entropy splitting with the MDL stop."""
    order = np.argsort(values, kind="stable")
    values = values[order]
    labels = labels[order]

    cuts: list[float] = []

    def recurse(lo: int, hi: int) -> None:
        v = values[lo:hi]
        y = labels[lo:hi]
        n = hi - lo
        if n < 2:
            return
        found = _best_cut(v, y)
        if found is None:
            return
        cut, gain, e1, e2, n1, n2 = found
        e_all = _entropy(int((y == 0).sum()), int((y == 1).sum()))
        if not _mdl_accepts(n, e_all, e1, e2, n1, n2, gain):
            return
        cuts.append(cut)
        recurse(lo, lo + n1)
        recurse(lo + n1, hi)

    recurse(0, len(values))
    return sorted(cuts)


def discretize(ds: Dataset, col: ColumnSpec, desired: Sequence[Row], current: Sequence[Row]) -> list[Range]:
    """Cut one decision column into ranges against the desired/current
    two-class sample. Numeric ranges partition the whole real line (open
    end bins); an uncuttable column yields a single full-span range."""
    if not col.role.is_decision:
        raise ValueError(f"column {col.name!r} is not a decision column")
    j = ds.column_index(col.name)
    n_desired, n_current = len(desired), len(current)
    if n_desired < 1 or n_current < 1:
        raise ValueError("both clusters must be non-empty")

    if col.role is Role.SYMBOLIC:
        tokens = sorted(
            {r.cells[j] for r in desired if r.cells[j] is not None}
            | {r.cells[j] for r in current if r.cells[j] is not None}
        )
        out = []
        for t in tokens:
            dx = sum(1 for r in desired if r.cells[j] == t)
            cy = sum(1 for r in current if r.cells[j] == t)
            out.append(_scored(col.name, -INF, INF, frozenset([t]), dx, cy, n_desired, n_current))
        return out

    pairs = [(r.cells[j], 0) for r in desired if r.cells[j] is not None]
    pairs += [(r.cells[j], 1) for r in current if r.cells[j] is not None]
    if pairs:
        values = np.array([v for v, _ in pairs], dtype=float)
        labels = np.array([c for _, c in pairs], dtype=np.int64)
        cuts = _fi_cuts(values, labels)
    else:
        cuts = []

    edges = [-INF] + cuts + [INF]
    out = []
    for lo, hi in zip(edges, edges[1:]):
        dx = sum(1 for r in desired if r.cells[j] is not None and lo <= r.cells[j] < hi)
        cy = sum(1 for r in current if r.cells[j] is not None and lo <= r.cells[j] < hi)
        out.append(_scored(col.name, lo, hi, None, dx, cy, n_desired, n_current))
    return out


def rank_ranges(ranges: Sequence[Range]) -> list[Range]:
    """Drop ranges absent from the desired cluster, then sort best first:
    score desc, then rarer-in-current, then column, then span."""
    kept = [r for r in ranges if r.x_freq > 0]
    return sorted(kept, key=lambda r: (-r.score, r.y_freq, r.column, r.span_key()))


@dataclass
class Rule:
    """A conjunction across columns of range disjunctions within a column."""

    clauses: dict[str, tuple[Range, ...]]
    x_freq: float
    y_freq: float
    score: float

    @property
    def size(self) -> int:
        return sum(len(rs) for rs in self.clauses.values())

    def key(self) -> tuple:
        """Canonical identity for deterministic tie-breaking."""
        return tuple(
            (col, tuple(r.span_key() for r in rs))
            for col, rs in sorted(self.clauses.items())
        )

    def matches(self, row: Row, ds: Dataset) -> bool:
        return all(
            any(r.matches(row, ds) for r in rs) for rs in self.clauses.values()
        )

    def render(self) -> str:
        parts = []
        for col, rs in sorted(self.clauses.items()):
            if rs[0].is_numeric:
                spans = " ∪ ".join(r.render_span() for r in sorted(rs, key=Range.span_key))
            else:
                tokens = sorted(set().union(*(r.symbols for r in rs)))
                spans = "{" + ", ".join(tokens) + "}"
            parts.append(f"{col} ∈ {spans}")
        return " AND ".join(parts)


def build_rules(
    ds: Dataset,
    ranked: Sequence[Range],
    desired: Sequence[Row],
    current: Sequence[Row],
    top_n: int = 10,
) -> list[Rule]:
    """Score every non-empty subset of the top_n ranked ranges as a rule
    (same-column ranges OR, cross-column AND) and return all of them, best
    first; ties prefer smaller rules, then canonical clause order."""
    top = list(ranked[:top_n])
    if not top:
        return []

    def mask(rows: Sequence[Row], rng: Range) -> np.ndarray:
        return np.fromiter((rng.matches(r, ds) for r in rows), dtype=bool, count=len(rows))

    masks_d = [mask(desired, r) for r in top]
    masks_c = [mask(current, r) for r in top]

    rules: list[Rule] = []
    for bits in range(1, 2 ** len(top)):
        chosen = [i for i in range(len(top)) if bits >> i & 1]
        cols: dict[str, list[int]] = {}
        for i in chosen:
            cols.setdefault(top[i].column, []).append(i)
        md = np.ones(len(desired), dtype=bool)
        mc = np.ones(len(current), dtype=bool)
        clauses: dict[str, tuple[Range, ...]] = {}
        for col, idxs in cols.items():
            od = np.zeros(len(desired), dtype=bool)
            oc = np.zeros(len(current), dtype=bool)
            for i in idxs:
                od |= masks_d[i]
                oc |= masks_c[i]
            md &= od
            mc &= oc
            clauses[col] = tuple(sorted((top[i] for i in idxs), key=Range.span_key))
        x = float(md.mean()) if len(desired) else 0.0
        y = float(mc.mean()) if len(current) else 0.0
        rules.append(Rule(clauses, x, y, contrast_score(x, y)))

    rules.sort(key=lambda r: (-r.score, r.size, r.key()))
    return rules


def contrast_rules(
    ds: Dataset,
    desired: Sequence[Row],
    current: Sequence[Row],
    top_n: int = 10,
) -> list[Rule]:
    """End to end: discretize every decision column against the two
    clusters, rank the ranges, and search rule combinations. Empty when the
    clusters are indistinguishable on decisions."""
    ranges: list[Range] = []
    for col in ds.decision_columns:
        ranges.extend(discretize(ds, col, desired, current))
    ranked = rank_ranges(ranges)
    return build_rules(ds, ranked, desired, current, top_n)


def pick_desired_current(
    tree: ClusterNode,
    ds: Dataset,
    desired_id: int | None = None,
    current_id: int | None = None,
) -> tuple[ClusterNode, ClusterNode]:
    """Default policy: desired = leaf with lowest mean d2h, current = leaf
    with highest. Either side can be overridden by an explicit leaf id."""
    leaves = list(tree.leaves())
    if len(leaves) < 2:
        raise ValueError("tree has fewer than two leaves; nothing to contrast")

    def by_id(node_id: int) -> ClusterNode:
        node = tree.find(node_id)
        if node is None or not node.is_leaf:
            raise ValueError(f"node {node_id} is not a leaf of this tree")
        return node

    if desired_id is not None and current_id is not None:
        return by_id(desired_id), by_id(current_id)

    means = []
    for leaf in leaves:
        try:
            scores = [d2h(ds.row(i), ds) for i in leaf.row_ids]
        except EvaluationError as exc:
            raise EvaluationError(
                f"leaf {leaf.node_id} cannot be scored ({exc}); evaluate its rows "
                "or pass explicit leaf ids"
            ) from exc
        means.append(sum(scores) / len(scores))

    desired = by_id(desired_id) if desired_id is not None else (
        min(zip(leaves, means), key=lambda lm: (lm[1], lm[0].node_id))[0]
    )
    current = by_id(current_id) if current_id is not None else (
        max(zip(leaves, means), key=lambda lm: (lm[1], -lm[0].node_id))[0]
    )
    return desired, current


# -- rendered-rule grammar ---------------------------------------------------

_SPAN_RE = re.compile(r"^\[(?P<lo>[^,]+), (?P<hi>[^)]+)\)$")


def parse_rule(text: str) -> dict[str, list]:
    """Parse a rendered rule back into {column: [(lo, hi), ...] | [tokens]}.
    Raises ValueError when the text does not follow the grammar."""
    if not text:
        raise ValueError("empty rule text")
    out: dict[str, list] = {}
    for clause in text.split(" AND "):
        if " ∈ " not in clause:
            raise ValueError(f"clause {clause!r} is missing ' ∈ '")
        col, spans = clause.split(" ∈ ", 1)
        if not col:
            raise ValueError("empty column name")
        if spans.startswith("{") and spans.endswith("}"):
            tokens = spans[1:-1].split(", ")
            if not all(tokens):
                raise ValueError(f"bad symbol set {spans!r}")
            out[col] = tokens
            continue
        intervals = []
        for span in spans.split(" ∪ "):
            m = _SPAN_RE.match(span)
            if not m:
                raise ValueError(f"bad span {span!r}")
            intervals.append((float(m.group("lo")), float(m.group("hi"))))
        out[col] = intervals
    return out
