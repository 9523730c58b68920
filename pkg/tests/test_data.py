"""Data model: CSV conventions, normalization, distances, d2h."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from winnow.data import (
    ColumnSpec,
    ConfigError,
    Dataset,
    EvaluationError,
    Goal,
    IngestionError,
    Role,
    Row,
    d2h,
    dist,
    dist_to_many,
    norm,
    parse_csv,
    to_csv,
)


def numeric_ds(points, lo_hi=None):
    """One numeric decision column from a list of values."""
    cols = [ColumnSpec("x", Role.NUMERIC)]
    rows = [Row(i, [float(v)]) for i, v in enumerate(points)]
    return Dataset(cols, rows)


class TestParseCsv:
    def test_header_markers(self):
        ds = parse_csv("x1,x2,cost-,acc+\n1,2,3,4\n5,6,7,8\n9,10,11,12\n")
        assert [c.role for c in ds.columns] == [
            Role.NUMERIC, Role.NUMERIC, Role.OBJECTIVE, Role.OBJECTIVE,
        ]
        assert ds.columns[2].goal is Goal.MINIMIZE
        assert ds.columns[3].goal is Goal.MAXIMIZE
        assert len(ds.rows) == 3

    def test_ignored_prefix(self):
        ds = parse_csv("?id,x1,y+\na,1,2\nb,3,4\n")
        assert ds.columns[0].role is Role.IGNORED
        # the ignored column plays no role in dist
        d = dist(ds.rows[0], ds.rows[1], ds)
        only_x = parse_csv("x1,y+\n1,2\n3,4\n")
        assert d == dist(only_x.rows[0], only_x.rows[1], only_x)

    def test_missing_cells_and_bounds(self):
        lines = ["x1,y+"] + [f"{i},{i}" for i in range(9)] + ["?,9"]
        ds = parse_csv("\n".join(lines) + "\n")
        assert ds.rows[9].cells[0] is None
        assert ds.columns[0].lo == 0.0
        assert ds.columns[0].hi == 8.0  # bounds from the nine known cells

    def test_symbolic_detection(self):
        ds = parse_csv("x,y+\nred,1\n3,2\n")
        assert ds.columns[0].role is Role.SYMBOLIC
        assert ds.rows[1].cells[0] == "3"  # stays a token in a symbolic column

    def test_ragged_row_names_line(self):
        with pytest.raises(IngestionError, match="line 3"):
            parse_csv("a,b\n1,2\n1,2,3\n")

    def test_objective_rejects_tokens(self):
        with pytest.raises(IngestionError, match="cost-"):
            parse_csv("x,cost-\n1,2\n1,cheap\n")

    def test_quoted_fields(self):
        ds = parse_csv('name,y+\n"a, with comma",1\nplain,2\n')
        assert ds.rows[0].cells[0] == "a, with comma"

    def test_skips_artifact_header(self):
        ds = parse_csv("# seed = 3\n# out = -\nx,y+\n1,2\n")
        assert len(ds.rows) == 1

    def test_round_trip(self):
        text = "x1,sym,cost-\n1.0,red,3.0\n?,blue,4.5\n"
        ds = parse_csv(text)
        assert to_csv(ds) == text


class TestNorm:
    def test_midpoint(self):
        col = ColumnSpec("x", Role.NUMERIC, lo=0.0, hi=10.0)
        assert norm(col, 5.0) == 0.5

    def test_degenerate_column(self):
        col = ColumnSpec("x", Role.NUMERIC, lo=3.0, hi=3.0)
        assert norm(col, 3.0) == 0.5

    def test_clamps(self):
        col = ColumnSpec("x", Role.NUMERIC, lo=0.0, hi=10.0)
        assert norm(col, 12.0) == 1.0
        assert norm(col, -2.0) == 0.0

    def test_monotone(self):
        col = ColumnSpec("x", Role.NUMERIC, lo=0.0, hi=7.0)
        vals = [norm(col, v) for v in np.linspace(-1, 8, 40)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))


def four_col_ds(rows):
    cols = [
        ColumnSpec("a", Role.NUMERIC),
        ColumnSpec("b", Role.NUMERIC),
        ColumnSpec("c", Role.NUMERIC),
        ColumnSpec("s", Role.SYMBOLIC),
    ]
    return Dataset(cols, [Row(i, list(cells)) for i, cells in enumerate(rows)])


class TestDist:
    def test_identical_rows(self):
        ds = four_col_ds([[1.0, 2.0, 3.0, "x"], [1.0, 2.0, 3.0, "x"]])
        assert dist(ds.rows[0], ds.rows[1], ds) == 0.0

    def test_one_symbolic_difference_of_four(self):
        ds = four_col_ds([[1.0, 2.0, 3.0, "x"], [1.0, 2.0, 3.0, "y"]])
        assert dist(ds.rows[0], ds.rows[1], ds) == pytest.approx(0.5)

    def test_all_missing_is_one(self):
        ds = four_col_ds([[None, None, None, None], [None, None, None, None]])
        assert dist(ds.rows[0], ds.rows[1], ds) == 1.0

    def test_pessimistic_missing_numeric(self):
        # known value normalizes to 0.25 -> worst counterpart is 0.75 away
        ds = numeric_ds([0.0, 1.0, 4.0])
        ds.rows[1].cells[0] = None
        ds2 = Dataset(ds.columns, ds.rows)  # rebuild caches after edit
        d = dist(ds2.rows[0], ds2.rows[1], ds2)
        assert d == pytest.approx(1.0)  # known value at lo: worst case is hi

    def test_no_decision_columns(self):
        cols = [ColumnSpec("y", Role.OBJECTIVE, Goal.MINIMIZE)]
        ds = Dataset(cols, [Row(0, [1.0]), Row(1, [2.0])])
        with pytest.raises(ConfigError, match="no decision columns"):
            dist(ds.rows[0], ds.rows[1], ds)


class TestD2h:
    def test_at_heaven(self):
        ds = parse_csv("x,up+,down-\n1,10,0\n2,0,10\n")
        assert d2h(ds.rows[0], ds) == 0.0
        assert d2h(ds.rows[1], ds) == 1.0

    def test_two_objectives_midpoint(self):
        ds = parse_csv("x,up+,down-\n1,0,0\n2,10,10\n3,5,5\n")
        assert d2h(ds.rows[2], ds) == pytest.approx(0.5)

    def test_missing_objective(self):
        ds = parse_csv("x,up+\n1,10\n2,?\n3,0\n")
        with pytest.raises(EvaluationError, match="up\\+"):
            d2h(ds.rows[1], ds)

    def test_no_objectives(self):
        ds = parse_csv("x,z\n1,2\n")
        with pytest.raises(ConfigError):
            d2h(ds.rows[0], ds)


# -- property tests ----------------------------------------------------------

cell_values = st.one_of(
    st.none(),
    st.floats(min_value=-50, max_value=50, allow_nan=False),
    st.sampled_from(["red", "green", "blue"]),
)


@st.composite
def random_datasets(draw, min_rows=2, max_rows=12):
    n_num = draw(st.integers(0, 3))
    n_sym = draw(st.integers(0 if n_num else 1, 2))
    cols = [ColumnSpec(f"n{i}", Role.NUMERIC) for i in range(n_num)]
    cols += [ColumnSpec(f"s{i}", Role.SYMBOLIC) for i in range(n_sym)]
    n_rows = draw(st.integers(min_rows, max_rows))
    rows = []
    for i in range(n_rows):
        cells = []
        for c in cols:
            if c.role is Role.NUMERIC:
                cells.append(draw(st.one_of(
                    st.none(), st.floats(min_value=-50, max_value=50, allow_nan=False))))
            else:
                cells.append(draw(st.one_of(
                    st.none(), st.sampled_from(["red", "green", "blue"]))))
        rows.append(Row(i, cells))
    return Dataset(cols, rows)


@settings(max_examples=60, deadline=None)
@given(random_datasets(), st.data())
def test_dist_symmetric_and_bounded(ds, data):
    i = data.draw(st.integers(0, len(ds.rows) - 1))
    j = data.draw(st.integers(0, len(ds.rows) - 1))
    a, b = ds.rows[i], ds.rows[j]
    dab = dist(a, b, ds)
    assert dab == pytest.approx(dist(b, a, ds), abs=1e-12)
    assert 0.0 <= dab <= 1.0 + 1e-12
    if all(c is not None for c in a.cells):
        assert dist(a, a, ds) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32), st.integers(3, 10))
def test_triangle_inequality_fully_known_numeric(k, seed, n):
    rng = np.random.default_rng(seed)
    cols = [ColumnSpec(f"n{i}", Role.NUMERIC) for i in range(k)]
    rows = [Row(i, [float(v) for v in rng.uniform(-5, 5, k)]) for i in range(n)]
    ds = Dataset(cols, rows)
    for a in ds.rows[:4]:
        for b in ds.rows[:4]:
            for c in ds.rows[:4]:
                assert dist(a, c, ds) <= dist(a, b, ds) + dist(b, c, ds) + 1e-9


@settings(max_examples=40, deadline=None)
@given(
    st.floats(min_value=0.1, max_value=20, allow_nan=False),
    st.floats(min_value=-30, max_value=30, allow_nan=False),
    st.integers(0, 2**32),
)
def test_d2h_affine_invariance(alpha, beta, seed):
    rng = np.random.default_rng(seed)
    cols = [
        ColumnSpec("x", Role.NUMERIC),
        ColumnSpec("up+", Role.OBJECTIVE, Goal.MAXIMIZE),
        ColumnSpec("down-", Role.OBJECTIVE, Goal.MINIMIZE),
    ]
    raw = rng.uniform(-10, 10, (8, 3))
    ds = Dataset(cols, [Row(i, [float(v) for v in r]) for i, r in enumerate(raw)])
    cols2 = [
        ColumnSpec("x", Role.NUMERIC),
        ColumnSpec("up+", Role.OBJECTIVE, Goal.MAXIMIZE),
        ColumnSpec("down-", Role.OBJECTIVE, Goal.MINIMIZE),
    ]
    rows2 = [
        Row(i, [r.cells[0], alpha * r.cells[1] + beta, r.cells[2]]) for i, r in enumerate(ds.rows)
    ]
    ds2 = Dataset(cols2, rows2)
    for r1, r2 in zip(ds.rows, ds2.rows):
        assert d2h(r1, ds) == pytest.approx(d2h(r2, ds2), abs=1e-9)


def test_dist_to_many_matches_scalar():
    rng = np.random.default_rng(7)
    cols = [ColumnSpec("a", Role.NUMERIC), ColumnSpec("s", Role.SYMBOLIC)]
    rows = []
    for i in range(30):
        num = None if rng.random() < 0.2 else float(rng.uniform(0, 9))
        sym = None if rng.random() < 0.2 else ["x", "y", "z"][int(rng.integers(3))]
        rows.append(Row(i, [num, sym]))
    ds = Dataset(cols, rows)
    src = ds.rows[0]
    many = dist_to_many(src, ds.rows, ds)
    for r, expected in zip(ds.rows, many):
        assert dist(src, r, ds) == pytest.approx(float(expected), abs=1e-12)
