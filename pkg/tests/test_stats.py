import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chaidkit.stats import (CategoryGrouping, ContingencyTable, DegenerateTableError, bonferroni_multiplier,
                            chi2_sf, contingency_table, pearson_chi2, stirling2)

from conftest import make_dataset, make_schema
from oracles import chi2_bruteforce, chi2_sf_mp, count_contiguous_cuts, count_partitions


@pytest.fixture
def four():
    s = make_schema(("X", "nominal", ["p", "q"]))
    return make_dataset(s, [("p", "A"), ("p", "B"), ("q", "A"), ("q", "B")])


def test_table_identity_grouping(four):
    t = contingency_table(four, "X")
    assert t.counts[:, 1:3].tolist() == [[1, 1], [1, 1]]
    assert t.total == 4 and t.row_totals.tolist() == [2, 2]


def test_table_merged_grouping(four):
    t = contingency_table(four, "X", CategoryGrouping(((0, 1),)))
    assert t.counts[:, 1:3].tolist() == [[2, 2]]
    assert t.row_labels == ("p or q",)


def test_table_direct_count():
    s = make_schema(("X", "nominal", ["c1", "c2"]))
    rows = [("c1", "A")] * 10 + [("c2", "B")] * 3 + [(None, "C")] * 2
    t = contingency_table(make_dataset(s, rows), "X")
    assert t.counts[0].tolist() == [0, 10, 0, 0, 0, 0, 0]
    assert t.total == 13  # missing predictor values are excluded


def test_table_errors(four):
    with pytest.raises(ValueError, match="partition"):
        contingency_table(four, "X", CategoryGrouping(((0,),)))
    with pytest.raises(ValueError, match="empty"):
        contingency_table(four.take([]), "X")


@pytest.mark.parametrize("counts, stat, df", [
    ([[10, 10], [10, 10]], 0.0, 1),
    ([[20, 0], [0, 20]], 40.0, 1),
    ([[10, 0], [0, 10], [5, 5]], 20.0, 2),
    ([[20, 0, 0], [0, 20, 0]], 40.0, 1),   # all-zero column dropped
])
def test_pearson_examples(counts, stat, df):
    res = pearson_chi2(np.array(counts))
    assert res.statistic == pytest.approx(stat, abs=1e-12)
    assert res.df == df
    assert (stat, df) == pytest.approx(chi2_bruteforce(counts))


def test_pearson_zero_stat_has_unit_p():
    assert pearson_chi2(np.array([[10, 10], [10, 10]])).p_value == 1.0


@pytest.mark.parametrize("counts", [[[5, 5]], [[5], [5]], [[0, 0], [0, 0]], [[3, 0], [4, 0]]])
def test_pearson_degenerate(counts):
    with pytest.raises(DegenerateTableError):
        pearson_chi2(np.array(counts))


def test_contingency_table_type_validates():
    with pytest.raises(ValueError):
        ContingencyTable(("a",), ("x", "y"), np.array([[1, -1]]))
    with pytest.raises(ValueError):
        ContingencyTable(("a", "b"), ("x",), np.array([[1, 2]]))


tables = st.integers(2, 6).flatmap(lambda r: st.integers(2, 7).flatmap(
    lambda c: st.lists(st.lists(st.integers(0, 40), min_size=c, max_size=c), min_size=r, max_size=r)))


@given(tables)
def test_pearson_matches_bruteforce(table):
    expected = chi2_bruteforce(table)
    if expected is None:
        with pytest.raises(DegenerateTableError):
            pearson_chi2(np.array(table))
        return
    res = pearson_chi2(np.array(table))
    assert res.df == expected[1]
    assert res.statistic == pytest.approx(expected[0], rel=1e-12, abs=1e-12)


@given(tables, st.randoms(use_true_random=False))
def test_pearson_permutation_invariant(table, rnd):
    arr = np.array(table)
    try:
        base = pearson_chi2(arr).statistic
    except DegenerateTableError:
        return
    rows, cols = list(range(arr.shape[0])), list(range(arr.shape[1]))
    rnd.shuffle(rows)
    rnd.shuffle(cols)
    assert pearson_chi2(arr[rows][:, cols]).statistic == pytest.approx(base, rel=1e-12, abs=1e-12)


@given(st.lists(st.integers(1, 20), min_size=2, max_size=5), st.integers(2, 4),
       st.lists(st.integers(0, 30), min_size=2, max_size=5))
def test_equal_proportion_merge_is_exact(profile, scale, other):
    """Merging two rows with identical class proportions leaves X^2 unchanged."""
    k = min(len(profile), len(other))
    a, b = profile[:k], [scale * v for v in profile[:k]]
    other = other[:k]
    unmerged = np.array([a, b, other])
    merged = np.array([[x + y for x, y in zip(a, b)], other])
    try:
        s1 = pearson_chi2(unmerged).statistic
    except DegenerateTableError:
        return
    try:
        s2 = pearson_chi2(merged).statistic
    except DegenerateTableError:
        s2 = 0.0   # only the two proportional rows were non-empty
    assert s2 == pytest.approx(s1, rel=1e-12, abs=1e-9)


@pytest.mark.parametrize("x, df, p, tol", [
    (0.0, 5, 1.0, 0.0),
    (4.60517, 2, 0.100000, 1e-6),
    (3.841459, 1, 0.050000, 1e-6),
])
def test_chi2_sf_examples(x, df, p, tol):
    assert abs(chi2_sf(x, df) - p) <= tol


@pytest.mark.parametrize("x, df", [(-1.0, 1), (1.0, 0), (1.0, 1.5), (math.nan, 2)])
def test_chi2_sf_errors(x, df):
    with pytest.raises(ValueError):
        chi2_sf(x, df)


@pytest.mark.parametrize("df", [1, 2, 3, 7, 20, 54, 200])
@pytest.mark.parametrize("x", [1e-8, 0.3, 1.0, 4.0, 19.5, 50.0, 120.0, 400.0])
def test_chi2_sf_oracle(x, df):
    assert abs(chi2_sf(x, df) - chi2_sf_mp(x, df)) <= 1e-10


@given(st.floats(0, 700))
def test_chi2_sf_df2_closed_form(x):
    assert abs(chi2_sf(x, 2) - math.exp(-x / 2)) <= 1e-12


@given(st.floats(0, 200), st.floats(0, 200), st.integers(1, 60))
def test_chi2_sf_monotone(a, b, df):
    lo, hi = sorted((a, b))
    assert chi2_sf(lo, df) >= chi2_sf(hi, df)


@pytest.mark.parametrize("c, r, kind, expected", [
    (3, 2, "nominal", 3),
    (5, 2, "ordinal", 4),
    (5, 2, "nominal", 15),
    (4, 4, "nominal", 1),
    (4, 4, "ordinal", 1),
    (6, 1, "nominal", 1),
])
def test_bonferroni_examples(c, r, kind, expected):
    assert bonferroni_multiplier(c, r, kind) == expected


def test_bonferroni_errors():
    with pytest.raises(ValueError):
        bonferroni_multiplier(3, 4, "nominal")
    with pytest.raises(ValueError):
        bonferroni_multiplier(3, 0, "ordinal")


@pytest.mark.parametrize("c", range(1, 9))
def test_bonferroni_enumeration(c):
    for r in range(1, c + 1):
        assert bonferroni_multiplier(c, r, "nominal") == count_partitions(c, r)
        assert bonferroni_multiplier(c, r, "ordinal") == count_contiguous_cuts(c, r)


def test_stirling_recurrence():
    for c in range(2, 11):
        for r in range(1, c + 1):
            assert stirling2(c, r) == r * stirling2(c - 1, r) + stirling2(c - 1, r - 1)


def test_grouping_helpers():
    g = CategoryGrouping(((2, 0), (1,)))
    assert g.groups == ((0, 2), (1,))
    assert g.covers(3) and not g.is_contiguous()
    assert g.lookup(3).tolist() == [0, 1, 0]
    assert g.group_of(2) == 0
    with pytest.raises(ValueError):
        CategoryGrouping(((0, 1), (1,)))
