"""Contingency tables, Pearson chi-square, chi-square tail probabilities and
Bonferroni multipliers for category merging."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .schema import MISSING, Dataset, Kind, SchemaError

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


class DegenerateTableError(ValueError):
    """Fewer than two non-empty rows or columns: no test is possible."""


@dataclass(frozen=True)
class CategoryGrouping:
    """Partition of a predictor's domain indices into ordered groups."""

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(sorted(g)) for g in self.groups)
        if any(not g for g in groups):
            raise ValueError("empty group")
        flat = [c for g in groups for c in g]
        if len(set(flat)) != len(flat):
            raise ValueError("groups overlap")
        object.__setattr__(self, "groups", groups)

    @classmethod
    def identity(cls, size: int) -> "CategoryGrouping":
        return cls(tuple((i,) for i in range(size)))

    @classmethod
    def single(cls, size: int) -> "CategoryGrouping":
        return cls((tuple(range(size)),))

    def __len__(self) -> int:
        return len(self.groups)

    def covers(self, size: int) -> bool:
        return sorted(c for g in self.groups for c in g) == list(range(size))

    def is_contiguous(self) -> bool:
        return all(g[-1] - g[0] == len(g) - 1 for g in self.groups)

    def lookup(self, size: int) -> np.ndarray:
        """Array mapping category index to group index."""
        out = np.full(size, -1, dtype=np.intp)
        for gi, g in enumerate(self.groups):
            out[list(g)] = gi
        return out

    def group_of(self, code: int) -> int:
        for gi, g in enumerate(self.groups):
            if code in g:
                return gi
        raise KeyError(code)


@dataclass(frozen=True)
class ContingencyTable:
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        if counts.ndim != 2 or counts.shape != (len(self.row_labels), len(self.col_labels)):
            raise ValueError("counts shape does not match labels")
        if (counts < 0).any():
            raise ValueError("negative count")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class ChiSquareStat:
    statistic: float
    df: int
    p_value: float
    adjusted_p: float

    def adjusted(self, multiplier: int) -> "ChiSquareStat":
        return ChiSquareStat(self.statistic, self.df, self.p_value,
                             min(1.0, multiplier * self.p_value))


def crosstab(x: np.ndarray, y: np.ndarray, n_x: int, n_y: int) -> np.ndarray:
    """Count matrix of code pairs, skipping pairs where either side is missing."""
    keep = (x != MISSING) & (y != MISSING)
    flat = x[keep].astype(np.intp) * n_y + y[keep]
    return np.bincount(flat, minlength=n_x * n_y).reshape(n_x, n_y)


def group_rows(counts: np.ndarray, grouping: CategoryGrouping) -> np.ndarray:
    return np.array([counts[list(g)].sum(axis=0) for g in grouping.groups], dtype=np.int64)


def contingency_table(dataset: Dataset, predictor: str, grouping: CategoryGrouping | None = None,
                      response: str | None = None) -> ContingencyTable:
    """Cross-tabulate predictor groups against response classes.

    Records whose predictor (or response) is missing are left out.
    """
    schema = dataset.schema
    response = response or schema.response
    pvar, rvar = schema[predictor], schema[response]
    if len(dataset) == 0:
        raise ValueError("empty dataset view")
    grouping = grouping or CategoryGrouping.identity(pvar.size)
    if not grouping.covers(pvar.size):
        raise ValueError(f"grouping is not a partition of {predictor}'s domain")
    raw = crosstab(dataset.column(predictor), dataset.column(response), pvar.size, rvar.size)
    labels = tuple(" or ".join(pvar.domain[c] for c in g) for g in grouping.groups)
    return ContingencyTable(labels, rvar.domain, group_rows(raw, grouping))


def pearson_statistic(counts: np.ndarray) -> tuple[float, int]:
    """Pearson X^2 and df after dropping all-zero rows and columns."""
    counts = np.asarray(counts, dtype=np.float64)
    counts = counts[counts.sum(axis=1) > 0][:, counts.sum(axis=0) > 0]
    r, c = counts.shape
    if r < 2 or c < 2:
        raise DegenerateTableError(f"table has {r} non-empty rows and {c} non-empty columns")
    rows, cols = counts.sum(axis=1), counts.sum(axis=0)
    expected = np.outer(rows, cols) / counts.sum()
    stat = float(((counts - expected) ** 2 / expected).sum())
    return stat, (r - 1) * (c - 1)


def pearson_chi2(table: ContingencyTable | np.ndarray) -> ChiSquareStat:
    counts = table.counts if isinstance(table, ContingencyTable) else np.asarray(table)
    if counts.sum() < 1:
        raise DegenerateTableError("empty table")
    stat, df = pearson_statistic(counts)
    p = chi2_sf(stat, df)
    return ChiSquareStat(stat, df, p, p)


def _lower_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series."""
    term = total = 1.0 / a
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise ArithmeticError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _upper_fraction(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by modified Lentz continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    raise ArithmeticError(f"incomplete gamma fraction did not converge (a={a}, x={x})")


def gammaincc(a: float, x: float) -> float:
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _lower_series(a, x))
    return min(1.0, _upper_fraction(a, x))


def chi2_sf(x: float, df: int) -> float:
    """Upper-tail probability of the chi-square distribution."""
    if df < 1 or int(df) != df:
        raise ValueError(f"df must be a positive integer, got {df}")
    if x < 0 or math.isnan(x):
        raise ValueError(f"x must be non-negative, got {x}")
    if math.isinf(x):
        return 0.0
    return gammaincc(df / 2.0, x / 2.0)


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def bonferroni_multiplier(c: int, r: int, kind: Kind | str) -> int:
    """Number of ways ``c`` categories could have been reduced to ``r`` groups."""
    kind = Kind(kind)
    if not 1 <= r <= c:
        raise ValueError(f"need 1 <= r <= c, got c={c}, r={r}")
    if kind is Kind.ORDINAL:
        return math.comb(c - 1, r - 1)
    return stirling2(c, r)


def pair_test(a: Sequence[int], b: Sequence[int]) -> tuple[float, int, float]:
    """Chi-square test of two count rows; a degenerate pair reads as p = 1."""
    na, nb = sum(a), sum(b)
    n = na + nb
    if na == 0 or nb == 0:
        return 0.0, 0, 1.0
    stat = 0.0
    cols = 0
    for x, y in zip(a, b):
        t = x + y
        if t == 0:
            continue
        cols += 1
        ea, eb = na * t / n, nb * t / n
        stat += (x - ea) ** 2 / ea + (y - eb) ** 2 / eb
    if cols < 2:
        return 0.0, 0, 1.0
    return stat, cols - 1, chi2_sf(stat, cols - 1)


def ensure_known(dataset: Dataset, *names: str) -> None:
    for name in names:
        if name not in dataset.schema:
            raise SchemaError(f"unknown variable {name!r}")
