"""Chi-square filter feature selection."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .schema import Dataset
from .stats import DegenerateTableError, chi2_sf, crosstab, pearson_statistic

DEFAULT_THRESHOLD = 100.0


@dataclass(frozen=True)
class FeatureScore:
    variable: str
    statistic: float
    df: int
    rank: int
    p_value: float = 1.0
    degenerate: bool = False


def score_features(dataset: Dataset, response: str | None = None,
                   predictors: Iterable[str] | None = None) -> list[FeatureScore]:
    """Score each predictor against the response on its ungrouped table.

    Predictors whose table admits no test (a single observed category, or a
    response with a single observed class) score 0 and carry ``degenerate``.
    Ranking is by descending statistic, ties in schema order.
    """
    if len(dataset) == 0:
        raise ValueError("cannot score features of an empty dataset")
    schema = dataset.schema
    response = response or schema.response
    rvar = schema[response]
    y = dataset.column(response)
    names = [n for n in (predictors if predictors is not None else schema.names) if n != response]

    raw = []
    for name in names:
        var = schema[name]
        counts = crosstab(dataset.column(name), y, var.size, rvar.size)
        try:
            stat, df = pearson_statistic(counts)
        except DegenerateTableError:
            raw.append((name, 0.0, 0, 1.0, True))
            continue
        raw.append((name, stat, df, chi2_sf(stat, df), False))

    order = {n: i for i, n in enumerate(schema.names)}
    raw.sort(key=lambda s: (-s[1], order[s[0]]))
    return [FeatureScore(n, st, df, rank, p, deg) for rank, (n, st, df, p, deg) in enumerate(raw, 1)]


def filter_by_threshold(scores: Sequence[FeatureScore], threshold: float = DEFAULT_THRESHOLD) -> list[str]:
    """Names whose raw statistic is strictly greater than ``threshold``, in rank order."""
    return [s.variable for s in sorted(scores, key=lambda s: s.rank) if s.statistic > threshold]


def filter_by_pvalue(scores: Sequence[FeatureScore], alpha: float = 0.05) -> list[str]:
    """Names whose p-value is below ``alpha``, in rank order; fair across differing df."""
    return [s.variable for s in sorted(scores, key=lambda s: s.rank)
            if not s.degenerate and s.p_value < alpha]


def format_scores(scores: Sequence[FeatureScore], *, with_p: bool = False) -> str:
    width = max([len("Variable")] + [len(s.variable) for s in scores])
    head = f"{'Variable':<{width}}  {'Chi-Square':>12}"
    if with_p:
        head += f"  {'df':>4}  {'p-value':>10}"
    lines = [head]
    for s in scores:
        line = f"{s.variable:<{width}}  {s.statistic:>12.4f}"
        if with_p:
            p = f"{s.p_value:.3e}" if not math.isnan(s.p_value) else "nan"
            line += f"  {s.df:>4}  {p:>10}"
        if s.degenerate:
            line += "  (degenerate)"
        lines.append(line)
    return "\n".join(lines)
