"""Stratified k-fold cross-validation and confusion-matrix metrics."""
from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, localcontext
from typing import Callable, Iterable, Sequence

import numpy as np

from .chaid import ChaidParams, grow_tree, predict
from .rng import SplitMix64
from .schema import MISSING, Dataset


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    seed: int
    folds: np.ndarray   # fold index per record

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.folds == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.folds != fold)

    def sizes(self) -> list[int]:
        return np.bincount(self.folds, minlength=self.k).tolist()


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are observed classes, columns predicted classes."""

    labels: tuple[str, ...]
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def trace(self) -> int:
        return int(np.trace(self.counts))

    @property
    def accuracy(self) -> float:
        return self.trace / self.total if self.total else 0.0

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.labels != other.labels:
            raise ValueError("label mismatch")
        return ConfusionMatrix(self.labels, self.counts + other.counts)


@dataclass(frozen=True)
class Metrics:
    accuracy: float                 # percent, 2 decimals
    recalls: dict[str, float]       # percent per observed class
    flagged: tuple[str, ...]        # classes never observed; recall reported as 0
    correct: int
    total: int


@dataclass(frozen=True)
class CvReport:
    fold_accuracies: tuple[float, ...]
    confusion: ConfusionMatrix
    folds: FoldAssignment

    @property
    def accuracy(self) -> float:
        return self.confusion.accuracy

    @property
    def metrics(self) -> Metrics:
        return summarize(self.confusion)


def percent(numerator: int, denominator: int) -> float:
    """100 * numerator / denominator rounded half-up to two decimals, computed exactly."""
    with localcontext() as ctx:
        ctx.prec = 50
        value = Decimal(100 * numerator) / Decimal(denominator)
        return float(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def confusion_matrix(pairs: Iterable[tuple[str, str]], labels: Sequence[str]) -> ConfusionMatrix:
    labels = tuple(labels)
    index = {label: i for i, label in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for observed, predicted in pairs:
        if observed not in index or predicted not in index:
            raise ValueError(f"unknown label in pair ({observed!r}, {predicted!r})")
        counts[index[observed], index[predicted]] += 1
    return ConfusionMatrix(labels, counts)


def summarize(cm: ConfusionMatrix) -> Metrics:
    if cm.total < 1:
        raise ValueError("empty confusion matrix")
    recalls, flagged = {}, []
    for i, label in enumerate(cm.labels):
        row = int(cm.counts[i].sum())
        if row == 0:
            recalls[label] = 0.0
            flagged.append(label)
        else:
            recalls[label] = percent(int(cm.counts[i, i]), row)
    return Metrics(percent(cm.trace, cm.total), recalls, tuple(flagged), cm.trace, cm.total)


def stratified_folds(dataset: Dataset, k: int, seed: int = 0) -> FoldAssignment:
    """Shuffle each class with a seeded stream, then deal class after class round-robin.

    Dealing continues across class boundaries, so both per-class and overall
    fold sizes differ by at most one.
    """
    n = len(dataset)
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > n:
        raise ValueError(f"k={k} exceeds the {n} records available")
    y = dataset.response_codes
    rng = SplitMix64(seed)
    order: list[int] = []
    for cls in list(range(len(dataset.schema.classes))) + [MISSING]:
        members = np.flatnonzero(y == cls).tolist()
        rng.shuffle(members)
        order.extend(members)
    folds = np.empty(n, dtype=np.intp)
    folds[order] = np.arange(n) % k
    return FoldAssignment(k, seed, folds)


def run_folds(dataset: Dataset, folds: FoldAssignment,
              fit: Callable[[Dataset], object],
              predict_one: Callable[[object, tuple[int, ...]], str]) -> CvReport:
    """Train on k-1 folds, predict the held-out one, pool in fold order."""
    labels = dataset.schema.classes
    y = dataset.response_codes
    pooled = ConfusionMatrix(labels, np.zeros((len(labels), len(labels)), dtype=np.int64))
    accuracies = []
    for f in range(folds.k):
        train, test = folds.train_rows(f), folds.test_rows(f)
        if train.size == 0:
            raise ValueError(f"fold {f} leaves an empty training split")
        model = fit(dataset.take(train))
        held = dataset.take(test)
        pairs = [(labels[y[i]], predict_one(model, rec)) for i, rec in zip(test, held.records)]
        cm = confusion_matrix(pairs, labels)
        accuracies.append(cm.accuracy)
        pooled = pooled + cm
    return CvReport(tuple(accuracies), pooled, folds)


def cross_validate(dataset: Dataset, params: ChaidParams = ChaidParams(), k: int = 10, seed: int = 0,
                   predictors: Sequence[str] | None = None) -> CvReport:
    if (dataset.response_codes == MISSING).any():
        raise ValueError("response has missing values; clean the dataset first")
    folds = stratified_folds(dataset, k, seed)
    return run_folds(dataset, folds,
                     lambda train: grow_tree(train, predictors, params=params),
                     lambda tree, rec: predict(tree, rec).label)


def format_confusion(cm: ConfusionMatrix, title: str = "") -> str:
    """Observed rows, predicted columns, trailing percent-correct column, then overall accuracy."""
    m = summarize(cm)
    width = max(6, max(len(str(int(v))) for v in cm.counts.flat) + 1)
    lw = max(8, max(len(label) for label in cm.labels) + 1)
    lines = []
    if title:
        lines.append(title)
    lines.append(f"{'':<{lw}}" + "".join(f"{label:>{width}}" for label in cm.labels) + f"{'% correct':>12}")
    for i, label in enumerate(cm.labels):
        cells = "".join(f"{int(v) if v else '':>{width}}" for v in cm.counts[i])
        flag = " *" if label in m.flagged else ""
        lines.append(f"{label:<{lw}}{cells}{m.recalls[label]:>12.2f}{flag}")
    lines.append(f"Overall accuracy: {m.accuracy:.2f}% ({m.correct}/{m.total})")
    if m.flagged:
        lines.append("* class not observed; recall undefined, reported as 0.00")
    return "\n".join(lines)
