"""Least-squares baseline on ordinal-encoded categorical predictors.

Each category is encoded by its 0-based position in the schema domain and
the grade response by points (F=0 ... O=6). Continuous predictions are
rounded half-up and clamped onto the grade scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .evaluation import CvReport, run_folds, stratified_folds
from .schema import MISSING, Dataset, Grade, SchemaError

DAMPING = 1e-10
REFINE_STEPS = 20


class SingularSystemError(ArithmeticError):
    """Normal equations unsolvable even after damping."""


@dataclass(frozen=True)
class RegressionModel:
    coefficients: np.ndarray
    intercept: float
    predictors: tuple[str, ...]
    encoding: dict[str, dict[str, int]]
    damped: bool = False

    def score(self, x: np.ndarray) -> np.ndarray | float:
        return x @ self.coefficients + self.intercept


def encode_dataset(dataset: Dataset, predictors: Sequence[str] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Design matrix of domain indices and the response in grade points."""
    schema = dataset.schema
    predictors = tuple(predictors or schema.predictors)
    cols = [schema.position(p) for p in predictors]
    X = dataset.codes[:, cols]
    y = dataset.response_codes
    if (X == MISSING).any() or (y == MISSING).any():
        raise SchemaError("missing value encountered; clean the dataset before encoding")
    return X.astype(np.float64), (len(schema.classes) - 1 - y).astype(np.float64)


def fit_ols(X: np.ndarray, y: np.ndarray, predictors: Sequence[str] | None = None,
            encoding: dict | None = None) -> RegressionModel:
    """Least-squares fit with intercept.

    Solves the normal equations of ``[1 | X]`` by Cholesky. A rank-deficient
    Gram matrix gets ``DAMPING * mean(diag)`` added to its diagonal, and the
    damped solution is then refined until the residual is orthogonal to the
    columns again.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    if n < p + 1:
        raise SingularSystemError(f"need at least {p + 1} rows for {p} predictors, got {n}")
    A = np.hstack([np.ones((n, 1)), X])
    G = A.T @ A
    b = A.T @ y
    damped = np.linalg.matrix_rank(A) < A.shape[1]
    if damped:
        G = G + DAMPING * np.trace(G) / G.shape[0] * np.eye(G.shape[0])
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        raise SingularSystemError("Gram matrix not positive definite after damping") from None
    def solve(rhs):
        return np.linalg.solve(L.T, np.linalg.solve(L, rhs))

    beta = solve(b)
    if damped:
        # Iterated refinement: each pass shrinks the residual gradient A^T r by
        # about lambda / (sigma^2 + lambda) and leaves null-space components alone.
        scale = max(np.abs(b).max(), 1.0)
        for _ in range(REFINE_STEPS):
            grad = b - A.T @ (A @ beta)
            if np.abs(grad).max() <= 1e-13 * scale:
                break
            beta = beta + solve(grad)
    if not np.isfinite(beta).all():
        raise SingularSystemError("non-finite solution")
    names = tuple(predictors) if predictors is not None else tuple(f"x{i}" for i in range(p))
    return RegressionModel(beta[1:], float(beta[0]), names, encoding or {}, bool(damped))


def fit_baseline(dataset: Dataset, predictors: Sequence[str] | None = None) -> RegressionModel:
    schema = dataset.schema
    predictors = tuple(predictors or schema.predictors)
    X, y = encode_dataset(dataset, predictors)
    encoding = {p: {label: i for i, label in enumerate(schema[p].domain)} for p in predictors}
    return fit_ols(X, y, predictors, encoding)


def score_to_grade(score: float) -> Grade:
    points = min(6, max(0, math.floor(score + 0.5)))
    return Grade.from_points(points)


def predict_grade(model: RegressionModel, record: dict[str, str] | Sequence[int],
                  schema=None) -> Grade:
    """Grade for a record given as ``{variable: label}`` or as schema-ordered codes."""
    if isinstance(record, dict):
        try:
            x = np.array([model.encoding[p][record[p]] for p in model.predictors], dtype=np.float64)
        except KeyError as exc:
            raise SchemaError(f"missing or unknown value for {exc.args[0]!r}") from None
    else:
        if schema is None:
            raise SchemaError("coded records need the schema")
        x = np.array([record[schema.position(p)] for p in model.predictors], dtype=np.float64)
        if (x == MISSING).any():
            raise SchemaError("missing value in record")
    return score_to_grade(float(model.score(x)))


def training_accuracy(model: RegressionModel, dataset: Dataset) -> float:
    X, y = encode_dataset(dataset, model.predictors)
    pred = np.array([score_to_grade(s).points for s in model.score(X)])
    return float((pred == y).mean())


def cross_validate_baseline(dataset: Dataset, k: int = 10, seed: int = 0,
                            predictors: Sequence[str] | None = None) -> CvReport:
    schema = dataset.schema
    folds = stratified_folds(dataset, k, seed)
    return run_folds(dataset, folds,
                     lambda train: fit_baseline(train, predictors),
                     lambda model, rec: predict_grade(model, rec, schema).value)
