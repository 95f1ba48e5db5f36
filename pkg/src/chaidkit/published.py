"""Values reported for the original 772-record student study.

The underlying data are not available, so these serve as arithmetic fixtures
(the classification matrix) and as a ranked list for the threshold filter.
"""
from __future__ import annotations

import numpy as np

from .evaluation import ConfusionMatrix
from .feature_selection import FeatureScore
from .schema import GRADE_LABELS

CHI2_SCORES: tuple[tuple[str, float], ...] = (
    ("XMARK-Grade", 480.2589),
    ("LOC-SCH", 408.4542),
    ("MEDU", 345.4228),
    ("FEDU", 344.5857),
    ("MED", 281.3894),
    ("StMe", 276.2699),
    ("FSAL", 250.0365),
    ("PTuition", 235.2862),
    ("FOCC", 182.1662),
    ("MSAL", 173.1565),
    ("MOCC", 158.7115),
    ("LArea", 132.8951),
    ("Veh-Home", 123.8983),
    ("FAM-Size", 112.4325),
)

# Observed rows x predicted columns, O..F. The printed matrix leaves the
# column alignment ambiguous; this placement (predictions only in A..D) is the
# one whose row totals and diagonal agree with the reported 345 of 772.
CONFUSION_COUNTS = (
    (0, 33, 4, 0, 0, 0, 0),
    (0, 90, 61, 8, 0, 0, 0),
    (0, 46, 149, 62, 0, 0, 0),
    (0, 4, 87, 105, 0, 0, 0),
    (0, 0, 21, 46, 1, 0, 0),
    (0, 0, 1, 2, 0, 0, 0),
    (0, 0, 21, 31, 0, 0, 0),
)
REPORTED_ACCURACY = 44.69
REPORTED_RECALLS = {"O": 0.00, "A": 56.60, "B": 58.00, "C": 53.60, "D": 0.00, "E": 0.00, "F": 0.00}
RECORDS_COLLECTED = 1000
RECORDS_RETAINED = 772
ROOT_SPLIT = ("MED", {"Tamil": 433, "English": 339})
TERMINAL_NODES = 11


def chi2_scores() -> list[FeatureScore]:
    return [FeatureScore(name, stat, 0, rank) for rank, (name, stat) in enumerate(CHI2_SCORES, 1)]


def confusion() -> ConfusionMatrix:
    return ConfusionMatrix(GRADE_LABELS, np.array(CONFUSION_COUNTS, dtype=np.int64))
