import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from chaidkit.schema import Dataset, DatasetSchema, GRADE_LABELS, Kind, VariableSchema, table1_schema

TEN_PREDICTORS = ("SEX", "BMI", "Comm", "FAM-Size", "LArea", "No-EB", "TransSchool",
                  "XMARK-Grade", "MED", "SpOutdoor")


@pytest.fixture(scope="session")
def t1():
    return table1_schema()


@pytest.fixture(scope="session")
def ten(t1):
    """Ten bundled predictors of mixed kind and arity plus the response."""
    return t1.select(TEN_PREDICTORS)


def make_schema(*variables, response_kind=Kind.ORDINAL):
    """Schema from ``(name, kind, domain)`` triples plus a ``G`` grade response."""
    vs = [VariableSchema(n, Kind(k), tuple(d)) for n, k, d in variables]
    vs.append(VariableSchema("G", response_kind, GRADE_LABELS))
    return DatasetSchema(tuple(vs), "G")


def make_dataset(schema, rows):
    """Dataset from rows of labels (``None`` for missing) in schema order."""
    codes = [[-1 if lab is None else v.domain.index(lab) for v, lab in zip(schema.variables, row)]
             for row in rows]
    return Dataset(schema, np.array(codes, dtype=np.int32).reshape(-1, len(schema)))


ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
