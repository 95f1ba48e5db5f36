"""Variable schema, CSV ingestion, cleaning and derived-variable binning."""
from __future__ import annotations

import csv
import enum
import hashlib
import io
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

MISSING = -1
DEFAULT_MISSING_TOKEN = "?"
GRADE_LABELS = ("O", "A", "B", "C", "D", "E", "F")

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")
_KEYS = ("name", "kind", "domain", "missing")


class SchemaError(ValueError):
    """Malformed schema text or a record that does not fit a schema."""


class Kind(str, enum.Enum):
    NOMINAL = "nominal"
    ORDINAL = "ordinal"


class Grade(str, enum.Enum):
    """Seven grade bands, declared highest first."""

    O = "O"
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"

    @property
    def points(self) -> int:
        """F=0 ... O=6."""
        return len(GRADE_LABELS) - 1 - GRADE_LABELS.index(self.value)

    @classmethod
    def from_points(cls, points: int) -> "Grade":
        return cls(GRADE_LABELS[len(GRADE_LABELS) - 1 - points])

    def __lt__(self, other):
        if not isinstance(other, Grade):
            return NotImplemented
        return self.points < other.points


class BMICategory(str, enum.Enum):
    UNDERWEIGHT = "underweight"
    NORMAL = "normal"
    OVERWEIGHT = "overweight"
    OBESITY = "obesity"


class CleaningPolicy(str, enum.Enum):
    DROP_INCOMPLETE = "drop_incomplete"
    KEEP_ALL = "keep_all"


@dataclass(frozen=True)
class VariableSchema:
    name: str
    kind: Kind
    domain: tuple[str, ...]
    missing_token: str = DEFAULT_MISSING_TOKEN

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "domain", tuple(self.domain))
        if not _NAME_RE.match(self.name):
            raise SchemaError(f"invalid variable name {self.name!r}")
        if not self.domain:
            raise SchemaError(f"variable {self.name}: empty domain")
        if len(set(self.domain)) != len(self.domain):
            raise SchemaError(f"variable {self.name}: duplicate domain labels")
        if any(not label for label in self.domain):
            raise SchemaError(f"variable {self.name}: empty domain label")
        if self.missing_token in self.domain:
            raise SchemaError(f"variable {self.name}: missing token {self.missing_token!r} is a domain label")

    @property
    def size(self) -> int:
        return len(self.domain)

    def index(self, label: str) -> int:
        try:
            return self.domain.index(label)
        except ValueError:
            raise SchemaError(f"variable {self.name}: {label!r} not in domain") from None


@dataclass(frozen=True)
class DatasetSchema:
    variables: tuple[VariableSchema, ...]
    response: str

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            dup = next(n for n in names if names.count(n) > 1)
            raise SchemaError(f"duplicate variable name {dup!r}")
        if self.response not in names:
            raise SchemaError(f"unknown response {self.response!r}")
        if self[self.response].domain != GRADE_LABELS:
            raise SchemaError(f"response {self.response!r} must have domain {', '.join(GRADE_LABELS)}")

    def __getitem__(self, name: str) -> VariableSchema:
        for v in self.variables:
            if v.name == name:
                return v
        raise SchemaError(f"unknown variable {name!r}")

    def __contains__(self, name: str) -> bool:
        return any(v.name == name for v in self.variables)

    def __len__(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def predictors(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.name != self.response)

    @property
    def classes(self) -> tuple[str, ...]:
        return self[self.response].domain

    def position(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"unknown variable {name!r}") from None

    def select(self, predictors: Iterable[str]) -> "DatasetSchema":
        """Sub-schema with the given predictors (in schema order) plus the response."""
        keep = set(predictors) | {self.response}
        for name in keep:
            self[name]
        return DatasetSchema(tuple(v for v in self.variables if v.name in keep), self.response)

    def fingerprint(self) -> str:
        return hashlib.sha256(serialize_schema(self).encode()).hexdigest()[:16]


def parse_schema(text: str) -> DatasetSchema:
    """Parse the stanza format: ``name``/``kind``/``domain``/optional ``missing``
    per variable, blank-line separated, and one trailing ``response:`` line."""
    variables: list[VariableSchema] = []
    response: str | None = None
    stanza: dict[str, str] = {}

    def flush():
        if not stanza:
            return
        missing = [k for k in ("name", "kind", "domain") if k not in stanza]
        if missing:
            raise SchemaError(f"stanza {stanza.get('name', '?')!r} lacks {', '.join(missing)}")
        if stanza["kind"] not in {k.value for k in Kind}:
            raise SchemaError(f"variable {stanza['name']}: unknown kind {stanza['kind']!r}")
        domain = tuple(s.strip() for s in stanza["domain"].split(",")) if stanza["domain"] else ()
        if domain == ("",):
            domain = ()
        variables.append(VariableSchema(stanza["name"], Kind(stanza["kind"]), domain,
                                        stanza.get("missing", DEFAULT_MISSING_TOKEN)))
        stanza.clear()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            flush()
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise SchemaError(f"line {lineno}: expected 'key: value'")
        key, value = key.strip(), value.strip()
        if key == "response":
            flush()
            if response is not None:
                raise SchemaError(f"line {lineno}: response listed twice")
            response = value
        elif key in _KEYS:
            if key == "name":
                flush()
            if key in stanza:
                raise SchemaError(f"line {lineno}: repeated key {key!r}")
            stanza[key] = value
        else:
            raise SchemaError(f"line {lineno}: unknown key {key!r}")
    flush()
    if response is None:
        raise SchemaError("no response line")
    return DatasetSchema(tuple(variables), response)


def serialize_schema(schema: DatasetSchema) -> str:
    lines = []
    for v in schema.variables:
        lines += [f"name: {v.name}", f"kind: {v.kind.value}", f"domain: {', '.join(v.domain)}"]
        if v.missing_token != DEFAULT_MISSING_TOKEN:
            lines.append(f"missing: {v.missing_token}")
        lines.append("")
    lines.append(f"response: {schema.response}")
    return "\n".join(lines) + "\n"


def table1_schema_text() -> str:
    return resources.files("chaidkit").joinpath("data/table1.schema").read_text(encoding="utf-8")


def table1_schema() -> DatasetSchema:
    """The bundled 34-predictor student schema with HScGrade as response."""
    return parse_schema(table1_schema_text())


@dataclass(frozen=True)
class Dataset:
    """Validated categorical records stored as an (n, variables) code matrix.

    ``codes[i, j]`` is the domain index of variable ``j`` in record ``i`` or
    ``MISSING``. The matrix is read-only.
    """

    schema: DatasetSchema
    codes: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        codes = np.array(self.codes, dtype=np.int32, copy=True).reshape(-1, len(self.schema))
        sizes = np.array([v.size for v in self.schema.variables], dtype=np.int32)
        if codes.size and ((codes < MISSING).any() or (codes >= sizes).any()):
            raise SchemaError("record code outside its variable's domain")
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    def __len__(self) -> int:
        return self.codes.shape[0]

    @property
    def records(self) -> list[tuple[int, ...]]:
        return [tuple(int(c) for c in row) for row in self.codes]

    def column(self, name: str) -> np.ndarray:
        return self.codes[:, self.schema.position(name)]

    @property
    def response_codes(self) -> np.ndarray:
        return self.column(self.schema.response)

    def take(self, rows) -> "Dataset":
        return Dataset(self.schema, self.codes[np.asarray(rows, dtype=np.intp)], self.provenance)

    def labels(self, row: int) -> dict[str, str]:
        out = {}
        for v, c in zip(self.schema.variables, self.codes[row]):
            out[v.name] = v.missing_token if c == MISSING else v.domain[c]
        return out

    def is_complete(self) -> np.ndarray:
        return (self.codes != MISSING).all(axis=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.schema.names)
        for row in self.codes:
            writer.writerow([v.missing_token if c == MISSING else v.domain[c]
                             for v, c in zip(self.schema.variables, row)])
        return buf.getvalue()


@dataclass(frozen=True)
class RejectedRow:
    row: int          # 1-based data row; the header is row 0
    variable: str | None
    reason: str


def load_dataset(csv_text: str, schema: DatasetSchema, *, provenance: str = "",
                 optional: Sequence[str] = ()) -> tuple[Dataset, list[RejectedRow]]:
    """Map CSV cells onto domain indices.

    Rows with an out-of-domain cell or the wrong number of cells are rejected
    rather than raising. Columns named in ``optional`` may be absent from the
    header, in which case they load as missing.
    """
    try:
        rows = list(csv.reader(io.StringIO(csv_text), strict=True))
    except csv.Error as exc:
        raise SchemaError(f"unreadable CSV: {exc}") from None
    if not rows or not any(cell.strip() for cell in rows[0]):
        raise SchemaError("unreadable CSV: no header row")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise SchemaError("unreadable CSV: duplicate header column")
    positions = []
    for v in schema.variables:
        if v.name in header:
            positions.append(header.index(v.name))
        elif v.name in optional:
            positions.append(None)
        else:
            raise SchemaError(f"CSV header lacks column {v.name!r}")

    lookups = [{label: i for i, label in enumerate(v.domain)} for v in schema.variables]
    kept: list[list[int]] = []
    rejects: list[RejectedRow] = []
    for rowno, row in enumerate(rows[1:], 1):
        if not row:
            continue
        if len(row) != len(header):
            rejects.append(RejectedRow(rowno, None, f"expected {len(header)} cells, found {len(row)}"))
            continue
        codes = []
        for v, pos, lookup in zip(schema.variables, positions, lookups):
            cell = None if pos is None else row[pos].strip()
            if cell is None or cell == v.missing_token:
                codes.append(MISSING)
            elif cell in lookup:
                codes.append(lookup[cell])
            else:
                rejects.append(RejectedRow(rowno, v.name, f"{v.name}: {cell!r} not in domain"))
                break
        else:
            kept.append(codes)
    data = np.array(kept, dtype=np.int32).reshape(-1, len(schema))
    return Dataset(schema, data, provenance), rejects


def clean_dataset(dataset: Dataset, policy: CleaningPolicy | str = CleaningPolicy.DROP_INCOMPLETE) -> Dataset:
    policy = CleaningPolicy(policy)
    if policy is CleaningPolicy.KEEP_ALL:
        return dataset
    complete = dataset.is_complete()
    if complete.all():
        return dataset
    return Dataset(dataset.schema, dataset.codes[complete], dataset.provenance)


_GRADE_FLOORS = ((90.0, Grade.O), (80.0, Grade.A), (70.0, Grade.B), (60.0, Grade.C),
                 (50.0, Grade.D), (40.0, Grade.E))


def bin_percent_to_grade(pct: float) -> Grade:
    """Percentage mark to grade band; each band includes its lower edge."""
    if not (0.0 <= pct <= 100.0):
        raise ValueError(f"percentage {pct} outside [0, 100]")
    for floor, grade in _GRADE_FLOORS:
        if pct >= floor:
            return grade
    return Grade.F


def bmi(weight: float, height: float) -> float:
    if not (weight > 0 and height > 0) or math.isinf(weight) or math.isinf(height):
        raise ValueError("weight and height must be positive and finite")
    return weight / (height * height)


def bin_bmi(weight: float, height: float) -> BMICategory:
    """WHO cut-offs 18.5 / 25 / 30, lower-inclusive."""
    return bin_bmi_value(bmi(weight, height))


def bin_bmi_value(value: float) -> BMICategory:
    if value < 18.5:
        return BMICategory.UNDERWEIGHT
    if value < 25.0:
        return BMICategory.NORMAL
    if value < 30.0:
        return BMICategory.OVERWEIGHT
    return BMICategory.OBESITY
