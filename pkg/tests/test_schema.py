import math

import pytest
from hypothesis import given, strategies as st

from chaidkit.rng import SplitMix64
from chaidkit.schema import (MISSING, BMICategory, CleaningPolicy, Grade, SchemaError, bin_bmi, bin_bmi_value,
                             bin_percent_to_grade, clean_dataset, load_dataset, parse_schema,
                             serialize_schema, table1_schema_text)
from chaidkit.synth import generate

from conftest import make_dataset, make_schema

MINIMAL = """\
name: SEX
kind: nominal
domain: male, female

name: HScGrade
kind: ordinal
domain: O, A, B, C, D, E, F

response: HScGrade
"""


def test_table1_fixture(t1):
    assert len(t1) == 35
    assert t1.response == "HScGrade"
    assert len(t1.predictors) == 34
    assert t1["XMARK-Grade"].domain == ("O", "A", "B", "C", "D", "E", "F")
    assert t1["FAM-Size"].size == 10


def test_minimal_schema():
    s = parse_schema(MINIMAL)
    assert s.names == ("SEX", "HScGrade")


def test_unknown_response():
    with pytest.raises(SchemaError, match="unknown response"):
        parse_schema(MINIMAL.replace("response: HScGrade", "response: HScGrad"))


@pytest.mark.parametrize("mutate, message", [
    (lambda t: t.replace("name: HScGrade", "name: SEX"), "duplicate variable"),
    (lambda t: t.replace("domain: male, female", "domain:"), "empty domain"),
    (lambda t: t.replace("response: HScGrade\n", ""), "no response"),
    (lambda t: t + "response: HScGrade\n", "response listed twice"),
    (lambda t: t.replace("domain: male, female", "domain: male, male"), "duplicate domain"),
    (lambda t: t.replace("kind: nominal", "kind: cardinal"), "unknown kind"),
    (lambda t: t.replace("kind: nominal", "kind: nominal\nmissing: male"), "missing token"),
    (lambda t: t.replace("kind: nominal", "colour: red"), "unknown key"),
])
def test_schema_errors(mutate, message):
    with pytest.raises(SchemaError, match=message):
        parse_schema(mutate(MINIMAL))


def test_response_must_be_grades():
    with pytest.raises(SchemaError, match="must have domain"):
        parse_schema(MINIMAL.replace("domain: O, A, B, C, D, E, F", "domain: pass, fail"))


def test_round_trip_table1(t1):
    assert parse_schema(serialize_schema(t1)) == t1
    assert parse_schema(serialize_schema(parse_schema(table1_schema_text()))) == t1


def test_round_trip_custom_missing():
    s = parse_schema(MINIMAL.replace("kind: nominal", "kind: nominal\nmissing: NA"))
    assert s["SEX"].missing_token == "NA"
    assert parse_schema(serialize_schema(s)) == s


@st.composite
def schemas(draw):
    label = st.text(alphabet="abcdefghij-.0123456789", min_size=1, max_size=6)
    n = draw(st.integers(1, 5))
    parts = []
    for i in range(n):
        domain = draw(st.lists(label, min_size=1, max_size=6, unique=True))
        kind = draw(st.sampled_from(["nominal", "ordinal"]))
        parts.append(f"name: V{i}\nkind: {kind}\ndomain: {', '.join(domain)}\n")
    parts.append("name: R\nkind: ordinal\ndomain: O, A, B, C, D, E, F\n")
    return "\n".join(parts) + "\nresponse: R\n"


@given(schemas())
def test_round_trip_property(text):
    s = parse_schema(text)
    assert parse_schema(serialize_schema(s)) == s


def _csv(rows, header="SEX,HScGrade"):
    return header + "\n" + "\n".join(rows) + "\n"


def test_load_valid_rows():
    s = parse_schema(MINIMAL)
    ds, rejects = load_dataset(_csv(["male,A", "female,B", "female,O"]), s)
    assert len(ds) == 3 and rejects == []
    assert ds.records == [(0, 1), (1, 2), (1, 0)]


def test_load_rejects_out_of_domain():
    s = parse_schema(MINIMAL)
    ds, rejects = load_dataset(_csv(["male,A", "unknown,B"]), s)
    assert len(ds) == 1
    assert rejects[0].row == 2 and rejects[0].variable == "SEX"
    assert "SEX" in rejects[0].reason


def test_load_missing_token_and_superset_header():
    s = parse_schema(MINIMAL)
    ds, rejects = load_dataset(_csv(['7,"female",?', "8,male,C"], header="id,SEX,HScGrade"), s)
    assert rejects == []
    assert ds.records == [(1, MISSING), (0, 3)]


def test_load_errors():
    s = parse_schema(MINIMAL)
    with pytest.raises(SchemaError, match="lacks column"):
        load_dataset("SEX\nmale\n", s)
    with pytest.raises(SchemaError, match="unreadable"):
        load_dataset("", s)
    with pytest.raises(SchemaError, match="unreadable"):
        load_dataset('SEX,HScGrade\n"male,A\n', s)


def test_load_wrong_width_rejected():
    s = parse_schema(MINIMAL)
    ds, rejects = load_dataset(_csv(["male,A,extra", "male,B"]), s)
    assert len(ds) == 1 and rejects[0].variable is None


def test_thousand_rows_to_772(t1):
    """228 of 1000 rows corrupted (out-of-domain or missing) leaves 772 after loading and cleaning."""
    text = generate(t1, 1000, seed=11).to_csv().splitlines()
    header, rows = text[0], [r.split(",") for r in text[1:]]
    rng = SplitMix64(5)
    bad = list(range(1000))
    rng.shuffle(bad)
    for i, r in enumerate(bad[:228]):
        col = rng.below(len(t1))
        rows[r][col] = "??bad" if i % 2 else "?"
    csv_text = header + "\n" + "\n".join(",".join(r) for r in rows) + "\n"
    ds, rejects = load_dataset(csv_text, t1)
    assert len(ds) + len(rejects) == 1000
    assert len(rejects) == 114
    assert len(clean_dataset(ds)) == 772


@given(st.lists(st.sampled_from(["male", "female", "x", "?"]), max_size=30))
def test_load_partitions_rows(cells):
    s = parse_schema(MINIMAL)
    ds, rejects = load_dataset(_csv([f"{c},A" for c in cells]), s)
    assert len(ds) + len(rejects) == len(cells)
    assert sorted(r.row for r in rejects) == [i + 1 for i, c in enumerate(cells) if c == "x"]


def test_clean_dataset():
    s = make_schema(("X", "nominal", "ab"))
    ds = make_dataset(s, [("a", "A"), (None, "B"), ("b", None), ("a", "C"), ("b", "D")])
    assert len(clean_dataset(ds, CleaningPolicy.DROP_INCOMPLETE)) == 3
    assert len(clean_dataset(ds, "keep_all")) == 5
    complete = make_dataset(s, [("a", "A"), ("b", "B")])
    assert clean_dataset(complete) is complete


@pytest.mark.parametrize("pct, grade", [
    (92, Grade.O), (90, Grade.O), (100, Grade.O), (89.99, Grade.A), (80, Grade.A), (70, Grade.B),
    (60, Grade.C), (50, Grade.D), (40, Grade.E), (39.5, Grade.F), (0, Grade.F),
])
def test_grade_bins(pct, grade):
    assert bin_percent_to_grade(pct) is grade


@pytest.mark.parametrize("pct", [-0.1, 100.5, math.nan])
def test_grade_bins_reject(pct):
    with pytest.raises(ValueError):
        bin_percent_to_grade(pct)


@given(st.floats(0, 100), st.floats(0, 100))
def test_grade_bins_monotone(a, b):
    lo, hi = sorted((a, b))
    assert bin_percent_to_grade(lo).points <= bin_percent_to_grade(hi).points


def test_grade_order():
    assert Grade.F < Grade.E < Grade.D < Grade.C < Grade.B < Grade.A < Grade.O
    assert Grade.C.points == 3 and Grade.from_points(6) is Grade.O


@pytest.mark.parametrize("w, h, cat", [
    (70, 1.75, BMICategory.NORMAL),        # 22.86
    (50, 1.75, BMICategory.UNDERWEIGHT),   # 16.33
    (18.5, 1.0, BMICategory.NORMAL),
    (25, 1.0, BMICategory.OVERWEIGHT),
    (30, 1.0, BMICategory.OBESITY),
])
def test_bmi(w, h, cat):
    assert bin_bmi(w, h) is cat


@pytest.mark.parametrize("w, h", [(0, 1.7), (70, 0), (-1, 1.7), (70, -1.7)])
def test_bmi_rejects(w, h):
    with pytest.raises(ValueError):
        bin_bmi(w, h)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_bmi_categories_ordered(a, b):
    order = list(BMICategory)
    lo, hi = sorted((a, b))
    assert order.index(bin_bmi_value(lo)) <= order.index(bin_bmi_value(hi))
