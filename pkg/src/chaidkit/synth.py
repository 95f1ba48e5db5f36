"""Seeded synthetic datasets with planted predictor -> class effects.

Per record, predictors are drawn uniformly over their domains in schema
order (``rng.below(size)``), then the class is drawn by inverse CDF from

    normalize(base + sum(strength * shift[category] for each effect))

all from one :class:`~chaidkit.rng.SplitMix64` stream seeded with ``seed``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from itertools import accumulate

import numpy as np

from .rng import SplitMix64
from .schema import Dataset, DatasetSchema


class SpecError(ValueError):
    """Malformed effect specification."""


@dataclass(frozen=True)
class Effect:
    variable: str
    strength: float
    shifts: dict[str, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.strength <= 1.0:
            raise SpecError(f"effect on {self.variable}: strength {self.strength} outside [0, 1]")
        object.__setattr__(self, "shifts", {k: _normalize(v, f"shift {self.variable}={k}")
                                            for k, v in self.shifts.items()})


@dataclass(frozen=True)
class EffectSpec:
    """Base class distribution (response-domain order) plus planted effects.

    Categories without an explicit shift use the base distribution, which
    leaves them neutral.
    """

    base: tuple[float, ...]
    effects: tuple[Effect, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "base", _normalize(self.base, "base"))
        object.__setattr__(self, "effects", tuple(self.effects))
        names = [e.variable for e in self.effects]
        if len(set(names)) != len(names):
            raise SpecError("variable listed in two effects")

    def validate(self, schema: DatasetSchema) -> None:
        if len(self.base) != len(schema.classes):
            raise SpecError(f"base has {len(self.base)} weights for {len(schema.classes)} classes")
        for e in self.effects:
            if e.variable not in schema or e.variable == schema.response:
                raise SpecError(f"effect variable {e.variable!r} is not a predictor of the schema")
            domain = schema[e.variable].domain
            for label, dist in e.shifts.items():
                if label not in domain:
                    raise SpecError(f"effect on {e.variable}: {label!r} not in domain")
                if len(dist) != len(self.base):
                    raise SpecError(f"effect on {e.variable}: shift for {label!r} has wrong length")


def _normalize(weights, what: str) -> tuple[float, ...]:
    w = tuple(float(x) for x in weights)
    if not w or any(x < 0 or x != x for x in w) or sum(w) <= 0:
        raise SpecError(f"{what}: weights must be non-negative with positive sum")
    total = sum(w)
    return tuple(x / total for x in w)


def uniform_spec(schema: DatasetSchema) -> EffectSpec:
    return EffectSpec(tuple([1.0] * len(schema.classes)))


def planted_spec(schema: DatasetSchema, variable: str, strength: float,
                 base: tuple[float, ...] | None = None) -> EffectSpec:
    """One effect: category j of ``variable`` pushes toward class ``j * classes // size``."""
    size, n_classes = schema[variable].size, len(schema.classes)
    shifts = {}
    for j, label in enumerate(schema[variable].domain):
        one_hot = [0.0] * n_classes
        one_hot[j * n_classes // size] = 1.0
        shifts[label] = tuple(one_hot)
    return EffectSpec(base or tuple([1.0] * n_classes), (Effect(variable, strength, shifts),))


def generate(schema: DatasetSchema, n: int, seed: int, spec: EffectSpec | None = None) -> Dataset:
    if n < 0:
        raise SpecError("n must be non-negative")
    spec = spec or uniform_spec(schema)
    spec.validate(schema)
    rng = SplitMix64(seed)
    predictors = [schema.position(name) for name in schema.predictors]
    sizes = [schema.variables[p].size for p in predictors]
    response = schema.position(schema.response)
    effects = []
    for e in spec.effects:
        var = schema[e.variable]
        table = [tuple(e.strength * w for w in e.shifts.get(label, spec.base)) for label in var.domain]
        effects.append((schema.position(e.variable), table))

    codes = np.zeros((n, len(schema)), dtype=np.int32)
    for i in range(n):
        row = codes[i]
        for p, size in zip(predictors, sizes):
            row[p] = rng.below(size)
        weights = list(spec.base)
        for pos, table in effects:
            for k, w in enumerate(table[row[pos]]):
                weights[k] += w
        row[response] = rng.choice(list(accumulate(weights)))
    return Dataset(schema, codes, provenance=f"synthetic n={n} seed={seed}")


def _parse_distribution(text: str, classes: tuple[str, ...], what: str) -> tuple[float, ...]:
    weights = [0.0] * len(classes)
    for item in text.split(","):
        label, sep, value = item.partition("=")
        label = label.strip()
        if not sep or label not in classes:
            raise SpecError(f"{what}: bad entry {item.strip()!r}")
        try:
            weights[classes.index(label)] = float(value)
        except ValueError:
            raise SpecError(f"{what}: bad weight {value.strip()!r}") from None
    return tuple(weights)


def parse_spec(text: str, schema: DatasetSchema) -> EffectSpec:
    """Parse the stanza format::

        base: O=1, A=2, B=3, C=3, D=2, E=1, F=1

        variable: MED
        strength: 0.5
        shift Tamil: C=1
        shift English: B=1
    """
    classes = schema.classes
    base: tuple[float, ...] | None = None
    effects: list[Effect] = []
    stanza: dict = {}

    def flush():
        if not stanza:
            return
        if "variable" not in stanza or "strength" not in stanza:
            raise SpecError("effect stanza needs 'variable' and 'strength'")
        try:
            strength = float(stanza["strength"])
        except ValueError:
            raise SpecError(f"bad strength {stanza['strength']!r}") from None
        effects.append(Effect(stanza["variable"], strength, stanza.get("shifts", {})))
        stanza.clear()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            flush()
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise SpecError(f"line {lineno}: expected 'key: value'")
        key, value = key.strip(), value.strip()
        if key == "base":
            if base is not None:
                raise SpecError(f"line {lineno}: base given twice")
            base = _parse_distribution(value, classes, "base")
        elif key == "variable":
            flush()
            stanza["variable"] = value
        elif key == "strength":
            stanza["strength"] = value
        elif key.startswith("shift "):
            label = key[len("shift "):].strip()
            stanza.setdefault("shifts", {})[label] = _parse_distribution(value, classes, f"shift {label}")
        else:
            raise SpecError(f"line {lineno}: unknown key {key!r}")
    flush()
    spec = EffectSpec(base or tuple([1.0] * len(classes)), tuple(effects))
    spec.validate(schema)
    return spec


def default_spec_text() -> str:
    return resources.files("chaidkit").joinpath("data/default.spec").read_text(encoding="utf-8")


def default_spec(schema: DatasetSchema) -> EffectSpec:
    """Planted effects for the bundled student schema."""
    return parse_spec(default_spec_text(), schema)
