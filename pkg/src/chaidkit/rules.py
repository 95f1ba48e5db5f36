"""IF-THEN rules read off root-to-leaf paths of a CHAID tree."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .chaid import ChaidNode, ChaidTree, group_label
from .schema import MISSING, DatasetSchema


@dataclass(frozen=True)
class Condition:
    variable: str
    categories: tuple[int, ...]   # domain indices

    def holds(self, code: int) -> bool:
        return code != MISSING and code in self.categories


@dataclass(frozen=True)
class Rule:
    conditions: tuple[Condition, ...]
    consequent: str
    support: int
    confidence: float
    leaf_id: int

    def matches(self, record: Sequence[int], schema: DatasetSchema) -> bool:
        return all(c.holds(record[schema.position(c.variable)]) for c in self.conditions)


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]
    default_class: str
    schema: DatasetSchema

    def __len__(self) -> int:
        return len(self.rules)


def _append(path: list[Condition], cond: Condition) -> list[Condition]:
    # consecutive tests on one variable collapse into their intersection
    if path and path[-1].variable == cond.variable:
        both = tuple(c for c in path[-1].categories if c in cond.categories)
        return path[:-1] + [Condition(cond.variable, both)]
    return path + [cond]


def extract_rules(tree: ChaidTree) -> RuleSet:
    """One rule per leaf, conditions in root-to-leaf order.

    A single-node tree yields no rules; everything falls to the default class.
    """
    rules: list[Rule] = []

    def walk(node: ChaidNode, path: list[Condition]):
        if node.is_leaf:
            if path:
                label = tree.majority_label(node)
                rules.append(Rule(tuple(path), label, node.count,
                                  max(node.class_distribution) / node.count, node.id))
            return
        for group, child in zip(node.split.grouping.groups, node.children):
            walk(child, _append(path, Condition(node.split.variable, group)))

    walk(tree.root, [])
    return RuleSet(tuple(rules), tree.majority_label(tree.root), tree.schema)


def prune_rules(ruleset: RuleSet, min_support: int) -> RuleSet:
    if min_support < 0:
        raise ValueError("min_support must be >= 0")
    kept = tuple(r for r in ruleset.rules if r.support >= min_support)
    return RuleSet(kept, ruleset.default_class, ruleset.schema)


def apply_rules(ruleset: RuleSet, record: Sequence[int]) -> tuple[str, int | None]:
    """Class of the first matching rule and its index, else the default class and None."""
    for i, rule in enumerate(ruleset.rules):
        if rule.matches(record, ruleset.schema):
            return rule.consequent, i
    return ruleset.default_class, None


def format_rule(rule: Rule, schema: DatasetSchema) -> str:
    parts = []
    for cond in rule.conditions:
        var = schema[cond.variable]
        parts.append(f"{var.name} = {group_label(var, cond.categories)}")
    return f"IF {' and '.join(parts)} THEN {schema.response} = '{rule.consequent}'"


def format_ruleset(ruleset: RuleSet) -> str:
    """Rules grouped by consequent in class order, each with support and confidence."""
    schema = ruleset.schema
    lines = []
    for label in schema.classes:
        chosen = [r for r in ruleset.rules if r.consequent == label]
        if not chosen:
            continue
        lines.append(f"Rules for {schema.response}='{label}'")
        for r in chosen:
            lines.append(f"  {format_rule(r, schema)}    [support={r.support}, confidence={r.confidence:.3f}]")
    lines.append(f"Default: {schema.response} = '{ruleset.default_class}'")
    return "\n".join(lines)
