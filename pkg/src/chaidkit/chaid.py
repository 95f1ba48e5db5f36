"""CHAID tree induction, prediction and export.

Growth follows Kass's scheme: at each node every predictor's categories are
merged bottom-up while the most similar allowable pair is not significantly
different (``alpha_merge``), the merged table is tested against the response
with a Bonferroni-adjusted p-value, and the node splits on the most
significant predictor if that adjusted p-value is within ``alpha_split``.
The optional re-split of merged groups is not performed.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .schema import (MISSING, Dataset, DatasetSchema, Kind, SchemaError, VariableSchema)
from .stats import (CategoryGrouping, DegenerateTableError, bonferroni_multiplier, chi2_sf,
                    crosstab, group_rows, pair_test, pearson_statistic)

FORMAT_VERSION = 1


@dataclass(frozen=True)
class ChaidParams:
    alpha_merge: float = 0.05
    alpha_split: float = 0.05
    min_parent: int = 20
    min_child: int = 10
    max_depth: int = 6
    use_bonferroni: bool = True

    def __post_init__(self):
        if not 0 < self.alpha_merge < 1 or not 0 < self.alpha_split < 1:
            raise ValueError("significance levels must lie in (0, 1)")
        if self.min_parent < 2 or self.min_child < 1:
            raise ValueError("need min_parent >= 2 and min_child >= 1")
        if self.min_child > self.min_parent:
            raise ValueError("min_child may not exceed min_parent")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")


@dataclass(frozen=True)
class SplitCandidate:
    variable: str
    grouping: CategoryGrouping
    statistic: float
    df: int
    p_value: float
    adjusted_p: float


@dataclass
class ChaidNode:
    id: int
    depth: int
    count: int
    class_distribution: tuple[int, ...]
    split: SplitCandidate | None = None
    children: list["ChaidNode"] = field(default_factory=list)

    @property
    def majority(self) -> int:
        """Index of the most frequent class; ties go to the earlier domain label."""
        return int(np.argmax(self.class_distribution))

    @property
    def is_leaf(self) -> bool:
        return self.split is None

    @property
    def missing_child(self) -> int:
        """Child that receives records whose split value is missing."""
        return int(np.argmax([c.count for c in self.children]))


@dataclass
class ChaidTree:
    root: ChaidNode
    params: ChaidParams
    schema: DatasetSchema
    predictors: tuple[str, ...]

    @property
    def response(self) -> str:
        return self.schema.response

    @property
    def fingerprint(self) -> str:
        return self.schema.fingerprint()

    @property
    def classes(self) -> tuple[str, ...]:
        return self.schema.classes

    def nodes(self) -> Iterator[ChaidNode]:
        """Breadth-first traversal, i.e. in id order."""
        queue = deque([self.root])
        while queue:
            node = queue.popleft()
            yield node
            queue.extend(node.children)

    def leaves(self) -> list[ChaidNode]:
        return [n for n in self.nodes() if n.is_leaf]

    @property
    def depth(self) -> int:
        return max(n.depth for n in self.nodes())

    def majority_label(self, node: ChaidNode) -> str:
        return self.classes[node.majority]


@dataclass(frozen=True)
class Prediction:
    label: str
    distribution: tuple[float, ...]
    leaf_id: int


def _merge(counts: np.ndarray, kind: Kind, params: ChaidParams) -> CategoryGrouping:
    """Merge rows of a category-by-class count matrix into groups."""
    groups: list[list[int]] = [[i] for i in range(counts.shape[0])]
    rows: list[list[int]] = [[int(v) for v in r] for r in counts]
    ordinal = Kind(kind) is Kind.ORDINAL
    cache: dict[tuple, float] = {}

    def pvalue(i: int, j: int) -> float:
        key = (tuple(groups[i]), tuple(groups[j]))
        if key not in cache:
            cache[key] = pair_test(rows[i], rows[j])[2]
        return cache[key]

    def pairs():
        if ordinal:
            return [(i, i + 1) for i in range(len(groups) - 1)]
        return [(i, j) for i in range(len(groups)) for j in range(i + 1, len(groups))]

    def join(i: int, j: int) -> None:
        groups[i] = sorted(groups[i] + groups[j])
        rows[i] = [a + b for a, b in zip(rows[i], rows[j])]
        del groups[j], rows[j]

    while len(groups) > 1:
        best, best_p = None, -1.0
        for i, j in pairs():
            p = pvalue(i, j)
            if p > best_p:
                best, best_p = (i, j), p
        if best_p <= params.alpha_merge:
            break
        join(*best)

    while len(groups) > 1:
        sizes = [sum(r) for r in rows]
        small = min(range(len(groups)), key=lambda g: sizes[g])
        if sizes[small] >= params.min_child:
            break
        if ordinal:
            partners = [g for g in (small - 1, small + 1) if 0 <= g < len(groups)]
        else:
            partners = [g for g in range(len(groups)) if g != small]
        best_p, partner = -1.0, None
        for g in partners:
            p = pvalue(min(g, small), max(g, small))
            if p > best_p:
                best_p, partner = p, g
        join(min(small, partner), max(small, partner))

    return CategoryGrouping(tuple(tuple(g) for g in groups))


def _evaluate(x: np.ndarray, y: np.ndarray, var: VariableSchema, n_classes: int,
              params: ChaidParams) -> SplitCandidate | None:
    counts = crosstab(x, y, var.size, n_classes)
    grouping = _merge(counts, var.kind, params)
    if len(grouping) < 2:
        return None
    try:
        stat, df = pearson_statistic(group_rows(counts, grouping))
    except DegenerateTableError:
        return None
    p = chi2_sf(stat, df)
    observed = int((counts.sum(axis=1) > 0).sum())
    multiplier = bonferroni_multiplier(observed, len(grouping), var.kind) if params.use_bonferroni else 1
    return SplitCandidate(var.name, grouping, stat, df, p, min(1.0, multiplier * p))


def _check_names(schema: DatasetSchema, predictor: str, response: str | None) -> str:
    response = response or schema.response
    if predictor not in schema:
        raise SchemaError(f"unknown predictor {predictor!r}")
    if response not in schema:
        raise SchemaError(f"unknown response {response!r}")
    return response


def merge_categories(view: Dataset, predictor: str, response: str | None = None,
                     params: ChaidParams = ChaidParams()) -> CategoryGrouping:
    if len(view) == 0:
        raise ValueError("empty node view")
    response = _check_names(view.schema, predictor, response)
    var = view.schema[predictor]
    counts = crosstab(view.column(predictor), view.column(response), var.size,
                      view.schema[response].size)
    return _merge(counts, var.kind, params)


def evaluate_split(view: Dataset, predictor: str, response: str | None = None,
                   params: ChaidParams = ChaidParams()) -> SplitCandidate | None:
    """Best grouping of ``predictor`` at this node, or None if it cannot split."""
    if len(view) == 0:
        raise ValueError("empty node view")
    response = _check_names(view.schema, predictor, response)
    return _evaluate(view.column(predictor), view.column(response), view.schema[predictor],
                     view.schema[response].size, params)


def grow_tree(dataset: Dataset, predictors: Iterable[str] | None = None, response: str | None = None,
              params: ChaidParams = ChaidParams()) -> ChaidTree:
    schema = dataset.schema
    response = response or schema.response
    if response != schema.response:
        raise SchemaError(f"response {response!r} is not the schema's response {schema.response!r}")
    predictors = tuple(schema.predictors if predictors is None else predictors)
    if not predictors:
        raise ValueError("no predictors given")
    for name in predictors:
        if name == response or name not in schema:
            raise SchemaError(f"invalid predictor {name!r}")
    if len(dataset) == 0:
        raise ValueError("cannot grow a tree on an empty dataset")
    y_all = dataset.response_codes
    if (y_all == MISSING).any():
        raise ValueError("response has missing values; clean the dataset first")

    n_classes = len(schema.classes)
    order = {n: i for i, n in enumerate(schema.names)}
    predictors = tuple(sorted(set(predictors), key=order.__getitem__))
    columns = {n: dataset.column(n) for n in predictors}
    variables = {n: schema[n] for n in predictors}

    def make(node_id: int, depth: int, idx: np.ndarray) -> ChaidNode:
        dist = np.bincount(y_all[idx], minlength=n_classes)
        return ChaidNode(node_id, depth, int(idx.size), tuple(int(v) for v in dist))

    root = make(1, 0, np.arange(len(dataset)))
    queue = deque([(root, np.arange(len(dataset)))])
    next_id = 2
    while queue:
        node, idx = queue.popleft()
        if (np.count_nonzero(node.class_distribution) <= 1 or node.count < params.min_parent
                or node.depth >= params.max_depth):
            continue
        y = y_all[idx]
        best = None
        for name in predictors:
            cand = _evaluate(columns[name][idx], y, variables[name], n_classes, params)
            if cand is None:
                continue
            if best is None or (cand.adjusted_p, -cand.statistic) < (best.adjusted_p, -best.statistic):
                best = cand
        if best is None or best.adjusted_p > params.alpha_split:
            continue

        x = columns[best.variable][idx]
        lookup = best.grouping.lookup(variables[best.variable].size)
        branch = np.where(x == MISSING, -1, lookup[np.where(x == MISSING, 0, x)])
        sizes = np.bincount(branch[branch >= 0], minlength=len(best.grouping))
        branch[branch < 0] = int(np.argmax(sizes))
        node.split = best
        for g in range(len(best.grouping)):
            child = make(next_id, node.depth + 1, idx[branch == g])
            next_id += 1
            node.children.append(child)
            queue.append((child, idx[branch == g]))
    return ChaidTree(root, params, schema, predictors)


def _route(tree: ChaidTree, record: Sequence[int]) -> ChaidNode:
    node = tree.root
    positions = tree.schema.names
    while node.split is not None:
        code = record[positions.index(node.split.variable)]
        if code == MISSING:
            node = node.children[node.missing_child]
        else:
            node = node.children[node.split.grouping.group_of(int(code))]
    return node


def predict(tree: ChaidTree, record: Sequence[int]) -> Prediction:
    """Route one record (domain codes in schema order) to its leaf."""
    if len(record) != len(tree.schema):
        raise SchemaError(f"record has {len(record)} values, tree schema has {len(tree.schema)}")
    for v, code in zip(tree.schema.variables, record):
        if code != MISSING and not 0 <= code < v.size:
            raise SchemaError(f"code {code} outside domain of {v.name}")
    leaf = _route(tree, record)
    total = sum(leaf.class_distribution)
    return Prediction(tree.majority_label(leaf),
                      tuple(c / total for c in leaf.class_distribution), leaf.id)


def predict_dataset(tree: ChaidTree, dataset: Dataset) -> list[Prediction]:
    if dataset.schema.fingerprint() != tree.fingerprint:
        raise SchemaError("dataset schema does not match the tree's schema")
    return [predict(tree, rec) for rec in dataset.records]


def _node_to_dict(tree: ChaidTree, node: ChaidNode) -> dict:
    out = {
        "id": node.id,
        "depth": node.depth,
        "count": node.count,
        "class_distribution": list(node.class_distribution),
        "majority": tree.majority_label(node),
    }
    if node.split is not None:
        s = node.split
        out["split"] = {
            "variable": s.variable,
            "groups": [list(g) for g in s.grouping.groups],
            "statistic": s.statistic,
            "df": s.df,
            "p_value": s.p_value,
            "adjusted_p": s.adjusted_p,
        }
        out["children"] = [_node_to_dict(tree, c) for c in node.children]
    return out


def _node_from_dict(d: dict) -> ChaidNode:
    node = ChaidNode(d["id"], d["depth"], d["count"], tuple(d["class_distribution"]))
    if "split" in d:
        s = d["split"]
        node.split = SplitCandidate(s["variable"], CategoryGrouping(tuple(tuple(g) for g in s["groups"])),
                                    s["statistic"], s["df"], s["p_value"], s["adjusted_p"])
        node.children = [_node_from_dict(c) for c in d["children"]]
    return node


def to_structured(tree: ChaidTree) -> str:
    doc = {
        "format": "chaid-tree",
        "version": FORMAT_VERSION,
        "response": tree.response,
        "fingerprint": tree.fingerprint,
        "params": {
            "alpha_merge": tree.params.alpha_merge,
            "alpha_split": tree.params.alpha_split,
            "min_parent": tree.params.min_parent,
            "min_child": tree.params.min_child,
            "max_depth": tree.params.max_depth,
            "use_bonferroni": tree.params.use_bonferroni,
        },
        "predictors": list(tree.predictors),
        "schema": [{"name": v.name, "kind": v.kind.value, "domain": list(v.domain),
                    "missing": v.missing_token} for v in tree.schema.variables],
        "root": _node_to_dict(tree, tree.root),
    }
    return json.dumps(doc, indent=2) + "\n"


def from_structured(text: str) -> ChaidTree:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not a structured tree file: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != "chaid-tree":
        raise SchemaError("not a structured tree file")
    if doc.get("version") != FORMAT_VERSION:
        raise SchemaError(f"unsupported tree format version {doc.get('version')!r}")
    schema = DatasetSchema(tuple(VariableSchema(v["name"], Kind(v["kind"]), tuple(v["domain"]), v["missing"])
                                 for v in doc["schema"]), doc["response"])
    if schema.fingerprint() != doc["fingerprint"]:
        raise SchemaError("tree file fingerprint does not match its embedded schema")
    return ChaidTree(_node_from_dict(doc["root"]), ChaidParams(**doc["params"]), schema,
                     tuple(doc["predictors"]))


def group_label(var: VariableSchema, group: Sequence[int]) -> str:
    return " or ".join(f"'{var.domain[c]}'" for c in group)


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(tree: ChaidTree) -> str:
    lines = ["digraph chaid {", "  node [shape=box];"]
    for node in tree.nodes():
        label = _dot_escape(f"ID={node.id}, N={node.count}, class={tree.majority_label(node)}")
        if node.split is not None:
            label += "\\n" + _dot_escape(node.split.variable)
        lines.append(f'  n{node.id} [label="{label}"];')
    for node in tree.nodes():
        if node.split is None:
            continue
        var = tree.schema[node.split.variable]
        for group, child in zip(node.split.grouping.groups, node.children):
            lines.append(f'  n{node.id} -> n{child.id} [label="{_dot_escape(group_label(var, group))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_tree(tree: ChaidTree, format: str = "structured") -> str:
    if format == "dot":
        return to_dot(tree)
    if format == "structured":
        return to_structured(tree)
    raise ValueError(f"unknown export format {format!r}")


def format_tree(tree: ChaidTree) -> str:
    """Indented text rendering, one line per node."""
    lines = []

    def walk(node: ChaidNode, prefix: str, indent: int):
        pct = 100.0 * max(node.class_distribution) / node.count
        lines.append(f"{'  ' * indent}{prefix}[ID={node.id}] N={node.count} "
                     f"class={tree.majority_label(node)} ({pct:.1f}%)")
        if node.split is not None:
            var = tree.schema[node.split.variable]
            for group, child in zip(node.split.grouping.groups, node.children):
                walk(child, f"{var.name} = {group_label(var, group)}: ", indent + 1)

    walk(tree.root, "", 0)
    return "\n".join(lines)
