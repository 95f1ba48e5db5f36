import pytest

from chaidkit.chaid import ChaidNode, ChaidParams, ChaidTree, SplitCandidate, grow_tree, predict
from chaidkit.rules import (Condition, Rule, RuleSet, apply_rules, extract_rules, format_rule, format_ruleset,
                            prune_rules)
from chaidkit.schema import MISSING, table1_schema
from chaidkit.stats import CategoryGrouping
from chaidkit.synth import generate, planted_spec

from conftest import make_dataset
from test_chaid import NOMINAL2, planted_binary, random_records


def test_single_node_tree_has_no_rules():
    tree = grow_tree(make_dataset(NOMINAL2, [("p", "D")] * 4))
    rs = extract_rules(tree)
    assert len(rs) == 0 and rs.default_class == "D"
    assert apply_rules(rs, (0, 2)) == ("D", None)


def test_depth_one_tree():
    tree = grow_tree(planted_binary())
    rs = extract_rules(tree)
    assert len(rs) == 2
    assert all(len(r.conditions) == 1 for r in rs.rules)
    assert [r.consequent for r in rs.rules] == ["B", "C"]
    assert all(r.confidence == 1.0 for r in rs.rules)
    assert sum(r.support for r in rs.rules) == tree.root.count


def _rules(supports):
    cond = (Condition("X", (0,)),)
    return RuleSet(tuple(Rule(cond, "A", s, 1.0, i) for i, s in enumerate(supports)), "B", NOMINAL2)


def test_prune():
    rs = _rules([3, 50, 120])
    assert prune_rules(rs, 0) == rs
    assert [r.support for r in prune_rules(rs, 10).rules] == [50, 120]
    empty = prune_rules(rs, 121)
    assert len(empty) == 0 and empty.default_class == "B"
    with pytest.raises(ValueError):
        prune_rules(rs, -1)


def test_apply_first_match_and_default():
    assert apply_rules(_rules([]), (0, 0)) == ("B", None)
    assert apply_rules(_rules([5]), (0, 0)) == ("A", 0)
    assert apply_rules(_rules([5]), (1, 0)) == ("B", None)
    assert apply_rules(_rules([5]), (MISSING, 0)) == ("B", None)


def test_adjacent_conditions_intersect():
    schema = table1_schema().select(["XMARK-Grade", "MED"])
    dist = (0, 5, 5, 0, 0, 0, 0)
    leaf = lambda i, d: ChaidNode(i, d, 10, dist)
    inner = ChaidNode(2, 1, 20, (0, 10, 10, 0, 0, 0, 0),
                      SplitCandidate("XMARK-Grade", CategoryGrouping(((0,), (1,), (2, 3, 4, 5, 6))), 9, 2, 0.01, 0.01),
                      [leaf(4, 2), leaf(5, 2), leaf(6, 2)])
    root = ChaidNode(1, 0, 30, (0, 15, 15, 0, 0, 0, 0),
                     SplitCandidate("XMARK-Grade", CategoryGrouping(((0, 1, 2), (3, 4, 5, 6))), 9, 1, 0.01, 0.01),
                     [inner, leaf(3, 1)])
    tree = ChaidTree(root, ChaidParams(), schema, ("XMARK-Grade",))
    rs = extract_rules(tree)
    assert [r.conditions for r in rs.rules] == [
        (Condition("XMARK-Grade", (0,)),),
        (Condition("XMARK-Grade", (1,)),),
        (Condition("XMARK-Grade", (2,)),),
        (Condition("XMARK-Grade", (3, 4, 5, 6)),),
    ]
    assert format_rule(rs.rules[2], schema) == "IF XMARK-Grade = 'B' THEN HScGrade = 'A'"


def test_table3_style_text():
    schema = table1_schema().select(["MED", "XMARK-Grade", "StMe"])
    rule = Rule((Condition("MED", (1,)), Condition("XMARK-Grade", (2, 3)), Condition("StMe", (0,))),
                "C", 40, 0.6, 9)
    assert format_rule(rule, schema) == \
        "IF MED = 'English' and XMARK-Grade = 'B' or 'C' and StMe = 'state' THEN HScGrade = 'C'"
    text = format_ruleset(RuleSet((rule,), "B", schema))
    assert "Rules for HScGrade='C'" in text and "support=40" in text


@pytest.mark.parametrize("seed", range(5))
def test_rules_equal_tree(ten, seed):
    ds = generate(ten, 1200, seed, planted_spec(ten, ["XMARK-Grade", "FAM-Size", "Comm", "MED", "BMI"][seed], 0.8))
    tree = grow_tree(ds, params=ChaidParams(min_parent=10, min_child=5))
    rs = extract_rules(tree)
    assert sum(r.support for r in rs.rules) == tree.root.count or tree.root.is_leaf
    for rec in random_records(ten, 1000, seed + 100):
        assert apply_rules(rs, rec)[0] == predict(tree, rec).label


def test_pruning_monotone(ten):
    tree = grow_tree(generate(ten, 1500, 2, planted_spec(ten, "LArea", 0.9)),
                     params=ChaidParams(min_parent=10, min_child=5))
    rs = extract_rules(tree)
    for a in range(0, 200, 7):
        for b in range(0, a + 1, 7):
            assert set(prune_rules(rs, a).rules) <= set(prune_rules(rs, b).rules)
