"""How often does CHAID split the root when nothing is planted?

The Bonferroni multiplier corrects for the category-merging search within one
predictor, not for picking the best of several predictors. With p independent
predictors the root split rate should therefore sit near or below
1 - (1 - alpha_split)^p. Without the multiplier the merge search pushes it
well above that.

    python3 scripts/null_calibration.py --seeds 200 --n 600
"""
import argparse

from chaidkit.chaid import ChaidParams, grow_tree
from chaidkit.schema import table1_schema
from chaidkit.synth import generate, uniform_spec

PREDICTORS = ("SEX", "BMI", "Comm", "FAM-Size", "LArea", "No-EB", "TransSchool", "XMARK-Grade", "MED", "SpOutdoor")


def false_split_rate(schema, n, seeds, params):
    spec = uniform_spec(schema)
    splits = sum(not grow_tree(generate(schema, n, seed, spec), params=params).root.is_leaf
                 for seed in range(seeds))
    return splits / seeds


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--n", type=int, default=600)
    args = ap.parse_args()
    schema = table1_schema().select(PREDICTORS)
    for bonferroni in (True, False):
        params = ChaidParams(use_bonferroni=bonferroni, max_depth=1)
        rate = false_split_rate(schema, args.n, args.seeds, params)
        bound = 1 - (1 - params.alpha_split) ** len(PREDICTORS)
        print(f"bonferroni={str(bonferroni):<5}  root split rate {rate:.3f}  (reference {bound:.3f})")


if __name__ == "__main__":
    main()
