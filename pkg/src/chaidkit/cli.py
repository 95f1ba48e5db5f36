"""Command-line entry point: ``chaidkit <subcommand> ...``.

Human-readable tables go to stdout, machine-readable output to ``--out``.
Exit status is 0 on success, 1 on a module error (the module is named in the
diagnostic) and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import traceback
from pathlib import Path
from typing import Sequence

from . import baseline, chaid, evaluation, feature_selection, rules, schema, synth
from .chaid import ChaidParams

SCHEMA_ENV = "CHAIDKIT_SCHEMA"
_DEFAULTS = ChaidParams()


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _schema(args) -> schema.DatasetSchema:
    path = args.schema or os.environ.get(SCHEMA_ENV)
    return schema.parse_schema(_read(path)) if path else schema.table1_schema()


def _dataset(args, sch: schema.DatasetSchema, optional: Sequence[str] = ()) -> schema.Dataset:
    data, rejects = schema.load_dataset(_read(args.data), sch, provenance=args.data, optional=optional)
    for r in rejects[:10]:
        print(f"rejected row {r.row}: {r.reason}", file=sys.stderr)
    if len(rejects) > 10:
        print(f"... {len(rejects) - 10} more rejected rows", file=sys.stderr)
    policy = getattr(args, "policy", schema.CleaningPolicy.DROP_INCOMPLETE.value)
    cleaned = schema.clean_dataset(data, policy)
    if len(cleaned) < len(data):
        print(f"dropped {len(data) - len(cleaned)} incomplete records", file=sys.stderr)
    return cleaned


def _params(args) -> ChaidParams:
    return ChaidParams(alpha_merge=args.alpha_merge, alpha_split=args.alpha_split,
                       min_parent=args.min_parent, min_child=args.min_child,
                       max_depth=args.max_depth, use_bonferroni=not args.no_bonferroni)


def _predictors(args, data: schema.Dataset) -> list[str]:
    if args.predictors:
        return [p.strip() for p in args.predictors.split(",") if p.strip()]
    scores = feature_selection.score_features(data)
    chosen = feature_selection.filter_by_threshold(scores, args.threshold)
    if not chosen:
        raise ValueError(f"no predictor has chi-square above {args.threshold}")
    return chosen


def _model(args) -> chaid.ChaidTree:
    return chaid.from_structured(_read(args.model))


def cmd_featsel(args) -> None:
    data = _dataset(args, _schema(args))
    scores = feature_selection.score_features(data)
    print(feature_selection.format_scores(scores, with_p=args.by_pvalue))
    if args.by_pvalue:
        chosen = feature_selection.filter_by_pvalue(scores, args.alpha)
        print(f"\nSelected (p < {args.alpha:g}): {', '.join(chosen) or '(none)'}")
    else:
        chosen = feature_selection.filter_by_threshold(scores, args.threshold)
        print(f"\nSelected (chi-square > {args.threshold:g}): {', '.join(chosen) or '(none)'}")
    if args.out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "variable", "statistic", "df", "p_value", "degenerate", "selected"])
        for s in scores:
            w.writerow([s.rank, s.variable, repr(s.statistic), s.df, repr(s.p_value),
                        int(s.degenerate), int(s.variable in chosen)])
        _write(args.out, buf.getvalue())


def cmd_train(args) -> None:
    data = _dataset(args, _schema(args))
    tree = chaid.grow_tree(data, _predictors(args, data), params=_params(args))
    print(chaid.format_tree(tree))
    print(f"\n{len(tree.leaves())} terminal nodes, depth {tree.depth}")
    _write(args.out, chaid.to_structured(tree))


def cmd_predict(args) -> None:
    tree = _model(args)
    sch = tree.schema
    data, rejects = schema.load_dataset(_read(args.data), sch, optional=(sch.response,))
    for r in rejects:
        print(f"rejected row {r.row}: {r.reason}", file=sys.stderr)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    column = f"predicted_{sch.response}"
    w.writerow(list(sch.names) + [column, "leaf_id"])
    for i, rec in enumerate(data.records):
        labels = data.labels(i)
        pred = chaid.predict(tree, rec)
        w.writerow([labels[n] for n in sch.names] + [pred.label, pred.leaf_id])
    _write(args.out, buf.getvalue())


def cmd_rules(args) -> None:
    tree = _model(args)
    ruleset = rules.prune_rules(rules.extract_rules(tree), args.min_support)
    text = rules.format_ruleset(ruleset) + "\n"
    print(f"{len(ruleset)} rules (min support {args.min_support})")
    _write(args.out, text) if args.out else sys.stdout.write(text)


def _report_json(report: evaluation.CvReport, extra: dict) -> str:
    m = report.metrics
    doc = dict(extra)
    doc.update({
        "k": report.folds.k,
        "seed": report.folds.seed,
        "fold_sizes": report.folds.sizes(),
        "fold_accuracies": list(report.fold_accuracies),
        "labels": list(report.confusion.labels),
        "confusion": report.confusion.counts.tolist(),
        "accuracy_percent": m.accuracy,
        "recall_percent": m.recalls,
        "unobserved_classes": list(m.flagged),
    })
    return json.dumps(doc, indent=2) + "\n"


def cmd_eval(args) -> None:
    data = _dataset(args, _schema(args))
    predictors = _predictors(args, data)
    params = _params(args)
    report = evaluation.cross_validate(data, params, args.k, args.seed, predictors)
    print(f"Predictors: {', '.join(predictors)}")
    print(f"{args.k}-fold accuracies: " + " ".join(f"{a:.4f}" for a in report.fold_accuracies))
    print(evaluation.format_confusion(report.confusion, "Classification matrix (observed x predicted)"))
    if args.out:
        _write(args.out, _report_json(report, {"model": "chaid", "predictors": predictors}))


def cmd_synth(args) -> None:
    sch = _schema(args)
    spec = synth.parse_spec(_read(args.spec), sch) if args.spec else synth.default_spec(sch)
    data = synth.generate(sch, args.n, args.seed, spec)
    _write(args.out, data.to_csv())
    if args.out:
        print(f"wrote {len(data)} records to {args.out}")


def cmd_export(args) -> None:
    _write(args.out, chaid.export_tree(_model(args), args.format))


def cmd_baseline(args) -> None:
    data = _dataset(args, _schema(args))
    predictors = [p.strip() for p in args.predictors.split(",")] if args.predictors else None
    model = baseline.fit_baseline(data, predictors)
    train_acc = baseline.training_accuracy(model, data)
    report = baseline.cross_validate_baseline(data, args.k, args.seed, predictors)
    print(f"Least-squares baseline on {len(model.predictors)} encoded predictors"
          + (" (damped)" if model.damped else ""))
    print(f"Training accuracy: {evaluation.percent(round(train_acc * len(data)), len(data)):.2f}%")
    print(evaluation.format_confusion(report.confusion, f"{args.k}-fold classification matrix"))
    if args.out:
        _write(args.out, _report_json(report, {"model": "ols", "training_accuracy": train_acc,
                                               "intercept": model.intercept,
                                               "coefficients": dict(zip(model.predictors,
                                                                        model.coefficients.tolist()))}))


def _add_data(p, schema_too=True):
    p.add_argument("--data", required=True, help="CSV file with a header row")
    if schema_too:
        p.add_argument("--schema", help=f"schema file (default: ${SCHEMA_ENV} or the bundled student schema)")
        p.add_argument("--policy", default="drop_incomplete", choices=[c.value for c in schema.CleaningPolicy])


def _add_params(p):
    g = p.add_argument_group("CHAID parameters")
    g.add_argument("--alpha-merge", type=float, default=_DEFAULTS.alpha_merge)
    g.add_argument("--alpha-split", type=float, default=_DEFAULTS.alpha_split)
    g.add_argument("--min-parent", type=int, default=_DEFAULTS.min_parent)
    g.add_argument("--min-child", type=int, default=_DEFAULTS.min_child)
    g.add_argument("--max-depth", type=int, default=_DEFAULTS.max_depth)
    g.add_argument("--no-bonferroni", action="store_true")


def _add_selection(p):
    p.add_argument("--threshold", type=float, default=feature_selection.DEFAULT_THRESHOLD,
                   help="keep predictors whose chi-square exceeds this (default 100)")
    p.add_argument("--predictors", help="comma-separated predictor list; overrides --threshold")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chaidkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("featsel", help="rank predictors by chi-square")
    _add_data(p)
    p.add_argument("--threshold", type=float, default=feature_selection.DEFAULT_THRESHOLD)
    p.add_argument("--by-pvalue", action="store_true", help="filter on p-value < --alpha instead")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", help="write scores as CSV")
    p.set_defaults(func=cmd_featsel)

    p = sub.add_parser("train", help="grow a CHAID tree")
    _add_data(p)
    _add_selection(p)
    _add_params(p)
    p.add_argument("--out", default="model.tree")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify records with a stored tree")
    p.add_argument("--model", required=True)
    _add_data(p, schema_too=False)
    p.add_argument("--out", help="CSV output (default stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("rules", help="list IF-THEN rules of a stored tree")
    p.add_argument("--model", required=True)
    p.add_argument("--min-support", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("eval", help="stratified k-fold cross-validation")
    _add_data(p)
    _add_selection(p)
    _add_params(p)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--schema")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spec", help="effect spec file (default: bundled planted effects)")
    p.add_argument("--out", help="CSV output (default stdout)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("export", help="export a stored tree")
    p.add_argument("--model", required=True)
    p.add_argument("--format", choices=["dot", "structured"], default="dot")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("baseline", help="least-squares baseline accuracy")
    _add_data(p)
    p.add_argument("--predictors")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_baseline)
    return parser


def _origin(exc: BaseException) -> str:
    """Name of the innermost package module in the traceback."""
    pkg = Path(__file__).parent
    name = "cli"
    for frame in traceback.extract_tb(exc.__traceback__):
        path = Path(frame.filename)
        if path.parent == pkg:
            name = path.stem
    return name


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except BrokenPipeError:
        sys.stdout = open(os.devnull, "w")
        return 0
    except OSError as exc:
        print(f"chaidkit {args.command}: error [io]: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, KeyError) as exc:
        print(f"chaidkit {args.command}: error [{_origin(exc)}]: {exc}", file=sys.stderr)
        return 1
    return 0


def run(argv: Sequence[str]) -> int:
    """Like :func:`main` but returns 2 instead of raising on usage errors."""
    try:
        return main(argv)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
