"""Command line front end: solve, eval, gen, diff.

Exit codes: 0 for an answered verdict (or a clean batch), 1 for a
non-executable problem or a differential mismatch, 2 for usage, IO, or
configuration errors. Resource limits can be overridden process-wide via
the TRILOGIC_LIMITS environment variable holding a JSON object whose keys
name ResourceLimits fields.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from collections import Counter
from pathlib import Path
from typing import Optional, Sequence

from .fol import (
    Answered, ExecError, ParseError, ParseFailed, ResourceLimits,
    DEFAULT_LIMITS, Truth, WorldAssumption,
)
from .harness import (
    ENGINES, ENGINE_DIALECTS, apply_world_assumption, compute_metrics,
    evaluate, load_dataset, load_translations, render_report,
    run_translation,
)
from .resolution import Proved, render_trace, resolution_runs
from .dialects import parse_prover9, parse_z3
from .testkit import (
    DEFAULT_ENGINES, FRAGMENTS, GenConfig, differential_check,
    generate_suite,
)


def _limits_from_env() -> ResourceLimits:
    raw = os.environ.get("TRILOGIC_LIMITS")
    if not raw:
        return DEFAULT_LIMITS
    data = json.loads(raw)
    if not isinstance(data, dict):
        raise ValueError("expected a JSON object")
    names = {f.name for f in dataclasses.fields(ResourceLimits)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ValueError(f"unknown limit field(s): {', '.join(unknown)}")
    for key, value in data.items():
        if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
            raise ValueError(f"{key} must be a positive integer")
    return dataclasses.replace(DEFAULT_LIMITS, **data)


def _gen_config(args: argparse.Namespace) -> GenConfig:
    return GenConfig(
        constants=args.constants,
        unary_predicates=args.unary,
        binary_predicates=args.binary,
        depth=args.depth,
        distractor_facts=args.distractor_facts,
        distractor_rules=args.distractor_rules,
        fragment=args.fragment,
        assumption=WorldAssumption(args.assumption),
        seed=args.seed)


def _parse_depths(value: Optional[str]) -> Optional[list[int]]:
    if value is None:
        return None
    try:
        depths = [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise ValueError(f"bad depth list {value!r}")
    if not depths or any(d < 1 for d in depths):
        raise ValueError(f"bad depth list {value!r}")
    return depths


def cmd_solve(args: argparse.Namespace, limits: ResourceLimits) -> int:
    if args.dialect not in ENGINE_DIALECTS[args.engine]:
        print(f"error: engine {args.engine!r} does not accept dialect "
              f"{args.dialect!r}", file=sys.stderr)
        return 2
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    trace_text: Optional[str] = None
    if args.engine == "resolution" and args.trace:
        try:
            problem = parse_prover9(text) if args.dialect == "prover9" \
                else parse_z3(text)
        except ParseError as e:
            outcome = ParseFailed(e.message, e.span)
        else:
            outcome, proved_pos, proved_neg = resolution_runs(problem, limits)
            proof = proved_pos if isinstance(proved_pos, Proved) else \
                proved_neg if isinstance(proved_neg, Proved) else None
            if proof is not None:
                trace_text = render_trace(proof)
    else:
        outcome = run_translation(text, args.dialect, args.engine, limits)

    outcome = apply_world_assumption(outcome,
                                     WorldAssumption(args.assumption))
    if isinstance(outcome, Answered):
        print(outcome.verdict.value.value)
        if trace_text is not None:
            print(trace_text)
        return 0
    print(str(outcome))
    return 1


def cmd_eval(args: argparse.Namespace, limits: ResourceLimits) -> int:
    try:
        records = load_dataset(args.dataset)
        translations = load_translations(args.translations)
        runs = evaluate(records, translations, args.dialect, args.engine,
                        limits, jobs=args.jobs)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    group_by = [k.strip() for k in args.group_by.split(",") if k.strip()]
    metrics = compute_metrics(runs, group_by or ("dataset",))
    try:
        if args.md:
            Path(args.md).write_bytes(render_report(metrics, "markdown"))
        if args.csv:
            Path(args.csv).write_bytes(render_report(metrics, "csv"))
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    total = len(runs)
    executed = sum(1 for r in runs if isinstance(r.outcome, Answered))
    correct = sum(1 for r in runs if r.correct)
    if total:
        print(f"{total} runs  ExecR {executed / total * 100:.2f}%  "
              f"Acc {correct / total * 100:.2f}%")
    else:
        print("0 runs")
    return 0


def cmd_gen(args: argparse.Namespace, limits: ResourceLimits) -> int:
    del limits
    try:
        cfg = _gen_config(args)
        depths = _parse_depths(args.depths)
        suite = generate_suite(cfg, args.n, depths)
    except (ValueError, ExecError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    labels: Counter[str] = Counter()
    dataset_lines = []
    per_dialect: dict[str, list[str]] = {}
    for gp in suite:
        gold = gp.gold
        if cfg.assumption is WorldAssumption.CWA and gold is Truth.UNKNOWN:
            gold = Truth.FALSE
        labels[gold.value] += 1
        dataset_lines.append(json.dumps({
            "id": gp.id, "gold": gold.value,
            "assumption": cfg.assumption.value, "tags": dict(gp.tags)}))
        for dialect, text in gp.texts.items():
            per_dialect.setdefault(dialect, []).append(json.dumps({
                "id": gp.id, "dialect": dialect, "text": text,
                "provider": "generator"}))

    (out_dir / "dataset.jsonl").write_text(
        "\n".join(dataset_lines) + "\n", encoding="utf-8")
    for dialect in sorted(per_dialect):
        path = out_dir / f"translations_{dialect}.jsonl"
        path.write_text("\n".join(per_dialect[dialect]) + "\n",
                        encoding="utf-8")
    if "pyke" not in per_dialect:
        print("note: no rule-engine texts for this fragment")
    for label in ("True", "False", "Unknown"):
        if labels[label]:
            print(f"{label}: {labels[label]}")
    return 0


def cmd_diff(args: argparse.Namespace, limits: ResourceLimits) -> int:
    try:
        cfg = _gen_config(args)
        depths = _parse_depths(args.depths)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    engines = None
    if args.engines:
        names = [n.strip() for n in args.engines.split(",") if n.strip()]
        unknown = sorted(set(names) - set(DEFAULT_ENGINES))
        if unknown:
            print(f"error: unknown engine(s): {', '.join(unknown)}",
                  file=sys.stderr)
            return 2
        engines = {n: DEFAULT_ENGINES[n] for n in names}
    report = differential_check(args.n, cfg, engines=engines, depths=depths,
                                limits=limits)
    if report.ok:
        print(f"checked {report.checked} problems: all engines agree "
              "with the oracle")
        return 0
    print(f"checked {report.checked} problems: "
          f"{len(report.mismatches)} mismatch(es)")
    for mismatch in report.mismatches[:10]:
        print(f"  {mismatch}")
    first = report.mismatches[0]
    for dialect in sorted(first.texts):
        print(f"--- {first.problem_id} [{dialect}] ---")
        print(first.texts[dialect], end="")
    return 1


def _add_gen_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n", type=int, default=20,
                     help="number of problems to generate")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--fragment", choices=FRAGMENTS, default="horn")
    sub.add_argument("--depth", type=int, default=3,
                     help="rule chain length")
    sub.add_argument("--depths", default=None,
                     help="comma list cycled across problems, e.g. 2,3,5")
    sub.add_argument("--constants", type=int, default=3)
    sub.add_argument("--unary", type=int, default=6,
                     help="unary predicate count")
    sub.add_argument("--binary", type=int, default=0,
                     help="binary predicate count")
    sub.add_argument("--distractor-facts", type=int, default=2)
    sub.add_argument("--distractor-rules", type=int, default=2)
    sub.add_argument("--assumption", choices=["OWA", "CWA"], default="OWA")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trilogic",
        description="First-order reasoning workbench: three solver styles, "
                    "one data model, plus evaluation tooling.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="answer one problem file")
    solve.add_argument("file")
    solve.add_argument("--dialect", choices=["prover9", "z3", "pyke"],
                       required=True)
    solve.add_argument("--engine", choices=list(ENGINES), required=True)
    solve.add_argument("--assumption", choices=["OWA", "CWA"], default="OWA")
    solve.add_argument("--trace", action="store_true",
                       help="print the refutation trace when one exists")
    solve.set_defaults(func=cmd_solve)

    ev = sub.add_parser("eval", help="run a dataset through one engine")
    ev.add_argument("--dataset", required=True)
    ev.add_argument("--translations", required=True)
    ev.add_argument("--dialect", choices=["prover9", "z3", "pyke"],
                    required=True)
    ev.add_argument("--engine", choices=list(ENGINES), required=True)
    ev.add_argument("--md", default=None, help="markdown report path")
    ev.add_argument("--csv", default=None, help="CSV report path")
    ev.add_argument("--jobs", type=int, default=1)
    ev.add_argument("--group-by", default="dataset",
                    help="comma list of tag keys, plus dialect/engine")
    ev.set_defaults(func=cmd_eval)

    gen = sub.add_parser("gen", help="emit a seeded dataset with texts")
    _add_gen_flags(gen)
    gen.add_argument("--out", required=True, help="output directory")
    gen.set_defaults(func=cmd_gen)

    diff = sub.add_parser("diff",
                          help="cross-check engines against the oracle")
    _add_gen_flags(diff)
    diff.add_argument("--engines", default=None,
                      help="comma subset of engines to check")
    diff.set_defaults(func=cmd_diff)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        limits = _limits_from_env()
    except (ValueError, json.JSONDecodeError) as e:
        print(f"error: TRILOGIC_LIMITS: {e}", file=sys.stderr)
        return 2
    return args.func(args, limits)


if __name__ == "__main__":
    sys.exit(main())
