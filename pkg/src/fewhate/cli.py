"""Command-line entry points.

    fewhate ingest          normalize raw corpus files into one corpus file
    fewhate build-knowledge render knowledge-infusion stage files
    fewhate build-splits    build nested few-shot split manifests
    fewhate linearize       emit {id, input, output} files for a manifest
    fewhate run             run a full experiment (mock or external adapter)
    fewhate eval            score a generations file against gold labels
    fewhate significance    Welch tests between two experiment reports
    fewhate report          render score tables from experiment reports
    fewhate make-demo       write synthetic input files for smoke runs
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from fewhate import knowledge, metrics, reporting, runner, sampler, scheme, synth
from fewhate.corpus import ood, records, sbic
from fewhate.mocks import MockMode


def _parse_sizes(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s.strip()]


def _parse_seeds(text: str) -> list[int]:
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    return seeds


def _scheme_from_args(args) -> scheme.SchemeConfig:
    order = None
    if args.order:
        order = tuple(scheme.Subtask(p.strip().upper()) for p in args.order.split(","))
    if args.scheme == "baseline":
        return scheme.baseline()
    if args.scheme == "minimal":
        return scheme.minimal()
    if args.scheme == "full":
        return scheme.full_subtasks(order or scheme.DEFAULT_FULL_ORDER)
    if args.scheme == "implication":
        return scheme.with_implication()
    raise SystemExit(f"unknown scheme {args.scheme!r}")


def _add_scheme_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", default="full",
                   choices=["baseline", "minimal", "full", "implication"])
    p.add_argument("--order", default=None,
                   help="comma list of subtasks for --scheme full, e.g. OFF,GD,HS,GI")


def _cmd_ingest(args) -> int:
    out: list[records.PostRecord] = []
    summary: dict[str, object] = {}
    sbic_inputs = (("sbic_train", args.sbic_train, records.Split.TRAIN_POOL),
                   ("sbic_dev", args.sbic_dev, records.Split.VAL_POOL),
                   ("sbic_test", args.sbic_test, records.Split.TEST))
    for name, path, split in sbic_inputs:
        if path:
            annotations = sbic.load_sbic(path)
            recs, warnings = sbic.aggregate_sbic(annotations, split=split)
            out.extend(recs)
            summary[name] = {"posts": len(recs), "warnings": len(warnings)}
            for w in warnings[:10]:
                print(f"warning [{name}]: {w}", file=sys.stderr)
    if args.hatexplain:
        recs, ties = ood.load_hatexplain(
            args.hatexplain, args.hatexplain_divisions,
            split=args.hatexplain_split, offensive_as_hs=args.hatexplain_offensive_as_hs)
        out.extend(recs)
        summary["hatexplain"] = {"posts": len(recs), "ties": ties}
    if args.hs18:
        recs, excluded = ood.load_hs18(args.hs18, args.hs18_files)
        out.extend(recs)
        summary["hs18"] = {"posts": len(recs), "excluded": excluded}
    if args.ethos:
        recs = ood.load_ethos(args.ethos)
        out.extend(recs)
        summary["ethos"] = {"posts": len(recs)}
    if not out:
        raise SystemExit("no input files given")
    records.write_corpus(out, args.out)
    print(json.dumps({"total": len(out), **summary}, indent=2, sort_keys=True))
    return 0


def _cmd_build_knowledge(args) -> int:
    stages = tuple(s.strip() for s in args.stages.split(",") if s.strip())
    tuples: list = []
    entries: list = []
    skipped: dict[str, int] = {}
    if "atomic" in stages:
        if not args.atomic:
            raise SystemExit("--atomic required for the atomic stage")
        tuples, skipped["atomic_load"] = knowledge.load_atomic_tsv(args.atomic)
    if "stereoset" in stages:
        if not args.stereoset:
            raise SystemExit("--stereoset required for the stereoset stage")
        entries, skipped["stereoset_load"] = knowledge.load_stereoset(args.stereoset)
    result = knowledge.build_knowledge_corpus(tuples, entries, args.out_dir,
                                              seed=args.seed, stages=stages)
    print(json.dumps({
        "files": {k: str(v) for k, v in result.files.items()},
        "counts": result.counts,
        "skipped": {**skipped, **result.skipped},
    }, indent=2, sort_keys=True))
    return 0


def _cmd_build_splits(args) -> int:
    corpus = records.read_corpus(args.corpus)
    pool = [r for r in corpus if r.source is records.Source.SBIC
            and r.split is records.Split.TRAIN_POOL]
    val_pool = [r for r in corpus if r.source is records.Source.SBIC
                and r.split is records.Split.VAL_POOL] or pool
    sizes = _parse_sizes(args.sizes)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = 0
    for seed in _parse_seeds(args.seeds):
        splits = sampler.build_nested_splits(pool, sizes, seed)
        for size, split in splits.items():
            report = sampler.verify_quotas(split, pool)
            if report.violations:
                raise SystemExit(f"seed {seed} size {size}: {report.violations}")
            sampler.write_manifest(split, report, out_dir / f"train_seed{seed}_size{size}.json")
            written += 1
            if args.validation:
                val = sampler.build_validation(val_pool, size, seed, exclude=split)
                val_report = sampler.verify_quotas(val, val_pool)
                sampler.write_manifest(val, val_report,
                                       out_dir / f"val_seed{seed}_size{size}.json")
                written += 1
    print(f"wrote {written} manifests to {out_dir}")
    return 0


def _cmd_linearize(args) -> int:
    corpus = {r.id: r for r in records.read_corpus(args.corpus)}
    split = sampler.read_manifest(args.manifest)
    config = _scheme_from_args(args)
    members = [corpus[i] for i in split.member_ids]
    if args.inputs_only:
        rows = [(r.id, scheme.linearize_input(r.text, config)) for r in members]
        n = scheme.write_adapter_inputs(rows, args.out)
    else:
        n = scheme.write_pairs((scheme.linearize(r, config) for r in members), args.out)
    print(f"wrote {n} lines to {args.out}")
    return 0


def _cmd_run(args) -> int:
    corpus = records.read_corpus(args.corpus)
    if args.adapter_cmd and args.mock:
        raise SystemExit("choose either --adapter-cmd or --mock")
    if args.adapter_cmd:
        adapter = runner.AdapterSpec(mode="command", command=args.adapter_cmd)
    elif args.mock:
        adapter = runner.AdapterSpec(mode="mock", mock_mode=MockMode(args.mock),
                                     pflip=args.pflip)
    else:
        raise SystemExit("an adapter is required: --adapter-cmd or --mock")
    cfg = runner.ExperimentConfig(
        name=args.name,
        scheme=_scheme_from_args(args),
        sizes=_parse_sizes(args.sizes),
        seeds=_parse_seeds(args.seeds),
        targets=[t.strip() for t in args.targets.split(",") if t.strip()],
        adapter=adapter,
        knowledge_stages=tuple(s for s in args.stages.split(",") if s.strip()),
        grid_id=args.grid,
    )
    report = runner.run_experiment(cfg, corpus, args.workdir)
    report.save(args.out)
    failed = sum(1 for c in report.cells if c.status != "ok")
    print(f"report written to {args.out} ({len(report.cells)} cells, {failed} failed)")
    return 0


def _cmd_eval(args) -> int:
    corpus = records.read_corpus(args.corpus)
    config = _scheme_from_args(args)
    if args.target == "sbic-val":
        if not args.manifest:
            raise SystemExit("--manifest required for target sbic-val")
        by_id = {r.id: r for r in corpus}
        golds = [by_id[i] for i in sampler.read_manifest(args.manifest).member_ids]
    elif args.target == "sbic-test":
        golds = [r for r in corpus if r.source is records.Source.SBIC
                 and r.split is records.Split.TEST]
    else:
        source = {"hatexplain": records.Source.HATEXPLAIN,
                  "hs18": records.Source.HS18,
                  "ethos": records.Source.ETHOS}[args.target]
        golds = [r for r in corpus if r.source is source]
    generations = scheme.read_generations(args.generations)
    missing = [g.id for g in golds if g.id not in generations]
    if missing:
        raise SystemExit(f"missing generations for {len(missing)} gold ids "
                         f"(first: {missing[0]})")
    parsed = [scheme.parse(generations[g.id], config) for g in golds]
    subtasks = config.variant is not scheme.Variant.BASELINE \
        and args.target in ("sbic-val", "sbic-test")
    bundle = metrics.evaluate(parsed, golds, config, with_subtasks=subtasks)
    payload = json.dumps(bundle.to_json(), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n", "utf-8")
    print(payload)
    return 0


def _cmd_significance(args) -> int:
    result = runner.significance(runner.EvalReport.load(args.report_a),
                                 runner.EvalReport.load(args.report_b))
    payload = json.dumps(result, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n", "utf-8")
    print(payload)
    return 0


def _cmd_report(args) -> int:
    reports = [runner.EvalReport.load(p) for p in args.reports]
    labels = args.labels.split(",") if args.labels else None
    written = reporting.emit_report(reports, args.out_dir, labels=labels)
    for name, path in written.items():
        print(f"{name}: {path}")
    return 0


def _cmd_make_demo(args) -> int:
    paths = synth.write_demo_inputs(args.out_dir, posts=args.posts, seed=args.seed)
    print(json.dumps({k: str(v) for k, v in paths.items()}, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fewhate", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize raw corpus files")
    p.add_argument("--sbic-train")
    p.add_argument("--sbic-dev")
    p.add_argument("--sbic-test")
    p.add_argument("--hatexplain")
    p.add_argument("--hatexplain-divisions")
    p.add_argument("--hatexplain-split", default="test")
    p.add_argument("--hatexplain-offensive-as-hs", action="store_true")
    p.add_argument("--hs18")
    p.add_argument("--hs18-files")
    p.add_argument("--ethos")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("build-knowledge", help="render knowledge stage files")
    p.add_argument("--atomic")
    p.add_argument("--stereoset")
    p.add_argument("--stages", default="atomic,stereoset")
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_build_knowledge)

    p = sub.add_parser("build-splits", help="build nested few-shot splits")
    p.add_argument("--corpus", required=True)
    p.add_argument("--sizes", default="16,32,64,128,256,512,1024")
    p.add_argument("--seeds", default="0-9")
    p.add_argument("--validation", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_build_splits)

    p = sub.add_parser("linearize", help="emit id/input/output files")
    p.add_argument("--corpus", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--inputs-only", action="store_true")
    p.add_argument("--out", required=True)
    _add_scheme_flags(p)
    p.set_defaults(func=_cmd_linearize)

    p = sub.add_parser("run", help="run a full experiment")
    p.add_argument("--corpus", required=True)
    p.add_argument("--workdir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="experiment")
    p.add_argument("--sizes", default="16,32,64,128,256,512,1024")
    p.add_argument("--seeds", default="0-9")
    p.add_argument("--targets", default="sbic-test")
    p.add_argument("--adapter-cmd")
    p.add_argument("--mock", choices=[m.value for m in MockMode])
    p.add_argument("--pflip", type=float, default=0.0)
    p.add_argument("--stages", default="")
    p.add_argument("--grid", default=runner.DEFAULT_GRID_ID)
    _add_scheme_flags(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("eval", help="score one generations file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--generations", required=True)
    p.add_argument("--target", required=True,
                   choices=list(runner.TARGETS))
    p.add_argument("--manifest")
    p.add_argument("--out")
    _add_scheme_flags(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("significance", help="Welch tests between two reports")
    p.add_argument("--report-a", required=True)
    p.add_argument("--report-b", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_significance)

    p = sub.add_parser("report", help="render score tables")
    p.add_argument("--reports", nargs="+", required=True)
    p.add_argument("--labels", help="comma list matching --reports")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("make-demo", help="write synthetic demo inputs")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--posts", type=int, default=600)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_make_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
