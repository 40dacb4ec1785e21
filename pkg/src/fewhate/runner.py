"""Experiment orchestration: data emission, adapter invocation, scoring.

One experiment cell is a (seed, size) pair.  For every cell the runner
writes a training file, a validation file, and a single inputs file
covering all evaluation targets, then obtains generations either from an
in-process mock or from an external adapter command.

Adapter contract (external commands): the configured command line gets
four extra positional arguments

    <train.jsonl> <val.jsonl> <inputs.jsonl> <generations.jsonl>

where train/val lines are {id, input, output}, inputs lines are
{id, input}, and the command must write one {id, generation} line per
input id and exit 0.  The environment carries FEWHATE_SEED, FEWHATE_SIZE,
FEWHATE_SCHEME, FEWHATE_STAGES and FEWHATE_HPARAMS for adapters that use
them.  A nonzero exit or missing generations marks the cell failed; the
run continues and aggregates skip failed cells.

Out-of-distribution targets are scored zero-shot: their records appear
only in the inputs file, never in training artifacts, and only the HS
answer of the parsed generation is scored.
"""

from __future__ import annotations

import json
import math
import os
import shlex
import subprocess
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from fewhate import metrics, sampler, scheme
from fewhate.corpus.records import PostRecord, Source, Split
from fewhate.metrics import MetricBundle, TTestResult
from fewhate.mocks import MockMode, mock_generate

TARGETS = ("sbic-val", "sbic-test", "hatexplain", "hs18", "ethos")

_OOD_SOURCES = {
    "hatexplain": Source.HATEXPLAIN,
    "hs18": Source.HS18,
    "ethos": Source.ETHOS,
}

DEFAULT_GRID_ID = "default-v1"


class RunnerError(RuntimeError):
    pass


def load_grid(grid_id: str = DEFAULT_GRID_ID) -> dict:
    """Load a named hyperparameter grid shipped with the package."""
    path = resources.files("fewhate.data").joinpath(f"grids/{grid_id}.json")
    return json.loads(path.read_text("utf-8"))


@dataclass
class AdapterSpec:
    mode: str  # "command" or "mock"
    command: str | None = None
    mock_mode: MockMode | None = None
    pflip: float = 0.0

    def __post_init__(self) -> None:
        if self.mode == "command":
            if not self.command:
                raise RunnerError("command adapter needs a command line")
        elif self.mode == "mock":
            if self.mock_mode is None:
                raise RunnerError("mock adapter needs a mock mode")
        else:
            raise RunnerError(f"unknown adapter mode {self.mode!r}")

    def describe(self) -> dict:
        return {
            "mode": self.mode,
            "command": self.command,
            "mock_mode": self.mock_mode.value if self.mock_mode else None,
            "pflip": self.pflip,
        }


@dataclass
class ExperimentConfig:
    name: str
    scheme: scheme.SchemeConfig
    sizes: list[int]
    seeds: list[int]
    targets: list[str]
    adapter: AdapterSpec
    knowledge_stages: tuple[str, ...] = ()
    grid_id: str = DEFAULT_GRID_ID

    def __post_init__(self) -> None:
        if not self.seeds:
            raise RunnerError("at least one seed required")
        if not self.targets:
            raise RunnerError("at least one evaluation target required")
        unknown = [t for t in self.targets if t not in TARGETS]
        if unknown:
            raise RunnerError(f"unknown targets {unknown}; known: {TARGETS}")

    def describe(self) -> dict:
        return {
            "name": self.name,
            "scheme": self.scheme.fingerprint(),
            "sizes": list(self.sizes),
            "seeds": list(self.seeds),
            "targets": list(self.targets),
            "adapter": self.adapter.describe(),
            "knowledge_stages": list(self.knowledge_stages),
            "grid_id": self.grid_id,
        }


@dataclass
class CellResult:
    seed: int
    size: int
    target: str
    status: str  # "ok" or "failed"
    error: str | None = None
    metrics: MetricBundle | None = None

    def to_json(self) -> dict:
        return {
            "seed": self.seed, "size": self.size, "target": self.target,
            "status": self.status, "error": self.error,
            "metrics": self.metrics.to_json() if self.metrics else None,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CellResult":
        m = MetricBundle.from_json(obj["metrics"]) if obj["metrics"] else None
        return cls(seed=obj["seed"], size=obj["size"], target=obj["target"],
                   status=obj["status"], error=obj["error"], metrics=m)


@dataclass
class EvalReport:
    config: dict
    cells: list[CellResult] = field(default_factory=list)

    def ok_cells(self, target: str, size: int) -> list[CellResult]:
        return [c for c in self.cells
                if c.target == target and c.size == size and c.status == "ok"]

    def seed_scores(self, target: str, size: int) -> dict[int, float]:
        return {c.seed: c.metrics.f1_hs for c in self.ok_cells(target, size)}

    def aggregates(self) -> dict:
        """Cross-seed mean/std of the HS F1 per (target, size), ok cells only."""
        out: dict = {}
        for target in self.config["targets"]:
            per_size = {}
            for size in self.config["sizes"]:
                scores = [c.metrics.f1_hs for c in self.ok_cells(target, size)]
                n = len(scores)
                mean = sum(scores) / n if n else None
                std = None
                if n >= 2:
                    std = math.sqrt(sum((s - mean) ** 2 for s in scores) / (n - 1))
                per_size[str(size)] = {"mean_f1_hs": mean, "std_f1_hs": std, "n": n}
            out[target] = per_size
        return out

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "cells": [c.to_json() for c in self.cells],
            "aggregates": self.aggregates(),
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n", "utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "EvalReport":
        obj = json.loads(Path(path).read_text("utf-8"))
        return cls(config=obj["config"],
                   cells=[CellResult.from_json(c) for c in obj["cells"]])


def _partition(corpus: list[PostRecord]) -> dict[str, list[PostRecord]]:
    parts: dict[str, list[PostRecord]] = {
        "train_pool": [], "val_pool": [], "sbic-test": [],
        "hatexplain": [], "hs18": [], "ethos": [],
    }
    for rec in corpus:
        if rec.source is Source.SBIC:
            if rec.split is Split.TEST:
                parts["sbic-test"].append(rec)
            elif rec.split is Split.VAL_POOL:
                parts["val_pool"].append(rec)
            else:
                parts["train_pool"].append(rec)
        else:
            for name, source in _OOD_SOURCES.items():
                if rec.source is source:
                    parts[name].append(rec)
    return parts


def _eval_id(target: str, record_id: str) -> str:
    return f"{target}::{record_id}"


@dataclass
class _CellPlan:
    train_path: Path
    val_path: Path
    inputs_path: Path
    outputs_path: Path
    # target -> records in input-file order; gold keyed by namespaced id
    target_records: dict[str, list[PostRecord]]
    gold: dict[str, scheme.LinearizedExample]


def _prepare_cell(
    cfg: ExperimentConfig,
    parts: dict[str, list[PostRecord]],
    seed: int,
    size: int,
    train_split: sampler.FewShotSplit,
    cell_dir: Path,
) -> _CellPlan:
    cell_dir.mkdir(parents=True, exist_ok=True)
    by_id = {r.id: r for r in parts["train_pool"] + parts["val_pool"]}

    train_records = [by_id[i] for i in train_split.member_ids]
    train_examples = [scheme.linearize(r, cfg.scheme) for r in train_records]
    train_path = cell_dir / "train.jsonl"
    scheme.write_pairs(train_examples, train_path)

    val_pool = parts["val_pool"] or parts["train_pool"]
    val_split = sampler.build_validation(val_pool, size, seed, exclude=train_split)
    val_records = [by_id[i] for i in val_split.member_ids]
    val_path = cell_dir / "val.jsonl"
    scheme.write_pairs([scheme.linearize(r, cfg.scheme) for r in val_records], val_path)

    target_records: dict[str, list[PostRecord]] = {}
    gold: dict[str, scheme.LinearizedExample] = {}
    input_rows: list[tuple[str, str]] = []
    for target in cfg.targets:
        records = val_records if target == "sbic-val" else parts[target]
        target_records[target] = records
        for rec in records:
            eid = _eval_id(target, rec.id)
            example = scheme.linearize(rec, cfg.scheme, strict=False)
            gold[eid] = scheme.LinearizedExample(
                id=eid, input=example.input, output=example.output, scheme=example.scheme)
            input_rows.append((eid, example.input))
    inputs_path = cell_dir / "inputs.jsonl"
    scheme.write_adapter_inputs(input_rows, inputs_path)

    return _CellPlan(
        train_path=train_path, val_path=val_path, inputs_path=inputs_path,
        outputs_path=cell_dir / "generations.jsonl",
        target_records=target_records, gold=gold,
    )


def _invoke_adapter(cfg: ExperimentConfig, plan: _CellPlan, seed: int, size: int,
                    log_path: Path) -> None:
    if cfg.adapter.mode == "mock":
        rows = mock_generate(list(plan.gold.values()), cfg.scheme, cfg.adapter.mock_mode,
                             seed=seed, salt=size, pflip=cfg.adapter.pflip)
        scheme.write_generations(rows, plan.outputs_path)
        return
    env = dict(os.environ)
    env.update({
        "FEWHATE_SEED": str(seed),
        "FEWHATE_SIZE": str(size),
        "FEWHATE_SCHEME": cfg.scheme.fingerprint(),
        "FEWHATE_STAGES": ",".join(cfg.knowledge_stages),
        "FEWHATE_HPARAMS": json.dumps(load_grid(cfg.grid_id)["default"], sort_keys=True),
    })
    argv = shlex.split(cfg.adapter.command) + [
        str(plan.train_path), str(plan.val_path),
        str(plan.inputs_path), str(plan.outputs_path),
    ]
    proc = subprocess.run(argv, env=env, capture_output=True, text=True)
    log_path.write_text(
        f"command: {argv}\nexit: {proc.returncode}\n"
        f"--- stdout ---\n{proc.stdout}\n--- stderr ---\n{proc.stderr}\n", "utf-8")
    if proc.returncode != 0:
        raise RunnerError(f"adapter exited {proc.returncode}; log: {log_path}")


def _score_cell(cfg: ExperimentConfig, plan: _CellPlan, seed: int, size: int,
                generations: dict[str, str]) -> list[CellResult]:
    results = []
    decomposed = cfg.scheme.variant is not scheme.Variant.BASELINE
    for target in cfg.targets:
        records = plan.target_records[target]
        missing = [r.id for r in records if _eval_id(target, r.id) not in generations]
        if missing:
            results.append(CellResult(
                seed=seed, size=size, target=target, status="failed",
                error=f"missing generations for {len(missing)} inputs "
                      f"(first: {missing[0]})"))
            continue
        parsed = [scheme.parse(generations[_eval_id(target, r.id)], cfg.scheme)
                  for r in records]
        subtasks = decomposed and target in ("sbic-val", "sbic-test")
        bundle = metrics.evaluate(parsed, records, cfg.scheme, with_subtasks=subtasks)
        results.append(CellResult(seed=seed, size=size, target=target,
                                  status="ok", metrics=bundle))
    return results


def run_experiment(cfg: ExperimentConfig, corpus: list[PostRecord],
                   workdir: str | Path) -> EvalReport:
    """Run every (seed, size) cell and score all targets.

    Adapter failures mark the affected cells failed and the run continues;
    failed cells never contribute to aggregates.
    """
    workdir = Path(workdir)
    parts = _partition(corpus)
    report = EvalReport(config=cfg.describe())
    for seed in cfg.seeds:
        splits = sampler.build_nested_splits(parts["train_pool"], cfg.sizes, seed)
        for size in sorted(cfg.sizes):
            cell_dir = workdir / f"seed{seed}" / f"size{size}"
            try:
                plan = _prepare_cell(cfg, parts, seed, size, splits[size], cell_dir)
                _invoke_adapter(cfg, plan, seed, size, cell_dir / "adapter.log")
                generations = scheme.read_generations(plan.outputs_path)
            except (RunnerError, OSError, scheme.SchemeError, sampler.QuotaError) as exc:
                for target in cfg.targets:
                    report.cells.append(CellResult(
                        seed=seed, size=size, target=target,
                        status="failed", error=str(exc)))
                continue
            report.cells.extend(_score_cell(cfg, plan, seed, size, generations))
    return report


def significance(report_a: EvalReport, report_b: EvalReport) -> dict:
    """Per-(target, size) Welch test over the per-seed HS F1 scores.

    Both reports must cover the same sizes and seed counts; the test uses
    the seeds that succeeded in both.
    """
    if report_a.config["sizes"] != report_b.config["sizes"]:
        raise RunnerError("reports cover different sizes")
    if len(report_a.config["seeds"]) != len(report_b.config["seeds"]):
        raise RunnerError("reports cover different seed counts")
    shared_targets = [t for t in report_a.config["targets"]
                      if t in report_b.config["targets"]]
    out: dict = {
        "config_a": report_a.config["name"],
        "config_b": report_b.config["name"],
        "tests": {},
    }
    for target in shared_targets:
        per_size: dict[str, dict] = {}
        for size in report_a.config["sizes"]:
            scores_a = report_a.seed_scores(target, size)
            scores_b = report_b.seed_scores(target, size)
            common = sorted(set(scores_a) & set(scores_b))
            if len(common) < 2:
                per_size[str(size)] = {"error": f"only {len(common)} shared seeds"}
                continue
            result: TTestResult = metrics.welch_t(
                [scores_a[s] for s in common], [scores_b[s] for s in common])
            per_size[str(size)] = {**result.to_json(), "n_seeds": len(common)}
        out["tests"][target] = per_size
    return out
