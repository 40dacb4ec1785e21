from __future__ import annotations

import json

import pytest

from seqtrainer.model import ModelConfig
from seqtrainer.stages import (
    PlanError,
    StagePlan,
    StageSpec,
    generate,
    read_pairs,
    run_plan,
    train_stage,
)

TINY = ModelConfig(d_model=32, n_heads=2, n_layers=1, ffn_dim=64, dropout=0.0,
                   max_len=32)


def test_fewshot_must_be_last(tmp_path):
    with pytest.raises(PlanError, match="last"):
        StagePlan(stages=[StageSpec("fewshot", tmp_path / "a"),
                          StageSpec("atomic", tmp_path / "b")],
                  checkpoint_dir=tmp_path)


def test_unknown_stage_rejected(tmp_path):
    with pytest.raises(PlanError, match="unknown stage"):
        StageSpec("warmup", tmp_path / "a")


def test_empty_data_file_fails(tmp_path, pairs_file):
    path = pairs_file([])
    plan = StagePlan(stages=[StageSpec("fewshot", path, epochs=1)],
                     checkpoint_dir=tmp_path / "ck", model_config=TINY)
    with pytest.raises(PlanError, match="empty"):
        train_stage(plan, "fewshot")


def test_loss_decreases_on_smoke_run(tmp_path, pairs_file, echo_pairs):
    path = pairs_file(echo_pairs)
    plan = StagePlan(stages=[StageSpec("atomic", path, epochs=50, batch_size=8,
                                       max_steps=100)],
                     checkpoint_dir=tmp_path / "ck", model_config=TINY)
    result = train_stage(plan, "atomic")
    assert len(result.losses) == 100
    assert result.losses[-1] < result.losses[0]
    assert not result.non_decreasing
    assert (result.checkpoint / "weights.pt").exists()


def test_stage_chaining_extends_vocab(tmp_path, pairs_file):
    first = pairs_file([("alpha beta", "gamma")] * 6, "first.jsonl")
    second = pairs_file([("delta epsilon", "zeta")] * 6, "second.jsonl")
    plan = StagePlan(
        stages=[StageSpec("atomic", first, epochs=2),
                StageSpec("fewshot", second, epochs=2)],
        checkpoint_dir=tmp_path / "ck", model_config=TINY)
    final = run_plan(plan)
    vocab = json.loads((final / "vocab.json").read_text())
    for word in ("alpha", "gamma", "delta", "zeta"):
        assert word in vocab


def test_missing_intermediate_checkpoint_fails_fast(tmp_path, pairs_file):
    first = pairs_file([("a b", "c")] * 4, "first.jsonl")
    second = pairs_file([("d e", "f")] * 4, "second.jsonl")
    plan = StagePlan(
        stages=[StageSpec("atomic", first, epochs=1),
                StageSpec("fewshot", second, epochs=1)],
        checkpoint_dir=tmp_path / "ck", model_config=TINY)
    with pytest.raises(FileNotFoundError, match="missing weights.pt"):
        train_stage(plan, "fewshot")


def test_fewshot_on_16_examples_completes_and_saves(tmp_path, pairs_file):
    pairs = [(f"post number {i} reads fine", "No") for i in range(8)]
    pairs += [(f"post number {i} reads poorly", "Yes") for i in range(8, 16)]
    path = pairs_file(pairs)
    plan = StagePlan(stages=[StageSpec("fewshot", path, epochs=20, batch_size=4)],
                     checkpoint_dir=tmp_path / "ck", model_config=TINY)
    result = train_stage(plan, "fewshot")
    assert (result.checkpoint / "weights.pt").exists()
    assert (result.checkpoint / "vocab.json").exists()


def test_generate_matches_ids_and_order(tmp_path, pairs_file, echo_pairs):
    train = pairs_file(echo_pairs)
    plan = StagePlan(stages=[StageSpec("fewshot", train, epochs=60, batch_size=8)],
                     checkpoint_dir=tmp_path / "ck", model_config=TINY)
    checkpoint = train_stage(plan, "fewshot").checkpoint

    inputs = tmp_path / "inputs.jsonl"
    ids = [f"q{i}" for i in range(5)]
    with open(inputs, "w") as f:
        for i in ids:
            f.write(json.dumps({"id": i, "input": "signal red lamp"}) + "\n")
    out = tmp_path / "gen.jsonl"
    assert generate(checkpoint, inputs, out) == 5
    rows = [json.loads(l) for l in out.read_text().splitlines()]
    assert [r["id"] for r in rows] == ids
    assert all(set(r) == {"id", "generation"} for r in rows)


def test_generate_deterministic(tmp_path, pairs_file, echo_pairs):
    train = pairs_file(echo_pairs)
    plan = StagePlan(stages=[StageSpec("fewshot", train, epochs=30, batch_size=8)],
                     checkpoint_dir=tmp_path / "ck", model_config=TINY)
    checkpoint = train_stage(plan, "fewshot").checkpoint
    inputs = tmp_path / "inputs.jsonl"
    inputs.write_text(json.dumps({"id": "a", "input": "signal blue lamp"}) + "\n")
    generate(checkpoint, inputs, tmp_path / "one.jsonl")
    generate(checkpoint, inputs, tmp_path / "two.jsonl")
    assert (tmp_path / "one.jsonl").read_bytes() == (tmp_path / "two.jsonl").read_bytes()


def test_missing_checkpoint_generate(tmp_path):
    with pytest.raises(FileNotFoundError):
        generate(tmp_path / "nope", tmp_path / "i.jsonl", tmp_path / "o.jsonl")


def test_read_pairs_ignores_extra_fields(tmp_path):
    path = tmp_path / "p.jsonl"
    path.write_text(json.dumps({"id": "x", "input": "a", "output": "b",
                                "origin": "Atomic"}) + "\n")
    assert read_pairs(path) == [("a", "b")]


def test_beam_decode_runs_and_is_deterministic(tmp_path, pairs_file, echo_pairs):
    train = pairs_file(echo_pairs)
    plan = StagePlan(stages=[StageSpec("fewshot", train, epochs=60, batch_size=8)],
                     checkpoint_dir=tmp_path / "ck", model_config=TINY)
    checkpoint = train_stage(plan, "fewshot").checkpoint
    inputs = tmp_path / "inputs.jsonl"
    inputs.write_text(json.dumps({"id": "a", "input": "signal green lamp"}) + "\n")
    generate(checkpoint, inputs, tmp_path / "b1.jsonl", beam_size=3)
    generate(checkpoint, inputs, tmp_path / "b2.jsonl", beam_size=3)
    assert (tmp_path / "b1.jsonl").read_bytes() == (tmp_path / "b2.jsonl").read_bytes()
    row = json.loads((tmp_path / "b1.jsonl").read_text())
    assert row["generation"].startswith("lamp is")
