from __future__ import annotations

import json

import pytest

from fewhate.cli import main
from fewhate.corpus.records import Source, Split, read_corpus


@pytest.fixture(scope="module")
def demo(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo")
    assert main(["make-demo", "--out-dir", str(out), "--posts", "200",
                 "--seed", "0"]) == 0
    return out


@pytest.fixture(scope="module")
def corpus_file(demo, tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus") / "corpus.jsonl"
    rc = main([
        "ingest",
        "--sbic-train", str(demo / "sbic_train.csv"),
        "--sbic-dev", str(demo / "sbic_dev.csv"),
        "--sbic-test", str(demo / "sbic_test.csv"),
        "--hatexplain", str(demo / "hatexplain" / "dataset.json"),
        "--hatexplain-divisions", str(demo / "hatexplain" / "post_id_divisions.json"),
        "--hs18", str(demo / "hs18" / "annotations_metadata.csv"),
        "--hs18-files", str(demo / "hs18" / "all_files"),
        "--ethos", str(demo / "ethos.csv"),
        "--out", str(out),
    ])
    assert rc == 0
    return out


def test_ingest_produces_exact_field_names(corpus_file):
    line = json.loads(corpus_file.read_text().splitlines()[0])
    assert set(line) == {"id", "text", "offensive", "target_type", "groups",
                         "implication", "hs", "source", "split"}


def test_ingest_covers_all_sources(corpus_file):
    records = read_corpus(corpus_file)
    sources = {r.source for r in records}
    assert sources == {Source.SBIC, Source.HATEXPLAIN, Source.HS18, Source.ETHOS}
    assert any(r.split is Split.VAL_POOL for r in records)


def test_build_splits_and_linearize(corpus_file, tmp_path):
    splits_dir = tmp_path / "splits"
    assert main(["build-splits", "--corpus", str(corpus_file),
                 "--sizes", "16,32", "--seeds", "0-2", "--validation",
                 "--out-dir", str(splits_dir)]) == 0
    manifests = sorted(p.name for p in splits_dir.iterdir())
    assert "train_seed0_size16.json" in manifests
    assert "val_seed2_size32.json" in manifests
    assert len(manifests) == 12  # (train+val) x 3 seeds x 2 sizes

    pairs = tmp_path / "pairs.jsonl"
    assert main(["linearize", "--corpus", str(corpus_file),
                 "--manifest", str(splits_dir / "train_seed0_size16.json"),
                 "--scheme", "full", "--out", str(pairs)]) == 0
    rows = [json.loads(l) for l in pairs.read_text().splitlines()]
    assert len(rows) == 16
    assert set(rows[0]) == {"id", "input", "output"}
    assert rows[0]["input"].startswith("Post: ")


def test_run_eval_significance_report_flow(corpus_file, tmp_path):
    report_a = tmp_path / "a.json"
    assert main(["run", "--corpus", str(corpus_file), "--workdir",
                 str(tmp_path / "wa"), "--out", str(report_a), "--name", "echo",
                 "--scheme", "full", "--sizes", "16", "--seeds", "0,1",
                 "--targets", "sbic-test,ethos", "--mock", "gold-echo"]) == 0
    report_b = tmp_path / "b.json"
    assert main(["run", "--corpus", str(corpus_file), "--workdir",
                 str(tmp_path / "wb"), "--out", str(report_b), "--name", "noisy",
                 "--scheme", "full", "--sizes", "16", "--seeds", "0,1",
                 "--targets", "sbic-test,ethos", "--mock", "noisy-gold",
                 "--pflip", "0.4"]) == 0
    obj = json.loads(report_a.read_text())
    assert obj["aggregates"]["sbic-test"]["16"]["mean_f1_hs"] == 1.0

    gen_file = tmp_path / "wa" / "seed0" / "size16" / "generations.jsonl"
    assert gen_file.exists()

    sig = tmp_path / "sig.json"
    assert main(["significance", "--report-a", str(report_a),
                 "--report-b", str(report_b), "--out", str(sig)]) == 0
    tests = json.loads(sig.read_text())["tests"]
    assert "sbic-test" in tests and "16" in tests["sbic-test"]

    tables = tmp_path / "tables"
    assert main(["report", "--reports", str(report_a), str(report_b),
                 "--labels", "Echo,Noisy", "--out-dir", str(tables)]) == 0
    table = (tables / "table_sbic-test.md").read_text()
    assert table.startswith("| Model | 16 |")
    assert "Echo" in table and "Noisy" in table
    assert (tables / "cells.jsonl").exists()


def test_eval_standalone(corpus_file, tmp_path):
    # construct generations for the ethos target by echoing gold hs labels
    records = [r for r in read_corpus(corpus_file) if r.source is Source.ETHOS]
    gen = tmp_path / "gen.jsonl"
    with open(gen, "w") as f:
        for r in records:
            f.write(json.dumps({"id": r.id, "generation": "Yes" if r.hs else "No"}) + "\n")
    out = tmp_path / "metrics.json"
    assert main(["eval", "--corpus", str(corpus_file), "--generations", str(gen),
                 "--target", "ethos", "--scheme", "baseline", "--out", str(out)]) == 0
    bundle = json.loads(out.read_text())
    assert bundle["f1_hs"] == 1.0 and bundle["invalid_rate"] == 0.0


def test_build_knowledge_cli(demo, tmp_path):
    out_dir = tmp_path / "knowledge"
    assert main(["build-knowledge", "--atomic", str(demo / "atomic.tsv"),
                 "--stereoset", str(demo / "stereoset.json"),
                 "--seed", "3", "--out-dir", str(out_dir)]) == 0
    atomic = (out_dir / "atomic_stage.jsonl").read_text().splitlines()
    stereo = (out_dir / "stereoset_stage.jsonl").read_text().splitlines()
    assert len(atomic) == 1200 and len(stereo) == 120
    row = json.loads(atomic[0])
    assert set(row) == {"input", "output", "origin"}


def test_run_requires_an_adapter(corpus_file, tmp_path):
    with pytest.raises(SystemExit):
        main(["run", "--corpus", str(corpus_file), "--workdir", str(tmp_path / "w"),
              "--out", str(tmp_path / "r.json"), "--sizes", "16", "--seeds", "0"])
