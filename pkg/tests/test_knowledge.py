from __future__ import annotations

import json

import pytest

from fewhate import synth
from fewhate.knowledge import (
    RELATION_TEMPLATES,
    AtomicTuple,
    KnowledgeError,
    Origin,
    StereoEntry,
    build_knowledge_corpus,
    expand_atomic,
    linearize_stereoset,
    load_atomic_tsv,
    load_stereoset,
)


def test_relation_table_has_exactly_23_entries():
    assert len(RELATION_TEMPLATES) == 23


def test_expand_atomic_golden_all_relations(data_dir):
    golden = json.loads((data_dir / "atomic_golden.json").read_text("utf-8"))
    assert {g["relation"] for g in golden} == set(RELATION_TEMPLATES)
    for case in golden:
        ex = expand_atomic(AtomicTuple(case["head"], case["relation"], case["tail"]))
        assert ex.input == case["input"], case["relation"]
        assert ex.output == case["output"]
        assert ex.origin is Origin.ATOMIC


def test_expand_atomic_worked_examples():
    ex = expand_atomic(AtomicTuple("PersonX goes jogging", "xNeed",
                                   "to put on running shoes"))
    assert ex.input == "But before PersonX goes jogging, PersonX needed"
    assert ex.output == "to put on running shoes"
    ex = expand_atomic(AtomicTuple("a knife", "ObjectUse", "cutting bread"))
    assert ex.input == "a knife is used for"


def test_expand_atomic_no_slot_residue():
    for relation in RELATION_TEMPLATES:
        ex = expand_atomic(AtomicTuple("some head", relation, "some tail"))
        assert "{0}" not in ex.input and "{1}" not in ex.input
        assert "{0}" not in ex.output and "{1}" not in ex.output


def test_expand_atomic_unknown_relation():
    with pytest.raises(KnowledgeError, match="xFoo"):
        expand_atomic(AtomicTuple("head", "xFoo", "tail"))


def test_linearize_stereoset_format():
    ex = linearize_stereoset(StereoEntry(
        target="Cape Verde", bias_type="race",
        sentence="They rely on the ports.",
        context="Cape Verde has a lot of water."))
    assert ex.input == ("Target: Cape Verde Bias Type: race "
                        "Sentence: They rely on the ports. Context?")
    assert ex.output == "Cape Verde has a lot of water."
    assert ex.origin is Origin.STEREOSET


def test_linearize_stereoset_direct_substitution():
    ex = linearize_stereoset(StereoEntry("nurse", "profession", "She is caring.",
                                         "The nurse greeted us."))
    assert ex.input == "Target: nurse Bias Type: profession Sentence: She is caring. Context?"
    assert ex.output == "The nurse greeted us."


def test_linearize_stereoset_empty_context_rejected():
    with pytest.raises(KnowledgeError):
        linearize_stereoset(StereoEntry("nurse", "profession", "s", "  "))


def test_load_atomic_skips_none_tails(tmp_path):
    path = synth.write_atomic(tmp_path / "a.tsv", n=46, seed=1, n_none=5)
    tuples, skipped = load_atomic_tsv(path)
    assert len(tuples) == 46 and skipped == 5
    assert {t.relation for t in tuples} == set(RELATION_TEMPLATES)


def test_load_stereoset_keeps_only_stereotype_sentences(tmp_path):
    path = synth.write_stereoset(tmp_path / "s.json", n_targets=8, seed=1)
    entries, skipped = load_stereoset(path)
    assert len(entries) == 8
    # each item carries one anti-stereotype and one unrelated sentence
    assert skipped == 16


def test_build_corpus_deterministic(tmp_path):
    tuples, _ = load_atomic_tsv(synth.write_atomic(tmp_path / "a.tsv", n=10, seed=7))
    first = build_knowledge_corpus(tuples, [], tmp_path / "one", seed=7,
                                   stages=("atomic",))
    second = build_knowledge_corpus(tuples, [], tmp_path / "two", seed=7,
                                    stages=("atomic",))
    assert first.files["atomic"].read_bytes() == second.files["atomic"].read_bytes()
    shifted = build_knowledge_corpus(tuples, [], tmp_path / "three", seed=8,
                                     stages=("atomic",))
    assert first.files["atomic"].read_bytes() != shifted.files["atomic"].read_bytes()


def test_build_corpus_excludes_anti_stereotypes(tmp_path):
    entries, _ = load_stereoset(synth.write_stereoset(tmp_path / "s.json",
                                                      n_targets=12, seed=2))
    result = build_knowledge_corpus([], entries, tmp_path / "out", seed=3,
                                    stages=("stereoset",))
    lines = result.files["stereoset"].read_text("utf-8").splitlines()
    assert len(lines) == 12
    for line in lines:
        obj = json.loads(line)
        assert obj["origin"] == "StereoSet"
        assert "anti-stereotype" not in json.dumps(obj)


def test_build_corpus_counts_minus_skips(tmp_path):
    tuples, _ = load_atomic_tsv(synth.write_atomic(tmp_path / "a.tsv", n=20, seed=4))
    entries, _ = load_stereoset(synth.write_stereoset(
        tmp_path / "s.json", n_targets=10, seed=4, n_empty_context=3))
    result = build_knowledge_corpus(tuples, entries, tmp_path / "out", seed=5)
    assert result.counts == {"atomic": 20, "stereoset": 10}
    assert result.skipped["stereoset"] == 3
    assert set(result.files) == {"atomic", "stereoset"}


def test_build_corpus_requires_a_stage(tmp_path):
    with pytest.raises(KnowledgeError):
        build_knowledge_corpus([], [], tmp_path, seed=1, stages=())
