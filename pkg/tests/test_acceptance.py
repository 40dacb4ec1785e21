"""Acceptance suite: one test per release criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion.  The OOD count checks read official release files when the
FEWHATE_HATEXPLAIN / FEWHATE_HS18 / FEWHATE_ETHOS environment variables
point at them; otherwise they run on bundled-format synthetic files of the
documented sizes.
"""

from __future__ import annotations

import json
import os
import time

import numpy as np
import pytest

from fewhate import runner, sampler, scheme, synth
from fewhate.corpus.ood import load_ethos, load_hatexplain, load_hs18
from fewhate.corpus.records import Split
from fewhate.knowledge import (
    RELATION_TEMPLATES,
    AtomicTuple,
    build_knowledge_corpus,
    expand_atomic,
    load_stereoset,
)
from fewhate.metrics import binary_f1, welch_t
from fewhate.mocks import MockMode, mock_generate
from fewhate.reporting import emit_report
from fewhate.runner import AdapterSpec, ExperimentConfig
from oracles import noisy_echo_expected_f1, welch_reference

SEEDS = list(range(10))
SIZES = list(sampler.SIZES)


def ok(name: str) -> None:
    print(f"ACCEPTANCE {name}: PASS")


@pytest.fixture(scope="module")
def pool_40k():
    return synth.make_pool(40000, seed=42)


@pytest.fixture(scope="module")
def all_splits(pool_40k):
    return {seed: sampler.build_nested_splits(pool_40k, SIZES, seed) for seed in SEEDS}


def test_stratification_quotas_and_balance(pool_40k):
    t0 = time.perf_counter()
    splits_by_seed = {seed: sampler.build_nested_splits(pool_40k, SIZES, seed)
                      for seed in SEEDS}
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0, f"split building took {elapsed:.2f}s"
    checked = 0
    for seed, splits in splits_by_seed.items():
        for size in SIZES:
            report = sampler.verify_quotas(splits[size], pool_40k)
            assert report.violations == [], (seed, size, report.violations)
            assert report.stratum_counts == {
                "inoffensive": size // 4, "offensive_non_hs": size // 4,
                "hs": size // 2}
            assert report.exhausted_buckets == []
            counts = list(report.bucket_counts.values())
            assert max(counts) - min(counts) <= 1
            checked += 1
    assert checked == 70
    ok(f"stratification (70 splits, 10 seeds x 7 sizes, {elapsed:.2f}s on 40k pool)")


def test_nesting_proper_subsets(all_splits):
    checks = 0
    for seed, splits in all_splits.items():
        for small, large in zip(SIZES, SIZES[1:]):
            a, b = splits[small].member_ids, splits[large].member_ids
            assert b[:len(a)] == a, f"seed {seed}: {small} not a prefix of {large}"
            assert set(a) < set(b)
            checks += 1
        assert set(splits[SIZES[0]].member_ids) < set(splits[SIZES[-1]].member_ids)
        checks += 1
    assert checks == 70
    ok(f"nesting ({checks} subset checks, zero violations)")


def test_seed_independence(all_splits):
    for size in SIZES:
        memberships = {tuple(all_splits[seed][size].member_ids) for seed in SEEDS}
        assert len(memberships) == 10
    ok("seed independence (10 distinct splits per size)")


def test_round_trip_all_scheme_variants():
    pool = synth.make_pool(1200, seed=7)
    variants = scheme.all_variants()
    assert len(variants) == 8
    total = 0
    for config in variants:
        for rec in pool:
            parsed = scheme.parse(scheme.linearize(rec, config).output, config)
            assert parsed.valid, (config.fingerprint(), rec.id)
            assert parsed.hs == rec.hs
            if scheme.Subtask.OFF in config.field_order:
                assert parsed.offensive == rec.offensive
            if scheme.Subtask.GD in config.field_order:
                assert parsed.target_type == rec.target_type
            if scheme.Subtask.GI in config.field_order:
                assert parsed.groups == rec.groups
            if scheme.Subtask.IMPL in config.field_order:
                assert parsed.implication == rec.implication
            total += 1
    ok(f"round trip ({len(pool)} records x 8 variants = {total} checks, 100% valid)")


def test_oracle_metrics_gold_echo_and_constant_no(tmp_path):
    corpus = synth.make_corpus(n_train=600, n_val=300, n_test=200, seed=11)
    golds = [r for r in corpus if r.split is Split.TEST]
    prevalence = sum(r.hs for r in golds) / len(golds)

    echo_cfg = ExperimentConfig(
        name="echo", scheme=scheme.full_subtasks(), sizes=[16], seeds=[0],
        targets=["sbic-test"],
        adapter=AdapterSpec(mode="mock", mock_mode=MockMode.GOLD_ECHO))
    echo = runner.run_experiment(echo_cfg, corpus, tmp_path / "echo").cells[0]
    assert echo.metrics.f1_hs == 1.0
    assert echo.metrics.f1_off == 1.0
    assert echo.metrics.gd_scores.group_f1 == 1.0
    assert echo.metrics.gd_scores.macro_f1 == 1.0
    assert echo.metrics.invalid_rate == 0.0

    no_cfg = ExperimentConfig(
        name="no", scheme=scheme.full_subtasks(), sizes=[16], seeds=[0],
        targets=["sbic-test"],
        adapter=AdapterSpec(mode="mock", mock_mode=MockMode.CONSTANT_NO))
    no = runner.run_experiment(no_cfg, corpus, tmp_path / "no").cells[0]
    assert no.metrics.f1_hs == 0.0
    assert no.metrics.fn_pct == pytest.approx(prevalence * 100, abs=1e-9)
    assert no.metrics.fp_pct == 0.0
    ok("oracle metrics (gold echo F1=1.0 on HS and subtasks; constant-No "
       "matches prevalence within 1e-9)")


def test_noisy_gold_matches_enumerated_expectation():
    config = scheme.full_subtasks()
    pool = synth.make_pool(10000, seed=23)
    examples = [scheme.linearize(r, config) for r in pool]
    rows = mock_generate(examples, config, MockMode.NOISY_GOLD, seed=5, pflip=0.3)
    parsed = [scheme.parse(gen, config) for _, gen in rows]
    assert all(p.valid for p in parsed)
    golds = [r.hs for r in pool]
    measured = binary_f1([bool(p.hs) for p in parsed], golds)
    expected = noisy_echo_expected_f1(golds, 0.3)
    assert measured == pytest.approx(expected, abs=0.02)
    ok(f"noisy gold p=0.3 on 10k (measured {measured:.4f} vs expected "
       f"{expected:.4f}, tolerance 0.02)")


def test_welch_against_independent_oracle():
    generator = np.random.Generator(np.random.PCG64(314159))
    for _ in range(20):
        na, nb = int(generator.integers(2, 25)), int(generator.integers(2, 25))
        a = list(generator.normal(generator.uniform(-1, 1), generator.uniform(0.2, 2), na))
        b = list(generator.normal(generator.uniform(-1, 1), generator.uniform(0.2, 2), nb))
        ours = welch_t(a, b)
        t_ref, df_ref, p_ref = welch_reference(a, b)
        assert ours.p == pytest.approx(p_ref, abs=1e-6)
        assert ours.t == pytest.approx(t_ref, abs=1e-9)
        assert ours.df == pytest.approx(df_ref, abs=1e-9)

    identical = welch_t([0.5, 0.6, 0.7], [0.5, 0.6, 0.7])
    assert identical.t == 0.0 and identical.p == 1.0

    for _ in range(1000):
        na, nb = int(generator.integers(2, 10)), int(generator.integers(2, 10))
        a = list(generator.normal(0, 1, na))
        b = list(generator.normal(0.3, 1.5, nb))
        r_ab, r_ba = welch_t(a, b), welch_t(b, a)
        assert r_ab.t == pytest.approx(-r_ba.t, abs=1e-12)
        assert r_ab.p == pytest.approx(r_ba.p, abs=1e-12)
        shifted = welch_t([x + 3.25 for x in a], [x + 3.25 for x in b])
        assert shifted.p == pytest.approx(r_ab.p, rel=1e-8, abs=1e-10)
    ok("welch t-test (20 oracle pairs within 1e-6; identical => t=0 p=1; "
       "1000 swap/location property cases)")


def test_atomic_templates_and_stereoset_filtering(tmp_path, data_dir):
    golden = json.loads((data_dir / "atomic_golden.json").read_text("utf-8"))
    assert len(golden) == 23
    assert {g["relation"] for g in golden} == set(RELATION_TEMPLATES)
    for case in golden:
        ex = expand_atomic(AtomicTuple(case["head"], case["relation"], case["tail"]))
        assert ex.input == case["input"]
        assert ex.output == case["output"]
        assert "{0}" not in ex.input and "{1}" not in ex.input

    stereo_path = synth.write_stereoset(tmp_path / "s.json", n_targets=60, seed=3,
                                        n_empty_context=4)
    entries, _ = load_stereoset(stereo_path)
    result = build_knowledge_corpus([], entries, tmp_path / "out", seed=3,
                                    stages=("stereoset",))
    raw = json.loads((tmp_path / "s.json").read_text("utf-8"))
    anti = {s["sentence"] for item in raw["data"]["intersentence"]
            for s in item["sentences"] if s["gold_label"] == "anti-stereotype"}
    for line in result.files["stereoset"].read_text("utf-8").splitlines():
        obj = json.loads(line)
        assert obj["input"] not in anti
        assert all(a not in obj["input"] for a in anti)
    assert result.counts["stereoset"] == 60
    ok("knowledge templates (23-relation golden file, no slot residue, "
       "zero anti-stereotype entries)")


def test_ood_loader_counts(tmp_path):
    expected = {"hatexplain": 1924, "hs18": 9916, "ethos": 998}

    hx_path = os.environ.get("FEWHATE_HATEXPLAIN")
    hx_div = os.environ.get("FEWHATE_HATEXPLAIN_DIVISIONS")
    if not hx_path:
        hx_path, hx_div = synth.write_hatexplain(
            tmp_path / "hx", n_test=expected["hatexplain"], seed=1,
            n_train=40, n_val=20, n_ties=7)
    records, _ = load_hatexplain(hx_path, hx_div, split="test")
    assert len(records) == expected["hatexplain"]

    hs18_path = os.environ.get("FEWHATE_HS18")
    if not hs18_path:
        hs18_path = synth.write_hs18(tmp_path / "hs18", n=expected["hs18"], seed=2,
                                     n_excluded=128, with_files=False)
    records, excluded = load_hs18(hs18_path)
    assert len(records) == expected["hs18"]
    if not os.environ.get("FEWHATE_HS18"):
        assert sum(excluded.values()) == 128

    ethos_path = os.environ.get("FEWHATE_ETHOS")
    if not ethos_path:
        ethos_path = synth.write_ethos(tmp_path / "ethos.csv", n=expected["ethos"],
                                       seed=3)
    assert len(load_ethos(ethos_path)) == expected["ethos"]
    official = any(os.environ.get(k) for k in
                   ("FEWHATE_HATEXPLAIN", "FEWHATE_HS18", "FEWHATE_ETHOS"))
    ok(f"ood loader counts (HateXplain 1,924; HS18 9,916; Ethos 998; "
       f"{'official' if official else 'release-format synthetic'} files)")


def test_report_golden_files(tmp_path, data_dir):
    import test_reporting
    reports, labels = test_reporting.fixture_reports()
    written = emit_report(reports, tmp_path, labels=labels)
    assert written["table_sbic-test"].read_bytes() == \
        (data_dir / "report_golden_table.md").read_bytes()
    assert written["cells"].read_bytes() == \
        (data_dir / "report_golden_cells.jsonl").read_bytes()
    ok("report golden files (byte-identical tables and cell dump)")
