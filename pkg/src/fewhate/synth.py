"""Synthetic corpora in the official input formats.

Used for demos, smoke runs and the test suite: the generators produce
files shaped exactly like the real releases (annotator-level CSV, the
OOD corpora's JSON/CSV layouts, knowledge TSV/JSON) plus ready-made
PostRecord pools, all deterministic in the seed.  The text is template
noise, not real social-media content.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from fewhate import rng
from fewhate.corpus.records import PostRecord, Source, Split, TargetType
from fewhate.knowledge import RELATION_TEMPLATES

GROUPS = (
    "women", "muslim folks", "black folks", "jewish folks", "immigrants",
    "gay folks", "trans folks", "disabled folks", "asian folks",
    "mexican folks", "elderly folks", "poor folks",
)

# surface variants the alias table folds back into canonical ids
GROUP_VARIANTS = {
    "black folks": ("black folks", "black people", "Black folks"),
    "muslim folks": ("muslim folks", "Muslim folks", "muslim people"),
    "jewish folks": ("jewish folks", "jews", "Jewish people"),
    "trans folks": ("trans folks", "trans people", "transgender people"),
    "women": ("women", "Women", "females"),
}

_BAD_ADJ = ("awful", "dreadful", "useless", "ridiculous", "hopeless", "lazy",
            "greedy", "clueless", "annoying", "pathetic")
_NICE_ADJ = ("lovely", "quiet", "bright", "calm", "green", "warm", "tidy")
_NOUNS = ("garden", "market", "library", "bakery", "bus stop", "river",
          "festival", "workshop", "kitchen", "orchard")
_VERBS = ("visited", "painted", "fixed", "watered", "photographed", "cleaned")

_HS_TEMPLATES = (
    "all {group} are {adj}",
    "why are {group} always so {adj}",
    "{group} keep ruining the {noun}",
    "honestly {group} are just {adj} and {adj2}",
)
_OFFENSIVE_TEMPLATES = (
    "you are a {adj} excuse for a neighbor",
    "my coworker is the most {adj} person alive",
    "that referee was completely {adj} today",
    "stop being so {adj} about the {noun}",
)
_INOFFENSIVE_TEMPLATES = (
    "the {noun} by the {noun2} looked {adj} this morning",
    "we {verb} the {noun} over the weekend",
    "someone {verb} the old {noun} near the {noun2}",
    "the {noun} smells {adj} after the rain",
)


def _pick(generator, options):
    return options[int(generator.integers(len(options)))]


def _hs_record(generator, rec_id: str, split: Split) -> PostRecord:
    group = _pick(generator, GROUPS)
    groups = [group]
    if generator.random() < 0.2:
        other = _pick(generator, GROUPS)
        if other != group:
            groups.append(other)
    groups.sort()
    adj = _pick(generator, _BAD_ADJ)
    text = _pick(generator, _HS_TEMPLATES).format(
        group=group, adj=adj, adj2=_pick(generator, _BAD_ADJ),
        noun=_pick(generator, _NOUNS))
    return PostRecord(
        id=rec_id, text=text, offensive=True, target_type=TargetType.GROUP,
        groups=groups, implication=f"{group} are {adj}.", hs=True,
        source=Source.SBIC, split=split)


def _offensive_record(generator, rec_id: str, split: Split) -> PostRecord:
    text = _pick(generator, _OFFENSIVE_TEMPLATES).format(
        adj=_pick(generator, _BAD_ADJ), noun=_pick(generator, _NOUNS))
    return PostRecord(
        id=rec_id, text=text, offensive=True, target_type=TargetType.INDIVIDUAL,
        groups=[], implication=None, hs=False, source=Source.SBIC, split=split)


def _inoffensive_record(generator, rec_id: str, split: Split) -> PostRecord:
    text = _pick(generator, _INOFFENSIVE_TEMPLATES).format(
        noun=_pick(generator, _NOUNS), noun2=_pick(generator, _NOUNS),
        adj=_pick(generator, _NICE_ADJ), verb=_pick(generator, _VERBS))
    return PostRecord(
        id=rec_id, text=text, offensive=False, target_type=TargetType.NONE,
        groups=[], implication=None, hs=False, source=Source.SBIC, split=split)


def make_pool(
    n: int,
    seed: int,
    split: Split = Split.TRAIN_POOL,
    prefix: str = "sbic",
    hs_frac: float = 0.5,
    offensive_frac: float = 0.25,
) -> list[PostRecord]:
    """Generate n labeled posts with the given stratum mix."""
    generator = rng.stream(rng.SYNTH_STREAM, seed)
    records = []
    for i in range(n):
        rec_id = f"{prefix}-{i:06d}"
        u = generator.random()
        if u < hs_frac:
            records.append(_hs_record(generator, rec_id, split))
        elif u < hs_frac + offensive_frac:
            records.append(_offensive_record(generator, rec_id, split))
        else:
            records.append(_inoffensive_record(generator, rec_id, split))
    return records


def make_corpus(n_train: int, n_val: int, n_test: int, seed: int) -> list[PostRecord]:
    """A three-way SBIC-style corpus (train/val pools plus a test split)."""
    return (
        make_pool(n_train, seed, Split.TRAIN_POOL, prefix="train")
        + make_pool(n_val, seed + 1, Split.VAL_POOL, prefix="val")
        + make_pool(n_test, seed + 2, Split.TEST, prefix="test")
    )


def _variant(generator, group: str) -> str:
    options = GROUP_VARIANTS.get(group, (group,))
    return _pick(generator, options)


def write_sbic_csv(path: str | Path, n_posts: int, seed: int, prefix: str = "p") -> int:
    """Write an annotator-level CSV that aggregates to the usual strata mix."""
    generator = rng.stream(rng.SYNTH_STREAM, seed, 1)
    records = make_pool(n_posts, seed, prefix=prefix)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["post_id", "text", "offensive_score", "who_target_score",
                         "target_minorities", "target_stereotype"])
        for rec in records:
            for annotator in range(3):
                if not rec.offensive:
                    # keep one annotator at 0 so the mean stays below 0.5
                    off = 0.5 if annotator and generator.random() < 0.15 else 0.0
                    writer.writerow([rec.id, rec.text, off, "", "", ""])
                elif not rec.hs:
                    off = 0.5 if generator.random() < 0.3 else 1.0
                    who = 0.0 if generator.random() < 0.8 else ""
                    writer.writerow([rec.id, rec.text, off, who, "", ""])
                else:
                    who = 0.5 if generator.random() < 0.2 else 1.0
                    minorities = ", ".join(_variant(generator, g) for g in rec.groups)
                    writer.writerow([rec.id, rec.text, 1.0, who, minorities,
                                     rec.implication])
    return len(records)


def write_hatexplain(
    out_dir: str | Path,
    n_test: int,
    seed: int,
    n_train: int = 20,
    n_val: int = 10,
    n_ties: int = 0,
) -> tuple[Path, Path]:
    """Write dataset.json plus post_id_divisions.json; returns both paths."""
    generator = rng.stream(rng.SYNTH_STREAM, seed, 2)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data: dict[str, dict] = {}
    divisions = {"train": [], "val": [], "test": []}
    counter = 0

    def add(division: str, labels: list[str]) -> None:
        nonlocal counter
        post_id = f"hx{counter:06d}_{division}"
        counter += 1
        text = _pick(generator, _INOFFENSIVE_TEMPLATES).format(
            noun=_pick(generator, _NOUNS), noun2=_pick(generator, _NOUNS),
            adj=_pick(generator, _NICE_ADJ), verb=_pick(generator, _VERBS))
        data[post_id] = {
            "post_id": post_id,
            "annotators": [{"label": lab, "annotator_id": i, "target": []}
                           for i, lab in enumerate(labels)],
            "rationales": [],
            "post_tokens": text.split(),
        }
        divisions[division].append(post_id)

    label_sets = (
        ["hatespeech", "hatespeech", "normal"],
        ["hatespeech", "hatespeech", "hatespeech"],
        ["offensive", "offensive", "normal"],
        ["normal", "normal", "offensive"],
        ["normal", "normal", "normal"],
    )
    for division, count in (("train", n_train), ("val", n_val), ("test", n_test - n_ties)):
        for _ in range(count):
            add(division, list(_pick(generator, label_sets)))
    for _ in range(n_ties):
        add("test", ["hatespeech", "offensive", "normal"])

    dataset_path = out_dir / "dataset.json"
    divisions_path = out_dir / "post_id_divisions.json"
    dataset_path.write_text(json.dumps(data, indent=1, sort_keys=True), "utf-8")
    divisions_path.write_text(json.dumps(divisions, indent=1, sort_keys=True), "utf-8")
    return dataset_path, divisions_path


def write_hs18(
    out_dir: str | Path,
    n: int,
    seed: int,
    n_excluded: int = 0,
    with_files: bool = True,
) -> Path:
    """Write annotations_metadata.csv (+ sentence files); returns the CSV path."""
    generator = rng.stream(rng.SYNTH_STREAM, seed, 3)
    out_dir = Path(out_dir)
    files_dir = out_dir / "all_files"
    files_dir.mkdir(parents=True, exist_ok=True)
    metadata_path = out_dir / "annotations_metadata.csv"
    with open(metadata_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["file_id", "user_id", "subforum_id", "num_contexts", "label"])
        for i in range(n):
            file_id = f"hs18_{i:06d}"
            label = "hate" if generator.random() < 0.12 else "noHate"
            writer.writerow([file_id, int(generator.integers(1000)), 1, 0, label])
            if with_files:
                text = _pick(generator, _INOFFENSIVE_TEMPLATES).format(
                    noun=_pick(generator, _NOUNS), noun2=_pick(generator, _NOUNS),
                    adj=_pick(generator, _NICE_ADJ), verb=_pick(generator, _VERBS))
                (files_dir / f"{file_id}.txt").write_text(text + "\n", "utf-8")
        for i in range(n_excluded):
            writer.writerow([f"hs18_x{i:06d}", int(generator.integers(1000)), 1, 0,
                             "relation" if i % 2 else "skip"])
    return metadata_path


def write_ethos(path: str | Path, n: int, seed: int) -> Path:
    generator = rng.stream(rng.SYNTH_STREAM, seed, 4)
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write("comment;isHate\n")
        for i in range(n):
            text = _pick(generator, _INOFFENSIVE_TEMPLATES).format(
                noun=_pick(generator, _NOUNS), noun2=_pick(generator, _NOUNS),
                adj=_pick(generator, _NICE_ADJ), verb=_pick(generator, _VERBS))
            if i % 17 == 0:
                text = f"{text}; no doubt about it"
            score = round(float(generator.random()), 2)
            f.write(f"{text};{score}\n")
    return path


_HEADS = (
    "PersonX goes jogging", "PersonX bakes bread", "a knife", "a ladder",
    "PersonX plants a tree", "an umbrella", "PersonX writes a letter",
    "a bicycle", "PersonX repairs the fence", "a teapot",
)
_TAILS = (
    "to put on running shoes", "cutting bread", "reaching the shelf",
    "happy about the result", "keep the rain off", "share the news",
    "a quiet afternoon", "tools from the shed", "fresh flour", "hot water",
)


def write_atomic(path: str | Path, n: int, seed: int, n_none: int = 0) -> Path:
    """Write a head/relation/tail TSV cycling through every relation."""
    generator = rng.stream(rng.SYNTH_STREAM, seed, 5)
    relations = sorted(RELATION_TEMPLATES)
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter="\t")
        for i in range(n):
            writer.writerow([_pick(generator, _HEADS), relations[i % len(relations)],
                             _pick(generator, _TAILS)])
        for i in range(n_none):
            writer.writerow([_pick(generator, _HEADS), relations[i % len(relations)],
                             "none"])
    return path


def write_stereoset(path: str | Path, n_targets: int, seed: int,
                    n_empty_context: int = 0) -> Path:
    """Write an intersentence JSON with stereotype/anti-stereotype/unrelated triples."""
    generator = rng.stream(rng.SYNTH_STREAM, seed, 6)
    bias_types = ("gender", "profession", "race", "religion")
    items = []
    for i in range(n_targets + n_empty_context):
        target = _pick(generator, GROUPS)
        adj = _pick(generator, _BAD_ADJ)
        context = "" if i >= n_targets else f"The {target} moved into the {_pick(generator, _NOUNS)}."
        items.append({
            "target": target,
            "bias_type": bias_types[i % len(bias_types)],
            "context": context,
            "sentences": [
                {"sentence": f"They are {adj}.", "gold_label": "stereotype"},
                {"sentence": f"They are {_pick(generator, _NICE_ADJ)}.",
                 "gold_label": "anti-stereotype"},
                {"sentence": f"The {_pick(generator, _NOUNS)} is open.",
                 "gold_label": "unrelated"},
            ],
        })
    path = Path(path)
    path.write_text(json.dumps({"data": {"intersentence": items}}, indent=1), "utf-8")
    return path


def write_demo_inputs(out_dir: str | Path, posts: int, seed: int) -> dict[str, Path]:
    """Write one synthetic file per supported input format under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    for name, count, sub_seed in (("train", posts, seed),
                                  ("dev", max(posts // 2, 64), seed + 1),
                                  ("test", max(posts // 4, 64), seed + 2)):
        path = out_dir / f"sbic_{name}.csv"
        write_sbic_csv(path, count, sub_seed, prefix=name)
        paths[f"sbic_{name}"] = path
    dataset, divisions = write_hatexplain(out_dir / "hatexplain", n_test=48, seed=seed)
    paths["hatexplain"] = dataset
    paths["hatexplain_divisions"] = divisions
    paths["hs18"] = write_hs18(out_dir / "hs18", n=64, seed=seed, n_excluded=6)
    paths["ethos"] = write_ethos(out_dir / "ethos.csv", n=48, seed=seed)
    paths["atomic"] = write_atomic(out_dir / "atomic.tsv", n=1200, seed=seed, n_none=24)
    paths["stereoset"] = write_stereoset(out_dir / "stereoset.json", n_targets=120,
                                         seed=seed, n_empty_context=6)
    return paths
