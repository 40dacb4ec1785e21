"""Knowledge-infusion corpora: templated commonsense tuples and stereotype
context prediction.

Two sources feed the pre-finetuning stages:

* A commonsense knowledge graph of <head, relation, tail> tuples (TSV:
  head, relation, tail).  Each relation has a human-readable template; the
  head fills the {0} slot, the trailing {1} slot is dropped from the input,
  and the model is trained to produce the tail.
* Stereotype context entries (JSON, intersentence section).  Only
  stereotype-labeled sentences are kept (anti-stereotype and unrelated are
  omitted, intrasentence is ignored) and the model predicts the context
  sentence from target group, bias type and stereotype.

Stage files are line-delimited JSON {input, output, origin}, shuffled with
a seeded stream so builds are byte-reproducible.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from fewhate import rng

# Relation -> template. The head replaces {0}; the {1} slot marks where the
# tail would continue the sentence.
RELATION_TEMPLATES = {
    "ObjectUse": "{0} is used for {1}",
    "AtLocation": "You are likely to find {0} in {1}",
    "MadeUpOf": "{0} is made up of {1}",
    "HasProperty": "{0} is {1}",
    "CapableOf": "{0} can {1}",
    "Desires": "{0} wants {1}",
    "NotDesires": "{0} does not want {1}",
    "isAfter": "Something that happens after {0} is {1}",
    "HasSubEvent": "Something you might do while {0} is {1}",
    "isBefore": "Something that happens before {0} is {1}",
    "HinderedBy": "{0} is hindered by {1}",
    "Causes": "Sometimes {0} causes {1}",
    "xReason": "{0}. The reason for PersonX doing this is {1}",
    "isFilledBy": "{0} can be filled by {1}",
    "xNeed": "But before {0}, PersonX needed {1}",
    "xAttr": "{0} is seen as {1}",
    "xEffect": "As a result of {0}, PersonX will {1}",
    "xReact": "As a result of {0}, PersonX feels {1}",
    "xWant": "After {0}, PersonX would want {1}",
    "xIntent": "Because of {0}, PersonX wanted {1}",
    "oEffect": "as a result of {0}, others will {1}",
    "oReact": "as a result of {0}, others would feel {1}",
    "oWant": "as a result of {0}, others would want {1}",
}

BIAS_TYPES = ("gender", "profession", "race", "religion")

STEREO_INPUT_FORMAT = "Target: {target} Bias Type: {bias_type} Sentence: {sentence} Context?"


class KnowledgeError(ValueError):
    pass


class Origin(Enum):
    ATOMIC = "Atomic"
    STEREOSET = "StereoSet"


@dataclass
class AtomicTuple:
    head: str
    relation: str
    tail: str


@dataclass
class StereoEntry:
    target: str
    bias_type: str
    sentence: str
    context: str


@dataclass
class KnowledgeExample:
    input: str
    output: str
    origin: Origin

    def to_json(self) -> dict:
        return {"input": self.input, "output": self.output, "origin": self.origin.value}


def expand_atomic(t: AtomicTuple) -> KnowledgeExample:
    """Render a tuple through its relation template.

    The input is the template up to (and without) the tail slot; the output
    is the tail.  Unknown relations fail by name.
    """
    template = RELATION_TEMPLATES.get(t.relation)
    if template is None:
        raise KnowledgeError(f"unknown relation {t.relation!r}")
    if not t.head or not t.tail:
        raise KnowledgeError(f"empty head or tail in {t}")
    prompt = template.replace(" {1}", "").replace("{1}", "")
    return KnowledgeExample(prompt.replace("{0}", t.head), t.tail, Origin.ATOMIC)


def linearize_stereoset(e: StereoEntry) -> KnowledgeExample:
    """Render a stereotype entry as a context-prediction pair."""
    if not e.context.strip():
        raise KnowledgeError("entry has empty context")
    prompt = STEREO_INPUT_FORMAT.format(
        target=e.target, bias_type=e.bias_type, sentence=e.sentence)
    return KnowledgeExample(prompt, e.context, Origin.STEREOSET)


def load_atomic_tsv(path: str | Path) -> tuple[list[AtomicTuple], int]:
    """Read head/relation/tail TSV rows; returns (tuples, skipped count).

    Rows with an empty head or tail, or the literal no-inference tail
    "none", are skipped and counted.
    """
    tuples = []
    skipped = 0
    with open(path, encoding="utf-8", newline="") as f:
        for row in csv.reader(f, delimiter="\t"):
            if not row or len(row) < 3:
                skipped += 1
                continue
            head, relation, tail = row[0].strip(), row[1].strip(), row[2].strip()
            if not head or not tail or tail.lower() == "none":
                skipped += 1
                continue
            if relation not in RELATION_TEMPLATES:
                raise KnowledgeError(f"{path}: unknown relation {relation!r}")
            tuples.append(AtomicTuple(head, relation, tail))
    return tuples, skipped


def load_stereoset(path: str | Path) -> tuple[list[StereoEntry], int]:
    """Read stereotype intersentence entries; returns (entries, skipped).

    Keeps only sentences gold-labeled "stereotype" whose bias type is one
    of the four known domains; everything else is counted as skipped.
    """
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    section = data["data"]["intersentence"] if "data" in data else data["intersentence"]
    entries = []
    skipped = 0
    for item in section:
        if item.get("bias_type") not in BIAS_TYPES:
            skipped += 1
            continue
        for sent in item["sentences"]:
            if sent.get("gold_label") != "stereotype":
                skipped += 1
                continue
            entries.append(StereoEntry(
                target=item["target"],
                bias_type=item["bias_type"],
                sentence=sent["sentence"],
                context=item["context"],
            ))
    return entries, skipped


@dataclass
class KnowledgeBuildResult:
    files: dict[str, Path]
    counts: dict[str, int]
    skipped: dict[str, int]


def build_knowledge_corpus(
    tuples: list[AtomicTuple],
    entries: list[StereoEntry],
    out_dir: str | Path,
    seed: int,
    stages: tuple[str, ...] = ("atomic", "stereoset"),
) -> KnowledgeBuildResult:
    """Write one shuffled stage file per enabled source.

    Stages stay in separate files because pre-finetuning applies them
    sequentially.  Entries that fail to render (e.g. empty context) are
    skipped and counted.
    """
    if not stages:
        raise KnowledgeError("no knowledge stages enabled")
    unknown = [s for s in stages if s not in ("atomic", "stereoset")]
    if unknown:
        raise KnowledgeError(f"unknown knowledge stages: {unknown}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    files: dict[str, Path] = {}
    counts: dict[str, int] = {}
    skipped: dict[str, int] = {}
    for stage_index, stage in enumerate(stages):
        if stage == "atomic":
            examples = [expand_atomic(t) for t in tuples]
            skipped[stage] = 0
        else:
            examples = []
            skipped[stage] = 0
            for e in entries:
                try:
                    examples.append(linearize_stereoset(e))
                except KnowledgeError:
                    skipped[stage] += 1
        examples = rng.shuffled(examples, rng.stream(rng.KNOWLEDGE_STREAM, seed, stage_index))
        path = out_dir / f"{stage}_stage.jsonl"
        with open(path, "w", encoding="utf-8") as f:
            for ex in examples:
                f.write(json.dumps(ex.to_json(), ensure_ascii=False, sort_keys=True) + "\n")
        files[stage] = path
        counts[stage] = len(examples)
    return KnowledgeBuildResult(files=files, counts=counts, skipped=skipped)
