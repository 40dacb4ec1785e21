"""Staged fine-tuning with checkpoint chaining.

A plan is an ordered list of stages over {atomic, stereoset, fewshot};
the few-shot stage, when present, is always last.  Each stage trains from
the previous stage's checkpoint (fresh weights for the first), extends
the vocabulary with its own data, and saves its checkpoint under the
plan's checkpoint directory.  Deleting an intermediate checkpoint fails
fast on the next stage.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import nn

from seqtrainer.model import (
    ModelConfig,
    Seq2SeqModel,
    load_checkpoint,
    save_checkpoint,
)
from seqtrainer.vocab import BOS, EOS, PAD, Vocab

log = logging.getLogger("seqtrainer")

KNOWN_STAGES = ("atomic", "stereoset", "fewshot")


class PlanError(ValueError):
    pass


@dataclass
class StageSpec:
    name: str
    data_path: Path
    epochs: int = 300
    learning_rate: float = 3e-4
    batch_size: int = 8
    max_steps: int | None = None

    def __post_init__(self) -> None:
        if self.name not in KNOWN_STAGES:
            raise PlanError(f"unknown stage {self.name!r}; known: {KNOWN_STAGES}")
        self.data_path = Path(self.data_path)


@dataclass
class StagePlan:
    stages: list[StageSpec]
    checkpoint_dir: Path
    model_config: ModelConfig = field(default_factory=ModelConfig)
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.stages:
            raise PlanError("plan has no stages")
        names = [s.name for s in self.stages]
        if len(set(names)) != len(names):
            raise PlanError(f"duplicate stages in {names}")
        if "fewshot" in names and names[-1] != "fewshot":
            raise PlanError("the few-shot stage must come last")
        self.checkpoint_dir = Path(self.checkpoint_dir)

    def stage_index(self, name: str) -> int:
        for i, stage in enumerate(self.stages):
            if stage.name == name:
                return i
        raise PlanError(f"stage {name!r} not in plan")

    def checkpoint_path(self, name: str) -> Path:
        return self.checkpoint_dir / name


@dataclass
class StageResult:
    checkpoint: Path
    losses: list[float]
    non_decreasing: bool


def read_pairs(path: str | Path) -> list[tuple[str, str]]:
    pairs = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                obj = json.loads(line)
                pairs.append((obj["input"], obj["output"]))
    return pairs


def _pad_batch(rows: list[list[int]], width: int) -> torch.Tensor:
    out = torch.full((len(rows), width), PAD, dtype=torch.long)
    for i, row in enumerate(rows):
        out[i, : len(row)] = torch.tensor(row, dtype=torch.long)
    return out


def _encode_pairs(pairs, vocab: Vocab, max_len: int):
    sources = [vocab.encode(src, max_len) for src, _ in pairs]
    targets = [vocab.encode(tgt, max_len - 1) for _, tgt in pairs]
    return sources, targets


def train_stage(plan: StagePlan, stage_name: str,
                data_path: str | Path | None = None) -> StageResult:
    """Train one stage of the plan and save its checkpoint.

    Loads the previous stage's checkpoint when there is one, extending the
    vocabulary with this stage's data.  The per-step losses are logged and
    returned; a non-decreasing loss over the first/last windows is warned
    about, never fatal.
    """
    index = plan.stage_index(stage_name)
    spec = plan.stages[index]
    data_path = Path(data_path) if data_path else spec.data_path
    pairs = read_pairs(data_path)
    if not pairs:
        raise PlanError(f"stage {stage_name}: data file {data_path} is empty")

    torch.manual_seed(plan.seed * 1000 + index)
    texts = [t for pair in pairs for t in pair]
    if index == 0:
        vocab = Vocab.build(texts)
        model = Seq2SeqModel(len(vocab), plan.model_config)
    else:
        previous = plan.checkpoint_path(plan.stages[index - 1].name)
        model, vocab = load_checkpoint(previous)
        added = vocab.extend(texts)
        model.resize_vocab(len(vocab), seed=plan.seed * 1000 + index)
        log.info("stage %s: extended vocabulary by %d words", stage_name, added)

    sources, targets = _encode_pairs(pairs, vocab, plan.model_config.max_len)
    optimizer = torch.optim.Adam(model.parameters(), lr=spec.learning_rate)
    criterion = nn.CrossEntropyLoss(ignore_index=PAD)
    shuffler = torch.Generator().manual_seed(plan.seed * 1000 + index + 1)

    losses: list[float] = []
    model.train()
    done = False
    for _ in range(spec.epochs):
        if done:
            break
        order = torch.randperm(len(pairs), generator=shuffler).tolist()
        for start in range(0, len(order), spec.batch_size):
            chunk = order[start:start + spec.batch_size]
            src = _pad_batch([sources[i] for i in chunk],
                             max(len(sources[i]) for i in chunk))
            tgt_in = _pad_batch([[BOS] + targets[i] for i in chunk],
                                max(len(targets[i]) for i in chunk) + 1)
            tgt_out = _pad_batch([targets[i] + [EOS] for i in chunk],
                                 max(len(targets[i]) for i in chunk) + 1)
            optimizer.zero_grad()
            logits = model(src, tgt_in)
            loss = criterion(logits.reshape(-1, model.vocab_size), tgt_out.reshape(-1))
            loss.backward()
            optimizer.step()
            losses.append(loss.item())
            log.debug("stage %s step %d loss %.4f", stage_name, len(losses), losses[-1])
            if spec.max_steps is not None and len(losses) >= spec.max_steps:
                done = True
                break

    window = max(1, min(10, len(losses) // 4))
    non_decreasing = sum(losses[-window:]) / window >= sum(losses[:window]) / window
    if non_decreasing:
        log.warning("stage %s: loss did not decrease over %d steps",
                    stage_name, len(losses))
    checkpoint = save_checkpoint(model, vocab, plan.checkpoint_path(stage_name))
    return StageResult(checkpoint=checkpoint, losses=losses,
                       non_decreasing=non_decreasing)


def run_plan(plan: StagePlan) -> Path:
    """Train every stage in order; returns the final checkpoint path."""
    checkpoint = None
    for stage in plan.stages:
        checkpoint = train_stage(plan, stage.name).checkpoint
    return checkpoint


def generate(checkpoint_path: str | Path, inputs_path: str | Path,
             output_path: str | Path, batch_size: int = 32,
             max_new_tokens: int = 64, beam_size: int = 1) -> int:
    """Decode one generation per input line, preserving order.

    Greedy by default; beam_size > 1 switches to per-example beam search.
    """
    model, vocab = load_checkpoint(checkpoint_path)
    rows = []
    with open(inputs_path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                obj = json.loads(line)
                rows.append((obj["id"], obj["input"]))
    written = 0
    with open(output_path, "w", encoding="utf-8") as out:
        for start in range(0, len(rows), batch_size):
            chunk = rows[start:start + batch_size]
            encoded = [vocab.encode(text, model.config.max_len) for _, text in chunk]
            if beam_size > 1:
                decoded = [model.beam_decode(torch.tensor(e, dtype=torch.long),
                                             beam_size, max_new_tokens)
                           for e in encoded]
            else:
                src = _pad_batch(encoded, max(len(e) for e in encoded))
                decoded = model.greedy_decode(src, max_new_tokens=max_new_tokens)
            for (row_id, _), ids in zip(chunk, decoded):
                out.write(json.dumps({"id": row_id, "generation": vocab.decode(ids)},
                                     ensure_ascii=False) + "\n")
                written += 1
    return written
