"""Batch-exchange adapter entry point.

The harness appends four positional arguments to the configured command:

    python -m seqtrainer.adapter [flags] TRAIN VAL INPUTS OUTPUT

TRAIN/VAL are {id, input, output} lines, INPUTS is {id, input} lines, and
the adapter writes one {id, generation} line per input and exits 0.

Knowledge pre-finetuning stages are the adapter's own configuration
(`--stages atomic=path,stereoset=path`), trained once per stage chain and
cached under the workdir, then the few-shot stage fine-tunes the chained
checkpoint on TRAIN.  FEWHATE_HPARAMS (JSON with learning_rate/batch_size/
epochs) supplies few-shot defaults that explicit flags override.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from seqtrainer.model import ModelConfig
from seqtrainer.stages import StagePlan, StageSpec, generate, train_stage


def _env_hparams() -> dict:
    raw = os.environ.get("FEWHATE_HPARAMS")
    if not raw:
        return {}
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        logging.getLogger("seqtrainer").warning("ignoring unparseable FEWHATE_HPARAMS")
        return {}


def _parse_stage_flags(text: str) -> list[tuple[str, Path]]:
    stages = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise SystemExit(f"--stages entries look like name=path, got {part!r}")
        name, path = part.split("=", 1)
        stages.append((name.strip(), Path(path)))
    return stages


def _chain_key(stage_specs: list[StageSpec], config: ModelConfig, seed: int) -> str:
    payload = {"model": vars(config), "seed": seed, "stages": []}
    for spec in stage_specs:
        digest = hashlib.sha256(Path(spec.data_path).read_bytes()).hexdigest()
        payload["stages"].append({
            "name": spec.name, "data": digest, "epochs": spec.epochs,
            "lr": spec.learning_rate, "batch": spec.batch_size,
            "max_steps": spec.max_steps,
        })
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqtrainer-adapter", description=__doc__)
    parser.add_argument("--workdir", required=True)
    parser.add_argument("--stages", default="",
                        help="knowledge stages, e.g. atomic=a.jsonl,stereoset=s.jsonl")
    parser.add_argument("--fewshot-epochs", type=int, default=None)
    parser.add_argument("--knowledge-epochs", type=int, default=2)
    parser.add_argument("--lr", type=float, default=None)
    parser.add_argument("--batch-size", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--d-model", type=int, default=128)
    parser.add_argument("--max-len", type=int, default=96)
    parser.add_argument("--max-new-tokens", type=int, default=64)
    parser.add_argument("--beam-size", type=int, default=1)
    parser.add_argument("train")
    parser.add_argument("val")
    parser.add_argument("inputs")
    parser.add_argument("output")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(name)s %(message)s")
    args = build_parser().parse_args(argv)
    env = _env_hparams()
    lr = args.lr if args.lr is not None else float(env.get("learning_rate", 3e-4))
    batch = args.batch_size if args.batch_size is not None else int(env.get("batch_size", 8))
    epochs = args.fewshot_epochs if args.fewshot_epochs is not None \
        else int(env.get("epochs", 300))

    config = ModelConfig(d_model=args.d_model, max_len=args.max_len)
    stages = [StageSpec(name=name, data_path=path, epochs=args.knowledge_epochs,
                        learning_rate=lr, batch_size=max(batch, 16))
              for name, path in _parse_stage_flags(args.stages)]
    stages.append(StageSpec(name="fewshot", data_path=Path(args.train),
                            epochs=epochs, learning_rate=lr, batch_size=batch))

    workdir = Path(args.workdir)
    # cache key covers the knowledge stages only, so every cell of an
    # experiment reuses the same pre-finetuned chain
    chain_dir = workdir / f"chain-{_chain_key(stages[:-1], config, args.seed)}"
    plan = StagePlan(stages=stages, checkpoint_dir=chain_dir,
                     model_config=config, seed=args.seed)

    for spec in stages[:-1]:
        if (plan.checkpoint_path(spec.name) / "weights.pt").exists():
            logging.getLogger("seqtrainer").info("stage %s: cached checkpoint reused",
                                                 spec.name)
            continue
        train_stage(plan, spec.name)
    result = train_stage(plan, "fewshot")
    written = generate(result.checkpoint, args.inputs, args.output,
                       max_new_tokens=args.max_new_tokens,
                       beam_size=args.beam_size)
    logging.getLogger("seqtrainer").info(
        "trained %d steps (final loss %.4f), wrote %d generations",
        len(result.losses), result.losses[-1], written)
    return 0


if __name__ == "__main__":
    sys.exit(main())
