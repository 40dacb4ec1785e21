"""Mock generators for exercising the pipeline without a model.

GoldEcho returns the gold output verbatim; NoisyGold flips the HS answer
with a seeded probability; the constant modes emit minimal well-formed
outputs.  All modes produce text the scheme parser accepts, so they double
as oracles for the evaluation path.
"""

from __future__ import annotations

from enum import Enum

from fewhate import rng
from fewhate.scheme import (
    LinearizedExample,
    SchemeConfig,
    Subtask,
    parse,
    render_output,
)


class MockMode(Enum):
    GOLD_ECHO = "gold-echo"
    NOISY_GOLD = "noisy-gold"
    CONSTANT_NO = "constant-no"
    CONSTANT_YES = "constant-yes"


_CONSTANT_ANSWERS = {
    MockMode.CONSTANT_NO: {
        Subtask.OFF: "No", Subtask.GD: "None", Subtask.GI: "None",
        Subtask.IMPL: "None", Subtask.HS: "No",
    },
    MockMode.CONSTANT_YES: {
        Subtask.OFF: "Yes", Subtask.GD: "Group", Subtask.GI: "None",
        Subtask.IMPL: "None", Subtask.HS: "Yes",
    },
}


def _flip_hs(gold_output: str, config: SchemeConfig) -> str:
    parsed = parse(gold_output, config)
    answers = {}
    for task in config.field_order:
        if task is Subtask.HS:
            answers[task] = "No" if parsed.hs else "Yes"
        elif task is Subtask.OFF:
            answers[task] = "Yes" if parsed.offensive else "No"
        elif task is Subtask.GD:
            answers[task] = parsed.target_type.value
        elif task is Subtask.GI:
            answers[task] = ", ".join(parsed.groups) if parsed.groups else "None"
        else:
            answers[task] = parsed.implication if parsed.implication else "None"
    return render_output(answers, config)


def mock_generate(
    examples: list[LinearizedExample],
    config: SchemeConfig,
    mode: MockMode,
    seed: int,
    pflip: float = 0.0,
    salt: int = 0,
) -> list[tuple[str, str]]:
    """Produce (id, generation) rows for the given gold examples.

    `salt` separates draws for different cells run under the same seed.
    """
    if mode is MockMode.GOLD_ECHO:
        return [(ex.id, ex.output) for ex in examples]
    if mode is MockMode.NOISY_GOLD:
        generator = rng.stream(rng.MOCK_STREAM, seed, salt)
        flips = generator.random(len(examples)) < pflip
        return [(ex.id, _flip_hs(ex.output, config) if flip else ex.output)
                for ex, flip in zip(examples, flips)]
    constant = render_output(_CONSTANT_ANSWERS[mode], config)
    return [(ex.id, constant) for ex in examples]
