from __future__ import annotations

import json
from pathlib import Path

import pytest


@pytest.fixture()
def pairs_file(tmp_path):
    def write(pairs: list[tuple[str, str]], name: str = "pairs.jsonl") -> Path:
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as f:
            for i, (src, tgt) in enumerate(pairs):
                f.write(json.dumps({"id": f"x{i}", "input": src, "output": tgt}) + "\n")
        return path
    return write


@pytest.fixture()
def echo_pairs():
    # inputs/outputs over a tiny shared vocabulary; trivially learnable
    colors = ["red", "blue", "green", "amber"]
    return [(f"signal {c} lamp", f"lamp is {c}") for c in colors for _ in range(4)]
