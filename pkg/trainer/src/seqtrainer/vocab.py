"""Whitespace word vocabulary with stable ids.

Ids 0-3 are reserved for <pad>, <bos>, <eos>, <unk>.  Words are assigned
by descending frequency with lexicographic tie-break, so a vocabulary is
a pure function of its training text.  `extend` appends new words without
renumbering, which lets later training stages grow the vocabulary while
keeping earlier checkpoints loadable.
"""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path
from typing import Iterable

PAD, BOS, EOS, UNK = 0, 1, 2, 3
SPECIALS = ("<pad>", "<bos>", "<eos>", "<unk>")


class Vocab:
    def __init__(self, words: list[str]) -> None:
        self.words = list(SPECIALS) + [w for w in words if w not in SPECIALS]
        self.index = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    @classmethod
    def build(cls, texts: Iterable[str]) -> "Vocab":
        counts: Counter[str] = Counter()
        for text in texts:
            counts.update(text.split())
        ordered = sorted(counts, key=lambda w: (-counts[w], w))
        return cls(ordered)

    def extend(self, texts: Iterable[str]) -> int:
        """Append unseen words; returns how many were added."""
        counts: Counter[str] = Counter()
        for text in texts:
            counts.update(w for w in text.split() if w not in self.index)
        added = sorted(counts, key=lambda w: (-counts[w], w))
        for word in added:
            self.index[word] = len(self.words)
            self.words.append(word)
        return len(added)

    def encode(self, text: str, max_len: int) -> list[int]:
        ids = [self.index.get(w, UNK) for w in text.split()]
        return ids[: max_len]

    def decode(self, ids: Iterable[int]) -> str:
        out = []
        for i in ids:
            if i == EOS:
                break
            if i in (PAD, BOS):
                continue
            out.append(self.words[i] if i < len(self.words) else "<unk>")
        return " ".join(out)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.words, ensure_ascii=False), "utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocab":
        words = json.loads(Path(path).read_text("utf-8"))
        vocab = cls.__new__(cls)
        vocab.words = words
        vocab.index = {w: i for i, w in enumerate(words)}
        return vocab
