"""A small encoder-decoder transformer with greedy decoding.

Sized to overfit few-shot training sets on a CPU in seconds; the
checkpoint format is a directory holding config.json, vocab.json and
weights.pt so stages can chain and the vocabulary can grow between them.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
from torch import nn

from seqtrainer.vocab import BOS, EOS, PAD, Vocab


@dataclass
class ModelConfig:
    d_model: int = 128
    n_heads: int = 4
    n_layers: int = 2
    ffn_dim: int = 256
    dropout: float = 0.1
    max_len: int = 96


class Seq2SeqModel(nn.Module):
    def __init__(self, vocab_size: int, config: ModelConfig) -> None:
        super().__init__()
        self.config = config
        self.embed = nn.Embedding(vocab_size, config.d_model, padding_idx=PAD)
        self.positions = nn.Embedding(config.max_len, config.d_model)
        self.transformer = nn.Transformer(
            d_model=config.d_model, nhead=config.n_heads,
            num_encoder_layers=config.n_layers, num_decoder_layers=config.n_layers,
            dim_feedforward=config.ffn_dim, dropout=config.dropout,
            batch_first=True)
        self.out = nn.Linear(config.d_model, vocab_size)

    @property
    def vocab_size(self) -> int:
        return self.embed.num_embeddings

    def _embed(self, ids: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.size(1), device=ids.device)
        return self.embed(ids) + self.positions(positions)[None, :, :]

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        # boolean causal mask matches the boolean padding masks
        causal = torch.triu(torch.ones(tgt_in.size(1), tgt_in.size(1),
                                       dtype=torch.bool, device=tgt_in.device),
                            diagonal=1)
        hidden = self.transformer(
            self._embed(src), self._embed(tgt_in),
            tgt_mask=causal,
            src_key_padding_mask=src == PAD,
            tgt_key_padding_mask=tgt_in == PAD,
            memory_key_padding_mask=src == PAD)
        return self.out(hidden)

    def resize_vocab(self, new_size: int, seed: int = 0) -> None:
        """Grow embedding and output rows, preserving trained weights."""
        old = self.vocab_size
        if new_size <= old:
            return
        generator = torch.Generator().manual_seed(seed)
        new_embed = nn.Embedding(new_size, self.config.d_model, padding_idx=PAD)
        new_out = nn.Linear(self.config.d_model, new_size)
        with torch.no_grad():
            new_embed.weight.normal_(0.0, 0.02, generator=generator)
            new_embed.weight[:old] = self.embed.weight
            new_out.weight.normal_(0.0, 0.02, generator=generator)
            new_out.weight[:old] = self.out.weight
            new_out.bias.zero_()
            new_out.bias[:old] = self.out.bias
        self.embed = new_embed
        self.out = new_out

    @torch.no_grad()
    def greedy_decode(self, src: torch.Tensor, max_new_tokens: int = 64) -> list[list[int]]:
        """Batch greedy decoding; deterministic for a fixed checkpoint."""
        self.eval()
        batch = src.size(0)
        tgt = torch.full((batch, 1), BOS, dtype=torch.long, device=src.device)
        finished = torch.zeros(batch, dtype=torch.bool, device=src.device)
        limit = min(max_new_tokens, self.config.max_len - 1)
        for _ in range(limit):
            logits = self.forward(src, tgt)
            next_ids = logits[:, -1, :].argmax(dim=-1)
            next_ids = torch.where(finished, torch.full_like(next_ids, PAD), next_ids)
            tgt = torch.cat([tgt, next_ids[:, None]], dim=1)
            finished |= next_ids == EOS
            if bool(finished.all()):
                break
        return [row.tolist() for row in tgt[:, 1:]]

    @torch.no_grad()
    def beam_decode(self, src_row: torch.Tensor, beam_size: int,
                    max_new_tokens: int = 64) -> list[int]:
        """Beam search for one source sequence; beam_size=1 equals greedy."""
        self.eval()
        limit = min(max_new_tokens, self.config.max_len - 1)
        beams: list[tuple[float, list[int], bool]] = [(0.0, [BOS], False)]
        for _ in range(limit):
            if all(done for _, _, done in beams):
                break
            candidates: list[tuple[float, list[int], bool]] = []
            for score, ids, done in beams:
                if done:
                    candidates.append((score, ids, done))
                    continue
                tgt = torch.tensor([ids], dtype=torch.long, device=src_row.device)
                logits = self.forward(src_row[None, :], tgt)
                log_probs = torch.log_softmax(logits[0, -1, :], dim=-1)
                top = torch.topk(log_probs, beam_size)
                for lp, idx in zip(top.values.tolist(), top.indices.tolist()):
                    candidates.append((score + lp, ids + [idx], idx == EOS))
            # ties broken by token ids so decoding stays deterministic
            candidates.sort(key=lambda c: (-c[0], c[1]))
            beams = candidates[:beam_size]
        best = max(beams, key=lambda c: c[0])
        return best[1][1:]


def save_checkpoint(model: Seq2SeqModel, vocab: Vocab, path: str | Path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    (path / "config.json").write_text(json.dumps(asdict(model.config)), "utf-8")
    vocab.save(path / "vocab.json")
    torch.save(model.state_dict(), path / "weights.pt")
    return path


def load_checkpoint(path: str | Path) -> tuple[Seq2SeqModel, Vocab]:
    path = Path(path)
    if not (path / "weights.pt").exists():
        raise FileNotFoundError(
            f"checkpoint {path} is missing weights.pt; was an intermediate "
            "stage checkpoint deleted?")
    config = ModelConfig(**json.loads((path / "config.json").read_text("utf-8")))
    vocab = Vocab.load(path / "vocab.json")
    model = Seq2SeqModel(len(vocab), config)
    model.load_state_dict(torch.load(path / "weights.pt", weights_only=True))
    return model, vocab
