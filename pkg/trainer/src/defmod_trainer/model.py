"""A small transformer encoder-decoder behind a score/generate interface.

Built-in size presets stand in for downloadable checkpoints (this harness
runs fully offline); "pretrained" initialization comes from loading a
prior phase's checkpoint.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from .data import BOS, EOS, PAD

PRESETS = {
    "tiny": dict(d_model=96, nhead=4, layers=2, ffn=192),
    "small": dict(d_model=192, nhead=4, layers=3, ffn=384),
}


class Seq2SeqModel(nn.Module):
    def __init__(self, vocab_size: int, d_model: int, nhead: int, layers: int,
                 ffn: int, dropout: float = 0.0, max_len: int = 640):
        super().__init__()
        self.vocab_size = vocab_size
        self.embed = nn.Embedding(vocab_size, d_model, padding_idx=PAD)
        self.pos = nn.Embedding(max_len, d_model)
        self.transformer = nn.Transformer(
            d_model=d_model,
            nhead=nhead,
            num_encoder_layers=layers,
            num_decoder_layers=layers,
            dim_feedforward=ffn,
            dropout=dropout,
            batch_first=True,
        )
        # the fused fast path uses prototype nested tensors; stay on the
        # reference path for stable, deterministic behavior
        self.transformer.encoder.use_nested_tensor = False
        self.out = nn.Linear(d_model, vocab_size)
        self.max_len = max_len

    def _embed(self, ids: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.size(1), device=ids.device)
        return self.embed(ids) + self.pos(positions)[None, :, :]

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        """Logits over the vocabulary for each target-input position."""
        causal = torch.triu(
            torch.ones(tgt_in.size(1), tgt_in.size(1), dtype=torch.bool,
                       device=src.device),
            diagonal=1,
        )
        hidden = self.transformer(
            self._embed(src),
            self._embed(tgt_in),
            tgt_mask=causal,
            src_key_padding_mask=(src == PAD),
            tgt_key_padding_mask=(tgt_in == PAD),
            memory_key_padding_mask=(src == PAD),
        )
        return self.out(hidden)

    def loss(self, src: torch.Tensor, tgt: torch.Tensor) -> torch.Tensor:
        """Mean token-level cross-entropy of tgt[1:] given tgt[:-1]."""
        logits = self(src, tgt[:, :-1])
        return F.cross_entropy(
            logits.reshape(-1, self.vocab_size),
            tgt[:, 1:].reshape(-1),
            ignore_index=PAD,
        )

    @torch.no_grad()
    def generate(self, src: torch.Tensor, max_new_tokens: int = 64) -> list[list[int]]:
        """Greedy decoding, one EOS-terminated id list per batch row."""
        self.eval()
        batch = src.size(0)
        tgt = torch.full((batch, 1), BOS, dtype=torch.long, device=src.device)
        finished = torch.zeros(batch, dtype=torch.bool, device=src.device)
        for _ in range(max_new_tokens):
            logits = self(src, tgt)
            nxt = logits[:, -1, :].argmax(dim=-1)
            nxt = torch.where(finished, torch.full_like(nxt, PAD), nxt)
            tgt = torch.cat([tgt, nxt[:, None]], dim=1)
            finished |= nxt == EOS
            if bool(finished.all()):
                break
        out = []
        for row in tgt[:, 1:].tolist():
            ids = []
            for tok in row:
                if tok in (EOS, PAD):
                    break
                ids.append(tok)
            out.append(ids)
        return out


def build_model(preset: str, vocab_size: int, dropout: float = 0.0) -> Seq2SeqModel:
    if preset not in PRESETS:
        raise ValueError(
            f"unknown model preset {preset!r}; available: {sorted(PRESETS)}"
        )
    cfg = PRESETS[preset]
    return Seq2SeqModel(
        vocab_size,
        d_model=cfg["d_model"],
        nhead=cfg["nhead"],
        layers=cfg["layers"],
        ffn=cfg["ffn"],
        dropout=dropout,
    )
