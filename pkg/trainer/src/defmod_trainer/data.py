"""Data plumbing: model-ready JSON-Lines loading, whitespace vocabularies,
and padded batch tensors.

The harness consumes the pipeline's model-ready schema (one object per
line with string ``source`` and ``target`` fields, optional ``word``) and
nothing else; schema violations are reported with line numbers before any
training step runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch

PAD, BOS, EOS, UNK = 0, 1, 2, 3
SPECIALS = ["<pad>", "<bos>", "<eos>", "<unk>"]


class SchemaError(ValueError):
    pass


def read_model_file(path: str | Path) -> list[dict]:
    """Read and validate a model-ready file; every row needs string
    source and target fields."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}: line {lineno}: invalid JSON ({exc.msg})")
            if not isinstance(row, dict):
                raise SchemaError(f"{path}: line {lineno}: expected an object")
            for field in ("source", "target"):
                if not isinstance(row.get(field), str):
                    raise SchemaError(
                        f"{path}: line {lineno}: missing string field {field!r}"
                    )
            rows.append(row)
    return rows


def read_prediction_inputs(path: str | Path) -> list[dict]:
    """Like read_model_file but targets are optional at prediction time."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}: line {lineno}: invalid JSON ({exc.msg})")
            if not isinstance(row.get("source"), str):
                raise SchemaError(f"{path}: line {lineno}: missing string field 'source'")
            rows.append(row)
    return rows


def detect_source_format(rows: list[dict]) -> str:
    """Fingerprint of how sources are prefixed; checkpoints refuse to
    continue training on a different format."""
    if rows and all(
        r["source"].startswith("word: ") and " context: " in r["source"] for r in rows
    ):
        return "word-context-v1"
    return "plain"


@dataclass(frozen=True)
class Vocab:
    token_to_id: dict[str, int]
    id_to_token: list[str]

    @classmethod
    def build(cls, rows: list[dict]) -> "Vocab":
        tokens = dict.fromkeys(SPECIALS)
        for row in rows:
            for tok in row["source"].split():
                tokens.setdefault(tok)
            for tok in row["target"].split():
                tokens.setdefault(tok)
        id_to_token = list(tokens)
        return cls({t: i for i, t in enumerate(id_to_token)}, id_to_token)

    def encode(self, text: str) -> list[int]:
        return [self.token_to_id.get(t, UNK) for t in text.split()]

    def decode(self, ids: list[int]) -> str:
        return " ".join(
            self.id_to_token[i] for i in ids if i not in (PAD, BOS, EOS)
        )

    def __len__(self) -> int:
        return len(self.id_to_token)

    def to_json(self) -> list[str]:
        return list(self.id_to_token)

    @classmethod
    def from_json(cls, tokens: list[str]) -> "Vocab":
        return cls({t: i for i, t in enumerate(tokens)}, list(tokens))


def make_batches(
    rows: list[dict],
    vocab: Vocab,
    batch_size: int,
    max_source_len: int = 512,
    max_target_len: int = 128,
) -> list[tuple[torch.Tensor, torch.Tensor]]:
    """Padded (source, target) id tensors; targets carry BOS ... EOS."""
    encoded = []
    for row in rows:
        src = vocab.encode(row["source"])[:max_source_len]
        tgt = [BOS] + vocab.encode(row["target"])[: max_target_len - 2] + [EOS]
        encoded.append((src or [UNK], tgt))
    batches = []
    for start in range(0, len(encoded), batch_size):
        chunk = encoded[start : start + batch_size]
        src_len = max(len(s) for s, _ in chunk)
        tgt_len = max(len(t) for _, t in chunk)
        src = torch.full((len(chunk), src_len), PAD, dtype=torch.long)
        tgt = torch.full((len(chunk), tgt_len), PAD, dtype=torch.long)
        for i, (s, t) in enumerate(chunk):
            src[i, : len(s)] = torch.tensor(s, dtype=torch.long)
            tgt[i, : len(t)] = torch.tensor(t, dtype=torch.long)
        batches.append((src, tgt))
    return batches
