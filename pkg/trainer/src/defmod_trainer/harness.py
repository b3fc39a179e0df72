"""Training and prediction harness.

Supports the two-phase recipe: a ``mdm_pretrain`` run produces a
checkpoint that a ``sdm_finetune`` run loads as its initialization.  A
checkpoint records the source-prefix format it was trained on and refuses
to continue on a file with a different one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch

from .data import (
    SchemaError,
    Vocab,
    detect_source_format,
    make_batches,
    read_model_file,
    read_prediction_inputs,
)
from .model import PRESETS, Seq2SeqModel, build_model

PHASES = ("mdm_pretrain", "sdm_finetune")
# per-phase defaults; unaligned corpus-built pretraining conventionally runs
# at 2e-4 (pass --lr to override)
DEFAULT_LR = {"mdm_pretrain": 1e-4, "sdm_finetune": 3e-4}
DEFAULT_BATCH_SIZE = 16


@dataclass
class TrainSpec:
    train_path: str
    out_dir: str
    phase: str = "sdm_finetune"
    model: str = "tiny"
    epochs: int = 30
    batch_size: int = DEFAULT_BATCH_SIZE
    lr: float | None = None
    seed: int = 0
    dropout: float = 0.0
    init_checkpoint: str | None = None
    eval_path: str | None = None

    def resolved_lr(self) -> float:
        return self.lr if self.lr is not None else DEFAULT_LR[self.phase]


def loss_self_test() -> None:
    """Check the training loss against analytic cross-entropy on a
    hand-built 3-token vocabulary (plus specials), single example."""
    torch.manual_seed(0)
    vocab = Vocab.from_json(["<pad>", "<bos>", "<eos>", "<unk>", "aa", "bb", "cc"])
    model = Seq2SeqModel(len(vocab), d_model=16, nhead=2, layers=1, ffn=32)
    src = torch.tensor([vocab.encode("aa bb cc")])
    tgt = torch.tensor([[1] + vocab.encode("cc bb") + [2]])  # BOS cc bb EOS
    model.eval()
    with torch.no_grad():
        loss = model.loss(src, tgt)
        probs = torch.softmax(model(src, tgt[:, :-1]), dim=-1)[0]
        analytic = -sum(
            torch.log(probs[t, tok]) for t, tok in enumerate(tgt[0, 1:].tolist())
        ) / (tgt.size(1) - 1)
    if abs(float(loss) - float(analytic)) > 1e-5:
        raise AssertionError(
            f"loss self-test failed: {float(loss)} vs analytic {float(analytic)}"
        )


def save_checkpoint(
    out_dir: Path, model: Seq2SeqModel, vocab: Vocab, config: dict
) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), out_dir / "model.pt")
    (out_dir / "vocab.json").write_text(
        json.dumps(vocab.to_json(), ensure_ascii=False), encoding="utf-8"
    )
    (out_dir / "config.json").write_text(
        json.dumps(config, ensure_ascii=False, sort_keys=True, indent=2),
        encoding="utf-8",
    )


def load_checkpoint(path: str | Path) -> tuple[Seq2SeqModel, Vocab, dict]:
    path = Path(path)
    config = json.loads((path / "config.json").read_text(encoding="utf-8"))
    vocab = Vocab.from_json(
        json.loads((path / "vocab.json").read_text(encoding="utf-8"))
    )
    model = build_model(config["model"], len(vocab), dropout=config.get("dropout", 0.0))
    model.load_state_dict(torch.load(path / "model.pt", weights_only=True))
    return model, vocab, config


def train(spec: TrainSpec) -> tuple[Path, list[dict]]:
    """Run one training phase; returns (checkpoint dir, loss curve).

    The loss curve (epoch -> mean token cross-entropy) is also written to
    ``loss_curve.json`` next to the checkpoint.
    """
    if spec.phase not in PHASES:
        raise ValueError(f"unknown phase {spec.phase!r}; expected one of {PHASES}")
    if spec.model not in PRESETS:
        raise ValueError(f"unknown model preset {spec.model!r}")
    rows = read_model_file(spec.train_path)
    if not rows:
        raise SchemaError(f"{spec.train_path}: no training rows")
    source_format = detect_source_format(rows)

    loss_self_test()
    torch.manual_seed(spec.seed)

    if spec.init_checkpoint:
        model, vocab, ckpt_config = load_checkpoint(spec.init_checkpoint)
        if ckpt_config["source_format"] != source_format:
            raise ValueError(
                f"checkpoint was trained on {ckpt_config['source_format']!r} sources "
                f"but {spec.train_path} holds {source_format!r}; refusing to continue"
            )
        if ckpt_config["model"] != spec.model:
            raise ValueError(
                f"checkpoint preset {ckpt_config['model']!r} != requested {spec.model!r}"
            )
    else:
        vocab = Vocab.build(rows)
        model = build_model(spec.model, len(vocab), dropout=spec.dropout)

    batches = make_batches(rows, vocab, spec.batch_size)
    optimizer = torch.optim.Adam(model.parameters(), lr=spec.resolved_lr())
    curve = []
    model.train()
    for epoch in range(1, spec.epochs + 1):
        total = 0.0
        for src, tgt in batches:
            optimizer.zero_grad()
            loss = model.loss(src, tgt)
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * src.size(0)
        curve.append({"epoch": epoch, "loss": total / len(rows)})

    out_dir = Path(spec.out_dir)
    save_checkpoint(
        out_dir,
        model,
        vocab,
        {
            "model": spec.model,
            "phase": spec.phase,
            "source_format": source_format,
            "epochs": spec.epochs,
            "batch_size": spec.batch_size,
            "lr": spec.resolved_lr(),
            "seed": spec.seed,
            "dropout": spec.dropout,
            "init_checkpoint": spec.init_checkpoint,
            "train_path": str(spec.train_path),
        },
    )
    (out_dir / "loss_curve.json").write_text(
        json.dumps(curve, indent=2), encoding="utf-8"
    )
    return out_dir, curve


def predict(
    checkpoint: str | Path,
    input_path: str | Path,
    output_path: str | Path,
    max_new_tokens: int = 64,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> int:
    """Greedy-decode one prediction per input line.

    Output rows are ``{"word", "context_index", "prediction"}``;
    context_index counts a word's lines in file order, which matches the
    grouping order of the aligned dataset builder.  Returns the line count.
    """
    model, vocab, _ = load_checkpoint(checkpoint)
    rows = read_prediction_inputs(input_path)
    word_seen: dict[str, int] = {}
    written = 0
    with open(output_path, "w", encoding="utf-8") as fh:
        for start in range(0, len(rows), batch_size):
            chunk = rows[start : start + batch_size]
            batches = make_batches(
                [{"source": r["source"], "target": ""} for r in chunk],
                vocab,
                batch_size=len(chunk),
            )
            (src, _tgt) = batches[0]
            for row, ids in zip(chunk, model.generate(src, max_new_tokens)):
                word = str(row.get("word", ""))
                index = word_seen.get(word, 0)
                word_seen[word] = index + 1
                fh.write(
                    json.dumps(
                        {
                            "word": word,
                            "context_index": index,
                            "prediction": vocab.decode(ids),
                        },
                        ensure_ascii=False,
                        sort_keys=True,
                    )
                    + "\n"
                )
                written += 1
    return written
