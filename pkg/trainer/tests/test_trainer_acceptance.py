"""Trainer acceptance: toy overfit quality plus the two-phase recipe,
scored end-to-end through the pipeline CLI (run with ``-v -s``)."""

import json
import time

from toydata import defmod_cli
from defmod_trainer import TrainSpec, predict, train


def ok(name):
    print(f"[ACCEPTANCE] {name}: PASS")


class TestToyOverfit:
    def test_loss_halves_and_rouge1_beats_60(self, tmp_path, toy_workspace,
                                             overfit_checkpoint):
        start = time.perf_counter()
        curve = overfit_checkpoint["curve"]
        losses = [p["loss"] for p in curve]
        assert losses[-1] < 0.5 * losses[0], "final loss must halve the initial"
        assert all(b <= a for a, b in zip(losses, losses[1:])), \
            "epoch loss must decrease monotonically"

        preds = tmp_path / "preds.jsonl"
        predict(overfit_checkpoint["dir"], toy_workspace["mdm_model"], preds)

        refs = tmp_path / "refs.jsonl"
        with open(toy_workspace["mdm_model"], encoding="utf-8") as fh, \
                open(refs, "w", encoding="utf-8") as out:
            for line in fh:
                row = json.loads(line)
                out.write(json.dumps(
                    {"word": row["word"], "reference": row["target"]},
                    sort_keys=True,
                ) + "\n")

        reports = tmp_path / "reports"
        defmod_cli("eval", "--preds", str(preds), "--refs", str(refs),
                   "--metrics", "rouge1", "-o", str(reports))
        rouge1 = json.loads(
            (reports / "report_rouge1.json").read_text(encoding="utf-8")
        )["corpus_score"]
        assert rouge1 > 60.0, f"train-set rouge1 {rouge1:.2f} <= 60"

        elapsed = time.perf_counter() - start
        assert elapsed < 600.0
        ok(f"toy overfit: loss {losses[0]:.2f} -> {losses[-1]:.2f}, "
           f"train-set rouge1 {rouge1:.2f} ({elapsed:.0f}s after training)")

    def test_multi_definition_predictions_emit_sep(self, tmp_path, toy_workspace,
                                                   overfit_checkpoint):
        preds = tmp_path / "preds.jsonl"
        predict(overfit_checkpoint["dir"], toy_workspace["mdm_model"], preds)
        texts = [json.loads(line)["prediction"]
                 for line in open(preds, encoding="utf-8")]
        assert any("<sep>" in t for t in texts)
        ok("overfit model emits <sep> inside grouped predictions")


class TestTwoPhaseRecipe:
    def test_phase2_loads_phase1_and_trains(self, tmp_path, toy_workspace):
        ckpt1, curve1 = train(TrainSpec(
            train_path=str(toy_workspace["mdm_model"]),
            out_dir=str(tmp_path / "phase1"),
            phase="mdm_pretrain",
            epochs=8,
            seed=2,
        ))
        ckpt2, curve2 = train(TrainSpec(
            train_path=str(toy_workspace["sdm_model"]),
            out_dir=str(tmp_path / "phase2"),
            phase="sdm_finetune",
            init_checkpoint=str(ckpt1),
            epochs=8,
            seed=3,
        ))
        config = json.loads((ckpt2 / "config.json").read_text(encoding="utf-8"))
        assert config["phase"] == "sdm_finetune"
        assert config["init_checkpoint"] == str(ckpt1)
        assert curve2[-1]["loss"] < curve2[0]["loss"]
        # warm start: phase 2 opens far below a cold phase-1 start
        assert curve2[0]["loss"] < curve1[0]["loss"]
        ok("two-phase recipe: finetune loads the pretrain checkpoint")
