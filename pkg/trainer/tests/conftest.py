import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from toydata import defmod_cli, write_toy_mdm


@pytest.fixture(scope="session")
def toy_workspace(tmp_path_factory):
    """MDM toy dataset plus model-ready files built through the defmod CLI."""
    root = tmp_path_factory.mktemp("toy")
    mdm = root / "mdm.jsonl"
    write_toy_mdm(mdm, count=50, seed=0)
    defmod_cli("to-model", "--mdm", str(mdm), "-o", str(root / "mdm_model"))
    defmod_cli("ungroup", "--mdm", str(mdm), "-o", str(root / "sdm"))
    defmod_cli("to-model", "--sdm", str(root / "sdm" / "sdm.jsonl"),
               "-o", str(root / "sdm_model"))
    return {
        "root": root,
        "mdm": mdm,
        "mdm_model": root / "mdm_model" / "model.jsonl",
        "sdm_model": root / "sdm_model" / "model.jsonl",
    }


@pytest.fixture(scope="session")
def overfit_checkpoint(toy_workspace, tmp_path_factory):
    """Checkpoint trained long enough to memorize the toy MDM set."""
    from defmod_trainer import TrainSpec, train

    out = tmp_path_factory.mktemp("ckpt")
    ckpt_dir, curve = train(TrainSpec(
        train_path=str(toy_workspace["mdm_model"]),
        out_dir=str(out / "phase1"),
        phase="mdm_pretrain",
        epochs=60,
        seed=1,
    ))
    return {"dir": ckpt_dir, "curve": curve}
