import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def tiny_inventory_tsv(tmp_path):
    path = tmp_path / "inv.tsv"
    path.write_text(
        "spout\tn\ta newly grown bud (especially from a germinating seed)\t"
        "a spout grew from the seed\tbud|shoot\tplant organ\n"
        "spout\tv\tproduce buds, branches, or germinate\t\tgerminate\t\n"
        "mope\tv\twander about listlessly\t\t\t\n",
        encoding="utf-8",
    )
    return path
