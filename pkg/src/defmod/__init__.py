"""defmod: build and evaluate multi-definition generation datasets.

Pipeline pieces: corpus indexing (``corpus``), sense inventories
(``inventory``), dataset construction (``builder``), holdout splits and
format conversions (``splits``), and the metric suite (``metrics``) with
numba-accelerated kernels (``kernels``).  The ``defmod`` CLI wires them
into reproducible, manifest-stamped runs.
"""

__version__ = "0.1.0"

from .builder import (
    MdmEntry,
    ModelExample,
    SdmEntry,
    build_mdm_easy,
    build_wordwiki,
    format_example,
    parse_example,
)
from .corpus import CorpusIndex, Sentence, build_index, split_sentences, tokenize
from .inventory import Sense, SenseInventory, load_inventory, save_inventory
from .metrics import (
    EmbeddingTable,
    MetricReport,
    bleu,
    dataset_stats,
    distinct_n,
    greedy_match_score,
    load_embeddings,
    overlap_rate,
    rouge_l,
    rouge_n,
)
from .splits import HoldoutSplit, build_del, group_predictions, ungroup

__all__ = [
    "__version__",
    "MdmEntry", "ModelExample", "SdmEntry",
    "build_mdm_easy", "build_wordwiki", "format_example", "parse_example",
    "CorpusIndex", "Sentence", "build_index", "split_sentences", "tokenize",
    "Sense", "SenseInventory", "load_inventory", "save_inventory",
    "EmbeddingTable", "MetricReport", "bleu", "dataset_stats", "distinct_n",
    "greedy_match_score", "load_embeddings", "overlap_rate", "rouge_l", "rouge_n",
    "HoldoutSplit", "build_del", "group_predictions", "ungroup",
]
