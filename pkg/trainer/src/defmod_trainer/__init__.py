"""Training harness for the defmod pipeline's model-ready files."""

__version__ = "0.1.0"

from .harness import TrainSpec, loss_self_test, predict, train

__all__ = ["__version__", "TrainSpec", "loss_self_test", "predict", "train"]
