"""UNFIS: a TSK neuro-fuzzy classifier whose rules learn which inputs they use."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ForwardTrace,
    ModelParams,
    active_feature_count,
    forward,
    pack,
    parameter_count,
    predict,
    predict_proba,
    unpack,
)
from .initialization import init_params  # noqa: E402
from .optimizers import TrainConfig, TrainHistory, train  # noqa: E402

__all__ = [
    "ForwardTrace", "ModelParams", "TrainConfig", "TrainHistory", "active_feature_count",
    "forward", "init_params", "pack", "parameter_count", "predict", "predict_proba", "train",
    "unpack",
]
