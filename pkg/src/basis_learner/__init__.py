"""Basis Learner: layer-by-layer constructive training of deep polynomial networks.

Networks are built one layer at a time. The first layer is a linear map
obtained from an SVD of the lifted input [1 X]; every later layer consists
of weighted products of two earlier node outputs, chosen so that the node
values on the training set stay linearly independent. A convex fit over all
node outputs forms the output layer. Training error decreases monotonically
with depth and reaches zero once the node values span the whole label space.
"""

from .dataset import (
    DatasetFormatError,
    LabeledDataset,
    SplitSpec,
    load_dense,
    make_dataset,
    split,
    target_matrix,
)
from .network import ModelFormatError, OutputHead, PolyNetwork, load_model, save_model
from .output import OptimizerConfig, fit_head, loss_gradient, loss_value, validation_error
from .trainer import DEFAULT_LAMBDA_GRID, TrainConfig, TrainingTrace, evaluate, train

__version__ = "0.1.0"

__all__ = [
    "DatasetFormatError",
    "LabeledDataset",
    "SplitSpec",
    "load_dense",
    "make_dataset",
    "split",
    "target_matrix",
    "ModelFormatError",
    "OutputHead",
    "PolyNetwork",
    "load_model",
    "save_model",
    "OptimizerConfig",
    "fit_head",
    "loss_gradient",
    "loss_value",
    "validation_error",
    "DEFAULT_LAMBDA_GRID",
    "TrainConfig",
    "TrainingTrace",
    "evaluate",
    "train",
]
