from ..metrics import balanced_accuracy, confusion, evaluate, metrics_dict
from .layers import ATTENTION_SLOPE, FEATURE_SLOPE, GatLayer, Gatv2Layer, GcnLayer, OutputProjection, RgcnLayer
from .model import ARCHITECTURES, GnnConfig, GnnModel, GraphMaterials
from .train import TrainResult, train_gnn

__all__ = [
    "ARCHITECTURES",
    "ATTENTION_SLOPE",
    "FEATURE_SLOPE",
    "GatLayer",
    "Gatv2Layer",
    "GcnLayer",
    "GnnConfig",
    "GnnModel",
    "GraphMaterials",
    "OutputProjection",
    "RgcnLayer",
    "TrainResult",
    "balanced_accuracy",
    "confusion",
    "evaluate",
    "metrics_dict",
    "train_gnn",
]
