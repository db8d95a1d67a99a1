"""Node-classification training loop for the forum graph."""

from dataclasses import asdict, dataclass, field

import numpy as np

from .. import nn
from ..errors import TrainingError
from ..graph import SPLIT_TEST, SPLIT_TRAIN, SPLIT_VAL, ForumGraph
from ..metrics import evaluate, metrics_dict
from ..rng import rng_for
from .model import GnnConfig, GnnModel


@dataclass
class TrainResult:
    model: GnnModel
    report: dict
    predictions: np.ndarray  # argmax class per node
    probabilities: np.ndarray = field(repr=False)  # (n, 2) softmax rows


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def train_gnn(graph: ForumGraph, config: GnnConfig = GnnConfig(), seed: int = 0) -> TrainResult:
    """Cross-entropy training on the train mask with inverse-frequency class
    weights, model selection on validation F1, metrics on the test mask.
    Full-batch and fully deterministic for a fixed seed."""
    if graph.features is None:
        raise TrainingError("graph has no node features attached")
    train_idx = np.flatnonzero(graph.splits == SPLIT_TRAIN)
    val_idx = np.flatnonzero(graph.splits == SPLIT_VAL)
    test_idx = np.flatnonzero(graph.splits == SPLIT_TEST)
    if len(train_idx) == 0:
        raise TrainingError("empty train mask")
    labels = graph.labels
    if np.any(labels[np.concatenate([train_idx, val_idx, test_idx])] < 0):
        raise TrainingError("train/val/test nodes must all be labeled")

    sample_weights = np.ones(graph.num_nodes)
    if config.class_weighted:
        counts = np.bincount(labels[train_idx], minlength=2)
        per_class = len(train_idx) / (2.0 * np.maximum(counts, 1))
        sample_weights = per_class[np.maximum(labels, 0)]

    model = GnnModel(config, in_dim=graph.features.shape[1], seed=seed)
    materials = model.prepare(graph)
    optimizer = nn.AdamW(model.params, lr=config.learning_rate, weight_decay=config.weight_decay)

    def eval_preds() -> np.ndarray:
        logits = model.forward(graph.features, materials, training=False)
        return logits.data

    best = {"epoch": 0, "f1": -1.0, "snapshot": model.snapshot()}
    per_epoch = []
    for epoch in range(1, config.epochs + 1):
        logits = model.forward(graph.features, materials, training=True, rng=rng_for(seed, "gnn-dropout", epoch))
        train_logits = nn.gather_rows(logits, train_idx)
        loss = nn.weighted_cross_entropy(train_logits, labels[train_idx], sample_weights[train_idx])
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()

        row = {"epoch": epoch, "train_loss": float(loss.data)}
        if len(val_idx):
            val_logits = eval_preds()[val_idx]
            val_acc, val_f1 = evaluate(val_logits.argmax(axis=1), labels[val_idx])
            row.update({"val_accuracy": val_acc, "val_f1": val_f1})
            if val_f1 > best["f1"]:
                best = {"epoch": epoch, "f1": val_f1, "snapshot": model.snapshot()}
        per_epoch.append(row)

    if len(val_idx) and config.epochs > 0:
        model.restore(best["snapshot"])

    final_logits = eval_preds()
    predictions = final_logits.argmax(axis=1)
    report = {
        "schema": "keyactor/train-report/v1",
        "config": asdict(config),
        "seed": seed,
        "best_epoch": best["epoch"],
        "per_epoch": per_epoch,
        "train": metrics_dict(predictions[train_idx], labels[train_idx]),
        "val": metrics_dict(predictions[val_idx], labels[val_idx]) if len(val_idx) else None,
        "test": metrics_dict(predictions[test_idx], labels[test_idx]) if len(test_idx) else None,
    }
    return TrainResult(
        model=model,
        report=report,
        predictions=predictions,
        probabilities=_softmax_rows(final_logits),
    )
