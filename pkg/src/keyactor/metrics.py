"""Binary classification metrics (positive class = key actor)."""

import numpy as np


def confusion(predictions, labels) -> tuple[int, int, int, int]:
    """(tp, fp, fn, tn) with 1 as the positive class."""
    preds = np.asarray(predictions, dtype=np.int64)
    gold = np.asarray(labels, dtype=np.int64)
    if preds.shape != gold.shape:
        raise ValueError(f"length mismatch: {preds.shape} predictions vs {gold.shape} labels")
    tp = int(np.sum((preds == 1) & (gold == 1)))
    fp = int(np.sum((preds == 1) & (gold == 0)))
    fn = int(np.sum((preds == 0) & (gold == 1)))
    tn = int(np.sum((preds == 0) & (gold == 0)))
    return tp, fp, fn, tn


def evaluate(predictions, labels) -> tuple[float, float]:
    """(accuracy, F1 on the positive class); F1 is 0 when precision and
    recall are both undefined or zero."""
    tp, fp, fn, tn = confusion(predictions, labels)
    total = tp + fp + fn + tn
    if total == 0:
        raise ValueError("cannot evaluate zero predictions")
    accuracy = (tp + tn) / total
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return accuracy, f1


def balanced_accuracy(predictions, labels) -> float:
    """Mean of per-class recalls; 0.5 for any constant predictor on data
    containing both classes."""
    tp, fp, fn, tn = confusion(predictions, labels)
    pos = tp + fn
    neg = tn + fp
    recall_pos = tp / pos if pos else 0.0
    recall_neg = tn / neg if neg else 0.0
    present = (1 if pos else 0) + (1 if neg else 0)
    if present == 0:
        raise ValueError("cannot evaluate zero predictions")
    return (recall_pos + recall_neg) / present


def metrics_dict(predictions, labels) -> dict:
    tp, fp, fn, tn = confusion(predictions, labels)
    accuracy, f1 = evaluate(predictions, labels)
    return {
        "accuracy": accuracy,
        "f1": f1,
        "balanced_accuracy": balanced_accuracy(predictions, labels),
        "confusion": {"tp": tp, "fp": fp, "fn": fn, "tn": tn},
    }
