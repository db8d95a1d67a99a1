import pytest

from keyactor.metrics import balanced_accuracy, confusion, evaluate


def brute_force_metrics(preds, labels):
    """Element-by-element confusion counting, no vectorization shared with
    the implementation."""
    tp = sum(1 for p, l in zip(preds, labels) if p == 1 and l == 1)
    fp = sum(1 for p, l in zip(preds, labels) if p == 1 and l == 0)
    fn = sum(1 for p, l in zip(preds, labels) if p == 0 and l == 1)
    tn = sum(1 for p, l in zip(preds, labels) if p == 0 and l == 0)
    acc = (tp + tn) / len(preds)
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return acc, f1


def test_perfect_predictions():
    assert evaluate([1, 0, 1, 0], [1, 0, 1, 0]) == (1.0, 1.0)


def test_worked_confusion_example():
    # TP=2, FP=1, FN=1, TN=6 -> accuracy 0.8, F1 = 2/3.
    labels = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0]
    preds = [1, 1, 0, 1, 0, 0, 0, 0, 0, 0]
    acc, f1 = evaluate(preds, labels)
    assert confusion(preds, labels) == (2, 1, 1, 6)
    assert abs(acc - 0.8) < 1e-15
    assert abs(f1 - 2 / 3) < 1e-15


def test_no_positive_predictions_gives_zero_f1():
    acc, f1 = evaluate([0, 0, 0], [1, 0, 1])
    assert f1 == 0.0
    assert abs(acc - 1 / 3) < 1e-15


def test_length_mismatch_errors():
    with pytest.raises(ValueError):
        evaluate([1, 0], [1])


def test_balanced_accuracy_constant_predictor():
    assert balanced_accuracy([0, 0, 0, 0], [1, 0, 1, 0]) == 0.5
    assert balanced_accuracy([1, 1, 1, 1], [1, 0, 1, 0]) == 0.5


def test_exhaustive_small_lengths():
    # Every (prediction, label) pair up to length 6, against the oracle.
    for n in range(1, 7):
        for p_bits in range(2**n):
            preds = [(p_bits >> i) & 1 for i in range(n)]
            for l_bits in range(2**n):
                labels = [(l_bits >> i) & 1 for i in range(n)]
                assert evaluate(preds, labels) == brute_force_metrics(preds, labels)
