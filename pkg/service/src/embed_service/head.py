"""Self-contained numpy MLP head with AdamW for fine-tune jobs.

Two affine layers with leaky-ReLU between them, cross-entropy loss, decoupled
weight decay, warmup followed by linear decay of the learning rate, and best
epoch chosen on validation F1. Deterministic for a fixed seed.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrainSettings:
    batch_size: int = 16
    learning_rate: float = 5e-5
    epochs: int = 5
    weight_decay: float = 0.01
    warmup: float = 0.6
    decay: float = 0.1
    hidden: int = 64
    seed: int = 0


def _f1(preds: np.ndarray, labels: np.ndarray) -> float:
    tp = int(np.sum((preds == 1) & (labels == 1)))
    fp = int(np.sum((preds == 1) & (labels == 0)))
    fn = int(np.sum((preds == 0) & (labels == 1)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return 2 * precision * recall / (precision + recall) if precision + recall else 0.0


def _metrics(preds: np.ndarray, labels: np.ndarray) -> dict:
    return {"accuracy": float(np.mean(preds == labels)), "f1": _f1(preds, labels)}


class HeadTrainer:
    def __init__(self, dim: int, settings: TrainSettings):
        self.settings = settings
        rng = np.random.default_rng(settings.seed)
        bound = np.sqrt(6.0 / (dim + settings.hidden))
        self.w1 = rng.uniform(-bound, bound, size=(dim, settings.hidden))
        self.b1 = np.zeros(settings.hidden)
        self.w2 = np.zeros((settings.hidden, 2))  # symmetric start for the two classes
        self.b2 = np.zeros(2)
        self._params = [self.w1, self.b1, self.w2, self.b2]
        self._m = [np.zeros_like(p) for p in self._params]
        self._v = [np.zeros_like(p) for p in self._params]
        self._t = 0

    def _forward(self, x: np.ndarray):
        pre = x @ self.w1 + self.b1
        h = np.where(pre > 0, pre, 0.01 * pre)
        logits = h @ self.w2 + self.b2
        return pre, h, logits

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self._forward(x)[2].argmax(axis=1)

    def _step(self, x: np.ndarray, y: np.ndarray, lr: float):
        s = self.settings
        pre, h, logits = self._forward(x)
        shifted = logits - logits.max(axis=1, keepdims=True)
        p = np.exp(shifted)
        p /= p.sum(axis=1, keepdims=True)
        dlogits = p
        dlogits[np.arange(len(y)), y] -= 1.0
        dlogits /= len(y)
        grads = [
            x.T @ (dlogits @ self.w2.T * np.where(pre > 0, 1.0, 0.01)),
            (dlogits @ self.w2.T * np.where(pre > 0, 1.0, 0.01)).sum(axis=0),
            h.T @ dlogits,
            dlogits.sum(axis=0),
        ]
        self._t += 1
        for param, g, m, v in zip(self._params, grads, self._m, self._v):
            if s.weight_decay:
                param *= 1.0 - lr * s.weight_decay
            m *= 0.9
            m += 0.1 * g
            v *= 0.999
            v += 0.001 * g * g
            m_hat = m / (1 - 0.9**self._t)
            v_hat = v / (1 - 0.999**self._t)
            param -= lr * m_hat / (np.sqrt(v_hat) + 1e-8)

    def _lr_at(self, step: int, total: int) -> float:
        s = self.settings
        warmup_steps = max(1, round(s.warmup * total))
        if step <= warmup_steps:
            return s.learning_rate * step / warmup_steps
        remaining = total - warmup_steps
        if remaining <= 0:
            return s.learning_rate
        frac = min((step - warmup_steps) / remaining, 1.0)
        return s.learning_rate * (1.0 - (1.0 - s.decay) * frac)

    def fit(self, x: np.ndarray, y: np.ndarray) -> dict:
        """Train on a 60/20/20 split and report metrics per split."""
        s = self.settings
        rng = np.random.default_rng(s.seed + 1)
        order = rng.permutation(len(y))
        n_train = int(round(0.6 * len(y)))
        n_val = int(round(0.2 * len(y)))
        train_idx = order[:n_train]
        val_idx = order[n_train : n_train + n_val]
        test_idx = order[n_train + n_val :]

        batches = max(1, int(np.ceil(len(train_idx) / s.batch_size)))
        total_steps = max(1, s.epochs * batches)
        best = {"f1": -1.0, "epoch": 0, "params": [p.copy() for p in self._params]}
        step = 0
        for epoch in range(1, s.epochs + 1):
            perm = rng.permutation(train_idx)
            for start in range(0, len(perm), s.batch_size):
                batch = perm[start : start + s.batch_size]
                step += 1
                self._step(x[batch], y[batch], self._lr_at(step, total_steps))
            val_f1 = _f1(self.predict(x[val_idx]), y[val_idx]) if len(val_idx) else 0.0
            if val_f1 > best["f1"]:
                best = {"f1": val_f1, "epoch": epoch, "params": [p.copy() for p in self._params]}
        for param, kept in zip(self._params, best["params"]):
            param[...] = kept
        return {
            "best_epoch": best["epoch"],
            "train": _metrics(self.predict(x[train_idx]), y[train_idx]),
            "val": _metrics(self.predict(x[val_idx]), y[val_idx]) if len(val_idx) else None,
            "test": _metrics(self.predict(x[test_idx]), y[test_idx]) if len(test_idx) else None,
        }
