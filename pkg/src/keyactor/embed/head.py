"""MLP classification head over user embeddings, and its fine-tuning loop."""

from dataclasses import dataclass, field

import numpy as np

from .. import nn
from ..errors import DegenerateLabelsError, ShapeError
from ..metrics import evaluate, metrics_dict
from ..rng import rng_for


class MlpHead:
    """Hidden affine layers with leaky-ReLU (slope 0.01) and dropout 0.1,
    then a width-2 output layer."""

    def __init__(self, input_dim: int = 768, hidden: tuple[int, ...] = (256, 64), dropout: float = 0.1, seed: int = 0):
        self.input_dim = input_dim
        self.hidden = tuple(hidden)
        self.dropout = dropout
        self.slope = 0.01
        self.seed = seed
        dims = [input_dim, *hidden, 2]
        # The output layer starts at zero so the two classes are exactly
        # interchangeable at initialization (label flips mirror training).
        self.weights = [
            nn.xavier_uniform((dims[i], dims[i + 1]), nn.param_rng(seed, "head", "W", i))
            for i in range(len(dims) - 2)
        ] + [nn.zeros((dims[-2], 2))]
        self.biases = [nn.zeros((dims[i + 1],)) for i in range(len(dims) - 1)]

    @property
    def params(self) -> list[nn.Tensor]:
        return [*self.weights, *self.biases]

    def named_params(self) -> dict[str, nn.Tensor]:
        out = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"head.W{i}"] = w
            out[f"head.b{i}"] = b
        return out

    def logits(self, z: np.ndarray, training: bool = False, rng: np.random.Generator | None = None) -> nn.Tensor:
        z = np.asarray(z, dtype=np.float64)
        if z.ndim == 1:
            z = z[None, :]
        if z.shape[1] != self.input_dim:
            raise ShapeError("head input width mismatch", z.shape, (self.input_dim,))
        h = nn.Tensor(z)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = nn.add(nn.matmul(h, w), b)
            if i < last:
                h = nn.leaky_relu(h, self.slope)
                if training and self.dropout > 0.0:
                    h = nn.dropout(h, self.dropout, rng, training=True)
        return h

    def predict(self, z: np.ndarray) -> np.ndarray:
        return self.logits(z).data.argmax(axis=1)

    def loss_value(self, z: np.ndarray, labels: np.ndarray, weights=None) -> float:
        return float(nn.weighted_cross_entropy(self.logits(z), labels, weights).data)

    def snapshot(self) -> list[np.ndarray]:
        return [p.data.copy() for p in self.params]

    def restore(self, snapshot) -> None:
        for p, data in zip(self.params, snapshot):
            p.data = data.copy()


def head_forward(z: np.ndarray, head: MlpHead) -> np.ndarray:
    """Class probabilities for one vector or a batch (softmax over logits)."""
    z = np.asarray(z, dtype=np.float64)
    single = z.ndim == 1
    logits = head.logits(z).data
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    probs = e / e.sum(axis=1, keepdims=True)
    return probs[0] if single else probs


@dataclass(frozen=True)
class FinetuneConfig:
    """Head-training settings. The numeric defaults sit inside the grid this
    pipeline searches (batch sizes 16/24, rates 1e-5..5e-5, 1..5 epochs);
    values outside those ranges are allowed for custom runs."""

    batch_size: int = 16
    learning_rate: float = 5e-5
    epochs: int = 5
    weight_decay: float = 0.01
    warmup_frac: float = 0.6
    decay_floor: float = 0.1
    split: tuple[float, float, float] = (0.6, 0.2, 0.2)

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 0 or self.learning_rate <= 0:
            raise ValueError("batch_size >= 1, epochs >= 0 and learning_rate > 0 required")
        if not 0.0 <= self.warmup_frac <= 1.0 or not 0.0 <= self.decay_floor <= 1.0:
            raise ValueError("warmup and decay fractions must lie in [0, 1]")
        if abs(sum(self.split) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {self.split}")


@dataclass
class HeadResult:
    head: MlpHead
    best_epoch: int
    metrics: dict = field(default_factory=dict)  # per split
    history: list = field(default_factory=list)


def split_indices(n: int, fractions, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Seeded shuffle split into train/val/test index arrays."""
    order = rng_for(seed, "split").permutation(n)
    n_train = int(round(fractions[0] * n))
    n_val = int(round(fractions[1] * n))
    return order[:n_train], order[n_train : n_train + n_val], order[n_train + n_val :]


def finetune_head(
    embeddings: np.ndarray,
    labels: np.ndarray,
    config: FinetuneConfig = FinetuneConfig(),
    seed: int = 0,
    splits: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
    class_weighted: bool = False,
) -> HeadResult:
    """Train the head with AdamW (weight decay 0.01, warmup then linear
    decay), pick the epoch with the best validation F1, and report metrics
    on all three splits. Deterministic for a fixed seed."""
    X = np.asarray(embeddings, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if X.shape[0] != y.shape[0]:
        raise ShapeError("embeddings/labels length mismatch", X.shape, y.shape)
    if not set(np.unique(y)) <= {0, 1}:
        raise ValueError("labels must be binary 0/1")
    train_idx, val_idx, test_idx = splits if splits is not None else split_indices(len(y), config.split, seed)
    train_classes = np.unique(y[train_idx])
    if len(train_classes) < 2:
        raise DegenerateLabelsError(f"training labels contain a single class {train_classes.tolist()}")

    sample_weights = None
    if class_weighted:
        counts = np.bincount(y[train_idx], minlength=2)
        per_class = len(train_idx) / (2.0 * np.maximum(counts, 1))
        sample_weights = per_class[y]

    head = MlpHead(input_dim=X.shape[1], seed=seed)
    optimizer = nn.AdamW(head.params, lr=config.learning_rate, weight_decay=config.weight_decay)
    batches_per_epoch = max(1, int(np.ceil(len(train_idx) / config.batch_size)))
    total_steps = max(1, config.epochs * batches_per_epoch)

    def split_metrics(idx):
        preds = head.predict(X[idx])
        return metrics_dict(preds, y[idx])

    best = {"epoch": 0, "f1": -1.0, "snapshot": head.snapshot()}
    history = []
    step = 0
    for epoch in range(1, config.epochs + 1):
        order = rng_for(seed, "epoch-shuffle", epoch).permutation(train_idx)
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            step += 1
            logits = head.logits(X[batch], training=True, rng=rng_for(seed, "dropout", epoch, start))
            w = None if sample_weights is None else sample_weights[batch]
            loss = nn.weighted_cross_entropy(logits, y[batch], w)
            optimizer.zero_grad()
            loss.backward()
            lr = config.learning_rate * nn.warmup_linear_decay(step, total_steps, config.warmup_frac, config.decay_floor)
            optimizer.step(lr=lr)
            epoch_loss += float(loss.data) * len(batch)
        _, val_f1 = evaluate(head.predict(X[val_idx]), y[val_idx]) if len(val_idx) else (0.0, 0.0)
        history.append({"epoch": epoch, "train_loss": epoch_loss / len(train_idx), "val_f1": val_f1})
        if val_f1 > best["f1"]:
            best = {"epoch": epoch, "f1": val_f1, "snapshot": head.snapshot()}

    head.restore(best["snapshot"])
    metrics = {
        "train": split_metrics(train_idx),
        "val": split_metrics(val_idx) if len(val_idx) else None,
        "test": split_metrics(test_idx) if len(test_idx) else None,
    }
    return HeadResult(head=head, best_epoch=best["epoch"], metrics=metrics, history=history)
