"""Hyperparameter grid search for the classification head.

Every configuration is trained several times with re-shuffled splits and the
averaged results ranked by validation F1 (ties: validation accuracy, then
smaller learning rate, then grid order). The ranking metric is validation,
not test, so model selection never touches held-out data.
"""

import itertools
from dataclasses import asdict, dataclass, field

import numpy as np

from .head import FinetuneConfig, finetune_head


def default_grid() -> list[FinetuneConfig]:
    """Batch sizes 16/24, learning rates 1e-5/5e-5, 1 or 5 epochs."""
    return [
        FinetuneConfig(batch_size=b, learning_rate=lr, epochs=e)
        for b, lr, e in itertools.product((16, 24), (1e-5, 5e-5), (1, 5))
    ]


@dataclass
class GridEntry:
    config: FinetuneConfig
    order: int
    val_f1_mean: float
    val_f1_std: float
    val_accuracy_mean: float
    val_accuracy_std: float
    test_f1_mean: float
    test_f1_std: float
    test_accuracy_mean: float
    test_accuracy_std: float
    runs: list = field(default_factory=list)

    def as_dict(self) -> dict:
        out = {"config": asdict(self.config), "runs": self.runs}
        for key in (
            "val_f1_mean", "val_f1_std", "val_accuracy_mean", "val_accuracy_std",
            "test_f1_mean", "test_f1_std", "test_accuracy_mean", "test_accuracy_std",
        ):
            out[key] = getattr(self, key)
        return out


@dataclass
class GridResult:
    best: FinetuneConfig
    ranked: list[GridEntry]

    def report(self) -> dict:
        return {
            "schema": "keyactor/grid-report/v1",
            "best": asdict(self.best),
            "entries": [e.as_dict() for e in self.ranked],
        }


def grid_search(
    embeddings: np.ndarray,
    labels: np.ndarray,
    grid: list[FinetuneConfig] | None = None,
    runs: int = 5,
    seed: int = 0,
    class_weighted: bool = False,
) -> GridResult:
    configs = list(grid) if grid is not None else default_grid()
    if not configs:
        raise ValueError("grid must contain at least one configuration")
    entries = []
    for order, config in enumerate(configs):
        run_rows = []
        for run in range(runs):
            result = finetune_head(embeddings, labels, config, seed=seed + run, class_weighted=class_weighted)
            run_rows.append(
                {
                    "seed": seed + run,
                    "val_accuracy": result.metrics["val"]["accuracy"],
                    "val_f1": result.metrics["val"]["f1"],
                    "test_accuracy": result.metrics["test"]["accuracy"],
                    "test_f1": result.metrics["test"]["f1"],
                }
            )
        series = {key: np.array([r[key] for r in run_rows]) for key in run_rows[0] if key != "seed"}
        entries.append(
            GridEntry(
                config=config,
                order=order,
                val_f1_mean=float(series["val_f1"].mean()),
                val_f1_std=float(series["val_f1"].std()),
                val_accuracy_mean=float(series["val_accuracy"].mean()),
                val_accuracy_std=float(series["val_accuracy"].std()),
                test_f1_mean=float(series["test_f1"].mean()),
                test_f1_std=float(series["test_f1"].std()),
                test_accuracy_mean=float(series["test_accuracy"].mean()),
                test_accuracy_std=float(series["test_accuracy"].std()),
                runs=run_rows,
            )
        )
    entries.sort(key=lambda e: (-e.val_f1_mean, -e.val_accuracy_mean, e.config.learning_rate, e.order))
    return GridResult(best=entries[0].config, ranked=entries)
