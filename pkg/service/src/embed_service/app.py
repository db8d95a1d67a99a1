"""HTTP surface: batch /embed, asynchronous /finetune + /jobs, /health.

All request and response bodies carry a schema version field ``v``. The
service is stateless apart from the model registry; fine-tuned checkpoints
become addressable model ids whose encoder body is the base encoder (the
head rides along for reporting).
"""

import os
import threading
from collections import Counter

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .encoder import DeterministicEncoder, load_transformers_encoder
from .head import HeadTrainer, TrainSettings
from .jobs import JobQueue

DEFAULT_MAX_BATCH = 256


class EmbedItem(BaseModel):
    id: str
    text: str


class EmbedOptions(BaseModel):
    pooled: bool = True


class EmbedRequest(BaseModel):
    v: int = 1
    model: str | None = None
    items: list[EmbedItem] = Field(min_length=1)
    options: EmbedOptions = EmbedOptions()


class LabeledItem(BaseModel):
    id: str
    text: str
    label: int = Field(ge=0, le=1)


class FinetuneSettings(BaseModel):
    batch_size: int = Field(default=16, ge=1)
    learning_rate: float = Field(default=5e-5, gt=0)
    epochs: int = Field(default=5, ge=1)
    weight_decay: float = 0.01
    warmup: float = Field(default=0.6, ge=0, le=1)
    decay: float = Field(default=0.1, ge=0, le=1)
    seed: int = 0


class FinetuneRequest(BaseModel):
    v: int = 1
    model: str | None = None
    items: list[LabeledItem] = Field(min_length=1)
    config: FinetuneSettings = FinetuneSettings()


class Registry:
    """Model id -> encoder body (+ optional fine-tuned head metadata)."""

    def __init__(self, default_encoder):
        self._lock = threading.Lock()
        self.default_id = default_encoder.model_id
        self._models = {default_encoder.model_id: {"encoder": default_encoder, "head": None}}
        self._ft_counter = 0

    def resolve(self, model_id: str | None) -> tuple[str, object]:
        mid = model_id or self.default_id
        with self._lock:
            entry = self._models.get(mid)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown model id {mid!r}")
        return mid, entry["encoder"]

    def register_finetuned(self, base_id: str, head, metrics) -> str:
        with self._lock:
            self._ft_counter += 1
            new_id = f"{base_id}+ft{self._ft_counter:04d}"
            base = self._models[base_id]
            self._models[new_id] = {"encoder": base["encoder"], "head": {"trainer": head, "metrics": metrics}}
        return new_id

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._models)


def create_app(seed: int = 0, max_batch: int | None = None, model_path: str | None = None) -> FastAPI:
    max_batch = max_batch or int(os.environ.get("EMBED_SERVICE_MAX_BATCH", DEFAULT_MAX_BATCH))
    model_path = model_path or os.environ.get("EMBED_SERVICE_MODEL_PATH")
    encoder = load_transformers_encoder(model_path) if model_path else DeterministicEncoder(seed=seed)
    registry = Registry(encoder)
    jobs = JobQueue()
    app = FastAPI(title="embed-service")
    app.state.registry = registry
    app.state.jobs = jobs

    @app.get("/health")
    def health():
        return {
            "v": 1,
            "model": registry.default_id,
            "models": registry.ids(),
            "dimension": encoder.dimension,
            "max_sequence_length": encoder.max_sequence_length,
            "max_batch": max_batch,
        }

    @app.post("/embed")
    def embed(request: EmbedRequest):
        if len(request.items) > max_batch:
            raise HTTPException(status_code=413, detail={"error": "batch too large", "max_batch": max_batch})
        dupes = sorted(i for i, n in Counter(item.id for item in request.items).items() if n > 1)
        if dupes:
            raise HTTPException(status_code=422, detail={"error": "duplicate ids", "duplicates": dupes})
        model_id, body = registry.resolve(request.model)
        out = []
        for item in request.items:
            if request.options.pooled:
                vector, truncated = body.encode_pooled(item.text)
                out.append({"id": item.id, "vector": [float(x) for x in vector], "truncated": truncated})
            else:
                vectors, truncated = body.encode(item.text)
                out.append(
                    {
                        "id": item.id,
                        "token_vectors": [[float(x) for x in row] for row in vectors],
                        "truncated": truncated,
                    }
                )
        return {"v": 1, "model": model_id, "items": out}

    @app.post("/finetune")
    def finetune(request: FinetuneRequest):
        labels = np.array([item.label for item in request.items], dtype=np.int64)
        counts = np.bincount(labels, minlength=2)
        if counts.min() < 2:
            raise HTTPException(
                status_code=422,
                detail={"error": "need at least 2 examples per class", "class_counts": counts.tolist()},
            )
        base_id, body = registry.resolve(request.model)
        texts = [item.text for item in request.items]

        def run():
            pooled = np.stack([body.encode_pooled(t)[0] for t in texts])
            settings = TrainSettings(
                batch_size=request.config.batch_size,
                learning_rate=request.config.learning_rate,
                epochs=request.config.epochs,
                weight_decay=request.config.weight_decay,
                warmup=request.config.warmup,
                decay=request.config.decay,
                seed=request.config.seed,
            )
            trainer = HeadTrainer(body.dimension, settings)
            metrics = trainer.fit(pooled, labels)
            model_id = registry.register_finetuned(base_id, trainer, metrics)
            return {"metrics": metrics, "model_id": model_id}

        job_id = jobs.submit(run)
        return {"v": 1, "job_id": job_id}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job id {job_id!r}")
        payload = {"v": 1, "job_id": job.job_id, "status": job.status, "metrics": None, "model_id": None}
        if job.status == "completed":
            payload["metrics"] = job.result["metrics"]
            payload["model_id"] = job.result["model_id"]
        if job.status == "failed":
            payload["error"] = job.error
        return payload

    return app
