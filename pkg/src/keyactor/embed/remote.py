"""Embedding provider backed by the HTTP embedding service."""

import numpy as np
import requests

from ..errors import EncodeError


class RemoteProviderError(EncodeError):
    """The embedding service rejected a request or returned a bad payload."""


class RemoteEmbeddingProvider:
    """Speaks the batch /embed wire contract of the embedding service.

    Tokenization is whitespace-based on both sides of the wire, so a token
    list round-trips through ``" ".join`` unchanged.
    """

    cls_token = "[CLS]"

    def __init__(self, base_url: str, model: str | None = None, timeout: float = 30.0, session=None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = session or requests.Session()
        info = self._get("/health")
        self.dimension = int(info["dimension"])
        self.max_sequence_length = int(info["max_sequence_length"])
        self.model = model or info["model"]
        self.name = f"remote:{self.model}"

    def _get(self, path: str) -> dict:
        resp = self._session.get(self.base_url + path, timeout=self.timeout)
        if resp.status_code != 200:
            raise RemoteProviderError(f"GET {path} -> {resp.status_code}: {resp.text[:200]}")
        return resp.json()

    def _embed(self, text: str, pooled: bool) -> dict:
        payload = {
            "v": 1,
            "model": self.model,
            "items": [{"id": "0", "text": text}],
            "options": {"pooled": pooled},
        }
        resp = self._session.post(self.base_url + "/embed", json=payload, timeout=self.timeout)
        if resp.status_code != 200:
            raise RemoteProviderError(f"POST /embed -> {resp.status_code}: {resp.text[:200]}")
        return resp.json()["items"][0]

    def tokenize(self, text: str) -> list[str]:
        return text.split()

    def encode_tokens(self, tokens) -> np.ndarray:
        tokens = list(tokens)
        if not tokens:
            raise EncodeError("cannot encode an empty token list")
        item = self._embed(" ".join(tokens), pooled=False)
        vectors = np.asarray(item["token_vectors"], dtype=np.float64)
        if vectors.shape != (len(tokens), self.dimension) and not item.get("truncated"):
            raise RemoteProviderError(f"expected {(len(tokens), self.dimension)} vectors, got {vectors.shape}")
        return vectors

    def encode_segment(self, tokens) -> np.ndarray:
        tokens = list(tokens)
        if not tokens:
            raise EncodeError("cannot encode an empty segment")
        item = self._embed(" ".join(tokens), pooled=True)
        return np.asarray(item["vector"], dtype=np.float64)
