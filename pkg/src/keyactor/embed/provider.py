"""Embedding provider contract, the deterministic hash provider, and
mean-pooled user feature extraction.

A provider owns tokenization and per-token encoding at a fixed dimension of
768. The hash provider maps every token to a seeded-hash vector so the whole
pipeline runs standalone and reproducibly; a remote provider speaking the
same contract can replace it without touching callers.
"""

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from ..errors import EncodeError
from ..rng import rng_for

EMBEDDING_DIM = 768


@runtime_checkable
class EmbeddingProvider(Protocol):
    name: str
    dimension: int
    cls_token: str

    def tokenize(self, text: str) -> list[str]: ...

    def encode_tokens(self, tokens) -> np.ndarray: ...

    def encode_segment(self, tokens) -> np.ndarray: ...


@dataclass(frozen=True)
class UserEmbedding:
    user_id: str
    vector: np.ndarray  # (768,)
    provider: str
    format: str

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.float64)
        if vec.ndim != 1:
            raise EncodeError(f"user embedding must be a vector, got shape {vec.shape}")
        if not np.all(np.isfinite(vec)):
            raise EncodeError("user embedding contains non-finite entries")
        object.__setattr__(self, "vector", vec)


def hash_embed_token(token: str, seed: int = 0, dimension: int = EMBEDDING_DIM) -> np.ndarray:
    """Deterministic per-token vector with entries in [-1, 1]."""
    return rng_for(seed, "hash-embed", token).uniform(-1.0, 1.0, size=dimension)


class HashEmbeddingProvider:
    """Context-free stand-in encoder: same token, same vector, any position.

    Token vectors are cached per provider instance; instances are safe for
    concurrent encode calls once warm (reads only).
    """

    cls_token = "[CLS]"

    def __init__(self, seed: int = 0, dimension: int = EMBEDDING_DIM):
        self.name = f"hash-{dimension}-seed{seed}"
        self.seed = seed
        self.dimension = dimension
        self._cache: dict[str, np.ndarray] = {}

    def tokenize(self, text: str) -> list[str]:
        return text.split()

    def _vector(self, token: str) -> np.ndarray:
        vec = self._cache.get(token)
        if vec is None:
            vec = hash_embed_token(token, self.seed, self.dimension)
            vec.setflags(write=False)
            self._cache[token] = vec
        return vec

    def encode_tokens(self, tokens) -> np.ndarray:
        tokens = list(tokens)
        if not tokens:
            raise EncodeError("cannot encode an empty token list")
        out = np.empty((len(tokens), self.dimension))
        for i, tok in enumerate(tokens):
            out[i] = self._vector(tok)
        return out

    def encode_segment(self, tokens) -> np.ndarray:
        # No context to summarize into a classifier token: a segment vector
        # is the mean of its token vectors.
        return self.encode_tokens(tokens).mean(axis=0)


def encode_user(tokens, provider: EmbeddingProvider, user_id: str = "", format: str = "") -> UserEmbedding:
    """Mean of the per-token vectors of one rendered user sequence."""
    tokens = list(tokens)
    if not tokens:
        raise EncodeError("cannot encode a user from an empty token list")
    vectors = provider.encode_tokens(tokens)
    return UserEmbedding(user_id=user_id, vector=vectors.mean(axis=0), provider=provider.name, format=format)


def embed_user_sequence(
    seq,
    provider: EmbeddingProvider,
    method: str = "truncation",
    budget=None,
    max_len: int = 512,
    query: np.ndarray | None = None,
    seed: int = 0,
) -> UserEmbedding:
    """Feature vector for one user sequence under the chosen long-sequence
    handling method."""
    from ..sequence import TokenBudget, pool_segments, segment_sequence, truncate_sequence

    if method == "truncation":
        tokens = truncate_sequence(seq, budget if budget is not None else TokenBudget())
        return encode_user(tokens, provider, user_id=seq.user_id, format=seq.format)
    segments = segment_sequence(seq, max_len=max_len, cls_token=provider.cls_token)
    vectors = [provider.encode_segment(s) for s in segments]
    pooled = pool_segments(vectors, method, query=query, seed=seed)
    return UserEmbedding(user_id=seq.user_id, vector=pooled, provider=provider.name, format=seq.format)
