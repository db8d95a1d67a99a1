"""Encoder backends.

The built-in encoder is deterministic: each whitespace token maps to a
seeded-hash vector in [-1, 1]^768, so the service contract (dimension,
determinism, truncation) is testable without model weights. A pretrained
transformer checkpoint can be mounted as an alternative backend; it only has
to honor the same tokenize/encode surface.
"""

import hashlib

import numpy as np

DIMENSION = 768
MAX_SEQUENCE_LENGTH = 512


class DeterministicEncoder:
    """Hash-based stand-in encoder; same text, same vectors, forever."""

    def __init__(self, seed: int = 0, model_id: str = "det-768-v1"):
        self.model_id = model_id
        self.seed = seed
        self.dimension = DIMENSION
        self.max_sequence_length = MAX_SEQUENCE_LENGTH
        self._cache: dict[str, np.ndarray] = {}

    def tokenize(self, text: str) -> list[str]:
        return text.split()

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._cache.get(token)
        if vec is None:
            digest = hashlib.blake2b(f"{self.seed}\x1f{token}".encode("utf-8"), digest_size=16).digest()
            entropy = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
            vec = rng.uniform(-1.0, 1.0, size=self.dimension)
            vec.setflags(write=False)
            self._cache[token] = vec
        return vec

    def encode(self, text: str) -> tuple[np.ndarray, bool]:
        """(token_vectors, truncated); over-length texts are cut to the
        sequence limit and flagged."""
        tokens = self.tokenize(text)
        truncated = len(tokens) > self.max_sequence_length
        if truncated:
            tokens = tokens[: self.max_sequence_length]
        if not tokens:
            return np.zeros((0, self.dimension)), False
        out = np.empty((len(tokens), self.dimension))
        for i, tok in enumerate(tokens):
            out[i] = self._token_vector(tok)
        return out, truncated

    def encode_pooled(self, text: str) -> tuple[np.ndarray, bool]:
        vectors, truncated = self.encode(text)
        if len(vectors) == 0:
            return np.zeros(self.dimension), truncated
        return vectors.mean(axis=0), truncated


def load_transformers_encoder(model_path: str):
    """Wrap a local pretrained checkpoint (deployment option; requires torch
    and transformers, which are deliberately not service dependencies)."""
    import torch  # noqa: PLC0415
    from transformers import AutoModel, AutoTokenizer  # noqa: PLC0415

    tokenizer = AutoTokenizer.from_pretrained(model_path)
    model = AutoModel.from_pretrained(model_path)
    model.eval()

    class TransformersEncoder:
        model_id = f"hf:{model_path}"
        dimension = model.config.hidden_size
        max_sequence_length = min(MAX_SEQUENCE_LENGTH, tokenizer.model_max_length)

        def tokenize(self, text: str) -> list[str]:
            return tokenizer.tokenize(text)

        def encode(self, text: str):
            enc = tokenizer(text, truncation=True, max_length=self.max_sequence_length, return_tensors="pt")
            truncated = len(tokenizer.tokenize(text)) > self.max_sequence_length - 2
            with torch.no_grad():
                out = model(**enc).last_hidden_state[0]
            return out.numpy().astype(np.float64), truncated

        def encode_pooled(self, text: str):
            vectors, truncated = self.encode(text)
            return vectors.mean(axis=0), truncated

    return TransformersEncoder()
