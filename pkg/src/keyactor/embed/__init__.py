from .grid import GridResult, default_grid, grid_search
from .head import FinetuneConfig, HeadResult, MlpHead, finetune_head, head_forward, split_indices
from .provider import (
    EMBEDDING_DIM,
    EmbeddingProvider,
    HashEmbeddingProvider,
    UserEmbedding,
    embed_user_sequence,
    encode_user,
    hash_embed_token,
)
from .remote import RemoteEmbeddingProvider

__all__ = [
    "EMBEDDING_DIM",
    "EmbeddingProvider",
    "FinetuneConfig",
    "GridResult",
    "HashEmbeddingProvider",
    "HeadResult",
    "MlpHead",
    "RemoteEmbeddingProvider",
    "UserEmbedding",
    "default_grid",
    "embed_user_sequence",
    "encode_user",
    "finetune_head",
    "grid_search",
    "hash_embed_token",
    "head_forward",
    "split_indices",
]
