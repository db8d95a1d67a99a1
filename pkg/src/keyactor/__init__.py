"""keyactor: key-actor identification in forum corpora.

Pipeline stages: corpus ingestion and text normalization; topic condensation
of user histories (PCA + density clustering + class-based term weights);
user-as-sequence rendering; embedding feature extraction behind a pluggable
provider; typed interaction graph construction; GNN node classification.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .corpus import (
    ContractRecord,
    ForumCorpus,
    PostRecord,
    ThreadRecord,
    UserRecord,
    ingest_corpus,
    preprocess_corpus,
    validate_corpus,
    write_corpus,
)
from .text import preprocess_text, tokenize

__version__ = "0.1.0"

__all__ = [
    "ContractRecord",
    "ForumCorpus",
    "KERNEL_BACKEND",
    "PostRecord",
    "ThreadRecord",
    "UserRecord",
    "__version__",
    "ingest_corpus",
    "preprocess_corpus",
    "preprocess_text",
    "tokenize",
    "validate_corpus",
    "write_corpus",
]
