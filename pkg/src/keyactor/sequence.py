"""User-as-text-sequence encoding and long-sequence handling.

A user renders to ``[M] <metadata> [T] <thread slot> [R] <reply slot>``
where the metadata section is ``username [SEP] thread_count [SEP]
post_count [SEP] reputation``. Four formats choose what fills the slots:

  R1  full threads, full replies
  R2  thread topics, full replies
  R3  full threads, reply topics
  R4  thread topics, reply topics

Over-long sequences are either truncated per-section against a token budget
or cut into provider-sized segments whose vectors are pooled afterwards.
"""

import math
from dataclasses import dataclass

import numpy as np

from .corpus import UserRecord
from .errors import PoolingError, SequenceFormatError
from .rng import rng_for

FORMATS = ("R1", "R2", "R3", "R4")
MARKERS = ("[M]", "[T]", "[R]", "[SEP]")


@dataclass(frozen=True)
class UserSequence:
    user_id: str
    format: str
    metadata_text: str
    thread_text: str
    reply_text: str
    rendered: tuple[str, ...]

    @property
    def text(self) -> str:
        return " ".join(self.rendered)


@dataclass(frozen=True)
class TokenBudget:
    metadata: int = 34
    thread: int = 239
    reply: int = 239

    def __post_init__(self):
        if min(self.metadata, self.thread, self.reply) <= 0:
            raise ValueError("all section budgets must be positive")
        if self.total > 512:
            raise ValueError(f"budgets sum to {self.total} > 512")

    @property
    def total(self) -> int:
        return self.metadata + self.thread + self.reply


POOLING_METHODS = ("truncation", "hier_mean", "hier_max", "hier_self_attention")


def _check_no_markers(text: str, slot: str) -> list[str]:
    tokens = text.split()
    for tok in tokens:
        if tok in MARKERS:
            raise SequenceFormatError(f"{slot} content contains reserved token {tok!r}")
    return tokens


def build_sequence(
    user: UserRecord,
    threads: str,
    thread_topics: str | None,
    replies: str,
    reply_topics: str | None,
    format: str = "R3",
) -> UserSequence:
    """Render one user in the requested format.

    Topic text may be None only when the format does not reference it.
    """
    if format not in FORMATS:
        raise SequenceFormatError(f"unknown format {format!r}")
    thread_slot = threads if format in ("R1", "R3") else thread_topics
    reply_slot = replies if format in ("R1", "R2") else reply_topics
    if thread_slot is None:
        raise SequenceFormatError(f"format {format} requires thread topics")
    if reply_slot is None:
        raise SequenceFormatError(f"format {format} requires reply topics")

    # Usernames are the one metadata field under external control and may
    # contain whitespace; smuggled marker tokens would corrupt parsing.
    username_tokens = _check_no_markers(user.username, "username")
    metadata_text = " ".join(
        username_tokens + ["[SEP]", str(user.thread_count), "[SEP]", str(user.post_count), "[SEP]", str(user.reputation)]
    )
    rendered = (
        ["[M]"]
        + metadata_text.split()
        + ["[T]"]
        + _check_no_markers(thread_slot, "thread slot")
        + ["[R]"]
        + _check_no_markers(reply_slot, "reply slot")
    )
    return UserSequence(
        user_id=user.user_id,
        format=format,
        metadata_text=metadata_text,
        thread_text=thread_slot,
        reply_text=reply_slot,
        rendered=tuple(rendered),
    )


def split_sections(tokens) -> tuple[list[str], list[str], list[str]]:
    """Split a rendered token list into its [M]/[T]/[R] sections (markers
    kept at the head of each section)."""
    tokens = list(tokens)
    if not tokens or tokens[0] != "[M]":
        raise SequenceFormatError("rendered sequence must begin with [M]")
    try:
        t_at = tokens.index("[T]")
        r_at = tokens.index("[R]", t_at)
    except ValueError as exc:
        raise SequenceFormatError("rendered sequence is missing a section marker") from exc
    return tokens[:t_at], tokens[t_at:r_at], tokens[r_at:]


def truncate_sequence(seq: UserSequence, budget: TokenBudget = TokenBudget()) -> list[str]:
    """Each section independently cut tail-first to its budget (the section
    marker counts toward the budget and is never dropped)."""
    meta, thread, reply = split_sections(seq.rendered)
    return meta[: budget.metadata] + thread[: budget.thread] + reply[: budget.reply]


def segment_sequence(seq: UserSequence, max_len: int = 512, cls_token: str = "[CLS]") -> list[list[str]]:
    """Cut the rendered sequence into content chunks of fewer than
    ``max_len`` tokens, each framed with a leading classifier token.
    Concatenating the unframed chunks reproduces the rendered sequence."""
    if max_len < 2:
        raise ValueError("max_len must leave room for content")
    chunk = max_len - 1
    tokens = list(seq.rendered)
    if not tokens:
        return [[cls_token]]
    return [[cls_token] + tokens[i : i + chunk] for i in range(0, len(tokens), chunk)]


def pool_segments(
    segment_vectors,
    method: str,
    query: np.ndarray | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Combine per-segment vectors into one.

    hier_mean / hier_max are elementwise; hier_self_attention weights the
    segments by softmax(q . k_i / sqrt(dim)) with a single query vector
    (seed-initialized unless one is passed in).
    """
    vectors = [np.asarray(v, dtype=np.float64) for v in segment_vectors]
    if not vectors:
        raise PoolingError("cannot pool zero segments")
    dims = {v.shape for v in vectors}
    if len(dims) != 1:
        raise PoolingError(f"segment vectors differ in shape: {dims}")
    stacked = np.stack(vectors)
    if method == "hier_mean":
        return stacked.mean(axis=0)
    if method == "hier_max":
        return stacked.max(axis=0)
    if method == "hier_self_attention":
        dim = stacked.shape[1]
        q = np.asarray(query, dtype=np.float64) if query is not None else rng_for(seed, "pool-query").standard_normal(dim)
        scores = stacked @ q / math.sqrt(dim)
        scores -= scores.max()
        alpha = np.exp(scores)
        alpha /= alpha.sum()
        return alpha @ stacked
    raise ValueError(f"unknown pooling method {method!r}")
