"""Automated key-actor candidate identification and label merging.

A user becomes a candidate through either of two clauses: the behavioral
clause (at least 400 replies AND at least 20 threads AND reputation strictly
above 100, all taken from profile metadata) or the keyword clause (at least
``keyword_min`` whole-word hits of the watchlist vocabulary across their
normalized threads and replies). Manual overrides always win over the
automatic decision; everyone else defaults to non-key.
"""

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import ForumCorpus
from .errors import UnknownUserError
from .text import preprocess_text

DEFAULT_KEYWORDS = (
    "bypass",
    "hacking",
    "hacker",
    "hack",
    "shell",
    "bomber",
    "virus",
    "bot",
    "botnet",
    "ddos",
    "crypter",
    "fud",
    "rat",
)

_WORD_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class AnnotationRules:
    min_replies: int = 400
    min_threads: int = 20
    min_reputation: int = 100  # strict: reputation must exceed this
    keywords: tuple[str, ...] = DEFAULT_KEYWORDS
    keyword_min: int = 3
    require_market_engagement: bool = False
    market_categories: tuple[str, ...] = ()

    def __post_init__(self):
        if min(self.min_replies, self.min_threads, self.min_reputation) < 0:
            raise ValueError("thresholds must be >= 0")
        if not self.keywords:
            raise ValueError("keyword list must be non-empty")
        if any(k != k.lower() for k in self.keywords):
            raise ValueError("keywords must be lowercase")


@dataclass(frozen=True)
class CandidateHit:
    user_id: str
    behavioral: bool
    keyword: bool
    keyword_hits: int
    market: bool = False

    @property
    def is_candidate(self) -> bool:
        return self.behavioral or self.keyword


@dataclass(frozen=True)
class LabelSet:
    labels: dict[str, str]  # user_id -> "key" | "non-key"
    provenance: dict[str, str] = field(default_factory=dict)  # user_id -> "auto" | "manual-override"
    rule_hits: dict[str, CandidateHit] = field(default_factory=dict)

    def key_users(self) -> set[str]:
        return {u for u, lab in self.labels.items() if lab == "key"}


def keyword_hit_count(text: str, keywords) -> int:
    """Case-insensitive whole-word occurrences over normalized text."""
    counts = Counter(_WORD_RE.findall(text.lower()))
    return sum(counts[k] for k in keywords)


def user_text(corpus: ForumCorpus, user_id: str) -> str:
    """All of a user's normalized thread titles and post bodies."""
    pieces = [preprocess_text(t.title) for t in corpus.threads_by_author.get(user_id, ())]
    pieces += [preprocess_text(p.body) for p in corpus.posts_by_author.get(user_id, ())]
    return " ".join(p for p in pieces if p)


def auto_candidates(corpus: ForumCorpus, rules: AnnotationRules = AnnotationRules()) -> dict[str, CandidateHit]:
    """Per-user rule hits for every user in the corpus."""
    out: dict[str, CandidateHit] = {}
    for user in corpus.users:
        behavioral = (
            user.post_count >= rules.min_replies
            and user.thread_count >= rules.min_threads
            and user.reputation > rules.min_reputation
        )
        hits = keyword_hit_count(user_text(corpus, user.user_id), rules.keywords)
        keyword = hits >= rules.keyword_min
        market = False
        if rules.require_market_engagement:
            # Market engagement keys off category tags carried in titles; the
            # corpus schema has no category field, so a tag prefix is used.
            market = any(
                any(cat in t.title.lower() for cat in rules.market_categories)
                for t in corpus.threads_by_author.get(user.user_id, ())
            )
            behavioral = behavioral and market
        out[user.user_id] = CandidateHit(
            user_id=user.user_id, behavioral=behavioral, keyword=keyword, keyword_hits=hits, market=market
        )
    return out


def merge_labels(candidates: dict[str, CandidateHit], overrides: dict[str, str] | None = None) -> LabelSet:
    """Overrides replace automatic decisions; unknown override users error."""
    overrides = overrides or {}
    unknown = sorted(set(overrides) - set(candidates))
    if unknown:
        raise UnknownUserError(f"overrides reference unknown users: {unknown[:5]}")
    labels, provenance = {}, {}
    for user_id, hit in candidates.items():
        if user_id in overrides:
            label = overrides[user_id]
            if label not in ("key", "non-key"):
                raise ValueError(f"override label must be 'key' or 'non-key', got {label!r}")
            labels[user_id] = label
            provenance[user_id] = "manual-override"
        else:
            labels[user_id] = "key" if hit.is_candidate else "non-key"
            provenance[user_id] = "auto"
    return LabelSet(labels=labels, provenance=provenance, rule_hits=candidates)


def load_overrides(path) -> dict[str, str]:
    """JSONL of {user_id, label, note?}."""
    out = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                obj = json.loads(line)
                out[str(obj["user_id"])] = obj["label"]
    return out


def save_labels(label_set: LabelSet, path) -> None:
    """JSONL of {user_id, label, provenance, rule_hits}."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for user_id in sorted(label_set.labels):
            hit = label_set.rule_hits.get(user_id)
            fh.write(
                json.dumps(
                    {
                        "user_id": user_id,
                        "label": label_set.labels[user_id],
                        "provenance": label_set.provenance.get(user_id, "auto"),
                        "rule_hits": None
                        if hit is None
                        else {"behavioral": hit.behavioral, "keyword": hit.keyword, "keyword_hits": hit.keyword_hits},
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def load_labels(path) -> dict[str, str]:
    out = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                obj = json.loads(line)
                out[str(obj["user_id"])] = obj["label"]
    return out
