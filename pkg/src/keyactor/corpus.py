"""Forum corpus data model, JSONL ingestion and integrity validation.

The exchange format is JSON lines, one record per line, with a ``kind``
discriminator of ``user`` / ``thread`` / ``post`` / ``contract``. Ids are
opaque and normalized to strings. A corpus is immutable after ingestion and
its collections are sorted by primary id, so ingestion order never matters.
"""

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import cached_property
from pathlib import Path

from .errors import CorpusParseError, IntegrityError
from .text import preprocess_text


@dataclass(frozen=True)
class UserRecord:
    user_id: str
    username: str
    thread_count: int
    post_count: int
    reputation: int


@dataclass(frozen=True)
class ThreadRecord:
    thread_id: str
    author_id: str
    title: str
    created_at: str


@dataclass(frozen=True)
class PostRecord:
    post_id: str
    thread_id: str
    author_id: str
    body: str
    quoted_post_id: str | None
    created_at: str


@dataclass(frozen=True)
class ContractRecord:
    contract_id: str
    initiator_id: str
    counterparty_id: str
    created_at: str


@dataclass(frozen=True)
class Provenance:
    source: str
    ingested_at: str


@dataclass(frozen=True)
class Violation:
    code: str
    ref: str
    message: str

    def __str__(self):
        return f"{self.code}({self.ref}): {self.message}"


@dataclass(frozen=True)
class ForumCorpus:
    users: tuple[UserRecord, ...]
    threads: tuple[ThreadRecord, ...]
    posts: tuple[PostRecord, ...]
    contracts: tuple[ContractRecord, ...]
    # Runtime metadata only: never serialized, never part of equality.
    provenance: Provenance | None = field(default=None, compare=False, repr=False)

    @cached_property
    def users_by_id(self) -> dict[str, UserRecord]:
        return {u.user_id: u for u in self.users}

    @cached_property
    def posts_by_id(self) -> dict[str, PostRecord]:
        return {p.post_id: p for p in self.posts}

    @cached_property
    def threads_by_id(self) -> dict[str, ThreadRecord]:
        return {t.thread_id: t for t in self.threads}

    @cached_property
    def threads_by_author(self) -> dict[str, list[ThreadRecord]]:
        out: dict[str, list[ThreadRecord]] = {}
        for t in self.threads:
            out.setdefault(t.author_id, []).append(t)
        return out

    @cached_property
    def posts_by_author(self) -> dict[str, list[PostRecord]]:
        out: dict[str, list[PostRecord]] = {}
        for p in self.posts:
            out.setdefault(p.author_id, []).append(p)
        return out

    @cached_property
    def posts_by_thread(self) -> dict[str, list[PostRecord]]:
        out: dict[str, list[PostRecord]] = {}
        for p in self.posts:
            out.setdefault(p.thread_id, []).append(p)
        return out


_REQUIRED = {
    "user": ("user_id", "username", "thread_count", "post_count", "reputation"),
    "thread": ("thread_id", "author_id", "title", "created_at"),
    "post": ("post_id", "thread_id", "author_id", "body", "created_at"),
    "contract": ("contract_id", "initiator_id", "counterparty_id", "created_at"),
}


def _parse_timestamp(value: str) -> datetime:
    ts = datetime.fromisoformat(str(value).replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def _record_from_obj(obj: dict, line_no: int):
    kind = obj.get("kind")
    if kind not in _REQUIRED:
        raise CorpusParseError(line_no, f"unknown kind {kind!r}")
    missing = [k for k in _REQUIRED[kind] if k not in obj]
    if missing:
        raise CorpusParseError(line_no, f"{kind} record missing fields {missing}")
    try:
        if kind == "user":
            return UserRecord(
                user_id=str(obj["user_id"]),
                username=str(obj["username"]),
                thread_count=int(obj["thread_count"]),
                post_count=int(obj["post_count"]),
                reputation=int(obj["reputation"]),
            )
        if kind == "thread":
            _parse_timestamp(obj["created_at"])
            return ThreadRecord(
                thread_id=str(obj["thread_id"]),
                author_id=str(obj["author_id"]),
                title=str(obj["title"]),
                created_at=str(obj["created_at"]),
            )
        if kind == "post":
            _parse_timestamp(obj["created_at"])
            quoted = obj.get("quoted_post_id")
            return PostRecord(
                post_id=str(obj["post_id"]),
                thread_id=str(obj["thread_id"]),
                author_id=str(obj["author_id"]),
                body=str(obj["body"]),
                quoted_post_id=None if quoted is None else str(quoted),
                created_at=str(obj["created_at"]),
            )
        _parse_timestamp(obj["created_at"])
        return ContractRecord(
            contract_id=str(obj["contract_id"]),
            initiator_id=str(obj["initiator_id"]),
            counterparty_id=str(obj["counterparty_id"]),
            created_at=str(obj["created_at"]),
        )
    except (TypeError, ValueError) as exc:
        raise CorpusParseError(line_no, f"bad field value in {kind} record: {exc}") from exc


def ingest_corpus(path, now: str | None = None) -> ForumCorpus:
    """Load a JSONL dump into a validated ForumCorpus.

    Raises CorpusParseError (with line number) on malformed lines and
    IntegrityError when the loaded records violate referential integrity.
    """
    path = Path(path)
    users, threads, posts, contracts = [], [], [], []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise CorpusParseError(line_no, "record is not an object")
            rec = _record_from_obj(obj, line_no)
            if isinstance(rec, UserRecord):
                users.append(rec)
            elif isinstance(rec, ThreadRecord):
                threads.append(rec)
            elif isinstance(rec, PostRecord):
                posts.append(rec)
            else:
                contracts.append(rec)

    corpus = ForumCorpus(
        users=tuple(sorted(users, key=lambda r: r.user_id)),
        threads=tuple(sorted(threads, key=lambda r: r.thread_id)),
        posts=tuple(sorted(posts, key=lambda r: r.post_id)),
        contracts=tuple(sorted(contracts, key=lambda r: r.contract_id)),
        provenance=Provenance(source=str(path), ingested_at=now or datetime.now(timezone.utc).isoformat()),
    )
    violations = validate_corpus(corpus)
    if violations:
        raise IntegrityError(violations)
    return corpus


def validate_corpus(corpus: ForumCorpus) -> list[Violation]:
    """Check every type invariant; violations are data, not exceptions."""
    out: list[Violation] = []

    def dupes(records, key, code):
        seen: set[str] = set()
        for r in records:
            k = key(r)
            if k in seen:
                out.append(Violation(code, k, f"duplicate id {k!r}"))
            seen.add(k)

    dupes(corpus.users, lambda r: r.user_id, "duplicate_user")
    dupes(corpus.threads, lambda r: r.thread_id, "duplicate_thread")
    dupes(corpus.posts, lambda r: r.post_id, "duplicate_post")
    dupes(corpus.contracts, lambda r: r.contract_id, "duplicate_contract")

    user_ids = {u.user_id for u in corpus.users}
    thread_ids = {t.thread_id for t in corpus.threads}
    post_index = {p.post_id: p for p in corpus.posts}

    for u in corpus.users:
        if u.thread_count < 0 or u.post_count < 0:
            out.append(Violation("negative_count", u.user_id, "thread/post counts must be >= 0"))
        authored = len(corpus.threads_by_author.get(u.user_id, ()))
        if u.thread_count > authored:
            out.append(
                Violation(
                    "thread_count_exceeds_authored",
                    u.user_id,
                    f"thread_count {u.thread_count} > {authored} threads authored",
                )
            )

    for t in corpus.threads:
        if t.author_id not in user_ids:
            out.append(Violation("dangling_thread_author", t.thread_id, f"author {t.author_id!r} unknown"))

    for p in corpus.posts:
        if p.thread_id not in thread_ids:
            out.append(Violation("dangling_post_thread", p.post_id, f"thread {p.thread_id!r} unknown"))
        if p.author_id not in user_ids:
            out.append(Violation("dangling_post_author", p.post_id, f"author {p.author_id!r} unknown"))
        if p.quoted_post_id is not None:
            quoted = post_index.get(p.quoted_post_id)
            if quoted is None:
                out.append(Violation("dangling_quote", p.post_id, f"quoted post {p.quoted_post_id!r} unknown"))
            elif _parse_timestamp(quoted.created_at) > _parse_timestamp(p.created_at):
                out.append(Violation("quote_of_later_post", p.post_id, f"quoted post {p.quoted_post_id!r} is later"))

    for c in corpus.contracts:
        if c.initiator_id == c.counterparty_id:
            out.append(Violation("self_contract", c.contract_id, "initiator equals counterparty"))
        for uid in (c.initiator_id, c.counterparty_id):
            if uid not in user_ids:
                out.append(Violation("dangling_contract_party", c.contract_id, f"user {uid!r} unknown"))

    return out


def record_to_obj(rec) -> dict:
    if isinstance(rec, UserRecord):
        return {
            "kind": "user",
            "user_id": rec.user_id,
            "username": rec.username,
            "thread_count": rec.thread_count,
            "post_count": rec.post_count,
            "reputation": rec.reputation,
        }
    if isinstance(rec, ThreadRecord):
        return {
            "kind": "thread",
            "thread_id": rec.thread_id,
            "author_id": rec.author_id,
            "title": rec.title,
            "created_at": rec.created_at,
        }
    if isinstance(rec, PostRecord):
        return {
            "kind": "post",
            "post_id": rec.post_id,
            "thread_id": rec.thread_id,
            "author_id": rec.author_id,
            "body": rec.body,
            "quoted_post_id": rec.quoted_post_id,
            "created_at": rec.created_at,
        }
    return {
        "kind": "contract",
        "contract_id": rec.contract_id,
        "initiator_id": rec.initiator_id,
        "counterparty_id": rec.counterparty_id,
        "created_at": rec.created_at,
    }


def write_corpus(corpus: ForumCorpus, path) -> None:
    """Serialize to canonical JSONL (sorted collections, sorted keys)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for group in (corpus.users, corpus.threads, corpus.posts, corpus.contracts):
            for rec in group:
                fh.write(json.dumps(record_to_obj(rec), sort_keys=True) + "\n")


def preprocess_corpus(corpus: ForumCorpus) -> ForumCorpus:
    """Corpus with every thread title and post body normalized."""
    threads = tuple(
        ThreadRecord(t.thread_id, t.author_id, preprocess_text(t.title), t.created_at) for t in corpus.threads
    )
    posts = tuple(
        PostRecord(p.post_id, p.thread_id, p.author_id, preprocess_text(p.body), p.quoted_post_id, p.created_at)
        for p in corpus.posts
    )
    return ForumCorpus(corpus.users, threads, posts, corpus.contracts, corpus.provenance)
