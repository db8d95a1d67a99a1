"""Seeded synthetic forum generator with planted key actors.

Planted key users differ from the background along every channel the
pipeline consumes: profile metadata (activity counts, reputation), watchlist
vocabulary in their threads and replies, and denser contract/quote/thread
interaction among themselves. ``signal`` in (0, 1] dials how cleanly the two
populations separate; 1.0 is fully disjoint.
"""

import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .corpus import ContractRecord, ForumCorpus, PostRecord, ThreadRecord, UserRecord
from .rng import rng_for

HACKER_VOCAB = (
    "bypass", "hacking", "hacker", "hack", "shell", "bomber", "virus", "bot",
    "botnet", "ddos", "crypter", "fud", "rat", "stealer", "booter", "exploit",
    "keylogger", "malware", "payload", "spread", "slotted", "undetectable",
)

BENIGN_THEMES = {
    "gaming": (
        "game", "server", "minecraft", "account", "level", "clan", "steam",
        "player", "match", "ranked", "skin", "quest", "guild", "loot",
    ),
    "graphics": (
        "logo", "design", "banner", "photoshop", "render", "vector", "font",
        "palette", "mockup", "portfolio", "avatar", "signature", "template",
    ),
    "market": (
        "selling", "buying", "paypal", "btc", "cheap", "price", "vouch",
        "deal", "escrow", "stock", "bundle", "discount", "invoice", "refund",
    ),
    "tech": (
        "windows", "linux", "python", "code", "tutorial", "driver", "kernel",
        "setup", "install", "update", "router", "backup", "script", "config",
    ),
}

_FILLER = ("the", "a", "for", "with", "and", "new", "my", "best", "free", "need", "help", "question", "about", "this")

_NAME_SYLLABLES = ("dar", "vex", "mik", "zor", "lun", "tek", "ral", "sha", "bin", "kov", "neo", "pix", "ash", "rem")


@dataclass(frozen=True)
class SyntheticSpec:
    users: int = 500
    key_fraction: float = 0.15
    seed: int = 7
    signal: float = 0.95
    contracts_per_user: float = 1.2
    quote_prob: float = 0.35
    posts_low: int = 6
    posts_high: int = 26

    def __post_init__(self):
        if not 0.0 < self.key_fraction < 1.0:
            raise ValueError(f"key_fraction must lie in (0, 1), got {self.key_fraction}")
        if not 0.0 < self.signal <= 1.0:
            raise ValueError(f"signal must lie in (0, 1], got {self.signal}")
        if self.users < 10:
            raise ValueError("need at least 10 users")


def _username(rng: np.random.Generator) -> str:
    parts = rng.integers(2, 4)
    name = "".join(_NAME_SYLLABLES[int(i)] for i in rng.integers(0, len(_NAME_SYLLABLES), parts))
    return f"{name}{int(rng.integers(1, 999))}"


def _words(rng: np.random.Generator, n: int, theme: tuple, hacker_weight: float) -> str:
    """Sample n words: hacker vocab with the given weight, otherwise the home
    theme with filler mixed in."""
    out = []
    for _ in range(n):
        roll = rng.random()
        if roll < hacker_weight:
            pool = HACKER_VOCAB
        elif roll < hacker_weight + 0.25:
            pool = _FILLER
        else:
            pool = theme
        out.append(pool[int(rng.integers(0, len(pool)))])
    return " ".join(out)


def _timestamp(i: int) -> str:
    return (datetime(2020, 1, 1, tzinfo=timezone.utc) + timedelta(minutes=i)).isoformat().replace("+00:00", "Z")


def generate_corpus(spec: SyntheticSpec) -> tuple[ForumCorpus, dict[str, str]]:
    """Returns (corpus, planted truth labels keyed by user id)."""
    n = spec.users
    n_key = max(1, round(n * spec.key_fraction))
    rng = rng_for(spec.seed, "synth")
    key_ids = set(rng.choice(n, size=n_key, replace=False).tolist())
    theme_names = sorted(BENIGN_THEMES)

    users, truth = [], {}
    home_theme: dict[str, tuple] = {}
    hacker_weight: dict[str, float] = {}
    for i in range(n):
        uid = f"u{i:04d}"
        is_key = i in key_ids
        truth[uid] = "key" if is_key else "non-key"
        theme = BENIGN_THEMES[theme_names[int(rng.integers(0, len(theme_names)))]]
        home_theme[uid] = theme
        if is_key:
            thread_count = int(rng.integers(20, 46))
            post_count = int(rng.integers(400, 1400))
            reputation = int(rng.integers(101, 2500))
            hacker_weight[uid] = 0.55 + 0.3 * rng.random()
        else:
            thread_count = int(rng.integers(0, 16))
            post_count = int(rng.integers(3, 320))
            reputation = int(rng.integers(-10, 96))
            # Residual watchlist chatter in the background population rises
            # as the planted signal weakens.
            hacker_weight[uid] = 0.08 * (1.0 - spec.signal) * rng.random()
        users.append(
            UserRecord(
                user_id=uid,
                username=_username(rng),
                thread_count=thread_count,
                post_count=post_count,
                reputation=reputation,
            )
        )

    clock = 0
    threads = []
    thread_author: dict[str, str] = {}
    key_threads, nonkey_threads = [], []
    for user in users:
        for _ in range(user.thread_count):
            tid = f"t{len(threads):05d}"
            title = _words(rng, int(rng.integers(4, 9)), home_theme[user.user_id], hacker_weight[user.user_id])
            threads.append(ThreadRecord(thread_id=tid, author_id=user.user_id, title=title, created_at=_timestamp(clock)))
            thread_author[tid] = user.user_id
            (key_threads if truth[user.user_id] == "key" else nonkey_threads).append(tid)
            clock += 1

    posts = []
    posts_in_thread: dict[str, list[str]] = {}
    for user in users:
        is_key = truth[user.user_id] == "key"
        n_posts = int(rng.integers(spec.posts_low, spec.posts_high + 1))
        for _ in range(n_posts):
            # Posting homophily: key users mostly engage key-authored threads.
            if is_key and key_threads and rng.random() < 0.45 + 0.35 * spec.signal:
                tid = key_threads[int(rng.integers(0, len(key_threads)))]
            elif not is_key and nonkey_threads and rng.random() < 0.5 + 0.45 * spec.signal:
                tid = nonkey_threads[int(rng.integers(0, len(nonkey_threads)))]
            elif threads:
                tid = threads[int(rng.integers(0, len(threads)))].thread_id
            else:
                continue
            pid = f"p{len(posts):05d}"
            body = _words(rng, int(rng.integers(10, 28)), home_theme[user.user_id], hacker_weight[user.user_id])
            quoted = None
            earlier = posts_in_thread.get(tid, [])
            if earlier and rng.random() < spec.quote_prob:
                quoted = earlier[int(rng.integers(0, len(earlier)))]
            posts.append(
                PostRecord(
                    post_id=pid,
                    thread_id=tid,
                    author_id=user.user_id,
                    body=body,
                    quoted_post_id=quoted,
                    created_at=_timestamp(clock),
                )
            )
            posts_in_thread.setdefault(tid, []).append(pid)
            clock += 1

    contracts = []
    n_contracts = int(round(spec.contracts_per_user * n))
    key_list = sorted(f"u{i:04d}" for i in key_ids)
    nonkey_list = sorted(f"u{i:04d}" for i in range(n) if i not in key_ids)
    for c in range(n_contracts):
        # Contract edges are densest inside the key population.
        if rng.random() < 0.55:
            initiator = key_list[int(rng.integers(0, len(key_list)))]
            pool = key_list if rng.random() < 0.3 + 0.6 * spec.signal else nonkey_list
        else:
            initiator = nonkey_list[int(rng.integers(0, len(nonkey_list)))]
            pool = nonkey_list if rng.random() < 0.9 else key_list
        counterparty = pool[int(rng.integers(0, len(pool)))]
        if counterparty == initiator:
            continue
        contracts.append(
            ContractRecord(
                contract_id=f"c{c:05d}",
                initiator_id=initiator,
                counterparty_id=counterparty,
                created_at=_timestamp(clock),
            )
        )
        clock += 1

    corpus = ForumCorpus(
        users=tuple(sorted(users, key=lambda r: r.user_id)),
        threads=tuple(sorted(threads, key=lambda r: r.thread_id)),
        posts=tuple(sorted(posts, key=lambda r: r.post_id)),
        contracts=tuple(sorted(contracts, key=lambda r: r.contract_id)),
    )
    return corpus, truth


def write_truth(truth: dict[str, str], path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for uid in sorted(truth):
            fh.write(json.dumps({"user_id": uid, "label": truth[uid]}, sort_keys=True) + "\n")
