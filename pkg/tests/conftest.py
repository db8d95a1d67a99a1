import json

import pytest

from keyactor.corpus import ContractRecord, ForumCorpus, PostRecord, ThreadRecord, UserRecord


def make_user(uid, username=None, threads=0, posts=0, rep=0):
    return UserRecord(user_id=uid, username=username or f"user_{uid}", thread_count=threads, post_count=posts, reputation=rep)


def make_thread(tid, author, title="a title", at="2020-01-01T00:00:00Z"):
    return ThreadRecord(thread_id=tid, author_id=author, title=title, created_at=at)


def make_post(pid, tid, author, body="a body", quoted=None, at="2020-01-01T01:00:00Z"):
    return PostRecord(post_id=pid, thread_id=tid, author_id=author, body=body, quoted_post_id=quoted, created_at=at)


def make_contract(cid, initiator, counterparty, at="2020-01-02T00:00:00Z"):
    return ContractRecord(contract_id=cid, initiator_id=initiator, counterparty_id=counterparty, created_at=at)


def corpus_of(users=(), threads=(), posts=(), contracts=()):
    return ForumCorpus(
        users=tuple(users), threads=tuple(threads), posts=tuple(posts), contracts=tuple(contracts)
    )


@pytest.fixture
def minimal_corpus():
    """One user, one thread by that user, no posts."""
    return corpus_of(users=[make_user("u1", threads=1)], threads=[make_thread("t1", "u1")])


def write_jsonl_file(path, objects):
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objects:
            fh.write(json.dumps(obj) + "\n")
    return path
