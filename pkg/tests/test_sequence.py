import numpy as np
import pytest

from keyactor.errors import PoolingError, SequenceFormatError
from keyactor.sequence import (
    FORMATS,
    TokenBudget,
    UserSequence,
    build_sequence,
    pool_segments,
    segment_sequence,
    split_sections,
    truncate_sequence,
)

from .conftest import make_user


def seq_of_tokens(tokens):
    return UserSequence(
        user_id="u1", format="R1", metadata_text="", thread_text="", reply_text="", rendered=tuple(tokens)
    )


ALICE = make_user("u1", username="alice", threads=2, posts=3, rep=4)


def test_r1_layout_matches_table():
    seq = build_sequence(ALICE, threads="t", thread_topics=None, replies="r", reply_topics=None, format="R1")
    assert seq.text == "[M] alice [SEP] 2 [SEP] 3 [SEP] 4 [T] t [R] r"


def test_r3_uses_reply_topics():
    seq = build_sequence(ALICE, threads="full threads here", thread_topics=None, replies="ignored", reply_topics="rat crypter", format="R3")
    assert seq.text.endswith("[R] rat crypter")
    assert "full threads here" in seq.text
    assert "ignored" not in seq.text


def test_r2_and_r4_use_thread_topics():
    r2 = build_sequence(ALICE, threads="long threads", thread_topics="topic words", replies="reply body", reply_topics=None, format="R2")
    assert "[T] topic words" in r2.text and "[R] reply body" in r2.text
    r4 = build_sequence(ALICE, threads="x", thread_topics="tt", replies="y", reply_topics="rt", format="R4")
    assert "[T] tt [R] rt" in r4.text


def test_empty_slots_preserved():
    seq = build_sequence(ALICE, threads="", thread_topics=None, replies="", reply_topics=None, format="R1")
    assert seq.text == "[M] alice [SEP] 2 [SEP] 3 [SEP] 4 [T] [R]"


def test_missing_topics_is_format_error():
    with pytest.raises(SequenceFormatError):
        build_sequence(ALICE, threads="t", thread_topics=None, replies="r", reply_topics=None, format="R4")


def test_unknown_format_rejected():
    with pytest.raises(SequenceFormatError):
        build_sequence(ALICE, threads="t", thread_topics=None, replies="r", reply_topics=None, format="R9")


def test_marker_tokens_rejected_in_content():
    with pytest.raises(SequenceFormatError):
        build_sequence(ALICE, threads="sneaky [R] marker", thread_topics=None, replies="r", reply_topics=None, format="R1")


def test_marker_tokens_rejected_in_username():
    mallory = make_user("u9", username="mallory [T] pad")
    with pytest.raises(SequenceFormatError):
        build_sequence(mallory, threads="t", thread_topics=None, replies="r", reply_topics=None, format="R1")


@pytest.mark.parametrize("fmt", FORMATS)
def test_every_format_parses_back_into_sections(fmt):
    seq = build_sequence(ALICE, threads="aa bb", thread_topics="tt", replies="cc", reply_topics="rr", format=fmt)
    meta, thread, reply = split_sections(seq.rendered)
    assert meta[0] == "[M]" and thread[0] == "[T]" and reply[0] == "[R]"
    assert meta + thread + reply == list(seq.rendered)
    assert seq.rendered.count("[T]") == 1 and seq.rendered.count("[R]") == 1


def test_truncate_within_budget_is_identity():
    seq = build_sequence(ALICE, threads="a b c", thread_topics=None, replies="d", reply_topics=None, format="R1")
    assert truncate_sequence(seq) == list(seq.rendered)


def test_truncate_thread_section_to_239():
    thread = " ".join(f"w{i}" for i in range(300))
    seq = build_sequence(ALICE, threads=thread, thread_topics=None, replies="r", reply_topics=None, format="R1")
    out = truncate_sequence(seq)
    _, thread_sec, _ = split_sections(out)
    assert len(thread_sec) == 239
    assert thread_sec[1:] == [f"w{i}" for i in range(238)]  # head kept, marker first


def test_truncate_metadata_to_34():
    tokens = ["[M]"] + [f"m{i}" for i in range(39)] + ["[T]", "t", "[R]", "r"]
    out = truncate_sequence(seq_of_tokens(tokens))
    meta, _, _ = split_sections(out)
    assert len(meta) == 34
    assert meta[0] == "[M]"


def test_truncate_idempotent_and_bounded():
    tokens = (
        ["[M]"] + ["m"] * 60 + ["[T]"] + ["t"] * 400 + ["[R]"] + ["r"] * 400
    )
    seq = seq_of_tokens(tokens)
    once = truncate_sequence(seq)
    assert len(once) <= 512
    again = truncate_sequence(seq_of_tokens(once))
    assert again == once
    assert len(once) <= len(tokens)


def test_budget_validation():
    with pytest.raises(ValueError):
        TokenBudget(metadata=0)
    with pytest.raises(ValueError):
        TokenBudget(metadata=40, thread=239, reply=239)  # sums past 512


def test_segment_short_sequence_single_segment():
    seq = seq_of_tokens(["x"] * 100)
    segs = segment_sequence(seq)
    assert len(segs) == 1
    assert segs[0] == ["[CLS]"] + ["x"] * 100


def test_segment_long_sequence_round_trips():
    tokens = [f"w{i}" for i in range(1000)]
    segs = segment_sequence(seq_of_tokens(tokens), max_len=512)
    assert len(segs) == 2
    assert all(len(s) - 1 <= 511 for s in segs)
    rebuilt = [tok for seg in segs for tok in seg[1:]]
    assert rebuilt == tokens


def test_segment_empty_sequence():
    assert segment_sequence(seq_of_tokens([])) == [["[CLS]"]]


@pytest.mark.parametrize("method", ["hier_mean", "hier_max", "hier_self_attention"])
def test_pool_single_segment_identity(method):
    v = np.array([0.5, -1.0, 2.0])
    out = pool_segments([v], method)
    assert np.allclose(out, v)


def test_pool_mean_and_max():
    vs = [np.array([1.0, 3.0]), np.array([3.0, 5.0])]
    assert np.array_equal(pool_segments(vs, "hier_mean"), [2.0, 4.0])
    assert np.array_equal(pool_segments(vs, "hier_max"), [3.0, 5.0])


def test_pool_permutation_invariant():
    rng = np.random.default_rng(0)
    vs = [rng.normal(size=8) for _ in range(5)]
    query = rng.normal(size=8)
    for method, kwargs in [("hier_mean", {}), ("hier_max", {}), ("hier_self_attention", {"query": query})]:
        a = pool_segments(vs, method, **kwargs)
        b = pool_segments(vs[::-1], method, **kwargs)
        assert np.allclose(a, b)


def test_pool_self_attention_weights_toward_aligned_segment():
    q = np.array([1.0, 0.0])
    aligned = np.array([30.0, 0.0])
    off = np.array([0.0, 30.0])
    out = pool_segments([aligned, off], "hier_self_attention", query=q)
    assert np.linalg.norm(out - aligned) < 1e-6


def test_r4_sequences_fit_without_truncation():
    # Topic-only slots keep every user inside the 512-token window whenever
    # the topic lists themselves respect the budgets.
    from keyactor.embed import HashEmbeddingProvider
    from keyactor.synth import SyntheticSpec, generate_corpus
    from keyactor.topics import TopicParams, user_topics

    corpus, _ = generate_corpus(SyntheticSpec(users=100, seed=5))
    provider = HashEmbeddingProvider(seed=0)
    params = TopicParams(min_cluster_size=10, top_k=10)
    thread_topics = user_topics(corpus, provider, "thread", params)
    reply_topics = user_topics(corpus, provider, "reply", params)
    budget = TokenBudget()
    checked = 0
    for user in corpus.users:
        tt = " ".join(thread_topics[user.user_id])
        rt = " ".join(reply_topics[user.user_id])
        if len(tt.split()) + 1 > budget.thread or len(rt.split()) + 1 > budget.reply:
            continue  # out of the invariant's premise
        seq = build_sequence(user, threads="", thread_topics=tt, replies="", reply_topics=rt, format="R4")
        assert len(seq.rendered) <= 512
        assert truncate_sequence(seq, budget) == list(seq.rendered)
        checked += 1
    assert checked >= 90  # the premise must hold for nearly everyone here


def test_pool_empty_errors():
    with pytest.raises(PoolingError):
        pool_segments([], "hier_mean")


def test_pool_mismatched_dims_error():
    with pytest.raises(PoolingError):
        pool_segments([np.zeros(3), np.zeros(4)], "hier_mean")
