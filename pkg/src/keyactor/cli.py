"""Command-line pipeline: each subcommand is one restartable stage.

Stages communicate only through files; a JSON config file can predefine any
flag (flags win over config, config wins over defaults). Exit codes: 0 on
success, 1 for usage problems, 2 for data errors.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import artifacts
from .annotate import AnnotationRules, auto_candidates, load_labels, load_overrides, merge_labels, save_labels
from .corpus import ingest_corpus, preprocess_corpus, write_corpus
from .embed import HashEmbeddingProvider, RemoteEmbeddingProvider, embed_user_sequence
from .errors import KeyactorError
from .gnn import GnnConfig, train_gnn
from .graph import assign_splits, build_graph, load_graph, save_graph, with_features, with_labels
from .metrics import metrics_dict
from .nn import save_checkpoint
from .sequence import FORMATS, TokenBudget, UserSequence, build_sequence
from .synth import SyntheticSpec, generate_corpus, write_truth
from .topics import TopicParams, attribute_topics, build_topic_model, collect_documents, save_model

log = logging.getLogger("keyactor")

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _config_get(config: dict, dotted: str, default):
    node = config
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    return node


def _opt(args, name: str, config: dict, dotted: str, default):
    """Flag > config file > default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    return _config_get(config, dotted, default)


def _load_config(args) -> dict:
    if getattr(args, "config", None):
        return artifacts.read_json(args.config)
    return {}


def _provider(args, config):
    name = _opt(args, "provider", config, "provider.name", "hash")
    seed = int(_opt(args, "seed", config, "seed", 0))
    if name == "hash":
        return HashEmbeddingProvider(seed=seed)
    if name == "remote":
        url = _opt(args, "remote_url", config, "provider.remote_url", None)
        if not url:
            raise KeyactorError("remote provider requires --remote-url")
        return RemoteEmbeddingProvider(url, model=_opt(args, "remote_model", config, "provider.remote_model", None))
    raise KeyactorError(f"unknown provider {name!r}")


# ---------------------------------------------------------------------------
# stages
# ---------------------------------------------------------------------------


def cmd_synth(args):
    config = _load_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = SyntheticSpec(
        users=int(_opt(args, "users", config, "synth.users", 500)),
        key_fraction=float(_opt(args, "key_fraction", config, "synth.key_fraction", 0.15)),
        seed=int(_opt(args, "seed", config, "seed", 7)),
        signal=float(_opt(args, "signal", config, "synth.signal", 0.95)),
    )
    t0 = time.perf_counter()
    corpus, truth = generate_corpus(spec)
    corpus_path = out_dir / "corpus.jsonl"
    truth_path = out_dir / "truth.jsonl"
    write_corpus(corpus, corpus_path)
    write_truth(truth, truth_path)
    artifacts.log_stage("synth", [], [corpus_path, truth_path], time.perf_counter() - t0)
    return 0


def cmd_ingest(args):
    t0 = time.perf_counter()
    corpus = ingest_corpus(artifacts.require(args.input))
    write_corpus(corpus, args.out)
    artifacts.log_stage("ingest", [args.input], [args.out], time.perf_counter() - t0)
    return 0


def cmd_preprocess(args):
    t0 = time.perf_counter()
    corpus = preprocess_corpus(ingest_corpus(artifacts.require(args.input)))
    write_corpus(corpus, args.out)
    artifacts.log_stage("preprocess", [args.input], [args.out], time.perf_counter() - t0)
    return 0


def cmd_topics(args):
    config = _load_config(args)
    t0 = time.perf_counter()
    corpus = ingest_corpus(artifacts.require(args.input))
    provider = _provider(args, config)
    params = TopicParams(
        target_dim=int(_opt(args, "target_dim", config, "topics.target_dim", 5)),
        min_cluster_size=int(_opt(args, "min_cluster_size", config, "topics.min_cluster_size", 10)),
        top_k=int(_opt(args, "top_k", config, "topics.top_k", 10)),
        seed=int(_opt(args, "seed", config, "seed", 0)),
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params_block = {**params.as_dict(), "reducer": "pca", "provider": provider.name}

    per_user: dict[str, dict[str, list[str]]] = {u.user_id: {"thread": [], "reply": []} for u in corpus.users}
    outputs = []
    for kind in ("thread", "reply"):
        docs = collect_documents(corpus, kind)
        model, assignment = build_topic_model(docs, provider, params)
        model_path = out_dir / f"topics_{kind}.json"
        if model is not None:
            save_model(model, params_block, model_path, top_k=params.top_k)
            for user, terms in attribute_topics(docs, model, assignment, params.top_k).items():
                if user in per_user:
                    per_user[user][kind] = terms
        else:
            artifacts.write_json(model_path, {"schema": "keyactor/topic-model/v1", "parameters": params_block, "clusters": []})
        outputs.append(model_path)

    topics_path = out_dir / "user_topics.jsonl"
    artifacts.write_jsonl(
        topics_path,
        [
            {"user_id": uid, "thread_topics": t["thread"], "reply_topics": t["reply"]}
            for uid, t in sorted(per_user.items())
        ],
    )
    outputs.append(topics_path)
    artifacts.log_stage("topics", [args.input], outputs, time.perf_counter() - t0)
    return 0


def cmd_sequence(args):
    config = _load_config(args)
    t0 = time.perf_counter()
    corpus = ingest_corpus(artifacts.require(args.input))
    fmt = _opt(args, "format", config, "sequence.format", "R3")
    if fmt not in FORMATS:
        raise KeyactorError(f"format must be one of {FORMATS}, got {fmt!r}")
    topics_by_user = {
        row["user_id"]: row
        for row in artifacts.read_jsonl(artifacts.require(args.topics), ("user_id", "thread_topics", "reply_topics"))
    }
    rows = []
    for user in corpus.users:
        threads_text = " ".join(t.title for t in corpus.threads_by_author.get(user.user_id, ()) if t.title)
        replies_text = " ".join(p.body for p in corpus.posts_by_author.get(user.user_id, ()) if p.body)
        topics_row = topics_by_user.get(user.user_id, {"thread_topics": [], "reply_topics": []})
        seq = build_sequence(
            user,
            threads=threads_text,
            thread_topics=" ".join(topics_row["thread_topics"]),
            replies=replies_text,
            reply_topics=" ".join(topics_row["reply_topics"]),
            format=fmt,
        )
        rows.append({"user_id": user.user_id, "format": fmt, "text": seq.text})
    artifacts.write_jsonl(args.out, rows)
    artifacts.log_stage("sequence", [args.input, args.topics], [args.out], time.perf_counter() - t0)
    return 0


def cmd_embed(args):
    config = _load_config(args)
    t0 = time.perf_counter()
    provider = _provider(args, config)
    method = _opt(args, "method", config, "embed.method", "truncation")
    seed = int(_opt(args, "seed", config, "seed", 0))
    budget = TokenBudget(
        metadata=int(_opt(args, "budget_metadata", config, "embed.budget.metadata", 34)),
        thread=int(_opt(args, "budget_thread", config, "embed.budget.thread", 239)),
        reply=int(_opt(args, "budget_reply", config, "embed.budget.reply", 239)),
    )
    rows = []
    for row in artifacts.read_jsonl(artifacts.require(args.input), ("user_id", "format", "text")):
        seq_tokens = row["text"].split()
        seq = UserSequence(
            user_id=row["user_id"],
            format=row["format"],
            metadata_text="",
            thread_text="",
            reply_text="",
            rendered=tuple(seq_tokens),
        )
        emb = embed_user_sequence(seq, provider, method=method, budget=budget, seed=seed)
        rows.append(
            {
                "user_id": row["user_id"],
                "vector": [float(x) for x in emb.vector],
                "provider": provider.name,
                "format": row["format"],
            }
        )
    artifacts.write_jsonl(args.out, rows)
    artifacts.log_stage("embed", [args.input], [args.out], time.perf_counter() - t0)
    return 0


def cmd_annotate(args):
    config = _load_config(args)
    t0 = time.perf_counter()
    corpus = ingest_corpus(artifacts.require(args.input))
    rules = AnnotationRules(
        min_replies=int(_opt(args, "min_replies", config, "annotate.min_replies", 400)),
        min_threads=int(_opt(args, "min_threads", config, "annotate.min_threads", 20)),
        min_reputation=int(_opt(args, "min_reputation", config, "annotate.min_reputation", 100)),
        keyword_min=int(_opt(args, "keyword_min", config, "annotate.keyword_min", 3)),
    )
    overrides = load_overrides(artifacts.require(args.overrides)) if args.overrides else {}
    label_set = merge_labels(auto_candidates(corpus, rules), overrides)
    save_labels(label_set, args.out)
    inputs = [args.input] + ([args.overrides] if args.overrides else [])
    artifacts.log_stage("annotate", inputs, [args.out], time.perf_counter() - t0)
    return 0


def cmd_build_graph(args):
    config = _load_config(args)
    t0 = time.perf_counter()
    corpus = ingest_corpus(artifacts.require(args.input))
    labels = load_labels(artifacts.require(args.labels))
    seed = int(_opt(args, "seed", config, "seed", 0))
    graph = assign_splits(with_labels(build_graph(corpus), labels), seed=seed)
    save_graph(graph, args.out)
    artifacts.log_stage("build-graph", [args.input, args.labels], [args.out], time.perf_counter() - t0)
    return 0


def _load_embeddings(path) -> dict[str, np.ndarray]:
    rows = artifacts.read_jsonl(artifacts.require(path), ("user_id", "vector"))
    return {row["user_id"]: np.asarray(row["vector"], dtype=np.float64) for row in rows}


def cmd_train(args):
    config = _load_config(args)
    t0 = time.perf_counter()
    graph = load_graph(artifacts.require(args.graph))
    features = _load_embeddings(args.embeddings)
    graph = with_features(graph, features)
    arch = _opt(args, "arch", config, "gnn.architecture", "RGCN")
    gnn_config = GnnConfig(
        architecture=arch,
        layers=int(_opt(args, "layers", config, "gnn.layers", 2)),
        hidden=int(_opt(args, "hidden", config, "gnn.hidden", 128)),
        dropout=float(_opt(args, "dropout", config, "gnn.dropout", 0.4)),
        learning_rate=float(_opt(args, "learning_rate", config, "gnn.learning_rate", 5e-4)),
        epochs=int(_opt(args, "epochs", config, "gnn.epochs", 200)),
        heads=int(_opt(args, "heads", config, "gnn.heads", 4)),
    )
    seed = int(_opt(args, "seed", config, "seed", 0))
    result = train_gnn(graph, gnn_config, seed=seed)

    fmt = artifacts.read_jsonl(args.embeddings, ("user_id",))[0].get("format", "NA")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"train_{arch}_{fmt}"
    report = dict(result.report)
    report["format"] = fmt
    report_path = out_dir / f"{stem}.json"
    artifacts.write_json(report_path, report)
    preds_path = out_dir / f"{stem}_predictions.jsonl"
    split_names = {0: "train", 1: "val", 2: "test", -1: None}
    artifacts.write_jsonl(
        preds_path,
        [
            {
                "user_id": uid,
                "prediction": "key" if int(pred) == 1 else "non-key",
                "prob_key": float(prob[1]),
                "split": split_names[int(split)],
            }
            for uid, pred, prob, split in zip(graph.user_ids, result.predictions, result.probabilities, graph.splits)
        ],
    )
    ckpt_path = out_dir / f"{stem}_model"
    save_checkpoint(ckpt_path, result.model.named_params(), seed=seed)
    artifacts.log_stage(
        "train",
        [args.graph, args.embeddings],
        [report_path, preds_path, ckpt_path.with_suffix(".bin"), ckpt_path.with_suffix(".json")],
        time.perf_counter() - t0,
    )
    return 0


def cmd_evaluate(args):
    t0 = time.perf_counter()
    preds_rows = artifacts.read_jsonl(artifacts.require(args.predictions), ("user_id", "prediction"))
    gold = load_labels(artifacts.require(args.labels))
    split = getattr(args, "split", None)
    pairs = [
        (1 if row["prediction"] == "key" else 0, 1 if gold[row["user_id"]] == "key" else 0)
        for row in preds_rows
        if row["user_id"] in gold and (split is None or row.get("split") == split)
    ]
    if not pairs:
        raise KeyactorError("no overlapping users between predictions and labels")
    preds, labels = zip(*pairs)
    out = {"schema": "keyactor/metrics/v1", "count": len(pairs), "split": split, **metrics_dict(preds, labels)}
    artifacts.write_json(args.out, out)
    artifacts.log_stage("evaluate", [args.predictions, args.labels], [args.out], time.perf_counter() - t0)
    return 0


def cmd_report(args):
    t0 = time.perf_counter()
    run_dir = Path(args.run_dir)
    report = {"schema": "keyactor/report/v1", "stages": {}, "models": [], "formats": {}}

    labels_path = run_dir / "labels.jsonl"
    if labels_path.exists():
        rows = artifacts.read_jsonl(labels_path, ("user_id", "label"))
        key_count = sum(1 for r in rows if r["label"] == "key")
        report["stages"]["annotate"] = {"users": len(rows), "key": key_count, "non_key": len(rows) - key_count}
    for kind in ("thread", "reply"):
        model_path = run_dir / f"topics_{kind}.json"
        if model_path.exists():
            model = artifacts.read_json(model_path, "keyactor/topic-model/v1")
            report["stages"][f"topics_{kind}"] = {
                "clusters": len(model["clusters"]),
                "documents": sum(c["size"] for c in model["clusters"]),
            }
    for train_path in sorted(run_dir.glob("train_*.json")):
        if train_path.name.endswith("_model.json"):
            continue
        obj = json.loads(train_path.read_text())
        if obj.get("schema") != "keyactor/train-report/v1":
            continue
        report["models"].append(
            {
                "name": train_path.stem,
                "architecture": obj["config"]["architecture"],
                "format": obj.get("format", "NA"),
                "best_epoch": obj["best_epoch"],
                "test": obj["test"],
                "val": obj["val"],
            }
        )
    report["models"].sort(key=lambda m: (-(m["test"] or {}).get("f1", 0.0), m["name"]))
    by_format: dict[str, list] = {}
    for m in report["models"]:
        by_format.setdefault(m["format"], []).append((m["test"] or {}).get("f1", 0.0))
    ranking = sorted(by_format.items(), key=lambda kv: (-max(kv[1]), kv[0]))
    report["formats"] = {"ranking": [{"format": f, "best_test_f1": max(v)} for f, v in ranking]}

    artifacts.write_json(args.out, report)
    artifacts.log_stage("report", [], [args.out], time.perf_counter() - t0)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags override config values")
    p.add_argument("--seed", type=int, help="stage seed")


def build_parser() -> _Parser:
    parser = _Parser(prog="keyactor", description="Key-actor identification pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a planted synthetic corpus")
    _add_common(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--users", type=int)
    p.add_argument("--key-fraction", dest="key_fraction", type=float)
    p.add_argument("--signal", type=float)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate and canonicalize a corpus dump")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("preprocess", help="normalize all text in a corpus")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("topics", help="thread/reply topic models and per-user topics")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--provider", choices=("hash", "remote"))
    p.add_argument("--remote-url", dest="remote_url")
    p.add_argument("--remote-model", dest="remote_model")
    p.add_argument("--target-dim", dest="target_dim", type=int)
    p.add_argument("--min-cluster-size", dest="min_cluster_size", type=int)
    p.add_argument("--top-k", dest="top_k", type=int)
    p.set_defaults(func=cmd_topics)

    p = sub.add_parser("sequence", help="render user sequences in one format")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--topics", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=FORMATS)
    p.set_defaults(func=cmd_sequence)

    p = sub.add_parser("embed", help="encode rendered sequences into user vectors")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--provider", choices=("hash", "remote"))
    p.add_argument("--remote-url", dest="remote_url")
    p.add_argument("--remote-model", dest="remote_model")
    p.add_argument("--method", choices=("truncation", "hier_mean", "hier_max", "hier_self_attention"))
    p.add_argument("--budget-metadata", dest="budget_metadata", type=int)
    p.add_argument("--budget-thread", dest="budget_thread", type=int)
    p.add_argument("--budget-reply", dest="budget_reply", type=int)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("annotate", help="rule-based candidate labels (+ overrides)")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--overrides")
    p.add_argument("--min-replies", dest="min_replies", type=int)
    p.add_argument("--min-threads", dest="min_threads", type=int)
    p.add_argument("--min-reputation", dest="min_reputation", type=int)
    p.add_argument("--keyword-min", dest="keyword_min", type=int)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("build-graph", help="typed interaction graph with labels and splits")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("train", help="train a GNN on graph + embeddings")
    _add_common(p)
    p.add_argument("--graph", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--arch", choices=("GCN", "RGCN", "GAT", "GATv2"))
    p.add_argument("--layers", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--heads", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a predictions file against labels")
    _add_common(p)
    p.add_argument("--predictions", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", choices=("train", "val", "test"))
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="aggregate run artifacts into one summary")
    _add_common(p)
    p.add_argument("--run-dir", dest="run_dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyactorError as exc:
        log.error("error: %s", exc)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
