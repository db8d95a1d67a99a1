from .cluster import ClusterAssignment, cluster_density, core_distances
from .ctfidf import DocumentSet, TopicModel, ctfidf_weights, model_to_json, save_model, top_terms
from .pipeline import (
    TopicParams,
    attribute_topics,
    build_topic_model,
    collect_documents,
    embed_documents,
    user_topics,
)
from .reduce import PCAReducer, Reducer, reduce_dimensions

__all__ = [
    "ClusterAssignment",
    "DocumentSet",
    "PCAReducer",
    "Reducer",
    "TopicModel",
    "TopicParams",
    "attribute_topics",
    "build_topic_model",
    "cluster_density",
    "collect_documents",
    "core_distances",
    "ctfidf_weights",
    "embed_documents",
    "model_to_json",
    "reduce_dimensions",
    "save_model",
    "top_terms",
    "user_topics",
]
