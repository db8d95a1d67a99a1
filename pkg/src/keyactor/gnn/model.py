"""Model assembly: stacked GNN layers plus the output projection."""

from dataclasses import dataclass, field

import numpy as np

from .. import nn
from ..errors import ShapeError
from ..graph import RELATIONS, ForumGraph, normalize_adjacency
from .layers import GatLayer, Gatv2Layer, GcnLayer, OutputProjection, RgcnLayer

ARCHITECTURES = ("GCN", "RGCN", "GAT", "GATv2")


@dataclass(frozen=True)
class GnnConfig:
    architecture: str = "RGCN"
    layers: int = 2
    hidden: int = 128
    dropout: float = 0.4
    learning_rate: float = 5e-4
    epochs: int = 200
    heads: int = 4
    weight_decay: float = 0.01
    class_weighted: bool = True

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"architecture must be one of {ARCHITECTURES}, got {self.architecture!r}")
        if self.layers < 1 or self.hidden <= 0:
            raise ValueError("layers >= 1 and hidden > 0 required")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")


@dataclass
class GraphMaterials:
    """Static per-graph inputs a model consumes: normalized adjacencies for
    convolutional layers, raw symmetric edges for attention layers."""

    adj: object = None
    adj_by_relation: dict = field(default_factory=dict)
    src: np.ndarray | None = None
    dst: np.ndarray | None = None
    num_nodes: int = 0


class GnnModel:
    def __init__(self, config: GnnConfig, in_dim: int, relations=RELATIONS, seed: int = 0):
        self.config = config
        self.relations = tuple(relations)
        self.seed = seed
        arch = config.architecture
        dims = [in_dim] + [config.hidden] * config.layers
        self.layers = []
        for i in range(config.layers):
            tag = f"layer{i}"
            if arch == "GCN":
                self.layers.append(GcnLayer(dims[i], dims[i + 1], seed=seed, tag=tag))
            elif arch == "RGCN":
                self.layers.append(RgcnLayer(dims[i], dims[i + 1], self.relations, seed=seed, tag=tag))
            else:
                cls = GatLayer if arch == "GAT" else Gatv2Layer
                concat = i < config.layers - 1  # heads average on the final layer
                self.layers.append(
                    cls(dims[i], dims[i + 1], heads=config.heads, concat=concat, seed=seed, tag=tag)
                )
        self.projection = OutputProjection(config.hidden, 2, seed=seed)

    @property
    def params(self):
        out = []
        for layer in self.layers:
            out.extend(layer.params)
        out.extend(self.projection.params)
        return out

    def named_params(self):
        out = {}
        for layer in self.layers:
            out.update(layer.named_params())
        out.update(self.projection.named_params())
        return out

    def prepare(self, graph: ForumGraph) -> GraphMaterials:
        arch = self.config.architecture
        materials = GraphMaterials(num_nodes=graph.num_nodes)
        if arch == "GCN":
            materials.adj = normalize_adjacency(graph, "symmetric").matrix
        elif arch == "RGCN":
            materials.adj_by_relation = {
                rel: normalize_adjacency(graph, "row", rel).matrix for rel in self.relations
            }
        else:
            materials.src, materials.dst = graph.propagation_edges()
        return materials

    def forward(
        self,
        features: np.ndarray,
        materials: GraphMaterials,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> nn.Tensor:
        if features is None:
            raise ShapeError("model forward requires node features")
        h = nn.Tensor(np.asarray(features, dtype=np.float64))
        arch = self.config.architecture
        for layer in self.layers:
            if training and self.config.dropout > 0.0:
                h = nn.dropout(h, self.config.dropout, rng, training=True)
            if arch == "GCN":
                h = layer.forward(h, materials.adj)
            elif arch == "RGCN":
                h = layer.forward(h, materials.adj_by_relation)
            else:
                h = layer.forward(h, materials.src, materials.dst, materials.num_nodes)
        return self.projection.forward(h)

    def snapshot(self):
        return [p.data.copy() for p in self.params]

    def restore(self, snapshot):
        for p, data in zip(self.params, snapshot):
            p.data = data.copy()
