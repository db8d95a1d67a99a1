"""The four message-passing layer families and the output projection.

All layers share the node-update shape: collect messages from neighbors,
combine, then a leaky-ReLU update (slope 0.01 on features; attention scores
use slope 0.2 as in the attention-network literature). GCN consumes one
merged symmetric-normalized adjacency; RGCN keeps one row-normalized
adjacency and weight matrix per relation; GAT/GATv2 score the merged edge
set per head with self-loops included in every softmax neighborhood.
"""

import numpy as np

from .. import nn
from ..errors import NeighborhoodError, ShapeError

FEATURE_SLOPE = 0.01
ATTENTION_SLOPE = 0.2


class GcnLayer:
    def __init__(self, in_dim: int, out_dim: int, seed: int = 0, tag: str = "gcn"):
        self.w = nn.xavier_uniform((in_dim, out_dim), nn.param_rng(seed, tag, "W"))
        self.tag = tag

    @property
    def params(self):
        return [self.w]

    def named_params(self):
        return {f"{self.tag}.W": self.w}

    def forward(self, h: nn.Tensor, adj) -> nn.Tensor:
        """leaky_relu(A_hat @ H @ W)."""
        return nn.leaky_relu(nn.spmm(adj, nn.matmul(h, self.w)), FEATURE_SLOPE)


class RgcnLayer:
    def __init__(self, in_dim: int, out_dim: int, relations, seed: int = 0, tag: str = "rgcn"):
        self.relations = tuple(relations)
        self.w_self = nn.xavier_uniform((in_dim, out_dim), nn.param_rng(seed, tag, "W0"))
        self.w_rel = {
            rel: nn.xavier_uniform((in_dim, out_dim), nn.param_rng(seed, tag, "W", rel)) for rel in self.relations
        }
        self.tag = tag

    @property
    def params(self):
        return [self.w_self, *(self.w_rel[r] for r in self.relations)]

    def named_params(self):
        out = {f"{self.tag}.W0": self.w_self}
        out.update({f"{self.tag}.W.{rel}": self.w_rel[rel] for rel in self.relations})
        return out

    def forward(self, h: nn.Tensor, adj_by_relation: dict) -> nn.Tensor:
        """leaky_relu(H W0 + sum_r A_r H W_r)."""
        missing = [r for r in self.relations if r not in adj_by_relation]
        if missing:
            raise ShapeError(f"missing adjacency for relations {missing}")
        out = nn.matmul(h, self.w_self)
        for rel in self.relations:
            out = nn.add(out, nn.spmm(adj_by_relation[rel], nn.matmul(h, self.w_rel[rel])))
        return nn.leaky_relu(out, FEATURE_SLOPE)


def _with_self_loops(src: np.ndarray, dst: np.ndarray, n: int, add_self_loops: bool):
    if add_self_loops:
        loop = np.arange(n, dtype=np.int64)
        return np.concatenate([src, loop]), np.concatenate([dst, loop])
    present = np.zeros(n, dtype=bool)
    present[dst] = True
    if not present.all():
        raise NeighborhoodError(f"nodes without any incident edge and self-loops disabled: {np.flatnonzero(~present)[:5].tolist()}")
    return src, dst


class _AttentionLayer:
    """Shared multi-head scaffolding for GAT and GATv2."""

    def __init__(self, in_dim: int, out_dim: int, heads: int = 4, concat: bool = True, seed: int = 0, tag: str = "att", add_self_loops: bool = True):
        if concat and out_dim % heads:
            raise ShapeError(f"out_dim {out_dim} not divisible by {heads} heads for concat")
        self.in_dim = in_dim
        self.head_dim = out_dim // heads if concat else out_dim
        self.heads = heads
        self.concat = concat
        self.add_self_loops = add_self_loops
        self.tag = tag
        self.seed = seed

    def forward(self, h: nn.Tensor, src: np.ndarray, dst: np.ndarray, num_nodes: int, return_attention: bool = False):
        src, dst = _with_self_loops(np.asarray(src), np.asarray(dst), num_nodes, self.add_self_loops)
        outs, alphas = [], []
        for k in range(self.heads):
            scores, values = self._head_scores(h, src, dst, k)
            alpha = nn.edge_softmax(scores, dst, num_nodes)
            weighted = nn.mul(nn.reshape(alpha, (-1, 1)), values)
            agg = nn.scatter_add_rows(weighted, dst, num_nodes)
            outs.append(nn.leaky_relu(agg, FEATURE_SLOPE))
            alphas.append(alpha)
        if self.concat:
            out = nn.concat(outs, axis=1)
        else:
            out = outs[0]
            for other in outs[1:]:
                out = nn.add(out, other)
            out = out * (1.0 / self.heads)
        if return_attention:
            return out, (np.stack([a.data for a in alphas], axis=1), src, dst)
        return out


class GatLayer(_AttentionLayer):
    """Scores e = leaky_relu(a . [W h_dst || W h_src])."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.w = [
            nn.xavier_uniform((self.in_dim, self.head_dim), nn.param_rng(self.seed, self.tag, "W", k))
            for k in range(self.heads)
        ]
        self.a_dst = [
            nn.xavier_uniform((self.head_dim, 1), nn.param_rng(self.seed, self.tag, "a_dst", k))
            for k in range(self.heads)
        ]
        self.a_src = [
            nn.xavier_uniform((self.head_dim, 1), nn.param_rng(self.seed, self.tag, "a_src", k))
            for k in range(self.heads)
        ]

    @property
    def params(self):
        return [*self.w, *self.a_dst, *self.a_src]

    def named_params(self):
        out = {}
        for k in range(self.heads):
            out[f"{self.tag}.W{k}"] = self.w[k]
            out[f"{self.tag}.a_dst{k}"] = self.a_dst[k]
            out[f"{self.tag}.a_src{k}"] = self.a_src[k]
        return out

    def _head_scores(self, h, src, dst, k):
        hw = nn.matmul(h, self.w[k])
        score_dst = nn.gather_rows(nn.matmul(hw, self.a_dst[k]), dst)
        score_src = nn.gather_rows(nn.matmul(hw, self.a_src[k]), src)
        scores = nn.leaky_relu(nn.add(score_dst, score_src), ATTENTION_SLOPE)
        return nn.reshape(scores, (-1,)), nn.gather_rows(hw, src)


class Gatv2Layer(_AttentionLayer):
    """Scores e = a . leaky_relu(W_dst h_dst + W_src h_src): the attention
    nonlinearity precedes the scoring vector."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.w_dst = [
            nn.xavier_uniform((self.in_dim, self.head_dim), nn.param_rng(self.seed, self.tag, "W_dst", k))
            for k in range(self.heads)
        ]
        self.w_src = [
            nn.xavier_uniform((self.in_dim, self.head_dim), nn.param_rng(self.seed, self.tag, "W_src", k))
            for k in range(self.heads)
        ]
        self.a = [
            nn.xavier_uniform((self.head_dim, 1), nn.param_rng(self.seed, self.tag, "a", k)) for k in range(self.heads)
        ]

    @property
    def params(self):
        return [*self.w_dst, *self.w_src, *self.a]

    def named_params(self):
        out = {}
        for k in range(self.heads):
            out[f"{self.tag}.W_dst{k}"] = self.w_dst[k]
            out[f"{self.tag}.W_src{k}"] = self.w_src[k]
            out[f"{self.tag}.a{k}"] = self.a[k]
        return out

    def _head_scores(self, h, src, dst, k):
        h_dst = nn.gather_rows(nn.matmul(h, self.w_dst[k]), dst)
        h_src = nn.gather_rows(nn.matmul(h, self.w_src[k]), src)
        pre = nn.leaky_relu(nn.add(h_dst, h_src), ATTENTION_SLOPE)
        scores = nn.matmul(pre, self.a[k])
        return nn.reshape(scores, (-1,)), h_src


class OutputProjection:
    """logits = W_o . leaky_relu(h) + b_o, width 2."""

    def __init__(self, in_dim: int, out_dim: int = 2, seed: int = 0, tag: str = "out"):
        self.w = nn.xavier_uniform((in_dim, out_dim), nn.param_rng(seed, tag, "Wo"))
        self.b = nn.zeros((out_dim,))
        self.tag = tag

    @property
    def params(self):
        return [self.w, self.b]

    def named_params(self):
        return {f"{self.tag}.Wo": self.w, f"{self.tag}.bo": self.b}

    def forward(self, h: nn.Tensor) -> nn.Tensor:
        return nn.add(nn.matmul(nn.leaky_relu(h, FEATURE_SLOPE), self.w), self.b)
