import numpy as np
import pytest
import scipy.sparse as sp

from keyactor import nn
from keyactor.errors import NeighborhoodError
from keyactor.gnn import GatLayer, Gatv2Layer, GcnLayer, OutputProjection, RgcnLayer

from .gradcheck import assert_close_grads, away_from_kinks, numeric_gradient


def leaky(x, slope=0.01):
    return np.where(x > 0, x, slope * x)


def test_gcn_edgeless_identity_weight():
    layer = GcnLayer(3, 3, seed=0)
    layer.w.data = np.eye(3)
    h = np.array([[1.0, -2.0, 0.5], [0.25, 3.0, -1.0]])
    out = layer.forward(nn.Tensor(h), sp.identity(2, format="csr"))
    assert np.allclose(out.data, leaky(h))


def test_gcn_two_node_mutual_edge_averages():
    layer = GcnLayer(2, 2, seed=0)
    layer.w.data = np.eye(2)
    adj = sp.csr_matrix(np.full((2, 2), 0.5))
    out = layer.forward(nn.Tensor(np.eye(2)), adj)
    assert np.allclose(out.data, 0.5)


def test_gcn_matches_dense_oracle():
    rng = np.random.default_rng(0)
    layer = GcnLayer(4, 3, seed=1)
    adj_dense = rng.random((5, 5)) * (rng.random((5, 5)) < 0.5)
    h = rng.normal(size=(5, 4))
    out = layer.forward(nn.Tensor(h), sp.csr_matrix(adj_dense))
    assert np.abs(out.data - leaky(adj_dense @ h @ layer.w.data)).max() < 1e-10


def test_rgcn_self_term_only():
    layer = RgcnLayer(3, 3, relations=("r1", "r2"), seed=0)
    layer.w_self.data = np.eye(3)
    for w in layer.w_rel.values():
        w.data = np.zeros((3, 3))
    h = np.array([[0.5, -1.0, 2.0]])
    adjs = {"r1": sp.identity(1, format="csr"), "r2": sp.identity(1, format="csr")}
    out = layer.forward(nn.Tensor(h), adjs)
    assert np.allclose(out.data, leaky(h))


def test_rgcn_single_edge_mixes_neighbor():
    layer = RgcnLayer(2, 2, relations=("r",), seed=0)
    layer.w_self.data = np.zeros((2, 2))
    layer.w_rel["r"].data = np.eye(2)
    # Node 1 has one in-neighbor (node 0); row-normalized adjacency.
    adj = sp.csr_matrix(np.array([[0.0, 0.0], [1.0, 0.0]]))
    h = np.array([[3.0, 4.0], [100.0, 100.0]])
    out = layer.forward(nn.Tensor(h), {"r": adj})
    assert np.allclose(out.data[1], [3.0, 4.0])
    assert np.allclose(out.data[0], 0.0)


def test_rgcn_disjoint_relations_sum_linearly():
    rng = np.random.default_rng(1)
    rels = ("a", "b", "c")
    layer = RgcnLayer(3, 2, relations=rels, seed=2)
    h = rng.normal(size=(6, 3))
    adjs = {}
    for i, rel in enumerate(rels):
        dense = np.zeros((6, 6))
        dense[2 * i, 2 * i + 1] = 1.0
        adjs[rel] = sp.csr_matrix(dense)
    out = layer.forward(nn.Tensor(h), adjs)
    manual = h @ layer.w_self.data
    for rel in rels:
        manual = manual + adjs[rel].toarray() @ h @ layer.w_rel[rel].data
    assert np.abs(out.data - leaky(manual)).max() < 1e-10


def test_rgcn_degenerates_to_row_normalized_gcn():
    rng = np.random.default_rng(2)
    layer = RgcnLayer(4, 3, relations=("only",), seed=3)
    layer.w_self.data = np.zeros((4, 3))
    dense = (rng.random((5, 5)) < 0.4).astype(float)
    np.fill_diagonal(dense, 0.0)
    deg = dense.sum(axis=1, keepdims=True)
    row_norm = np.divide(dense, deg, out=np.zeros_like(dense), where=deg > 0)
    h = rng.normal(size=(5, 4))
    out = layer.forward(nn.Tensor(h), {"only": sp.csr_matrix(row_norm)})
    gcn_like = leaky(row_norm @ h @ layer.w_rel["only"].data)
    assert np.abs(out.data - gcn_like).max() < 1e-10


def star_edges():
    # Star: leaves 1,2,3 point at center 0.
    src = np.array([1, 2, 3])
    dst = np.array([0, 0, 0])
    return src, dst


@pytest.mark.parametrize("cls", [GatLayer, Gatv2Layer])
def test_attention_uniform_when_scores_equal(cls):
    layer = cls(2, 4, heads=2, concat=True, seed=0)
    src, dst = star_edges()
    h = np.ones((4, 2))  # identical node states -> identical scores
    _, (alpha, s, d) = layer.forward(nn.Tensor(h), src, dst, 4, return_attention=True)
    center_in = d == 0
    assert np.allclose(alpha[center_in], 1.0 / center_in.sum())


@pytest.mark.parametrize("cls", [GatLayer, Gatv2Layer])
def test_attention_sums_to_one_per_neighborhood(cls):
    rng = np.random.default_rng(3)
    layer = cls(3, 4, heads=4, concat=True, seed=1)
    n = 6
    src = rng.integers(0, n, size=12)
    dst = rng.integers(0, n, size=12)
    h = rng.normal(size=(n, 3))
    _, (alpha, s, d) = layer.forward(nn.Tensor(h), src, dst, n, return_attention=True)
    for node in range(n):
        mask = d == node
        assert np.abs(alpha[mask].sum(axis=0) - 1.0).max() < 1e-9


@pytest.mark.parametrize("cls", [GatLayer, Gatv2Layer])
def test_attention_single_node_self_loop(cls):
    layer = cls(3, 3, heads=1, concat=True, seed=2)
    h = np.array([[1.0, 2.0, 3.0]])
    out = layer.forward(nn.Tensor(h), np.empty(0, dtype=int), np.empty(0, dtype=int), 1)
    w = layer.w[0].data if cls is GatLayer else None
    if cls is GatLayer:
        assert np.allclose(out.data, leaky(h @ w))
    else:
        assert out.data.shape == (1, 3)


def test_gat_crafted_attention_dominates():
    layer = GatLayer(2, 2, heads=1, concat=True, seed=0, add_self_loops=False)
    layer.w[0].data = np.eye(2)
    layer.a_dst[0].data = np.zeros((2, 1))
    layer.a_src[0].data = np.array([[5.0], [0.0]])  # score rides on source x-coordinate
    src = np.array([1, 2, 3, 1, 2, 3])
    dst = np.array([0, 0, 0, 1, 2, 3])  # leaves keep themselves fed
    h = np.array([[0.0, 0.0], [2.0, 1.0], [0.0, 1.0], [0.0, 1.0]])
    _, (alpha, s, d) = layer.forward(nn.Tensor(h), src, dst, 4, return_attention=True)
    assert alpha[0, 0] > 0.9  # neighbor 1 dominates the center's softmax


def test_attention_no_incident_edge_errors_when_loops_disabled():
    layer = GatLayer(2, 2, heads=1, concat=True, seed=0, add_self_loops=False)
    with pytest.raises(NeighborhoodError):
        layer.forward(nn.Tensor(np.ones((3, 2))), np.array([0]), np.array([1]), 3)


def test_gat_concat_and_average_shapes():
    rng = np.random.default_rng(4)
    h = nn.Tensor(rng.normal(size=(5, 3)))
    src = np.array([0, 1, 2, 3, 4])
    dst = np.array([1, 2, 3, 4, 0])
    concat_layer = GatLayer(3, 8, heads=4, concat=True, seed=0)
    avg_layer = GatLayer(3, 8, heads=4, concat=False, seed=0)
    assert concat_layer.forward(h, src, dst, 5).data.shape == (5, 8)
    assert avg_layer.forward(h, src, dst, 5).data.shape == (5, 8)


def test_output_projection_truncated_identity():
    proj = OutputProjection(4, 2, seed=0)
    proj.w.data = np.eye(4)[:, :2]
    proj.b.data = np.zeros(2)
    h = np.array([[1.0, 2.0, 3.0, 4.0]])
    out = proj.forward(nn.Tensor(h))
    assert np.allclose(out.data, [[1.0, 2.0]])


def test_output_projection_bias_only():
    proj = OutputProjection(3, 2, seed=0)
    proj.w.data = np.zeros((3, 2))
    proj.b.data = np.array([0.7, -0.2])
    out = proj.forward(nn.Tensor(np.random.default_rng(0).normal(size=(4, 3))))
    assert np.allclose(out.data, np.tile([0.7, -0.2], (4, 1)))


def test_output_projection_matches_dense_oracle():
    rng = np.random.default_rng(5)
    proj = OutputProjection(6, 2, seed=1)
    h = rng.normal(size=(3, 6))
    expect = leaky(h) @ proj.w.data + proj.b.data
    assert np.abs(proj.forward(nn.Tensor(h)).data - expect).max() < 1e-10


def _fd_check_layer(build_loss, params, context):
    loss = build_loss()
    loss.backward()
    analytic = {id(p): (p.grad.copy() if p.grad is not None else np.zeros_like(p.data)) for p in params}
    for p in params:
        numeric = numeric_gradient(lambda: float(build_loss().data), p.data)
        assert_close_grads(analytic[id(p)], numeric, context=context)


def test_layer_gradients_finite_difference():
    rng = np.random.default_rng(6)
    n, fin, fout = 5, 3, 4
    h = away_from_kinks(rng, (n, fin))
    proj = rng.normal(size=(n, fout))
    src = np.array([0, 1, 2, 3, 4, 1])
    dst = np.array([1, 2, 3, 4, 0, 3])
    adj = sp.csr_matrix(np.abs(rng.random((n, n)) * (rng.random((n, n)) < 0.5)))

    gcn = GcnLayer(fin, fout, seed=0)
    _fd_check_layer(lambda: nn.sum_(nn.mul(gcn.forward(nn.Tensor(h), adj), nn.Tensor(proj))), gcn.params, "gcn")

    rgcn = RgcnLayer(fin, fout, relations=("a", "b"), seed=1)
    adjs = {"a": adj, "b": sp.csr_matrix(adj.toarray().T)}
    _fd_check_layer(
        lambda: nn.sum_(nn.mul(rgcn.forward(nn.Tensor(h), adjs), nn.Tensor(proj))), rgcn.params, "rgcn"
    )

    for cls, name in ((GatLayer, "gat"), (Gatv2Layer, "gatv2")):
        layer = cls(fin, fout, heads=2, concat=True, seed=2)
        _fd_check_layer(
            lambda: nn.sum_(nn.mul(layer.forward(nn.Tensor(h), src, dst, n), nn.Tensor(proj))),
            layer.params,
            name,
        )
