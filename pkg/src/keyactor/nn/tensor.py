"""Dense float64 tensors with reverse-mode autodiff.

Every op builds a node in an acyclic graph; ``backward()`` on a scalar loss
runs the chain rule in reverse topological order. Gradients accumulate into
``.grad`` (numpy arrays); parameters reused along several paths sum their
contributions. Dense math is delegated to numpy; the only sparse structure
(graph adjacency) enters through :func:`spmm` as a constant operand.
"""

import numpy as np

from ..errors import ShapeError


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, _parents=(), _backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad) or any(p.requires_grad for p in _parents)
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self):
        if self.data.size != 1:
            raise ShapeError("backward requires a scalar loss", self.shape)
        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in visited:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def zero_grad(self):
        self.grad = None

    def detach(self):
        return Tensor(self.data.copy())

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # Operator sugar; scalars are promoted to constant tensors.
    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __radd__(self, other):
        return add(_as_tensor(other), self)

    def __sub__(self, other):
        return add(self, mul(_as_tensor(other), _as_tensor(-1.0)))

    def __mul__(self, other):
        return mul(self, _as_tensor(other))

    def __rmul__(self, other):
        return mul(_as_tensor(other), self)

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return mul(self, _as_tensor(1.0 / other))
        raise TypeError("tensor division only supports scalars")

    def __neg__(self):
        return mul(self, _as_tensor(-1.0))

    def __matmul__(self, other):
        return matmul(self, other)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum grad over axes that were broadcast to reach ``grad.shape``."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def add(a: Tensor, b: Tensor) -> Tensor:
    try:
        data = a.data + b.data
    except ValueError:
        raise ShapeError("add shapes do not broadcast", a.shape, b.shape) from None

    def backward(g):
        a._accumulate(_unbroadcast(g, a.data.shape))
        b._accumulate(_unbroadcast(g, b.data.shape))

    return Tensor(data, _parents=(a, b), _backward=backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    try:
        data = a.data * b.data
    except ValueError:
        raise ShapeError("mul shapes do not broadcast", a.shape, b.shape) from None

    def backward(g):
        a._accumulate(_unbroadcast(g * b.data, a.data.shape))
        b._accumulate(_unbroadcast(g * a.data, b.data.shape))

    return Tensor(data, _parents=(a, b), _backward=backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul shapes do not chain", a.shape, b.shape)
    data = a.data @ b.data

    def backward(g):
        a._accumulate(g @ b.data.T)
        b._accumulate(a.data.T @ g)

    return Tensor(data, _parents=(a, b), _backward=backward)


def leaky_relu(x: Tensor, slope: float = 0.01) -> Tensor:
    mask = np.where(x.data > 0.0, 1.0, slope)
    data = x.data * mask

    def backward(g):
        x._accumulate(g * mask)

    return Tensor(data, _parents=(x,), _backward=backward)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    data = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        dot = (g * data).sum(axis=axis, keepdims=True)
        x._accumulate((g - dot) * data)

    return Tensor(data, _parents=(x,), _backward=backward)


def log(x: Tensor) -> Tensor:
    data = np.log(x.data)

    def backward(g):
        x._accumulate(g / x.data)

    return Tensor(data, _parents=(x,), _backward=backward)


def exp(x: Tensor) -> Tensor:
    data = np.exp(x.data)

    def backward(g):
        x._accumulate(g * data)

    return Tensor(data, _parents=(x,), _backward=backward)


def dropout(x: Tensor, rate: float, rng: np.random.Generator, training: bool) -> Tensor:
    """Inverted dropout: survivors scaled by 1/(1-rate). Eval mode is the
    exact identity (the input tensor is returned untouched)."""
    if not training or rate == 0.0:
        return x
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    mask = (rng.random(x.data.shape) >= rate) / (1.0 - rate)
    data = x.data * mask

    def backward(g):
        x._accumulate(g * mask)

    return Tensor(data, _parents=(x,), _backward=backward)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = list(tensors)
    if not tensors:
        raise ShapeError("concat of zero tensors")
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(lo, hi)
            t._accumulate(g[tuple(idx)])

    return Tensor(data, _parents=tuple(tensors), _backward=backward)


def sum_(x: Tensor, axis=None) -> Tensor:
    data = x.data.sum(axis=axis)

    def backward(g):
        if axis is None:
            x._accumulate(np.full_like(x.data, float(g)))
        else:
            x._accumulate(np.broadcast_to(np.expand_dims(g, axis), x.data.shape).copy())

    return Tensor(data, _parents=(x,), _backward=backward)


def mean(x: Tensor, axis=None) -> Tensor:
    n = x.data.size if axis is None else x.data.shape[axis]
    s = sum_(x, axis=axis)
    return mul(s, _as_tensor(1.0 / n))


def max_(x: Tensor, axis: int = 0) -> Tensor:
    """Max along an axis; the gradient routes to the first argmax (ties pick
    the lowest index, matching numpy)."""
    data = x.data.max(axis=axis)
    arg = x.data.argmax(axis=axis)

    def backward(g):
        gx = np.zeros_like(x.data)
        idx = list(np.indices(data.shape))
        idx.insert(axis if axis >= 0 else x.data.ndim + axis, arg)
        gx[tuple(idx)] = g
        x._accumulate(gx)

    return Tensor(data, _parents=(x,), _backward=backward)


def reshape(x: Tensor, shape) -> Tensor:
    data = x.data.reshape(shape)

    def backward(g):
        x._accumulate(g.reshape(x.data.shape))

    return Tensor(data, _parents=(x,), _backward=backward)


def transpose(x: Tensor) -> Tensor:
    if x.ndim != 2:
        raise ShapeError("transpose expects a matrix", x.shape)
    data = x.data.T.copy()

    def backward(g):
        x._accumulate(g.T)

    return Tensor(data, _parents=(x,), _backward=backward)


def _segment_sum(values: np.ndarray, index: np.ndarray, num_segments: int) -> np.ndarray:
    """Sum rows of values into buckets; sort + reduceat, far faster than
    np.add.at for the edge counts GNN layers see."""
    out = np.zeros((num_segments,) + values.shape[1:], dtype=np.float64)
    if len(index) == 0:
        return out
    order = np.argsort(index, kind="stable")
    sorted_vals = values[order]
    sorted_idx = index[order]
    starts = np.flatnonzero(np.r_[True, np.diff(sorted_idx) > 0])
    out[sorted_idx[starts]] = np.add.reduceat(sorted_vals, starts, axis=0)
    return out


def _segment_max(values: np.ndarray, index: np.ndarray, num_segments: int) -> np.ndarray:
    out = np.full((num_segments,) + values.shape[1:], -np.inf)
    if len(index) == 0:
        return out
    order = np.argsort(index, kind="stable")
    sorted_vals = values[order]
    sorted_idx = index[order]
    starts = np.flatnonzero(np.r_[True, np.diff(sorted_idx) > 0])
    out[sorted_idx[starts]] = np.maximum.reduceat(sorted_vals, starts, axis=0)
    return out


def gather_rows(x: Tensor, index: np.ndarray) -> Tensor:
    """Rows of x selected by an integer index vector (with repetition)."""
    index = np.asarray(index, dtype=np.int64)
    data = x.data[index]

    def backward(g):
        x._accumulate(_segment_sum(g, index, x.data.shape[0]))

    return Tensor(data, _parents=(x,), _backward=backward)


def scatter_add_rows(x: Tensor, index: np.ndarray, num_rows: int) -> Tensor:
    """Sum rows of x into ``num_rows`` buckets given by index."""
    index = np.asarray(index, dtype=np.int64)
    data = _segment_sum(x.data, index, num_rows)

    def backward(g):
        x._accumulate(g[index])

    return Tensor(data, _parents=(x,), _backward=backward)


def edge_softmax(scores: Tensor, dst: np.ndarray, num_nodes: int) -> Tensor:
    """Softmax of per-edge scores grouped by destination node.

    scores has shape (E,) or (E, H); each destination's incoming edges form
    one softmax group per head.
    """
    dst = np.asarray(dst, dtype=np.int64)
    s = scores.data
    squeeze = s.ndim == 1
    if squeeze:
        s = s[:, None]
    m = _segment_max(s, dst, num_nodes)
    e = np.exp(s - m[dst])
    denom = _segment_sum(e, dst, num_nodes)
    alpha = e / denom[dst]

    def backward(g):
        ga = g[:, None] if squeeze else g
        dot = _segment_sum(ga * alpha, dst, num_nodes)
        gs = alpha * (ga - dot[dst])
        scores._accumulate(gs[:, 0] if squeeze else gs)

    return Tensor(alpha[:, 0] if squeeze else alpha, _parents=(scores,), _backward=backward)


def spmm(adj, x: Tensor) -> Tensor:
    """Sparse adjacency (scipy CSR, constant) times dense tensor."""
    if adj.shape[1] != x.shape[0]:
        raise ShapeError("spmm shapes do not chain", adj.shape, x.shape)
    data = adj @ x.data

    def backward(g):
        x._accumulate(adj.T @ g)

    return Tensor(np.asarray(data), _parents=(x,), _backward=backward)


def weighted_cross_entropy(logits: Tensor, labels: np.ndarray, weights: np.ndarray | None = None) -> Tensor:
    """Mean cross-entropy of integer labels with optional per-sample weights
    (weights are normalized to sum to 1)."""
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or labels.shape[0] != logits.shape[0]:
        raise ShapeError("cross entropy shapes do not chain", logits.shape, labels.shape)
    n = labels.shape[0]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
    w = w / w.sum()
    z = logits.data
    zmax = z.max(axis=1, keepdims=True)
    logsumexp = zmax[:, 0] + np.log(np.exp(z - zmax).sum(axis=1))
    logp = z[np.arange(n), labels] - logsumexp
    data = -(w * logp).sum()

    def backward(g):
        p = np.exp(z - zmax)
        p /= p.sum(axis=1, keepdims=True)
        p[np.arange(n), labels] -= 1.0
        logits._accumulate(float(g) * p * w[:, None])

    return Tensor(data, _parents=(logits,), _backward=backward)
