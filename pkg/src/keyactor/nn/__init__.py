from .checkpoint import load_checkpoint, save_checkpoint
from .init import param_rng, xavier_uniform, zeros
from .optim import AdamW, warmup_linear_decay
from .tensor import (
    Tensor,
    add,
    concat,
    dropout,
    edge_softmax,
    exp,
    gather_rows,
    leaky_relu,
    log,
    matmul,
    max_,
    mean,
    mul,
    reshape,
    scatter_add_rows,
    softmax,
    spmm,
    sum_,
    transpose,
    weighted_cross_entropy,
)

__all__ = [
    "AdamW",
    "Tensor",
    "add",
    "concat",
    "dropout",
    "edge_softmax",
    "exp",
    "gather_rows",
    "leaky_relu",
    "load_checkpoint",
    "log",
    "matmul",
    "max_",
    "mean",
    "mul",
    "param_rng",
    "reshape",
    "save_checkpoint",
    "scatter_add_rows",
    "softmax",
    "spmm",
    "sum_",
    "transpose",
    "warmup_linear_decay",
    "weighted_cross_entropy",
    "xavier_uniform",
    "zeros",
]
