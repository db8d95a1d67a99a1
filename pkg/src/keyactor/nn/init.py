"""Seeded parameter initialization."""

import numpy as np

from ..rng import rng_for
from .tensor import Tensor


def xavier_uniform(shape, rng: np.random.Generator) -> Tensor:
    fan_in, fan_out = (shape[0], shape[-1]) if len(shape) > 1 else (shape[0], shape[0])
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


def zeros(shape) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True)


def param_rng(seed: int, *tags) -> np.random.Generator:
    """Stream for initializing one named parameter."""
    return rng_for(seed, "init", *tags)
