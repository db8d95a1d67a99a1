"""AdamW optimizer and the warmup/linear-decay learning-rate schedule."""

import numpy as np

from .tensor import Tensor


class AdamW:
    """AdamW with decoupled weight decay.

    The decay multiplies parameters by (1 - lr*wd) before the bias-corrected
    Adam update, so a zero gradient still shrinks the weights.
    """

    def __init__(self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.0):
        self.params: list[Tensor] = list(params)
        self.lr = float(lr)
        self.beta1, self.beta2 = betas
        self.eps = float(eps)
        self.weight_decay = float(weight_decay)
        self.step_count = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self, lr: float | None = None):
        """One update; ``lr`` overrides the stored rate (used by schedules).
        Parameters with no gradient are treated as having a zero gradient."""
        lr = self.lr if lr is None else float(lr)
        self.step_count += 1
        t = self.step_count
        for p, m, v in zip(self.params, self._m, self._v):
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            if self.weight_decay:
                p.data *= 1.0 - lr * self.weight_decay
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / (1.0 - self.beta1**t)
            v_hat = v / (1.0 - self.beta2**t)
            p.data -= lr * m_hat / (np.sqrt(v_hat) + self.eps)


def warmup_linear_decay(step: int, total_steps: int, warmup_frac: float = 0.6, floor_frac: float = 0.1) -> float:
    """LR multiplier for 1-based ``step``: linear ramp 0 -> 1 over the warmup
    fraction of steps, then linear decay from 1 down to ``floor_frac``."""
    if total_steps <= 0:
        return 1.0
    warmup_steps = max(1, round(warmup_frac * total_steps))
    if step <= warmup_steps:
        return step / warmup_steps
    remaining = total_steps - warmup_steps
    if remaining <= 0:
        return 1.0
    frac = (step - warmup_steps) / remaining
    return 1.0 - (1.0 - floor_frac) * min(frac, 1.0)
