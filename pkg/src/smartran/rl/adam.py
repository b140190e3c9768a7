from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np


class NonFiniteGradient(FloatingPointError):
    pass


@dataclass
class AdamState:
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: List[np.ndarray] = field(default_factory=list, repr=False)
    v: List[np.ndarray] = field(default_factory=list, repr=False)

    @classmethod
    def for_params(cls, params: Sequence[np.ndarray], **kwargs) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params], **kwargs)


def adam_step(opt: AdamState, params: List[np.ndarray], grads: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Bias-corrected Adam; updates ``params`` in place and returns them."""
    if len(params) != len(grads):
        raise ValueError("params and grads differ in length")
    if not opt.m:
        opt.m = [np.zeros_like(p) for p in params]
        opt.v = [np.zeros_like(p) for p in params]
    for p, g, m in zip(params, grads, opt.m):
        if p.shape != g.shape or m.shape != p.shape:
            raise ValueError(f"shape mismatch: param {p.shape}, grad {g.shape}")
    if not all(np.all(np.isfinite(g)) for g in grads):
        raise NonFiniteGradient("non-finite gradient; Adam update rejected")

    opt.step += 1
    c1 = 1.0 - opt.beta1 ** opt.step
    c2 = 1.0 - opt.beta2 ** opt.step
    # p -= lr * (m / c1) / (sqrt(v / c2) + eps), rearranged to run in place
    step_size = opt.lr * np.sqrt(c2) / c1
    eps = opt.eps * np.sqrt(c2)
    for p, g, m, v in zip(params, grads, opt.m, opt.v):
        tmp = np.multiply(g, 1.0 - opt.beta1)
        m *= opt.beta1
        m += tmp
        np.multiply(g, g, out=tmp)
        tmp *= 1.0 - opt.beta2
        v *= opt.beta2
        v += tmp
        np.sqrt(v, out=tmp)
        tmp += eps
        np.divide(m, tmp, out=tmp)
        tmp *= step_size
        p -= tmp
    return params
