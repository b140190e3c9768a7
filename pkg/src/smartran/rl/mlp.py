"""Feed-forward networks with hand-written backpropagation."""
from __future__ import annotations

from typing import List, Optional, Sequence

import numpy as np

ACTIVATIONS = ("identity", "tanh")


class Mlp:
    """ReLU hidden layers, identity or tanh output.

    Parameters live in ``self.params`` as ``[W0, b0, W1, b1, ...]`` with
    ``W_l`` of shape ``(n_l, n_{l+1})``. Inputs are row vectors, a batch is
    ``(batch, n_0)``.
    """

    def __init__(self, layer_sizes: Sequence[int], rng=None, out_activation: str = "identity"):
        if len(layer_sizes) < 2 or any(int(n) < 1 for n in layer_sizes):
            raise ValueError(f"invalid layer sizes {layer_sizes}")
        if out_activation not in ACTIVATIONS:
            raise ValueError(f"out_activation must be one of {ACTIVATIONS}")
        self.layer_sizes = [int(n) for n in layer_sizes]
        self.out_activation = out_activation
        rng = np.random.default_rng(rng)
        self.params: List[np.ndarray] = []
        for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            bound = 1.0 / np.sqrt(n_in)
            self.params.append(rng.uniform(-bound, bound, size=(n_in, n_out)))
            self.params.append(rng.uniform(-bound, bound, size=n_out))

    @property
    def n_layers(self) -> int:
        return len(self.layer_sizes) - 1

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    def copy(self) -> "Mlp":
        clone = Mlp.__new__(Mlp)
        clone.layer_sizes = list(self.layer_sizes)
        clone.out_activation = self.out_activation
        clone.params = [p.copy() for p in self.params]
        return clone

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.n_params:
            raise ValueError(f"expected {self.n_params} values, got {flat.size}")
        i = 0
        for p in self.params:
            p[...] = flat[i:i + p.size].reshape(p.shape)
            i += p.size

    def forward(self, x, return_cache: bool = False):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        h = x[None, :] if single else x
        if h.shape[-1] != self.layer_sizes[0]:
            raise ValueError(f"input width {h.shape[-1]} != {self.layer_sizes[0]}")
        inputs, pre = [], []
        for layer in range(self.n_layers):
            W, b = self.params[2 * layer], self.params[2 * layer + 1]
            inputs.append(h)
            z = h @ W + b
            pre.append(z)
            if layer < self.n_layers - 1:
                h = np.maximum(z, 0.0)
            elif self.out_activation == "tanh":
                h = np.tanh(z)
            else:
                h = z
        out = h[0] if single else h
        if return_cache:
            return out, (single, inputs, pre, h)
        return out

    def __call__(self, x):
        return self.forward(x)

    def backward(self, cache, grad_out, input_only: bool = False):
        """Gradients of a scalar loss given dLoss/dOutput.

        Returns ``(param_grads, grad_input)`` with ``param_grads`` aligned to
        ``self.params``; with ``input_only`` the parameter gradients are
        skipped and returned as ``None``.
        """
        single, inputs, pre, out = cache
        g = np.asarray(grad_out, dtype=float)
        if single:
            g = g[None, :]
        if g.shape != out.shape:
            raise ValueError(f"upstream gradient shape {g.shape} != output shape {out.shape}")
        if self.out_activation == "tanh":
            g = g * (1.0 - out ** 2)
        grads: List[Optional[np.ndarray]] = [None] * len(self.params)
        for layer in reversed(range(self.n_layers)):
            W = self.params[2 * layer]
            if not input_only:
                grads[2 * layer] = inputs[layer].T @ g
                grads[2 * layer + 1] = g.sum(axis=0)
            g = g @ W.T
            if layer > 0:
                g = g * (pre[layer - 1] > 0)
        return (None if input_only else grads), (g[0] if single else g)


def forward(net: Mlp, x):
    return net.forward(x)


def backward(net: Mlp, x, grad_out):
    """Parameter gradients for input ``x`` given dLoss/dOutput."""
    _, cache = net.forward(x, return_cache=True)
    grads, _ = net.backward(cache, grad_out)
    return grads
