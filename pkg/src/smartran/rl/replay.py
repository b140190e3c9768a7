from __future__ import annotations

from typing import NamedTuple

import numpy as np


class Transition(NamedTuple):
    state: np.ndarray
    action: np.ndarray
    reward: np.ndarray
    next_state: np.ndarray
    done: bool


class Batch(NamedTuple):
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray      # (batch, n_rewards)
    next_states: np.ndarray
    dones: np.ndarray        # (batch,)

    def __len__(self):
        return len(self.states)


class ReplayBuffer:
    """FIFO ring of transitions stored column-wise.

    Storage grows by doubling up to ``capacity`` so large capacities cost
    nothing until they are used. Rewards are always stored as vectors.
    """

    def __init__(self, capacity: int, seed=None):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self.rng = np.random.default_rng(seed)
        self._cols = None
        self._size = 0
        self._pos = 0

    def __len__(self):
        return self._size

    def _ensure(self, t: Transition):
        if self._cols is None:
            n = min(self.capacity, 1024)
            self._cols = [np.zeros((n,) + np.shape(t.state)),
                          np.zeros((n,) + np.shape(t.action)),
                          np.zeros((n,) + np.atleast_1d(t.reward).shape),
                          np.zeros((n,) + np.shape(t.next_state)),
                          np.zeros(n)]
        elif self._pos >= len(self._cols[0]) and len(self._cols[0]) < self.capacity:
            n = min(self.capacity, 2 * len(self._cols[0]))
            self._cols = [np.concatenate([c, np.zeros((n - len(c),) + c.shape[1:])]) for c in self._cols]

    def push(self, state, action, reward, next_state, done) -> None:
        t = Transition(np.asarray(state, float), np.asarray(action, float),
                       np.atleast_1d(np.asarray(reward, float)), np.asarray(next_state, float), bool(done))
        self._ensure(t)
        for col, value in zip(self._cols, t):
            col[self._pos] = value
        self._pos = (self._pos + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int) -> Batch:
        if self._size == 0:
            raise ValueError("cannot sample from an empty buffer")
        idx = self.rng.integers(0, self._size, size=batch_size)
        return Batch(*(col[idx] for col in self._cols))

    def latest(self, n: int = 1) -> Batch:
        idx = (self._pos - 1 - np.arange(min(n, self._size))) % self.capacity
        return Batch(*(col[idx] for col in self._cols))
