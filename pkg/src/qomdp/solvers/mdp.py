"""Fully observable MDPs: value iteration and finite-horizon policy values."""

from __future__ import annotations

from collections.abc import Hashable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from ..classical import Mdp
from ..errors import NoConvergence


@dataclass(frozen=True)
class StationaryPolicy:
    """State -> action table.  Keys are MDP state indices or support tuples."""

    actions: Mapping[Hashable, int]

    @classmethod
    def from_table(cls, table: Sequence[int]) -> StationaryPolicy:
        return cls({s: int(a) for s, a in enumerate(table)})

    def __getitem__(self, state) -> int:
        return self.actions[state]

    def __len__(self):
        return len(self.actions)

    def as_array(self, num_states: int) -> np.ndarray:
        return np.array([self.actions[s] for s in range(num_states)], dtype=int)


def q_values(m: Mdp, values: np.ndarray) -> np.ndarray:
    """One-step lookahead ``R(s, a) + gamma * sum_s2 T(s, a, s2) V(s2)``."""
    return m.reward + m.gamma * np.einsum("ijk,k->ij", m.transition, values)


def bellman_residual(m: Mdp, values: np.ndarray) -> float:
    return float(np.max(np.abs(q_values(m, values).max(axis=1) - values)))


def value_iteration(m: Mdp, epsilon: float, max_iter: int = 1_000_000):
    """Iterate the Bellman operator until the fixed point is within ``epsilon``.

    Stops once the Bellman residual is at most ``epsilon * (1 - gamma)``, so
    the returned values are within ``epsilon`` of the optimum (max-norm) and
    their residual is at most ``epsilon``.  The greedy policy breaks ties
    toward the lowest action index.

    Returns
    -------
    values : ndarray, shape (num_states,)
    greedy : StationaryPolicy
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0.0 <= m.gamma < 1.0:
        raise ValueError("value iteration needs gamma in [0, 1)")
    stop = epsilon * (1.0 - m.gamma)
    v = np.zeros(m.num_states)
    for _ in range(max_iter):
        v_next = q_values(m, v).max(axis=1)
        if np.max(np.abs(v_next - v)) <= stop:
            v = v_next
            break
        v = v_next
    else:
        raise NoConvergence(f"value iteration did not reach tolerance in {max_iter} sweeps")
    greedy = StationaryPolicy.from_table(np.argmax(q_values(m, v), axis=1))
    return v, greedy


def mdp_policy_value(m: Mdp, pi: StationaryPolicy, horizon: int) -> np.ndarray:
    """Expected discounted reward of ``horizon`` steps under ``pi``.

    Horizon 0 is worth 0; horizon 1 is the immediate reward.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    acts = pi.as_array(m.num_states)
    states = np.arange(m.num_states)
    r = m.reward[states, acts]
    t = m.transition[states, acts, :]
    v = np.zeros(m.num_states)
    for _ in range(horizon):
        v = r + m.gamma * t @ v
    return v
