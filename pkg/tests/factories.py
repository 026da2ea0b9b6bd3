"""Seeded model generators shared by the test modules."""

import numpy as np

from qomdp.classical import GoalPomdp, Mdp, Pomdp
from qomdp.quantum import Qomdp
from qomdp.reductions import random_qmop_instance


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2


def _stochastic(rng, shape, sparsity=0.0):
    x = rng.random(shape) * (rng.random(shape) >= sparsity)
    x[..., 0] += (x.sum(-1) == 0)
    return x / x.sum(-1, keepdims=True)


def random_mdp(rng, n, na, gamma=None):
    gamma = rng.uniform(0, 0.95) if gamma is None else gamma
    return Mdp(_stochastic(rng, (n, na, n)), rng.normal(size=(n, na)), gamma)


def random_pomdp(rng, n, na, no, *, integer_rewards=False, sparsity=0.0):
    r = rng.integers(0, 2, size=(n, na)).astype(float) if integer_rewards else rng.normal(size=(n, na))
    return Pomdp(
        _stochastic(rng, (n, na, n), sparsity),
        _stochastic(rng, (n, na, no), sparsity),
        r,
        _stochastic(rng, (n,)),
        rng.uniform(0.5, 0.95),
    )


def random_qomdp(rng, d, na, no):
    actions = [random_qmop_instance(d, no, rng).kraus for _ in range(na)]
    rewards = [random_hermitian(rng, d) for _ in range(na)]
    return Qomdp(actions, rewards, rng.uniform(0.5, 0.95), random_density(rng, d))


def random_goal_pomdp(rng, n, na, no, sparsity=0.5):
    """Goal is the last state and the last observation; ``no`` counts non-goal observations."""
    g = n - 1
    t = _stochastic(rng, (n, na, n), sparsity)
    t[g] = 0.0
    t[g, :, g] = 1.0
    o = np.zeros((n, na, no + 1))
    o[:g, :, :no] = _stochastic(rng, (g, na, no), sparsity)
    o[g, :, no] = 1.0
    b0 = _stochastic(rng, (n,), sparsity)
    return GoalPomdp(t, o, b0, g)


def coin_pomdp():
    t = np.zeros((2, 1, 2))
    t[0, 0] = [0.5, 0.5]
    t[1, 0] = [0, 1]
    o = np.zeros((2, 1, 2))
    o[0, 0] = [1, 0]
    o[1, 0] = [0, 1]
    return GoalPomdp(t, o, [1, 0], 1)


def sure_pomdp():
    t = np.zeros((2, 1, 2))
    t[:, 0, 1] = 1.0
    o = np.zeros((2, 1, 2))
    o[0, 0] = [1, 0]
    o[1, 0] = [0, 1]
    return GoalPomdp(t, o, [1, 0], 1)


def permutation_pomdp(rng, n, na, no):
    t = np.zeros((n, na, n))
    for a in range(na):
        t[np.arange(n), a, rng.permutation(n)] = 1.0
    return Pomdp(t, _stochastic(rng, (n, na, no)), rng.normal(size=(n, na)), _stochastic(rng, (n,)), 0.9)
