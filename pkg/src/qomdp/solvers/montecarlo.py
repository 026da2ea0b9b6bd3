"""Seeded Monte Carlo estimates of goal-reaching probability.

Randomness comes from ``numpy.random.default_rng(seed)`` (PCG64).  Each
trial owns a fixed slice of the draw stream, so a trial's trajectory is the
same as stepping it alone with inverse-CDF sampling over the Kraus (or
transition/observation) order.  Trials that share a history share the
same state, which is computed once for the whole group.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..classical import GoalPomdp, belief_update
from ..errors import ProbabilityError
from ..numerics import DEFAULT_TOL, Tolerances
from ..quantum import GoalQomdp, evolve, observation_probs
from .mdp import StationaryPolicy
from .reachability import belief_support


class GoalEstimate(NamedTuple):
    probability: float
    stderr: float
    trials: int


def _inverse_cdf_many(probs: np.ndarray, u: np.ndarray, tol: Tolerances) -> np.ndarray:
    total = float(np.sum(probs))
    if abs(total - 1.0) > tol.eps_structural:
        raise ProbabilityError(f"outcome probabilities sum to {total!r}")
    cdf = np.cumsum(probs / total)
    idx = np.searchsorted(cdf, u, side="right")
    last = int(np.flatnonzero(probs > 0)[-1])
    return np.minimum(idx, last)


def _estimate(hits: np.ndarray) -> GoalEstimate:
    n = hits.size
    p = float(hits.mean())
    return GoalEstimate(p, float(np.sqrt(p * (1.0 - p) / n)), n)


def _steps_for(policy, steps: int | None) -> int:
    if isinstance(policy, StationaryPolicy):
        if steps is None:
            raise ValueError("steps is required for stationary policies")
        return steps
    if steps is None:
        return len(policy)
    if steps > len(policy):
        raise ValueError(f"steps={steps} exceeds the action sequence length {len(policy)}")
    return steps


def _estimate_quantum(q: GoalQomdp, seq, steps: int, trials: int, rng, tol) -> GoalEstimate:
    u = rng.random((trials, steps))
    done = np.full(trials, q.is_goal(q.rho0, tol))
    node_of = np.zeros(trials, dtype=np.int64)
    states = [q.rho0]
    for k in range(steps):
        kraus = q.actions[int(seq[k])]
        new_states: list[np.ndarray] = []
        new_node = np.full(trials, -1, dtype=np.int64)
        active = ~done
        for nid in np.unique(node_of[active]):
            idx = np.flatnonzero(active & (node_of == nid))
            rho = states[nid]
            obs = _inverse_cdf_many(observation_probs(rho, kraus, tol), u[idx, k], tol)
            for o in np.unique(obs):
                sel = idx[obs == o]
                nxt = evolve(rho, kraus, int(o), tol)
                if q.is_goal(nxt, tol):
                    done[sel] = True
                else:
                    new_node[sel] = len(new_states)
                    new_states.append(nxt)
        states, node_of = new_states, new_node
    return _estimate(done)


def _estimate_classical(p: GoalPomdp, policy, steps: int, trials: int, rng, tol) -> GoalEstimate:
    u0 = rng.random(trials)
    u = rng.random((trials, steps, 2))
    hidden = _inverse_cdf_many(np.asarray(p.b0), u0, tol)
    beliefs = [np.asarray(p.b0, dtype=float)]
    node_of = np.zeros(trials, dtype=np.int64)
    done = hidden == p.goal
    for k in range(steps):
        new_beliefs: list[np.ndarray] = []
        children: dict[tuple[int, int], int] = {}
        new_node = np.full(trials, -1, dtype=np.int64)
        active = ~done
        for nid in np.unique(node_of[active]):
            b = beliefs[nid]
            if isinstance(policy, StationaryPolicy):
                a = policy[belief_support(b, tol)]
            else:
                a = int(policy[k])
            idx = np.flatnonzero(active & (node_of == nid))
            cur = hidden[idx].copy()
            for s in np.unique(cur):
                sub = idx[cur == s]
                nxt = _inverse_cdf_many(p.transition[s, a], u[sub, k, 0], tol)
                hidden[sub] = nxt
                for s2 in np.unique(nxt):
                    grp = sub[nxt == s2]
                    obs = _inverse_cdf_many(p.observation[s2, a], u[grp, k, 1], tol)
                    for o in np.unique(obs):
                        key = (int(nid), int(o))
                        if key not in children:
                            children[key] = len(new_beliefs)
                            new_beliefs.append(belief_update(p, b, a, int(o), tol))
                        new_node[grp[obs == o]] = children[key]
        beliefs, node_of = new_beliefs, new_node
        done |= hidden == p.goal
    return _estimate(done)


def estimate_goal_probability(
    model,
    policy,
    *,
    steps: int | None = None,
    trials: int = 10_000,
    seed: int = 0,
    tol: Tolerances = DEFAULT_TOL,
) -> GoalEstimate:
    """Fraction of seeded trajectories that are at the goal after ``steps`` actions.

    Parameters
    ----------
    model : GoalPomdp or GoalQomdp
    policy : sequence of action indices, or StationaryPolicy keyed by belief
        support (goal POMDPs only)
    steps : defaults to the sequence length
    trials, seed : sample size and PCG64 seed

    Returns the estimate with its binomial standard error.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    steps = _steps_for(policy, steps)
    rng = np.random.default_rng(seed)
    if isinstance(model, GoalQomdp):
        if isinstance(policy, StationaryPolicy):
            raise TypeError("goal QOMDPs are simulated with action sequences")
        return _estimate_quantum(model, policy, steps, trials, rng, tol)
    if isinstance(model, GoalPomdp):
        return _estimate_classical(model, policy, steps, trials, rng, tol)
    raise TypeError(f"expected GoalPomdp or GoalQomdp, got {type(model).__name__}")
