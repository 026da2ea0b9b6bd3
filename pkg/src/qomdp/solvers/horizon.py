"""Finite-horizon policy trees for POMDPs (over beliefs) and QOMDPs (over states).

The optimal search is a plain depth-first expectimax: memory grows with the
horizon only, at the price of time exponential in it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..classical import Pomdp, belief_reward, belief_successors
from ..errors import BudgetExceeded, MissingChild
from ..numerics import DEFAULT_TOL, Tolerances
from ..quantum import Qomdp, evolve, observation_probs, reward

MAX_TREE_DEPTH = 64

# Values this close (relative) are ties; real ties often differ by an ulp or two.
TIE_RTOL = 1e-12


def improves(candidate: float, incumbent: float) -> bool:
    """True if ``candidate`` beats ``incumbent`` by more than rounding noise."""
    margin = TIE_RTOL * max(1.0, abs(candidate), abs(incumbent))
    return candidate > incumbent + margin


@dataclass(frozen=True)
class PolicyTree:
    """Contingency plan: take ``action`` now, then follow ``children[o]`` after seeing ``o``.

    A missing child (``None`` or a short tuple) means the branch is
    unreachable or the horizon ends here.
    """

    action: int
    children: tuple[PolicyTree | None, ...] = ()

    def child(self, o: int) -> PolicyTree | None:
        return self.children[o] if o < len(self.children) else None

    @property
    def depth(self) -> int:
        return 1 + max((c.depth for c in self.children if c is not None), default=0)

    def to_dict(self) -> dict:
        """JSON form with 1-based action and observation labels."""
        out: dict = {"action": self.action + 1}
        kids = {str(o + 1): c.to_dict() for o, c in enumerate(self.children) if c is not None}
        if kids:
            out["children"] = kids
        return out


class _BeliefDynamics:
    def __init__(self, p: Pomdp, tol: Tolerances):
        self.p, self.tol = p, tol
        self.gamma = p.gamma
        self.num_actions, self.num_obs = p.num_actions, p.num_obs
        self.start = p.b0

    def reward(self, b, a):
        return belief_reward(self.p, b, a)

    def successors(self, b, a):
        return belief_successors(self.p, b, a, self.tol)


class _QuantumDynamics:
    def __init__(self, q: Qomdp, tol: Tolerances):
        self.q, self.tol = q, tol
        self.gamma = q.gamma
        self.num_actions, self.num_obs = q.num_actions, q.num_obs
        self.start = q.rho0

    def reward(self, rho, a):
        return reward(rho, self.q.rewards[a], self.tol)

    def successors(self, rho, a):
        kraus = self.q.actions[a]
        probs = observation_probs(rho, kraus, self.tol)
        return [(o, float(pr), evolve(rho, kraus, o, self.tol)) for o, pr in enumerate(probs) if pr > self.tol.eps_zero]


def dynamics(model, tol: Tolerances = DEFAULT_TOL):
    if isinstance(model, Pomdp):
        return _BeliefDynamics(model, tol)
    if isinstance(model, Qomdp):
        return _QuantumDynamics(model, tol)
    raise TypeError(f"expected a Pomdp or Qomdp, got {type(model).__name__}")


def evaluate_policy_tree(
    model,
    tree: PolicyTree,
    *,
    horizon: int | None = None,
    start=None,
    tol: Tolerances = DEFAULT_TOL,
) -> float:
    """Exact expected discounted reward of ``tree`` from ``start`` (default: the model's).

    ``horizon`` defaults to the tree's depth.  Branches with probability at
    most ``tol.eps_zero`` are skipped.

    Raises
    ------
    MissingChild
        If a reachable branch has no subtree before the horizon is used up.
    """
    dyn = dynamics(model, tol)
    h = tree.depth if horizon is None else horizon
    if not 1 <= h <= MAX_TREE_DEPTH:
        raise ValueError(f"horizon must be in 1..{MAX_TREE_DEPTH}")

    def value(state, node: PolicyTree, remaining: int) -> float:
        r = dyn.reward(state, node.action)
        if remaining == 1:
            return r
        total = 0.0
        for o, pr, nxt in dyn.successors(state, node.action):
            child = node.child(o)
            if child is None:
                raise MissingChild(f"observation {o} after action {node.action} has no subtree")
            total += pr * value(nxt, child, remaining - 1)
        return r + dyn.gamma * total

    return value(dyn.start if start is None else np.asarray(start), tree, h)


class PolicySearchResult(NamedTuple):
    value: float
    tree: PolicyTree
    nodes_expanded: int


def best_policy_value(
    model,
    horizon: int,
    *,
    start=None,
    node_budget: int = 1_000_000,
    tol: Tolerances = DEFAULT_TOL,
) -> PolicySearchResult:
    """Optimal value over all depth-``horizon`` policy trees, by expectimax.

    Ties go to the lowest action index at every node, where values within a
    relative ``TIE_RTOL`` count as tied.  Each (state, action) evaluation
    counts as one expanded node.

    Raises
    ------
    BudgetExceeded
        When more than ``node_budget`` nodes would be expanded.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    dyn = dynamics(model, tol)
    nodes = 0

    def solve(state, h: int) -> tuple[float, PolicyTree]:
        nonlocal nodes
        best = None
        for a in range(dyn.num_actions):
            nodes += 1
            if nodes > node_budget:
                raise BudgetExceeded(nodes)
            r = dyn.reward(state, a)
            children: list[PolicyTree | None] = []
            if h == 1:
                val = r
            else:
                children = [None] * dyn.num_obs
                total = 0.0
                for o, pr, nxt in dyn.successors(state, a):
                    v, sub = solve(nxt, h - 1)
                    total += pr * v
                    children[o] = sub
                val = r + dyn.gamma * total
            if best is None or improves(val, best[0]):
                best = (val, PolicyTree(a, tuple(children)))
        return best

    value, tree = solve(dyn.start if start is None else np.asarray(start), horizon)
    return PolicySearchResult(value, tree, nodes)


def policy_exists(
    model,
    horizon: int,
    threshold: float,
    *,
    start=None,
    node_budget: int = 1_000_000,
    tol: Tolerances = DEFAULT_TOL,
) -> bool:
    """Is there a depth-``horizon`` policy worth at least ``threshold`` (up to ``eps_zero``)?"""
    res = best_policy_value(model, horizon, start=start, node_budget=node_budget, tol=tol)
    return res.value >= threshold - tol.eps_zero
