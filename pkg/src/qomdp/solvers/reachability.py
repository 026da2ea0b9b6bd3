"""Goal-state reachability with probability 1 in finitely many steps.

For goal POMDPs only the zero pattern of the belief matters, so the
question reduces to a finite MDP over support bit-vectors, where a
stationary policy works iff its transition graph reaches the goal support
and contains no cycle through non-goal supports.  For goal QOMDPs no such
reduction exists and the problem is undecidable; the bounded search here
can only confirm a "yes".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..classical import GoalPomdp, tau_matrix
from ..errors import IndexOutOfRange, StateBudgetExceeded
from ..numerics import DEFAULT_TOL, Tolerances
from ..quantum import GoalQomdp, evolve, observation_probs
from .mdp import StationaryPolicy

DEFAULT_STATE_CAP = 2**20

SupportState = tuple[int, ...]


def to_mask(bits) -> int:
    return sum(1 << i for i, b in enumerate(bits) if b)


def to_bits(mask: int, n: int) -> SupportState:
    return tuple((mask >> i) & 1 for i in range(n))


def belief_support(b, tol: Tolerances = DEFAULT_TOL) -> SupportState:
    return tuple(int(x > tol.eps_structural) for x in np.asarray(b, dtype=float))


def support_update(p: GoalPomdp, z, a: int, o: int, tol: Tolerances = DEFAULT_TOL) -> SupportState | None:
    """Zero pattern of ``tau^{ao} z``, or None when that vector is zero (``o`` impossible)."""
    z = np.asarray(z, dtype=bool)
    if z.shape != (p.num_states,):
        raise IndexOutOfRange(f"support has length {z.size}, expected {p.num_states}")
    pattern = tau_matrix(p, a, o) > tol.eps_structural
    out = (pattern.astype(int) @ z.astype(int)) > 0
    if not out.any():
        return None
    return tuple(int(x) for x in out)


@dataclass
class ReachabilityVerdict:
    """``decided`` is "yes", "no" or "unknown"; a witness accompanies "yes"."""

    decided: str
    witness: Any = None
    bound_used: int | None = None
    nodes_expanded: int = 0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.decided not in ("yes", "no", "unknown"):
            raise ValueError(f"bad verdict {self.decided!r}")
        if (self.witness is not None) != (self.decided == "yes"):
            raise ValueError("a witness must accompany exactly the 'yes' verdicts")


class _SupportMdp:
    """Binary-probability MDP over bitmask supports."""

    def __init__(self, p: GoalPomdp, tol: Tolerances):
        self.n = p.num_states
        self.num_actions = p.num_actions
        self.goal = 1 << p.goal
        # cols[a][o][j]: bitmask of states i with tau^{ao}_{ij} > 0, where
        # tau^{ao}_{ij} = O[i, a, o] T[j, a, i].
        tau = np.einsum("iao,jai->aoij", p.observation, p.transition)
        weights = 1 << np.arange(self.n, dtype=np.int64)
        cols = np.tensordot(tau > tol.eps_structural, weights, axes=([2], [0]))
        self.cols = cols.tolist()
        self._succ: dict[tuple[int, int], tuple[int, ...]] = {}

    def successors(self, z: int, a: int) -> tuple[int, ...]:
        key = (z, a)
        if key not in self._succ:
            out = []
            for cols in self.cols[a]:
                nz = 0
                for j in range(self.n):
                    if z >> j & 1:
                        nz |= cols[j]
                if nz and nz not in out:
                    out.append(nz)
            self._succ[key] = tuple(out)
        return self._succ[key]

    def reachable(self, z0: int, cap: int) -> list[int]:
        seen = {z0}
        order = [z0]
        for z in order:
            for a in range(self.num_actions):
                for nz in self.successors(z, a):
                    if nz not in seen:
                        seen.add(nz)
                        order.append(nz)
                        if len(order) > cap:
                            raise StateBudgetExceeded(cap)
        return order


def decide_goal_reachability_pomdp(
    p: GoalPomdp, tol: Tolerances = DEFAULT_TOL, *, state_cap: int = DEFAULT_STATE_CAP
) -> ReachabilityVerdict:
    """Decide whether some policy reaches the goal with probability 1 in finitely many steps.

    Builds the supports reachable from ``b0`` and enumerates stationary
    deterministic policies over them by backtracking: actions are assigned
    to supports in discovery order, only supports reachable under the
    partial policy get an action, and a branch is cut as soon as its graph
    has a cycle through non-goal supports (the goal's self-loop does not
    count).  The first complete acyclic assignment is the witness, keyed by
    support tuples.
    """
    mdp = _SupportMdp(p, tol)
    n = p.num_states
    z0 = to_mask(np.asarray(p.b0) > tol.eps_structural)
    goal = mdp.goal
    universe = mdp.reachable(z0, state_cap)
    if z0 == goal:
        return ReachabilityVerdict("yes", StationaryPolicy({}), details={"reachable_supports": 1})

    policy: dict[int, int] = {}
    nodes = 0

    def reaches(src: int, target: int) -> bool:
        # Is target reachable from src along edges of already-assigned supports?
        stack, seen = [src], {src}
        while stack:
            z = stack.pop()
            if z == target:
                return True
            if z not in policy:
                continue
            for nz in mdp.successors(z, policy[z]):
                if nz != goal and nz not in seen:
                    seen.add(nz)
                    stack.append(nz)
        return False

    def search(reached: list[int]) -> bool:
        nonlocal nodes
        u = next((z for z in reached if z != goal and z not in policy), None)
        if u is None:
            return goal in reached
        for a in range(mdp.num_actions):
            nodes += 1
            succ = mdp.successors(u, a)
            if not succ or any(nz != goal and reaches(nz, u) for nz in succ):
                continue
            policy[u] = a
            known = set(reached)
            if search(reached + [nz for nz in succ if nz not in known]):
                return True
            del policy[u]
        return False

    details = {"reachable_supports": len(universe)}
    if search([z0]):
        witness = StationaryPolicy({to_bits(z, n): a for z, a in policy.items()})
        return ReachabilityVerdict("yes", witness, nodes_expanded=nodes, details=details)
    return ReachabilityVerdict("no", nodes_expanded=nodes, details=details)


def decide_goal_reachability_qomdp_bounded(
    q: GoalQomdp, depth: int, tol: Tolerances = DEFAULT_TOL
) -> ReachabilityVerdict:
    """Search action sequences of length at most ``depth`` that reach ``rho_g`` surely.

    Every observation branch is followed exactly; branches that land on the
    goal are absorbed, identical non-goal states are merged.  A sequence
    succeeds when the remaining non-goal mass is at most ``tol.eps_zero``.
    Returns "yes" with the lexicographically first such sequence (0-based
    action indices) or "unknown"; never "no".
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if q.is_goal(q.rho0, tol):
        return ReachabilityVerdict("yes", (), bound_used=depth)
    nodes = 0

    def step(branches, a):
        out: list[list] = []
        lost = 0.0
        kraus = q.actions[a]
        for w, rho in branches:
            for o, pr in enumerate(observation_probs(rho, kraus, tol)):
                if pr <= 0.0:
                    continue
                if pr <= tol.eps_zero:
                    lost += w * pr
                    continue
                nxt = evolve(rho, kraus, o, tol)
                if q.is_goal(nxt, tol):
                    continue
                for entry in out:
                    if np.max(np.abs(entry[1] - nxt)) <= tol.eps_zero:
                        entry[0] += w * pr
                        break
                else:
                    out.append([w * pr, nxt])
        return out, lost

    def dfs(prefix, branches, lost):
        nonlocal nodes
        for a in range(q.num_actions):
            nodes += 1
            nxt, dropped = step(branches, a)
            mass = lost + dropped + sum(w for w, _ in nxt)
            seq = prefix + (a,)
            if mass <= tol.eps_zero:
                return seq
            if len(seq) < depth:
                found = dfs(seq, nxt, lost + dropped)
                if found is not None:
                    return found
        return None

    found = dfs((), [(1.0, q.rho0)], 0.0)
    if found is None:
        return ReachabilityVerdict("unknown", bound_used=depth, nodes_expanded=nodes)
    return ReachabilityVerdict("yes", found, bound_used=depth, nodes_expanded=nodes)
