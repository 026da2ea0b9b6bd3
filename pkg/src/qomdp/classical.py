"""Finite MDPs and POMDPs, their goal variants, and belief-state dynamics.

Array conventions (all 0-based):

* ``transition[s, a, s2]`` -- probability of ``s -> s2`` under action ``a``
* ``observation[s2, a, o]`` -- probability of seeing ``o`` after landing in ``s2``
* ``reward[s, a]``

For goal POMDPs the goal observation is always the last one, ``num_obs - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, ProbabilityError, ZeroProbabilityObservation
from .numerics import DEFAULT_TOL, Tolerances, Violation


def _real_array(x, ndim: int, name: str) -> np.ndarray:
    a = np.array(x, dtype=float)
    if a.ndim != ndim:
        raise DimensionMismatch(f"{name} must be {ndim}-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _stochastic_violations(arr: np.ndarray, name: str, rows: str, tol: Tolerances) -> list[Violation]:
    out = []
    neg = float(-arr.min()) if arr.size else 0.0
    if neg > tol.eps_structural:
        idx = np.unravel_index(int(np.argmin(arr)), arr.shape)
        out.append(Violation(f"{name} entries in [0, 1]", neg, f"index {tuple(map(int, idx))}"))
    over = float(arr.max() - 1.0) if arr.size else 0.0
    if over > tol.eps_structural:
        idx = np.unravel_index(int(np.argmax(arr)), arr.shape)
        out.append(Violation(f"{name} entries in [0, 1]", over, f"index {tuple(map(int, idx))}"))
    sums = arr.sum(axis=-1)
    dev = np.abs(sums - 1.0)
    for idx in zip(*np.nonzero(dev > tol.eps_structural)):
        out.append(
            Violation(f"{name} rows sum to 1", float(dev[idx]), f"{rows}={tuple(map(int, idx))}")
        )
    return out


def _gamma_violations(gamma: float) -> list[Violation]:
    if 0.0 <= gamma < 1.0:
        return []
    return [Violation("discount in [0, 1)", abs(gamma), "gamma")]


def _check_action(model, a: int):
    if not 0 <= a < model.num_actions:
        raise IndexOutOfRange(f"action {a} out of range for {model.num_actions} actions")


def _check_obs(model, o: int):
    if not 0 <= o < model.num_obs:
        raise IndexOutOfRange(f"observation {o} out of range for {model.num_obs} observations")


@dataclass(frozen=True, eq=False)
class Mdp:
    transition: np.ndarray
    reward: np.ndarray
    gamma: float

    def __post_init__(self):
        t = _real_array(self.transition, 3, "transition")
        r = _real_array(self.reward, 2, "reward")
        if t.shape[0] != t.shape[2] or r.shape != t.shape[:2]:
            raise DimensionMismatch(f"transition {t.shape} and reward {r.shape} disagree")
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "reward", r)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def num_states(self) -> int:
        return self.transition.shape[0]

    @property
    def num_actions(self) -> int:
        return self.transition.shape[1]

    def violations(self, tol: Tolerances = DEFAULT_TOL) -> list[Violation]:
        return _stochastic_violations(self.transition, "transition", "(s,a)", tol) + _gamma_violations(
            self.gamma
        )


@dataclass(frozen=True, eq=False)
class GoalMdp:
    transition: np.ndarray
    goal: int

    def __post_init__(self):
        t = _real_array(self.transition, 3, "transition")
        if t.shape[0] != t.shape[2]:
            raise DimensionMismatch(f"transition shape {t.shape} is not [s, a, s']")
        if not 0 <= self.goal < t.shape[0]:
            raise IndexOutOfRange(f"goal {self.goal} out of range")
        object.__setattr__(self, "transition", t)

    @property
    def num_states(self) -> int:
        return self.transition.shape[0]

    @property
    def num_actions(self) -> int:
        return self.transition.shape[1]

    def violations(self, tol: Tolerances = DEFAULT_TOL) -> list[Violation]:
        out = _stochastic_violations(self.transition, "transition", "(s,a)", tol)
        dev = np.abs(self.transition[self.goal, :, self.goal] - 1.0)
        for a in np.flatnonzero(dev > tol.eps_structural):
            out.append(Violation("goal absorbing", float(dev[a]), f"action {a}"))
        return out


@dataclass(frozen=True, eq=False)
class Pomdp:
    transition: np.ndarray
    observation: np.ndarray
    reward: np.ndarray
    b0: np.ndarray
    gamma: float

    def __post_init__(self):
        t = _real_array(self.transition, 3, "transition")
        o = _real_array(self.observation, 3, "observation")
        r = _real_array(self.reward, 2, "reward")
        b0 = _real_array(self.b0, 1, "b0")
        n, na = t.shape[0], t.shape[1]
        if t.shape[2] != n or o.shape[:2] != (n, na) or r.shape != (n, na) or b0.shape != (n,):
            raise DimensionMismatch(
                f"inconsistent shapes: transition {t.shape}, observation {o.shape}, "
                f"reward {r.shape}, b0 {b0.shape}"
            )
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "observation", o)
        object.__setattr__(self, "reward", r)
        object.__setattr__(self, "b0", b0)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def num_states(self) -> int:
        return self.transition.shape[0]

    @property
    def num_actions(self) -> int:
        return self.transition.shape[1]

    @property
    def num_obs(self) -> int:
        return self.observation.shape[2]

    def violations(self, tol: Tolerances = DEFAULT_TOL) -> list[Violation]:
        out = _stochastic_violations(self.transition, "transition", "(s,a)", tol)
        out += _stochastic_violations(self.observation, "observation", "(s',a)", tol)
        out += belief_violations(self.b0, tol, "b0")
        out += _gamma_violations(self.gamma)
        return out


@dataclass(frozen=True, eq=False)
class GoalPomdp:
    """Goal POMDP: absorbing ``goal`` state announced by the last observation."""

    transition: np.ndarray
    observation: np.ndarray
    b0: np.ndarray
    goal: int

    def __post_init__(self):
        t = _real_array(self.transition, 3, "transition")
        o = _real_array(self.observation, 3, "observation")
        b0 = _real_array(self.b0, 1, "b0")
        n, na = t.shape[0], t.shape[1]
        if t.shape[2] != n or o.shape[:2] != (n, na) or b0.shape != (n,):
            raise DimensionMismatch(
                f"inconsistent shapes: transition {t.shape}, observation {o.shape}, b0 {b0.shape}"
            )
        if not 0 <= int(self.goal) < n:
            raise IndexOutOfRange(f"goal {self.goal} out of range for {n} states")
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "observation", o)
        object.__setattr__(self, "b0", b0)
        object.__setattr__(self, "goal", int(self.goal))

    @property
    def num_states(self) -> int:
        return self.transition.shape[0]

    @property
    def num_actions(self) -> int:
        return self.transition.shape[1]

    @property
    def num_obs(self) -> int:
        return self.observation.shape[2]

    @property
    def goal_obs(self) -> int:
        return self.num_obs - 1

    @property
    def goal_belief(self) -> np.ndarray:
        b = np.zeros(self.num_states)
        b[self.goal] = 1.0
        return b

    def violations(self, tol: Tolerances = DEFAULT_TOL) -> list[Violation]:
        out = _stochastic_violations(self.transition, "transition", "(s,a)", tol)
        out += _stochastic_violations(self.observation, "observation", "(s',a)", tol)
        out += belief_violations(self.b0, tol, "b0")
        g, og = self.goal, self.goal_obs
        for a in range(self.num_actions):
            dev = abs(self.transition[g, a, g] - 1.0)
            if dev > tol.eps_structural:
                out.append(Violation("goal absorbing", dev, f"action {a}"))
            dev = abs(self.observation[g, a, og] - 1.0)
            if dev > tol.eps_structural:
                out.append(Violation("goal observation certain at goal", dev, f"action {a}"))
            others = np.delete(self.observation[:, a, og], g)
            if others.size and others.max() > tol.eps_structural:
                out.append(
                    Violation("goal observation only at goal", float(others.max()), f"action {a}")
                )
        return out

    def with_goal_last(self) -> GoalPomdp:
        """Same model with states permuted so the goal is the last state."""
        n = self.num_states
        if self.goal == n - 1:
            return self
        perm = [s for s in range(n) if s != self.goal] + [self.goal]
        t = self.transition[perm][:, :, perm]
        return GoalPomdp(t, self.observation[perm], self.b0[perm], n - 1)


def belief_violations(b, tol: Tolerances = DEFAULT_TOL, name: str = "belief") -> list[Violation]:
    b = np.asarray(b, dtype=float)
    out = []
    if b.size and b.min() < -tol.eps_structural:
        out.append(Violation("belief entries nonnegative", float(-b.min()), name))
    dev = abs(float(b.sum()) - 1.0)
    if dev > tol.eps_structural:
        out.append(Violation("belief sums to 1", dev, name))
    return out


def clean_belief(b, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Clamp roundoff negatives to zero and renormalize; hard error beyond tolerance."""
    b = np.array(b, dtype=float)
    if b.min() < -tol.eps_structural:
        raise ProbabilityError(f"belief entry {b.min()!r} is negative")
    b[b < 0] = 0.0
    total = b.sum()
    if abs(total - 1.0) > tol.eps_structural:
        raise ProbabilityError(f"belief sums to {total!r}")
    return b / total


def tau_matrix(p, a: int, o: int) -> np.ndarray:
    """``tau[i, j] = O(s_i, a, o) * T(s_j, a, s_i)``; maps a belief to its unnormalized update."""
    _check_action(p, a)
    _check_obs(p, o)
    return p.observation[:, a, o][:, None] * p.transition[:, a, :].T


def belief_obs_prob(p, b, a: int, o: int) -> float:
    return float(np.sum(tau_matrix(p, a, o) @ np.asarray(b, dtype=float)))


def belief_update(p, b, a: int, o: int, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Bayes update of belief ``b`` after action ``a`` and observation ``o``."""
    v = tau_matrix(p, a, o) @ np.asarray(b, dtype=float)
    norm = float(v.sum())
    if norm <= tol.eps_zero:
        raise ZeroProbabilityObservation(f"observation {o} after action {a} has probability {norm:.3e}")
    return clean_belief(v / norm, tol)


def beliefs_equal(b1, b2, tol: Tolerances = DEFAULT_TOL) -> bool:
    return float(np.max(np.abs(np.asarray(b1) - np.asarray(b2)))) <= tol.eps_zero


def belief_successors(p, b, a: int, tol: Tolerances = DEFAULT_TOL) -> list[tuple[int, float, np.ndarray]]:
    """``(o, Pr(o | a, b), posterior)`` for every observation with positive probability."""
    out = []
    for o in range(p.num_obs):
        pr = belief_obs_prob(p, b, a, o)
        if pr > tol.eps_zero:
            out.append((o, pr, belief_update(p, b, a, o, tol)))
    return out


def belief_transition_prob(p, b, a: int, b_next, tol: Tolerances = DEFAULT_TOL) -> float:
    """Probability that action ``a`` moves belief ``b`` exactly to ``b_next``."""
    return sum(pr for _, pr, post in belief_successors(p, b, a, tol) if beliefs_equal(post, b_next, tol))


def belief_reward(p, b, a: int) -> float:
    _check_action(p, a)
    return float(np.dot(np.asarray(b, dtype=float), p.reward[:, a]))


def _draw(row: np.ndarray, u: float) -> int:
    cdf = np.cumsum(row)
    i = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    if i >= len(row):
        i = int(np.flatnonzero(row > 0)[-1])
    return i


def sample_pomdp_step(p, hidden: int, a: int, rng: np.random.Generator) -> tuple[int, int]:
    """Sample ``(next_state, observation)``; consumes two ``rng.random()`` draws."""
    _check_action(p, a)
    if not 0 <= hidden < p.num_states:
        raise IndexOutOfRange(f"state {hidden} out of range")
    nxt = _draw(p.transition[hidden, a], rng.random())
    obs = _draw(p.observation[nxt, a], rng.random())
    return nxt, obs


def check_goal_belief_absorbing(p: GoalPomdp, tol: Tolerances = DEFAULT_TOL) -> bool:
    """From the goal belief every action yields the goal observation and the goal belief."""
    bg = p.goal_belief
    for a in range(p.num_actions):
        if abs(belief_obs_prob(p, bg, a, p.goal_obs) - 1.0) > tol.eps_structural:
            return False
        v = tau_matrix(p, a, p.goal_obs) @ bg
        if float(np.max(np.abs(v / v.sum() - bg))) > tol.eps_structural:
            return False
    return True
