"""Density matrices, Kraus superoperators and (goal) QOMDP models.

States are ``complex128`` arrays of shape ``(d, d)``.  A superoperator is an
array of Kraus matrices with shape ``(n, d, d)``; index ``i`` of that array is
observation ``i``.  All indices in the Python API are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NonHermitianReward,
    ProbabilityError,
    ZeroProbabilityBranch,
)
from .numerics import (
    DEFAULT_TOL,
    Tolerances,
    Violation,
    as_matrix,
    dagger,
    eig_hermitian,
    hermitian_deviation,
    max_abs,
)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a numerical invariant check; truthy iff it passed."""

    ok: bool
    violations: tuple[Violation, ...] = ()

    def __bool__(self):
        return self.ok

    @property
    def max_deviation(self) -> float:
        return max((v.deviation for v in self.violations), default=0.0)


def as_kraus(kraus) -> np.ndarray:
    """Stack a sequence of equally-shaped square matrices into ``(n, d, d)``."""
    mats = [as_matrix(k, square=True) for k in kraus]
    if not mats:
        raise DimensionMismatch("a superoperator needs at least one Kraus matrix")
    shape = mats[0].shape
    for k, m in enumerate(mats):
        if m.shape != shape:
            raise DimensionMismatch(f"Kraus matrix {k} has shape {m.shape}, expected {shape}")
    return np.stack(mats)


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128) / dim


def pure_state(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def density_violations(rho, tol: Tolerances = DEFAULT_TOL, name: str = "rho") -> list[Violation]:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return [Violation("density matrix must be square", float("inf"), name)]
    out = []
    herm = hermitian_deviation(rho)
    if herm > tol.eps_structural:
        out.append(Violation("density matrix Hermitian", herm, name))
        return out
    tr = abs(np.trace(rho) - 1.0)
    if tr > tol.eps_structural:
        out.append(Violation("density matrix unit trace", float(tr), name))
    w, _ = eig_hermitian(rho, tol)
    if w[0] < -tol.eps_structural:
        out.append(Violation("density matrix positive semidefinite", float(-w[0]), name))
    return out


def is_density_matrix(rho, tol: Tolerances = DEFAULT_TOL) -> bool:
    return not density_violations(rho, tol)


def states_equal(a, b, tol: Tolerances = DEFAULT_TOL) -> bool:
    return max_abs(np.asarray(a) - np.asarray(b)) <= tol.eps_zero


def completeness_deviation(kraus) -> tuple[float, tuple[int, int]]:
    """Largest entry of ``|sum_i K_i^H K_i - I|`` and where it occurs."""
    k = np.asarray(kraus)
    resid = np.einsum("nji,njk->ik", k.conj(), k) - np.eye(k.shape[-1])
    flat = int(np.argmax(np.abs(resid)))
    entry = np.unravel_index(flat, resid.shape)
    return float(np.abs(resid).flat[flat]), (int(entry[0]), int(entry[1]))


def validate_superoperator(kraus, tol: Tolerances = DEFAULT_TOL) -> CheckResult:
    """Check Kraus completeness; the violation names the worst entry (0-based)."""
    k = as_kraus(kraus)
    dev, entry = completeness_deviation(k)
    if dev <= tol.eps_structural:
        return CheckResult(True)
    return CheckResult(False, (Violation("Kraus completeness", dev, f"entry {entry}"),))


def _clamp_probability(p: float, tol: Tolerances) -> float:
    if -tol.eps_structural <= p < 0.0:
        return 0.0
    if 1.0 < p <= 1.0 + tol.eps_structural:
        return 1.0
    if not 0.0 <= p <= 1.0:
        raise ProbabilityError(f"probability {p!r} outside [0, 1]")
    return p


def _branch(rho: np.ndarray, k: np.ndarray) -> np.ndarray:
    return k @ rho @ dagger(k)


def observation_probs(rho, kraus, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Born-rule probabilities ``Tr(K_i rho K_i^H)`` for every outcome."""
    rho = np.asarray(rho)
    k = np.asarray(kraus)
    if k.shape[-2:] != rho.shape:
        raise DimensionMismatch(f"state shape {rho.shape} does not match Kraus shape {k.shape[-2:]}")
    traces = np.real(np.einsum("nij,jk,nik->n", k, rho, k.conj()))
    return np.array([_clamp_probability(float(t), tol) for t in traces])


def observation_prob(rho, kraus, i: int, tol: Tolerances = DEFAULT_TOL) -> float:
    k = np.asarray(kraus)
    if not 0 <= i < k.shape[0]:
        raise IndexOutOfRange(f"observation {i} out of range for {k.shape[0]} Kraus matrices")
    rho = np.asarray(rho)
    if k.shape[-2:] != rho.shape:
        raise DimensionMismatch(f"state shape {rho.shape} does not match Kraus shape {k.shape[-2:]}")
    return _clamp_probability(float(np.real(np.trace(_branch(rho, k[i])))), tol)


def evolve(rho, kraus, i: int, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Post-measurement state ``K_i rho K_i^H / Tr(K_i rho K_i^H)``."""
    p = observation_prob(rho, kraus, i, tol)
    if p <= tol.eps_zero:
        raise ZeroProbabilityBranch(f"outcome {i} has probability {p:.3e}")
    out = _branch(np.asarray(rho), np.asarray(kraus)[i]) / p
    return 0.5 * (out + dagger(out))


def reward(rho, r_op, tol: Tolerances = DEFAULT_TOL) -> float:
    """Expected value ``Tr(rho R)`` of a Hermitian reward operator."""
    r = np.asarray(r_op)
    dev = hermitian_deviation(r)
    if dev > tol.eps_structural:
        raise NonHermitianReward(f"reward operator is not Hermitian (deviation {dev:.3e})")
    val = np.trace(np.asarray(rho) @ r)
    return float(val.real)


def _inverse_cdf(probs: np.ndarray, u: float, tol: Tolerances) -> int:
    total = float(np.sum(probs))
    if abs(total - 1.0) > tol.eps_structural:
        raise ProbabilityError(f"outcome probabilities sum to {total!r}")
    cdf = np.cumsum(probs / total)
    i = int(np.searchsorted(cdf, u, side="right"))
    # Roundoff can leave cdf[-1] just below u; fall back to the last possible outcome.
    if i >= len(probs):
        i = int(np.flatnonzero(probs > 0)[-1])
    return i


def sample_step(rho, kraus, rng: np.random.Generator, tol: Tolerances = DEFAULT_TOL):
    """Draw one outcome by inverse CDF over the Kraus order.

    Consumes exactly one ``rng.random()`` draw.  Returns ``(i, next_state)``.
    """
    probs = observation_probs(rho, kraus, tol)
    i = _inverse_cdf(probs, rng.random(), tol)
    return i, evolve(rho, kraus, i, tol)


def _hermitian_stack(mats, what: str, tol: Tolerances) -> list[Violation]:
    out = []
    for a, m in enumerate(mats):
        dev = hermitian_deviation(m)
        if dev > tol.eps_structural:
            out.append(Violation(f"{what} Hermitian", dev, f"action {a}"))
    return out


def _action_violations(actions: np.ndarray, tol: Tolerances) -> list[Violation]:
    out = []
    for a, kraus in enumerate(actions):
        dev, entry = completeness_deviation(kraus)
        if dev > tol.eps_structural:
            out.append(Violation("Kraus completeness", dev, f"action {a}, entry {entry}"))
    return out


def _coerce_actions(actions) -> np.ndarray:
    stacked = [as_kraus(a) for a in actions]
    if not stacked:
        raise DimensionMismatch("a model needs at least one action")
    shape = stacked[0].shape
    for a, k in enumerate(stacked):
        if k.shape != shape:
            raise DimensionMismatch(
                f"action {a} has Kraus stack {k.shape}, expected {shape} "
                "(every action needs the same number of observations)"
            )
    return np.stack(stacked)


@dataclass(frozen=True, eq=False)
class Qomdp:
    """Quantum observable MDP.

    ``actions[a, i]`` is the Kraus matrix of action ``a`` that emits
    observation ``i``; ``rewards[a]`` is the Hermitian reward operator.
    Construction only checks shapes; call :meth:`violations` for numerics.
    """

    actions: np.ndarray
    rewards: np.ndarray
    gamma: float
    rho0: np.ndarray

    def __post_init__(self):
        acts = _coerce_actions(self.actions)
        d = acts.shape[-1]
        rewards = np.stack([as_matrix(r, square=True) for r in self.rewards])
        if rewards.shape != (acts.shape[0], d, d):
            raise DimensionMismatch(f"rewards shape {rewards.shape}, expected {(acts.shape[0], d, d)}")
        rho0 = as_matrix(self.rho0, square=True)
        if rho0.shape != (d, d):
            raise DimensionMismatch(f"rho0 shape {rho0.shape}, expected {(d, d)}")
        object.__setattr__(self, "actions", acts)
        object.__setattr__(self, "rewards", rewards)
        object.__setattr__(self, "rho0", rho0)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def dim(self) -> int:
        return self.actions.shape[-1]

    @property
    def num_obs(self) -> int:
        return self.actions.shape[1]

    @property
    def num_actions(self) -> int:
        return self.actions.shape[0]

    def violations(self, tol: Tolerances = DEFAULT_TOL) -> list[Violation]:
        out = _action_violations(self.actions, tol)
        out += _hermitian_stack(self.rewards, "reward operator", tol)
        if not 0.0 <= self.gamma < 1.0:
            out.append(Violation("discount in [0, 1)", abs(self.gamma), "gamma"))
        out += density_violations(self.rho0, tol, "rho0")
        return out


@dataclass(frozen=True, eq=False)
class GoalQomdp:
    """Goal QOMDP: no rewards, an absorbing goal state ``rho_g``."""

    actions: np.ndarray
    rho0: np.ndarray
    rho_g: np.ndarray

    def __post_init__(self):
        acts = _coerce_actions(self.actions)
        d = acts.shape[-1]
        for name in ("rho0", "rho_g"):
            m = as_matrix(getattr(self, name), square=True)
            if m.shape != (d, d):
                raise DimensionMismatch(f"{name} shape {m.shape}, expected {(d, d)}")
            object.__setattr__(self, name, m)
        object.__setattr__(self, "actions", acts)

    @property
    def dim(self) -> int:
        return self.actions.shape[-1]

    @property
    def num_obs(self) -> int:
        return self.actions.shape[1]

    @property
    def num_actions(self) -> int:
        return self.actions.shape[0]

    def violations(self, tol: Tolerances = DEFAULT_TOL) -> list[Violation]:
        out = _action_violations(self.actions, tol)
        out += density_violations(self.rho0, tol, "rho0")
        out += density_violations(self.rho_g, tol, "rho_g")
        out += list(is_absorbing_goal(self, tol).violations)
        return out

    def is_goal(self, rho, tol: Tolerances = DEFAULT_TOL) -> bool:
        return states_equal(rho, self.rho_g, tol)


def is_absorbing_goal(q: GoalQomdp, tol: Tolerances = DEFAULT_TOL) -> CheckResult:
    """Every branch out of ``rho_g`` is either impossible or returns to ``rho_g``."""
    bad = []
    for a, kraus in enumerate(q.actions):
        for j, k in enumerate(kraus):
            branch = _branch(q.rho_g, k)
            p = float(np.real(np.trace(branch)))
            if p <= tol.eps_zero:
                continue
            dev = max_abs(branch / p - q.rho_g)
            if dev > tol.eps_zero:
                bad.append(Violation("goal state absorbing", dev, f"action {a}, observation {j}"))
    return CheckResult(not bad, tuple(bad))
