"""Measurement-occurrence instances and their goal-QOMDP encoding.

A QMOP instance is a superoperator ``{K_1..K_n}`` on ``d`` dimensions; the
question is whether some finite outcome sequence has probability zero from
every full-rank start.  :func:`qmop_to_goal_qomdp` builds a goal QOMDP on
``d + 1`` dimensions whose action ``i`` either evolves by ``K_i`` (the last
observation, "not at goal") or jumps to the extra basis state ``|d>``, so a
sequence of actions reaches the goal surely exactly when the matching
outcome sequence is impossible.

Sequences are tuples of 0-based Kraus indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classical import Pomdp, tau_matrix
from .errors import EmptySequence, IndexOutOfRange, InvalidKraus, NotEmbeddable, PathExtinguished
from .numerics import DEFAULT_TOL, Tolerances, Violation, basis_projector, dagger, eig_hermitian, max_abs, pad_embed
from .quantum import GoalQomdp, Qomdp, as_kraus, completeness_deviation


@dataclass(frozen=True, eq=False)
class QmopInstance:
    kraus: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kraus", as_kraus(self.kraus))

    @property
    def dim(self) -> int:
        return self.kraus.shape[-1]

    @property
    def num_kraus(self) -> int:
        return self.kraus.shape[0]

    def violations(self, tol: Tolerances = DEFAULT_TOL) -> list[Violation]:
        dev, entry = completeness_deviation(self.kraus)
        if dev > tol.eps_structural:
            return [Violation("Kraus completeness", dev, f"entry {entry}")]
        return []


def random_qmop_instance(dim: int, num_kraus: int, rng: np.random.Generator) -> QmopInstance:
    """Kraus family cut from the first ``dim`` columns of a random unitary.

    The unitary comes from the QR decomposition of a complex Gaussian matrix
    of size ``num_kraus * dim``; stacking the blocks gives an isometry, so
    completeness holds by construction.
    """
    n = num_kraus * dim
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    iso = q[:, :dim]
    return QmopInstance(iso.reshape(num_kraus, dim, dim))


def not_at_goal_obs(dim: int) -> int:
    """Observation index of the ``K_i`` branch in the encoding of a ``dim``-dimensional instance."""
    return dim + 1


def qmop_to_goal_qomdp(s: QmopInstance, tol: Tolerances = DEFAULT_TOL) -> GoalQomdp:
    """Encode a measurement-occurrence instance as a goal QOMDP.

    Action ``i`` has ``d + 2`` Kraus matrices.  The last one is ``K_i (+) 0``.
    The other ``d + 1`` come from the eigendecomposition of
    ``Z = I - (K_i (+) 0)^H (K_i (+) 0)``: matrix ``j`` is zero except for a
    bottom row equal to ``sqrt(z_j) <z_j|``.  Eigenvalues below
    ``tol.eps_structural`` give all-zero matrices.

    Raises
    ------
    InvalidKraus
        If the instance's Kraus family is not complete.
    """
    bad = s.violations(tol)
    if bad:
        raise InvalidKraus(str(bad[0]))
    d = s.dim
    actions = []
    for k in s.kraus:
        top = pad_embed(k)
        z = np.eye(d + 1) - dagger(top) @ top
        w, v = eig_hermitian(0.5 * (z + dagger(z)), tol)
        kraus = []
        for j in range(d + 1):
            a = np.zeros((d + 1, d + 1), dtype=np.complex128)
            if w[j] >= tol.eps_structural:
                a[d, :] = np.sqrt(w[j]) * v[:, j].conj()
            kraus.append(a)
        kraus.append(top)
        actions.append(np.stack(kraus))
    rho0 = np.eye(d + 1, dtype=np.complex128) / (d + 1)
    return GoalQomdp(np.stack(actions), rho0, basis_projector(d + 1, d))


def _check_sequence(s: QmopInstance, seq) -> tuple[int, ...]:
    seq = tuple(int(i) for i in seq)
    for i in seq:
        if not 0 <= i < s.num_kraus:
            raise IndexOutOfRange(f"Kraus index {i} out of range for {s.num_kraus} operators")
    return seq


def sequence_product(s: QmopInstance, seq) -> np.ndarray:
    """``K_{i_n} ... K_{i_1}`` (identity for the empty sequence)."""
    m = np.eye(s.dim, dtype=np.complex128)
    for i in _check_sequence(s, seq):
        m = s.kraus[i] @ m
    return m


def _top_left_rho0(d: int) -> np.ndarray:
    # Top-left d x d block of the maximally mixed (d+1)-state.
    return np.eye(d, dtype=np.complex128) / (d + 1)


def nongoal_probability(s: QmopInstance, seq) -> float:
    """Probability that following ``seq`` in the encoded QOMDP has not reached the goal.

    Equals ``Tr(M d(rho0) M^H)`` with ``M = K_{i_n} ... K_{i_1}`` and
    ``d(rho0) = I_d / (d + 1)``.
    """
    m = sequence_product(s, seq)
    return float(np.real(np.trace(m @ _top_left_rho0(s.dim) @ dagger(m))))


def qmop_sequence_is_null(s: QmopInstance, seq, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff ``K_{i_1}^H ... K_{i_n}^H K_{i_n} ... K_{i_1}`` vanishes entrywise."""
    if len(seq) == 0:
        raise EmptySequence("null-sequence queries need at least one index")
    m = sequence_product(s, seq)
    return max_abs(dagger(m) @ m) <= tol.eps_zero


def qmop_bounded_search(
    s: QmopInstance,
    max_len: int,
    tol: Tolerances = DEFAULT_TOL,
    *,
    prune_invertible: bool = False,
) -> tuple[int, ...] | None:
    """Lexicographically first null sequence of length at most ``max_len``, or None.

    Depth-first in lexicographic order, so a null prefix is reported before
    any of its extensions.  ``None`` only means "none up to ``max_len``"; no
    bound decides the problem in general.

    ``prune_invertible`` skips extending prefixes whose product is full rank.
    That preserves whether a witness exists within the bound (no proper
    prefix of a shortest null sequence is invertible, since ``W M = 0`` with
    ``M`` invertible forces ``W = 0``) but may return a different witness
    than the lexicographically first one.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    d = s.dim

    def dfs(prefix: tuple[int, ...], m: np.ndarray):
        for i in range(s.num_kraus):
            seq = prefix + (i,)
            mi = s.kraus[i] @ m
            if max_abs(dagger(mi) @ mi) <= tol.eps_zero:
                return seq
            if len(seq) == max_len:
                continue
            if prune_invertible:
                w, _ = eig_hermitian(dagger(mi) @ mi, tol)
                if w[0] > tol.eps_zero:
                    continue
            found = dfs(seq, mi)
            if found is not None:
                return found
        return None

    return dfs((), np.eye(d, dtype=np.complex128))


def policy_path(s: QmopInstance, seq, tol: Tolerances = DEFAULT_TOL) -> list[np.ndarray]:
    """Non-goal states ``sigma_1 .. sigma_n`` visited while following ``seq``.

    ``sigma_k`` is ``M_k d(rho0) M_k^H (+) 0`` normalized to unit trace,
    where ``M_k`` is the product of the first ``k`` Kraus matrices.

    Raises
    ------
    PathExtinguished
        At the first step whose surviving trace is at most ``tol.eps_zero``.
    """
    seq = _check_sequence(s, seq)
    m = np.eye(s.dim, dtype=np.complex128)
    rho = _top_left_rho0(s.dim)
    path = []
    for step, i in enumerate(seq, start=1):
        m = s.kraus[i] @ m
        block = m @ rho @ dagger(m)
        tr = float(np.real(np.trace(block)))
        if tr <= tol.eps_zero:
            raise PathExtinguished(step, tr)
        path.append(pad_embed(block / tr))
    return path


def embed_pomdp(p: Pomdp, tol: Tolerances = DEFAULT_TOL) -> Qomdp:
    """Embed a POMDP whose square-root Kraus families are complete.

    Observation ``o`` of action ``a`` gets the Kraus matrix with entries
    ``sqrt(tau^{ao}_{ij})``.  Completeness requires that distinct states never
    share a successor under the same action (true for permutation
    transitions with any observation model).  On diagonal states the embedded
    dynamics reproduce the belief update: the diagonal of the evolved state
    is the updated belief and branch probabilities equal observation
    probabilities.

    Raises
    ------
    NotEmbeddable
        If some action's family misses completeness by more than
        ``tol.eps_structural``.
    """
    actions = []
    for a in range(p.num_actions):
        kraus = np.stack([np.sqrt(tau_matrix(p, a, o)) for o in range(p.num_obs)]).astype(np.complex128)
        dev, _ = completeness_deviation(kraus)
        if dev > tol.eps_structural:
            raise NotEmbeddable(dev, a)
        actions.append(kraus)
    rewards = [np.diag(p.reward[:, a]).astype(np.complex128) for a in range(p.num_actions)]
    return Qomdp(np.stack(actions), np.stack(rewards), p.gamma, np.diag(p.b0).astype(np.complex128))
