import numpy as np
import pytest

from qomdp.classical import (
    GoalPomdp,
    Mdp,
    Pomdp,
    belief_obs_prob,
    belief_reward,
    belief_transition_prob,
    belief_update,
    check_goal_belief_absorbing,
    sample_pomdp_step,
    tau_matrix,
)
from qomdp.errors import ZeroProbabilityObservation


def pomdp(t, o, r=None, b0=None, gamma=0.9):
    t, o = np.asarray(t, float), np.asarray(o, float)
    n, na = t.shape[:2]
    r = np.zeros((n, na)) if r is None else r
    b0 = np.full(n, 1.0 / n) if b0 is None else b0
    return Pomdp(t, o, r, b0, gamma)


def identity_perfect(n=2, na=1):
    t = np.stack([np.eye(n)] * na, axis=1)
    o = np.stack([np.eye(n)] * na, axis=1)
    return pomdp(t, o)


def random_pomdp(rng, n, na, no, zeros=0.0):
    t = rng.random((n, na, n)) * (rng.random((n, na, n)) >= zeros)
    t[..., 0] += 1e-3
    o = rng.random((n, na, no)) * (rng.random((n, na, no)) >= zeros)
    o[..., 0] += 1e-3
    return pomdp(
        t / t.sum(-1, keepdims=True),
        o / o.sum(-1, keepdims=True),
        rng.normal(size=(n, na)),
        rng.dirichlet(np.ones(n)),
    )


def test_tau_examples():
    p = identity_perfect()
    np.testing.assert_array_equal(tau_matrix(p, 0, 0), np.diag([1.0, 0.0]))
    rng = np.random.default_rng(0)
    t = rng.dirichlet(np.ones(3), size=(3, 1))
    q = pomdp(t, np.full((3, 1, 4), 0.25))
    np.testing.assert_allclose(tau_matrix(q, 0, 2), t[:, 0, :].T / 4)


def test_tau_column_sums():
    p = random_pomdp(np.random.default_rng(1), 4, 2, 3)
    for a in range(2):
        total = sum(tau_matrix(p, a, o).sum(axis=0) for o in range(3))
        np.testing.assert_allclose(total, np.ones(4))


def test_obs_prob_examples():
    p = identity_perfect()
    assert belief_obs_prob(p, [0.5, 0.5], 0, 0) == pytest.approx(0.5)
    q = pomdp(np.stack([np.eye(2)], 1), np.full((2, 1, 3), 1 / 3))
    for o in range(3):
        assert belief_obs_prob(q, [0.2, 0.8], 0, o) == pytest.approx(1 / 3)
    r = random_pomdp(np.random.default_rng(2), 3, 2, 4)
    for a in range(2):
        assert sum(belief_obs_prob(r, r.b0, a, o) for o in range(4)) == pytest.approx(1.0)


def test_belief_update_examples():
    np.testing.assert_allclose(belief_update(identity_perfect(), [0.5, 0.5], 0, 0), [1, 0])
    rng = np.random.default_rng(3)
    t = rng.dirichlet(np.ones(3), size=(3, 1))
    q = pomdp(t, np.full((3, 1, 2), 0.5))
    b = np.array([0.2, 0.3, 0.5])
    np.testing.assert_allclose(belief_update(q, b, 0, 1), b @ t[:, 0, :])
    o = np.zeros((2, 1, 2))
    o[:, :, 1] = 1.0
    with pytest.raises(ZeroProbabilityObservation):
        belief_update(pomdp(np.stack([np.eye(2)], 1), o), [0.5, 0.5], 0, 0)


def test_belief_transition_prob():
    p = identity_perfect()
    assert belief_transition_prob(p, [0.5, 0.5], 0, [1, 0]) == pytest.approx(0.5)
    assert belief_transition_prob(p, [0.5, 0.5], 0, [0.3, 0.7]) == 0.0
    # observations 0 and 1 carry the same information
    o = np.array([[[0.25, 0.25, 0.5]], [[0.1, 0.1, 0.8]]])
    q = pomdp(np.stack([np.eye(2)], 1), o)
    b = np.array([0.5, 0.5])
    post = belief_update(q, b, 0, 0)
    np.testing.assert_allclose(belief_update(q, b, 0, 1), post)
    expect = belief_obs_prob(q, b, 0, 0) + belief_obs_prob(q, b, 0, 1)
    assert belief_transition_prob(q, b, 0, post) == pytest.approx(expect)


def test_belief_reward():
    r = np.array([[2.0], [4.0]])
    p = pomdp(np.stack([np.eye(2)], 1), np.ones((2, 1, 1)), r)
    assert belief_reward(p, [1, 0], 0) == 2.0
    assert belief_reward(p, [0.5, 0.5], 0) == pytest.approx(3.0)
    assert belief_reward(identity_perfect(), [0.5, 0.5], 0) == 0.0


def test_sample_step_deterministic():
    p = identity_perfect(3)
    rng = np.random.default_rng(0)
    assert all(sample_pomdp_step(p, 2, 0, rng) == (2, 2) for _ in range(10))


def test_sample_step_matches_transition_row():
    t = np.array([[[0.2, 0.3, 0.5]], [[0, 1, 0]], [[0, 0, 1]]])
    p = pomdp(t, np.ones((3, 1, 1)))
    rng = np.random.default_rng(4)
    n = 100_000
    counts = np.bincount([sample_pomdp_step(p, 0, 0, rng)[0] for _ in range(n)], minlength=3)
    for k, pr in enumerate(t[0, 0]):
        assert abs(counts[k] / n - pr) <= 3 * np.sqrt(pr * (1 - pr) / n)


def test_sample_step_reproducible():
    p = random_pomdp(np.random.default_rng(5), 4, 2, 3)

    def run(seed):
        rng = np.random.default_rng(seed)
        s, out = 0, []
        for k in range(40):
            s, o = sample_pomdp_step(p, s, k % 2, rng)
            out.append((s, o))
        return out

    assert run(1) == run(1)
    assert run(1) != run(2)


def coin():
    t = np.zeros((2, 1, 2))
    t[0, 0] = [0.5, 0.5]
    t[1, 0] = [0, 1]
    o = np.zeros((2, 1, 2))
    o[0, 0] = [1, 0]
    o[1, 0] = [0, 1]
    return GoalPomdp(t, o, [1, 0], 1)


def test_goal_pomdp_validation():
    p = coin()
    assert p.violations() == []
    assert check_goal_belief_absorbing(p)
    single = GoalPomdp(np.ones((1, 1, 1)), np.ones((1, 1, 1)), [1.0], 0)
    assert single.violations() == [] and check_goal_belief_absorbing(single)
    o = p.observation.copy()
    o[1, 0] = [0.5, 0.5]
    leaky = GoalPomdp(p.transition, o, p.b0, 1)
    assert not check_goal_belief_absorbing(leaky)
    assert any(v.invariant == "goal observation certain at goal" for v in leaky.violations())


def test_row_sum_violation_reports_deviation():
    t = np.array([[[0.5, 0.4]], [[0.0, 1.0]]])
    bad = Mdp(t, np.zeros((2, 1)), 0.5).violations()
    assert len(bad) == 1
    assert bad[0].invariant == "transition rows sum to 1"
    assert bad[0].deviation == pytest.approx(0.1)


def test_with_goal_last_permutes_consistently():
    p = coin()
    t = p.transition[::-1, :, ::-1]
    o = p.observation[::-1]
    flipped = GoalPomdp(t, o, [0, 1], 0)
    assert flipped.violations() == []
    back = flipped.with_goal_last()
    assert back.goal == 1
    np.testing.assert_array_equal(back.transition, p.transition)
    np.testing.assert_array_equal(back.b0, p.b0)
