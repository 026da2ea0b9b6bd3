"""Goal reachability and planning for classical and quantum observable MDPs."""

from .classical import GoalMdp, GoalPomdp, Mdp, Pomdp, belief_obs_prob, belief_reward, belief_update
from .errors import NotEmbeddable, ParseError, QomdpError, ValidationError
from .io import load_model, save_model
from .numerics import DEFAULT_TOL, Tolerances, Violation, eig_hermitian
from .quantum import GoalQomdp, Qomdp, evolve, is_absorbing_goal, observation_probs, reward, validate_superoperator
from .reductions import (
    QmopInstance,
    embed_pomdp,
    nongoal_probability,
    qmop_bounded_search,
    qmop_sequence_is_null,
    qmop_to_goal_qomdp,
    random_qmop_instance,
)
from .solvers import (
    PolicyTree,
    StationaryPolicy,
    best_policy_value,
    decide_goal_reachability_pomdp,
    decide_goal_reachability_qomdp_bounded,
    estimate_goal_probability,
    evaluate_policy_tree,
    policy_exists,
    value_iteration,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL",
    "GoalMdp",
    "GoalPomdp",
    "GoalQomdp",
    "Mdp",
    "NotEmbeddable",
    "ParseError",
    "PolicyTree",
    "Pomdp",
    "QmopInstance",
    "Qomdp",
    "QomdpError",
    "StationaryPolicy",
    "Tolerances",
    "ValidationError",
    "Violation",
    "belief_obs_prob",
    "belief_reward",
    "belief_update",
    "best_policy_value",
    "decide_goal_reachability_pomdp",
    "decide_goal_reachability_qomdp_bounded",
    "eig_hermitian",
    "embed_pomdp",
    "estimate_goal_probability",
    "evaluate_policy_tree",
    "evolve",
    "is_absorbing_goal",
    "load_model",
    "nongoal_probability",
    "observation_probs",
    "policy_exists",
    "qmop_bounded_search",
    "qmop_sequence_is_null",
    "qmop_to_goal_qomdp",
    "random_qmop_instance",
    "reward",
    "save_model",
    "validate_superoperator",
    "value_iteration",
]
