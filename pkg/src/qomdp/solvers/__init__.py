from .horizon import (
    PolicySearchResult,
    PolicyTree,
    best_policy_value,
    evaluate_policy_tree,
    policy_exists,
)
from .mdp import StationaryPolicy, bellman_residual, mdp_policy_value, value_iteration
from .montecarlo import GoalEstimate, estimate_goal_probability
from .reachability import (
    ReachabilityVerdict,
    belief_support,
    decide_goal_reachability_pomdp,
    decide_goal_reachability_qomdp_bounded,
    support_update,
)

__all__ = [
    "GoalEstimate",
    "PolicySearchResult",
    "PolicyTree",
    "ReachabilityVerdict",
    "StationaryPolicy",
    "belief_support",
    "bellman_residual",
    "best_policy_value",
    "decide_goal_reachability_pomdp",
    "decide_goal_reachability_qomdp_bounded",
    "estimate_goal_probability",
    "evaluate_policy_tree",
    "mdp_policy_value",
    "policy_exists",
    "support_update",
    "value_iteration",
]
