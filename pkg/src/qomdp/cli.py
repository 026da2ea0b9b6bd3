"""Command-line interface.

Every command prints one JSON report on stdout.  Reports start with the keys
``command, decided, value, witness, nodes_expanded, bound_used`` in that
order (``null`` where not applicable), followed by command-specific keys.
Exit status: 0 when the command ran (whatever the verdict), 2 for invalid
input or flags, 1 for anything else.
"""

from __future__ import annotations

import argparse
import sys

from . import io
from .errors import NotEmbeddable, ParseError, QomdpError, ValidationError
from .numerics import DEFAULT_TOL
from .solvers import (
    StationaryPolicy,
    best_policy_value,
    decide_goal_reachability_pomdp,
    decide_goal_reachability_qomdp_bounded,
    estimate_goal_probability,
)
from .reductions import embed_pomdp, nongoal_probability, qmop_bounded_search, qmop_to_goal_qomdp

DEFAULT_QOMDP_DEPTH = 6


class UsageError(Exception):
    """Input that is well formed but unsuitable for the requested command."""


def _report(command: str, **fields) -> dict:
    out = {
        "command": command,
        "decided": None,
        "value": None,
        "witness": None,
        "nodes_expanded": None,
        "bound_used": None,
    }
    out.update(fields)
    return out


def _require(kind: str, allowed: tuple[str, ...], command: str) -> None:
    if kind not in allowed:
        raise UsageError(f"{command} expects a {' or '.join(allowed)} model, got {kind}")


def _witness_json(policy: StationaryPolicy) -> list:
    return [{"support": list(z), "action": a + 1} for z, a in sorted(policy.actions.items())]


def _cmd_validate(args) -> dict:
    kind, model = io.load_model(args.file)
    return _report("validate", kind=kind, valid=True, violations=[])


def _parse_policy(text: str):
    if text == "decider":
        return text
    try:
        return io.sequence_from_json(int(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"--policy must be 'decider' or comma-separated 1-based actions, got {text!r}") from None


def _cmd_simulate(args) -> dict:
    kind, model = io.load_model(args.file)
    _require(kind, ("goal_pomdp", "goal_qomdp"), "simulate")
    policy = _parse_policy(args.policy)
    if policy == "decider":
        if kind != "goal_pomdp":
            raise UsageError("--policy decider is only available for goal_pomdp models")
        verdict = decide_goal_reachability_pomdp(model)
        if verdict.decided != "yes":
            raise UsageError("the decider found no policy to simulate")
        policy = verdict.witness
    elif any(a >= model.num_actions for a in policy):
        raise UsageError(f"--policy uses an action outside 1..{model.num_actions}")
    try:
        est = estimate_goal_probability(model, policy, steps=args.steps, trials=args.trials, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return _report(
        "simulate",
        value=est.probability,
        stderr=est.stderr,
        trials=est.trials,
        steps=args.steps,
        seed=args.seed,
    )


def _cmd_solve(args) -> dict:
    kind, model = io.load_model(args.file)
    _require(kind, ("pomdp", "qomdp"), "solve")
    res = best_policy_value(model, args.horizon)
    fields = {"value": res.value, "witness": res.tree.to_dict(), "nodes_expanded": res.nodes_expanded}
    if args.threshold is not None:
        ok = res.value >= args.threshold - DEFAULT_TOL.eps_zero
        fields["decided"] = "yes" if ok else "no"
        fields["threshold"] = args.threshold
    return _report("solve", horizon=args.horizon, **fields)


def _cmd_decide_reach(args) -> dict:
    kind, model = io.load_model(args.file)
    _require(kind, ("goal_pomdp", "goal_qomdp"), "decide-reach")
    if kind == "goal_pomdp":
        if args.depth is not None:
            raise UsageError("--depth applies to goal_qomdp models only")
        v = decide_goal_reachability_pomdp(model)
        witness = _witness_json(v.witness) if v.witness is not None else None
        return _report(
            "decide-reach",
            decided=v.decided,
            witness=witness,
            nodes_expanded=v.nodes_expanded,
            reachable_supports=v.details["reachable_supports"],
            goal_state=model.goal,
        )
    depth = DEFAULT_QOMDP_DEPTH if args.depth is None else args.depth
    v = decide_goal_reachability_qomdp_bounded(model, depth)
    witness = io.sequence_to_json(v.witness) if v.witness is not None else None
    return _report(
        "decide-reach", decided=v.decided, witness=witness, nodes_expanded=v.nodes_expanded, bound_used=v.bound_used
    )


def _cmd_reduce_qmop(args) -> dict:
    kind, model = io.load_model(args.file)
    _require(kind, ("qmop",), "reduce-qmop")
    q = qmop_to_goal_qomdp(model)
    io.save_model(q, args.out)
    return _report("reduce-qmop", out=args.out, dim=q.dim, num_actions=q.num_actions, num_obs=q.num_obs)


def _cmd_qmop_search(args) -> dict:
    kind, model = io.load_model(args.file)
    _require(kind, ("qmop",), "qmop-search")
    seq = qmop_bounded_search(model, args.max_len)
    if seq is None:
        return _report("qmop-search", decided="unknown", bound_used=args.max_len)
    return _report(
        "qmop-search",
        decided="yes",
        value=nongoal_probability(model, seq),
        witness=io.sequence_to_json(seq),
        bound_used=args.max_len,
    )


def _cmd_embed(args) -> dict:
    kind, model = io.load_model(args.file)
    _require(kind, ("pomdp",), "embed")
    q = embed_pomdp(model)
    io.save_model(q, args.out)
    return _report("embed", out=args.out, dim=q.dim, num_obs=q.num_obs)


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qomdp", description="Goal reachability and planning for POMDPs and QOMDPs.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate", help="check a model file")
    p.add_argument("file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of reaching the goal")
    p.add_argument("file")
    p.add_argument("--policy", required=True, help="comma-separated 1-based actions, or 'decider'")
    p.add_argument("--steps", type=_positive, required=True)
    p.add_argument("--trials", type=_positive, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("solve", help="optimal finite-horizon policy tree")
    p.add_argument("file")
    p.add_argument("--horizon", type=_positive, required=True)
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("decide-reach", help="goal reachability with probability 1")
    p.add_argument("file")
    p.add_argument("--depth", type=_positive, help=f"search depth for goal_qomdp models (default {DEFAULT_QOMDP_DEPTH})")
    p.set_defaults(func=_cmd_decide_reach)

    p = sub.add_parser("reduce-qmop", help="build the goal QOMDP for a QMOP instance")
    p.add_argument("file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_reduce_qmop)

    p = sub.add_parser("qmop-search", help="search for a null outcome sequence")
    p.add_argument("file")
    p.add_argument("--max-len", type=_positive, required=True)
    p.set_defaults(func=_cmd_qmop_search)

    p = sub.add_parser("embed", help="embed a POMDP as a QOMDP")
    p.add_argument("file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_embed)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        report = args.func(args)
    except ValidationError as exc:
        print(io.dumps_report(_report(args.command, valid=False, violations=[v.to_dict() for v in exc.violations])))
        for v in exc.violations:
            print(f"invalid: {v}", file=sys.stderr)
        return 2
    except NotEmbeddable as exc:
        print(io.dumps_report(_report(args.command, embeddable=False, deviation=exc.deviation)))
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QomdpError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(io.dumps_report(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
