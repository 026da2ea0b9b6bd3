"""Model files (format ``dproc-1``) and deterministic JSON reports.

A model file is ``{"version": "dproc-1", "kind": KIND, "body": {...}}``.
Complex matrices are row-major nested lists of ``[re, im]`` pairs.  Array
indices inside bodies are 0-based (``goal`` is a state index); action
sequences are lists of 1-based action labels.  Unknown fields are rejected.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .classical import GoalMdp, GoalPomdp, Mdp, Pomdp
from .errors import DimensionMismatch, IndexOutOfRange, ParseError, ValidationError
from .numerics import DEFAULT_TOL, Tolerances, Violation, matrix_from_json, matrix_to_json
from .quantum import GoalQomdp, Qomdp
from .reductions import QmopInstance

FORMAT_VERSION = "dproc-1"

_COUNT = {"type": "integer", "minimum": 1}
_REAL = {"type": "number"}
_VEC = {"type": "array", "items": _REAL}
_MAT_REAL = {"type": "array", "items": _VEC}
_TENSOR = {"type": "array", "items": _MAT_REAL}
_CPLX = {"type": "array", "items": _REAL, "minItems": 2, "maxItems": 2}
_MAT = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _CPLX}}
_MATS = {"type": "array", "minItems": 1, "items": _MAT}


def _obj(**props):
    return {"type": "object", "properties": props, "required": list(props), "additionalProperties": False}


BODY_SCHEMAS = {
    "mdp": _obj(num_states=_COUNT, num_actions=_COUNT, transition=_TENSOR, reward=_MAT_REAL, gamma=_REAL),
    "goal_mdp": _obj(num_states=_COUNT, num_actions=_COUNT, transition=_TENSOR, goal={"type": "integer"}),
    "pomdp": _obj(
        num_states=_COUNT,
        num_actions=_COUNT,
        num_obs=_COUNT,
        transition=_TENSOR,
        observation=_TENSOR,
        reward=_MAT_REAL,
        b0=_VEC,
        gamma=_REAL,
    ),
    "goal_pomdp": _obj(
        num_states=_COUNT,
        num_actions=_COUNT,
        num_obs=_COUNT,
        transition=_TENSOR,
        observation=_TENSOR,
        b0=_VEC,
        goal={"type": "integer"},
    ),
    "qomdp": _obj(
        dim=_COUNT,
        num_obs=_COUNT,
        actions={"type": "array", "minItems": 1, "items": _MATS},
        rewards=_MATS,
        gamma=_REAL,
        rho0=_MAT,
    ),
    "goal_qomdp": _obj(
        dim=_COUNT,
        num_obs=_COUNT,
        actions={"type": "array", "minItems": 1, "items": _MATS},
        rho0=_MAT,
        rho_g=_MAT,
    ),
    "qmop": _obj(dim=_COUNT, kraus=_MATS),
}

KINDS = tuple(BODY_SCHEMAS)

FILE_SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": FORMAT_VERSION},
        "kind": {"enum": list(KINDS)},
        "body": {"type": "object"},
    },
    "required": ["version", "kind", "body"],
    "additionalProperties": False,
}


def _schema_violations(doc, schema, where: str) -> list[Violation]:
    validator = jsonschema.Draft202012Validator(schema)
    out = []
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path))):
        path = "/".join(str(p) for p in err.absolute_path)
        out.append(Violation(f"schema: {err.message}", math.inf, f"{where}/{path}" if path else where))
    return out


def _declared(body: dict, name: str, actual: int) -> list[Violation]:
    if body[name] != actual:
        return [Violation(f"declared {name} matches data", abs(body[name] - actual), name)]
    return []


def _build(kind: str, body: dict):
    if kind == "mdp":
        m = Mdp(body["transition"], body["reward"], body["gamma"])
        return m, _declared(body, "num_states", m.num_states) + _declared(body, "num_actions", m.num_actions)
    if kind == "goal_mdp":
        m = GoalMdp(body["transition"], body["goal"])
        return m, _declared(body, "num_states", m.num_states) + _declared(body, "num_actions", m.num_actions)
    if kind == "pomdp":
        m = Pomdp(body["transition"], body["observation"], body["reward"], body["b0"], body["gamma"])
    elif kind == "goal_pomdp":
        m = GoalPomdp(body["transition"], body["observation"], body["b0"], body["goal"])
    elif kind == "qomdp":
        acts = [[matrix_from_json(k) for k in a] for a in body["actions"]]
        m = Qomdp(acts, [matrix_from_json(r) for r in body["rewards"]], body["gamma"], matrix_from_json(body["rho0"]))
        return m, _declared(body, "dim", m.dim) + _declared(body, "num_obs", m.num_obs)
    elif kind == "goal_qomdp":
        acts = [[matrix_from_json(k) for k in a] for a in body["actions"]]
        m = GoalQomdp(acts, matrix_from_json(body["rho0"]), matrix_from_json(body["rho_g"]))
        return m, _declared(body, "dim", m.dim) + _declared(body, "num_obs", m.num_obs)
    else:
        m = QmopInstance([matrix_from_json(k) for k in body["kraus"]])
        return m, _declared(body, "dim", m.dim)
    extra = _declared(body, "num_states", m.num_states) + _declared(body, "num_actions", m.num_actions)
    return m, extra + _declared(body, "num_obs", m.num_obs)


def parse_model(doc, tol: Tolerances = DEFAULT_TOL):
    """Validate a decoded model document and return ``(kind, model)``.

    Goal POMDPs come back with their states permuted so the goal is last.

    Raises
    ------
    ValidationError
        Listing every schema or numerical invariant that failed.
    """
    bad = _schema_violations(doc, FILE_SCHEMA, "")
    if bad:
        raise ValidationError(bad)
    kind, body = doc["kind"], doc["body"]
    bad = _schema_violations(body, BODY_SCHEMAS[kind], "body")
    if bad:
        raise ValidationError(bad)
    try:
        model, bad = _build(kind, body)
    except (DimensionMismatch, IndexOutOfRange, ValueError) as exc:
        raise ValidationError([Violation(f"shape: {exc}", math.inf, "body")]) from None
    bad += model.violations(tol)
    if bad:
        raise ValidationError(bad)
    if kind == "goal_pomdp":
        model = model.with_goal_last()
    return kind, model


def load_model(path, tol: Tolerances = DEFAULT_TOL):
    """Read, validate and return ``(kind, model)`` from a ``dproc-1`` file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from None
    return parse_model(doc, tol)


def _tolist(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def model_document(model) -> dict:
    """Inverse of :func:`parse_model`."""
    if isinstance(model, Mdp):
        kind = "mdp"
        body = {
            "num_states": model.num_states,
            "num_actions": model.num_actions,
            "transition": _tolist(model.transition),
            "reward": _tolist(model.reward),
            "gamma": model.gamma,
        }
    elif isinstance(model, GoalMdp):
        kind = "goal_mdp"
        body = {
            "num_states": model.num_states,
            "num_actions": model.num_actions,
            "transition": _tolist(model.transition),
            "goal": model.goal,
        }
    elif isinstance(model, Pomdp):
        kind = "pomdp"
        body = {
            "num_states": model.num_states,
            "num_actions": model.num_actions,
            "num_obs": model.num_obs,
            "transition": _tolist(model.transition),
            "observation": _tolist(model.observation),
            "reward": _tolist(model.reward),
            "b0": _tolist(model.b0),
            "gamma": model.gamma,
        }
    elif isinstance(model, GoalPomdp):
        kind = "goal_pomdp"
        body = {
            "num_states": model.num_states,
            "num_actions": model.num_actions,
            "num_obs": model.num_obs,
            "transition": _tolist(model.transition),
            "observation": _tolist(model.observation),
            "b0": _tolist(model.b0),
            "goal": model.goal,
        }
    elif isinstance(model, Qomdp):
        kind = "qomdp"
        body = {
            "dim": model.dim,
            "num_obs": model.num_obs,
            "actions": [[matrix_to_json(k) for k in a] for a in model.actions],
            "rewards": [matrix_to_json(r) for r in model.rewards],
            "gamma": model.gamma,
            "rho0": matrix_to_json(model.rho0),
        }
    elif isinstance(model, GoalQomdp):
        kind = "goal_qomdp"
        body = {
            "dim": model.dim,
            "num_obs": model.num_obs,
            "actions": [[matrix_to_json(k) for k in a] for a in model.actions],
            "rho0": matrix_to_json(model.rho0),
            "rho_g": matrix_to_json(model.rho_g),
        }
    elif isinstance(model, QmopInstance):
        kind = "qmop"
        body = {"dim": model.dim, "kraus": [matrix_to_json(k) for k in model.kraus]}
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return {"version": FORMAT_VERSION, "kind": kind, "body": body}


def save_model(model, path) -> None:
    Path(path).write_text(json.dumps(model_document(model), indent=1) + "\n", encoding="utf-8")


def sequence_to_json(seq) -> list[int]:
    return [int(i) + 1 for i in seq]


def sequence_from_json(labels) -> tuple[int, ...]:
    out = tuple(int(i) - 1 for i in labels)
    if any(i < 0 for i in out):
        raise ValueError("action labels are 1-based")
    return out


def _encode(obj) -> str:
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if obj is None:
        return "null"
    return json.dumps(obj)


def dumps_report(report: dict) -> str:
    """Serialize a report: keys in insertion order, floats with 17 significant digits."""
    return _encode(report)
