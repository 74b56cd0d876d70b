"""JSON file formats for models, gambles and certificates (schema ``icek/1``).

Situations in general-dynamics maps are state names joined by ``"."``.
Gamble values and selection levels are flat arrays in lexicographic order
of state sequences. Floats are written with ``repr``, which round-trips
every double exactly.
"""

from __future__ import annotations

import json
import logging

import numpy as np

from .chain import GENERAL, STATIONARY, TIME_VARYING, ChainModel, LowerTransitionOperator
from .credal import CredalSet
from .exceptions import ParseError
from .tree import NGamble, Selection
from .witness import Certificate, desirability_violations, domination_violations

logger = logging.getLogger(__name__)

SCHEMA = "icek/1"
LOAD_TOL = 1e-9

__all__ = [
    "SCHEMA",
    "parse_model",
    "write_model",
    "parse_gamble",
    "write_gamble",
    "parse_certificate",
    "write_certificate",
    "check_certificate",
    "verify_certificate",
]


def _load(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    if doc.get("schema") != SCHEMA:
        raise ParseError(f"expected schema {SCHEMA!r}, got {doc.get('schema')!r}", "schema")
    return doc


def _field(doc, key, path=""):
    if key not in doc:
        raise ParseError("missing field", f"{path}.{key}" if path else key)
    return doc[key]


def _dump(doc):
    return json.dumps(doc, indent=1) + "\n"


def _credal(rows, n_states, path):
    if not isinstance(rows, list) or not rows:
        raise ParseError("expected a nonempty list of probability rows", path)
    if not all(isinstance(r, list) for r in rows):
        rows = [rows]
    out = []
    for i, row in enumerate(rows):
        where = f"{path}[{i}]"
        try:
            p = np.array(row, dtype=float)
        except (TypeError, ValueError):
            raise ParseError("row must contain numbers", where) from None
        if p.shape != (n_states,):
            raise ParseError(f"size mismatch: row has {p.size} entries, expected {n_states}", where)
        if not np.all(np.isfinite(p)) or p.min() < -LOAD_TOL:
            raise ParseError("row has a negative or non-finite entry", where)
        total = p.sum()
        if abs(total - 1.0) > LOAD_TOL:
            raise ParseError(f"row sums to {total!r}, not 1", where)
        if abs(total - 1.0) > 1e-12 or p.min() < 0:
            logger.warning("%s: row sums to %r; normalizing", where, total)
            p = np.clip(p, 0.0, None)
            p /= p.sum()
        out.append(p)
    return CredalSet(out)


def _situation(key, index, path):
    if key == "":
        raise ParseError("the initial situation is given by 'initial'", path)
    try:
        return tuple(index[name] for name in key.split("."))
    except KeyError as exc:
        raise ParseError(f"unknown state {exc.args[0]!r} in situation {key!r}", path) from None


def _operator(doc, states, path):
    if not isinstance(doc, dict):
        raise ParseError("expected an object mapping state names to rows", path)
    missing = [x for x in states if x not in doc]
    if missing:
        raise ParseError(f"missing states {missing}", path)
    extra = [x for x in doc if x not in states]
    if extra:
        raise ParseError(f"unknown states {extra}", path)
    return LowerTransitionOperator([_credal(doc[x], len(states), f"{path}.{x}") for x in states])


def parse_model(text):
    doc = _load(text)
    states = _field(doc, "states")
    if not isinstance(states, list) or not states or not all(isinstance(x, str) for x in states):
        raise ParseError("expected a nonempty list of state names", "states")
    if len(set(states)) != len(states):
        raise ParseError("duplicate state names", "states")
    n = len(states)
    initial = _credal(_field(doc, "initial"), n, "initial")
    dyn = _field(doc, "dynamics")
    if not isinstance(dyn, dict) or len(dyn) != 1:
        raise ParseError("expected exactly one of 'stationary', 'time_varying', 'general'", "dynamics")
    (kind, body), = dyn.items()
    path = f"dynamics.{kind}"
    if kind == STATIONARY:
        return ChainModel.stationary(states, initial, _operator(body, states, path))
    if kind == TIME_VARYING:
        if not isinstance(body, list) or not body:
            raise ParseError("expected a nonempty list of operators", path)
        ops = [_operator(op, states, f"{path}[{i}]") for i, op in enumerate(body)]
        return ChainModel.time_varying(states, initial, ops)
    if kind == GENERAL:
        if not isinstance(body, dict):
            raise ParseError("expected an object", path)
        default = _credal(_field(body, "default", path), n, f"{path}.default")
        index = {x: i for i, x in enumerate(states)}
        local = {
            _situation(key, index, f"{path}.{key}"): _credal(rows, n, f"{path}.{key}")
            for key, rows in body.items()
            if key != "default"
        }
        return ChainModel.general(states, initial, local, default)
    raise ParseError(f"unknown dynamics {kind!r}", "dynamics")


def _rows(K):
    return K.extremes.tolist()


def write_model(m):
    if m.kind == GENERAL:
        body = {"default": _rows(m.default)}
        for s, K in m.local_models.items():
            body[".".join(m.states[x] for x in s)] = _rows(K)
        dyn = {GENERAL: body}
    else:
        ops = [{x: _rows(K) for x, K in zip(m.states, op.per_state)} for op in m.operators]
        dyn = {STATIONARY: ops[0]} if m.kind == STATIONARY else {TIME_VARYING: ops}
    return _dump({"schema": SCHEMA, "states": list(m.states), "initial": _rows(m.initial), "dynamics": dyn})


def _int_field(doc, key):
    v = _field(doc, key)
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ParseError("expected a non-negative integer", key)
    return v


def _float_array(values, size, path):
    if not isinstance(values, list):
        raise ParseError("expected a list of numbers", path)
    if len(values) != size:
        raise ParseError(f"size mismatch: expected {size} values, got {len(values)}", path)
    try:
        return np.array(values, dtype=float)
    except (TypeError, ValueError):
        raise ParseError("values must be numbers", path) from None


def parse_gamble(text, model):
    doc = _load(text)
    n = _int_field(doc, "n")
    X = model.n_states
    values = _float_array(_field(doc, "values"), X**n, "values")
    return NGamble(X, n, values)


def write_gamble(f):
    return _dump({"schema": SCHEMA, "n": f.n, "values": f.values.ravel().tolist()})


def parse_certificate(text, n_states):
    doc = _load(text)
    alpha = _field(doc, "alpha")
    if isinstance(alpha, bool) or not isinstance(alpha, (int, float)):
        raise ParseError("expected a number", "alpha")
    horizon = _int_field(doc, "horizon")
    sel = _field(doc, "selection")
    if not isinstance(sel, dict):
        raise ParseError("expected an object", "selection")
    depth = _field(sel, "depth", "selection")
    if isinstance(depth, bool) or not isinstance(depth, int) or depth < 0:
        raise ParseError("expected a non-negative integer", "selection.depth")
    levels = _field(sel, "levels", "selection")
    if not isinstance(levels, list) or len(levels) != depth:
        raise ParseError(f"expected {depth} levels", "selection.levels")
    arrays = [
        _float_array(lev, n_states ** (k + 1), f"selection.levels[{k}]") for k, lev in enumerate(levels)
    ]
    return Certificate(float(alpha), Selection(n_states, depth, arrays), horizon)


def write_certificate(cert):
    S = cert.selection
    return _dump(
        {
            "schema": SCHEMA,
            "alpha": cert.alpha,
            "horizon": cert.horizon,
            "selection": {"depth": S.depth, "levels": [lev.ravel().tolist() for lev in S.levels]},
        }
    )


def check_certificate(model, gamble, cert):
    """Desirability and domination violations of a parsed certificate."""
    bad_des = desirability_violations(model, cert.selection)
    if cert.horizon < gamble.n:
        raise ParseError(f"horizon {cert.horizon} is below the gamble depth {gamble.n}", "horizon")
    bad_dom = domination_violations(gamble, cert.alpha, cert.selection, cert.horizon)
    return bad_des, bad_dom


def verify_certificate(model, gamble, text):
    """Re-check a serialized certificate from its file contents alone."""
    cert = parse_certificate(text, model.n_states)
    bad_des, bad_dom = check_certificate(model, gamble, cert)
    return not bad_des and not bad_dom
