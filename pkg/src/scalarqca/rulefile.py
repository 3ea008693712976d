"""Reading and writing rule files.

A rule file is a JSON document::

    {"dims": [16], "stencil": [[-1], [0], [1]],
     "weights": [{"re": 0, "im": 0}, {"re": 1, "im": 0}, {"re": 0, "im": 0}]}

Stencil entries may appear in any order; weights stay attached to their
offsets when the stencil is sorted.
"""
from __future__ import annotations

import json
from pathlib import Path

from .errors import InputError
from .lattice import LatticeShape, Stencil
from .operators import RuleWeights


def _int_list(value, where: str) -> list[int]:
    if not isinstance(value, list) or not value:
        raise InputError(f"field '{where}': expected a non-empty list of integers")
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, int):
            raise InputError(f"field '{where}[{i}]': expected an integer, got {v!r}")
        out.append(v)
    return out


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"field '{where}': expected a number, got {value!r}")
    return float(value)


def parse_rule(doc) -> tuple[LatticeShape, RuleWeights]:
    if not isinstance(doc, dict):
        raise InputError("rule file must contain a JSON object")
    for key in ("dims", "stencil", "weights"):
        if key not in doc:
            raise InputError(f"field '{key}' is missing")
    dims = _int_list(doc["dims"], "dims")
    stencil = doc["stencil"]
    weights = doc["weights"]
    if not isinstance(stencil, list) or not stencil:
        raise InputError("field 'stencil': expected a non-empty list of offset vectors")
    if not isinstance(weights, list):
        raise InputError("field 'weights': expected a list of {re, im} objects")
    if len(weights) != len(stencil):
        raise InputError(
            f"field 'weights': {len(weights)} weights for {len(stencil)} stencil offsets"
        )
    offsets = [tuple(_int_list(e, f"stencil[{i}]")) for i, e in enumerate(stencil)]
    for i, e in enumerate(offsets):
        if len(e) != len(dims):
            raise InputError(
                f"field 'stencil[{i}]': offset has dimension {len(e)}, dims has {len(dims)}"
            )
    values = []
    for i, w in enumerate(weights):
        if not isinstance(w, dict) or set(w) != {"re", "im"}:
            raise InputError(f"field 'weights[{i}]': expected an object with keys re and im")
        values.append(complex(_number(w["re"], f"weights[{i}].re"), _number(w["im"], f"weights[{i}].im")))
    if len(set(offsets)) != len(offsets):
        raise InputError("field 'stencil': offsets must be distinct")
    order = sorted(range(len(offsets)), key=lambda i: offsets[i])
    shape = LatticeShape(tuple(dims))
    rule = RuleWeights(Stencil(tuple(offsets[i] for i in order)), tuple(values[i] for i in order))
    return shape, rule


def load_rule(path: str | Path) -> tuple[LatticeShape, RuleWeights]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read rule file {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_rule(doc)


def rule_document(shape: LatticeShape, rule: RuleWeights) -> dict:
    return {
        "dims": list(shape.dims),
        "stencil": [list(e) for e in rule.stencil],
        "weights": [{"re": w.real, "im": w.imag} for w in rule.weights],
    }


def dump_rule(shape: LatticeShape, rule: RuleWeights) -> str:
    # json writes floats with repr, the shortest string that round-trips exactly
    return json.dumps(rule_document(shape, rule))
