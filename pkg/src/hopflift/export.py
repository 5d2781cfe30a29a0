"""JSON form of solution tuples, re-readable by ``verify --tuple``.

Layout::

    {"system": "sw", "constants": {...},
     "let": [["_t1", "x^2 + y^2"], ...],
     "H": [3 strings], "psi": [re1, im1, re2, im2], "A": [3 strings], "B": [3 strings]}

``let`` holds shared subexpressions in definition order; every string is in
the expression grammar and may refer to earlier ``let`` names.
"""

from __future__ import annotations

import json
from pathlib import Path

from .expr import parse_bindings, to_text_shared
from .fields import VectorField
from .iterate import EquationSystem
from .lift import SpinorField
from .verify import SolutionTuple

GROUPS = (("H", 3), ("psi", 4), ("A", 3), ("B", 3))


class TupleFormatError(ValueError):
    pass


def export_groups(groups: dict) -> dict:
    """{"let": [...], name: [texts]} for named lists of expressions."""
    names = list(groups)
    flat = [e for n in names for e in groups[n]]
    bindings, texts = to_text_shared(flat)
    out = {"let": [list(b) for b in bindings]}
    i = 0
    for n in names:
        out[n] = texts[i:i + len(groups[n])]
        i += len(groups[n])
    return out


def tuple_to_dict(sol: SolutionTuple, system, constants=None) -> dict:
    doc = {"system": EquationSystem.parse(system).value, "constants": dict(constants or {})}
    doc.update(export_groups({"H": sol.H.components, "psi": sol.psi.parts,
                              "A": sol.A.components, "B": sol.B.components}))
    return doc


def tuple_from_dict(doc: dict, constants=None) -> tuple:
    """(SolutionTuple, system or None, constants) from a parsed document."""
    if not isinstance(doc, dict):
        raise TupleFormatError("tuple file must hold a JSON object")
    consts = dict(doc.get("constants") or {})
    consts.update(constants or {})
    texts = []
    for name, size in GROUPS:
        group = doc.get(name)
        if not isinstance(group, list) or len(group) != size:
            raise TupleFormatError(f"field {name!r} must be a list of {size} expression strings")
        texts.extend(str(t) for t in group)
    exprs = parse_bindings([tuple(b) for b in doc.get("let", [])], texts, consts.keys())
    H, psi, A, B = exprs[0:3], exprs[3:7], exprs[7:10], exprs[10:13]
    system = EquationSystem.parse(doc["system"]) if doc.get("system") else None
    return SolutionTuple(VectorField(*H), SpinorField(*psi), VectorField(*A), VectorField(*B)), system, consts


def write_json(path, doc) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n")


def read_tuple(path, constants=None) -> tuple:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise TupleFormatError(f"{path}: {exc}") from None
    return tuple_from_dict(doc, constants)
