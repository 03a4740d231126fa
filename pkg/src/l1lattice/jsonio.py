"""JSON schemas shared by the CLI and the file formats.

Spaces may appear inline or as names resolved against a top-level "spaces"
table in the same document.  Real scalars serialize as plain numbers,
complex scalars as [re, im] pairs; numbers round-trip exactly (shortest
representation recovering the stored double).
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .core import COMPLEX, REAL, FnFamily, MeasureSpace, SimpleFn
from .decompose import CellDecomposition, Decomposition
from .extension import RestrictedOperator, Subspace
from .operators import KernelOperator
from .tensor import TensorElement


class SchemaError(ValueError):
    """Malformed or inconsistent input document."""


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def write_json(path: str, obj: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def read_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------

def _scalar_to_json(v, mode: str):
    if mode == REAL:
        return float(np.real(v))
    return [float(np.real(v)), float(np.imag(v))]


def _scalar_from_json(obj, mode: str):
    if mode == REAL:
        if isinstance(obj, (int, float)):
            return float(obj)
        raise SchemaError(f"expected a number, got {obj!r}")
    if isinstance(obj, (int, float)):
        return complex(float(obj), 0.0)
    if isinstance(obj, list) and len(obj) == 2:
        return complex(float(obj[0]), float(obj[1]))
    raise SchemaError(f"expected [re, im], got {obj!r}")


def _values_to_json(values: np.ndarray, mode: str) -> list:
    return [_scalar_to_json(v, mode) for v in values]


def _values_from_json(obj, mode: str) -> np.ndarray:
    if not isinstance(obj, list):
        raise SchemaError("values must be a list")
    vals = [_scalar_from_json(v, mode) for v in obj]
    return np.array(vals, dtype=np.complex128 if mode == COMPLEX else np.float64)


def _mode_from_json(obj) -> str:
    if obj not in (REAL, COMPLEX):
        raise SchemaError(f'mode must be "real" or "complex", got {obj!r}')
    return obj


# ---------------------------------------------------------------------------
# spaces and functions
# ---------------------------------------------------------------------------

def space_to_json(space: MeasureSpace) -> dict:
    return {"atoms": list(space.atoms), "weights": [float(w) for w in space.weights]}


def space_from_json(obj) -> MeasureSpace:
    if not isinstance(obj, dict) or "atoms" not in obj or "weights" not in obj:
        raise SchemaError("a space needs 'atoms' and 'weights'")
    try:
        return MeasureSpace(tuple(obj["atoms"]), tuple(obj["weights"]))
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc)) from exc


def _resolve_space(obj, registry: dict[str, MeasureSpace] | None) -> MeasureSpace:
    if isinstance(obj, str):
        if registry and obj in registry:
            return registry[obj]
        raise SchemaError(f"unknown space name {obj!r}")
    return space_from_json(obj)


def _registry(doc) -> dict[str, MeasureSpace]:
    table = doc.get("spaces", {}) if isinstance(doc, dict) else {}
    return {name: space_from_json(s) for name, s in table.items()}


def fn_to_json(f: SimpleFn, space_ref: str | None = None) -> dict:
    space = space_ref if space_ref is not None else space_to_json(f.space)
    return {"space": space, "mode": f.mode,
            "values": _values_to_json(f.values, f.mode)}


def fn_from_json(obj, registry: dict[str, MeasureSpace] | None = None,
                 default_space: MeasureSpace | None = None) -> SimpleFn:
    if not isinstance(obj, dict):
        raise SchemaError("a simple function must be an object")
    mode = _mode_from_json(obj.get("mode", REAL))
    if "space" in obj:
        space = _resolve_space(obj["space"], registry)
    elif default_space is not None:
        space = default_space
    else:
        raise SchemaError("a simple function needs a 'space'")
    try:
        return SimpleFn(space, mode, _values_from_json(obj["values"], mode))
    except (KeyError, ValueError) as exc:
        raise SchemaError(str(exc)) from exc


def family_to_json(fs: FnFamily) -> dict:
    return {"spaces": {"mu": space_to_json(fs.space)},
            "members": [fn_to_json(f, "mu") for f in fs.members]}


def family_from_json(doc) -> FnFamily:
    if not isinstance(doc, dict) or "members" not in doc:
        raise SchemaError("a family needs a 'members' list")
    registry = _registry(doc)
    members = tuple(fn_from_json(m, registry) for m in doc["members"])
    try:
        return FnFamily(members)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


# ---------------------------------------------------------------------------
# operators, tensors, subspaces
# ---------------------------------------------------------------------------

def operator_to_json(t: KernelOperator) -> dict:
    return {"domain": space_to_json(t.domain),
            "codomain": space_to_json(t.codomain),
            "mode": t.mode,
            "kernel": [_values_to_json(row, t.mode) for row in t.kernel]}


def operator_from_json(doc) -> KernelOperator:
    if not isinstance(doc, dict):
        raise SchemaError("an operator must be an object")
    registry = _registry(doc)
    try:
        domain = _resolve_space(doc["domain"], registry)
        codomain = _resolve_space(doc["codomain"], registry)
        mode = _mode_from_json(doc.get("mode", REAL))
        rows = [_values_from_json(r, mode) for r in doc["kernel"]]
        return KernelOperator(domain, codomain, np.vstack(rows), mode)
    except (KeyError, ValueError) as exc:
        raise SchemaError(str(exc)) from exc


def tensor_to_json(g: TensorElement) -> dict:
    return {"mu": space_to_json(g.mu_space),
            "nu": space_to_json(g.nu_space),
            "mode": g.mode,
            "terms": [{"f": fn_to_json(f, "mu"), "phi": fn_to_json(phi, "nu")}
                      for f, phi in g.terms]}


def tensor_from_json(doc) -> TensorElement:
    if not isinstance(doc, dict):
        raise SchemaError("a tensor element must be an object")
    registry = _registry(doc)
    try:
        mu = _resolve_space(doc["mu"], registry)
        nu = _resolve_space(doc["nu"], registry)
        registry = {**registry, "mu": mu, "nu": nu}
        mode = _mode_from_json(doc.get("mode", REAL))
        terms = []
        for item in doc["terms"]:
            f = fn_from_json(item["f"], registry, default_space=mu)
            phi = fn_from_json(item["phi"], registry, default_space=nu)
            terms.append((f, phi))
        return TensorElement(mu, nu, mode, tuple(terms))
    except (KeyError, ValueError) as exc:
        raise SchemaError(str(exc)) from exc


def subspace_to_json(x: Subspace) -> dict:
    return {"ambient": space_to_json(x.ambient),
            "basis": [fn_to_json(b, "ambient") for b in x.basis]}


def subspace_from_json(doc) -> Subspace:
    if not isinstance(doc, dict):
        raise SchemaError("a subspace must be an object")
    registry = _registry(doc)
    try:
        ambient = _resolve_space(doc["ambient"], registry)
        registry = {**registry, "ambient": ambient}
        basis = tuple(fn_from_json(b, registry, default_space=ambient)
                      for b in doc["basis"])
        return Subspace(ambient, basis)
    except (KeyError, ValueError) as exc:
        raise SchemaError(str(exc)) from exc


def images_to_json(t: RestrictedOperator) -> dict:
    return {"space": space_to_json(t.codomain),
            "images": [fn_to_json(y, "space") for y in t.images]}


def images_from_json(doc, subspace: Subspace) -> RestrictedOperator:
    if isinstance(doc, dict) and "images" in doc:
        registry = _registry(doc)
        if "space" in doc:
            registry = {**registry, "space": _resolve_space(doc["space"], registry)}
        default = registry.get("space")
        items = doc["images"]
    elif isinstance(doc, list):
        registry, default, items = {}, None, doc
    else:
        raise SchemaError("images must be a list or an object with 'images'")
    try:
        images = tuple(fn_from_json(y, registry, default_space=default)
                       for y in items)
        return RestrictedOperator(subspace, images)
    except (KeyError, ValueError) as exc:
        raise SchemaError(str(exc)) from exc


# ---------------------------------------------------------------------------
# decompositions
# ---------------------------------------------------------------------------

def decomposition_to_json(d: Decomposition) -> dict:
    if d.signs is not None:
        coeffs = {"kind": "signs",
                  "matrix": [[int(e) for e in row] for row in d.signs]}
    else:
        coeffs = {"kind": "field",
                  "entries": [[{"space": "mu", "mode": COMPLEX,
                                "values": _values_to_json(d.coeffs[i, j], COMPLEX)}
                               for j in range(d.k)]
                              for i in range(d.n)]}
    return {"spaces": {"mu": space_to_json(d.space)},
            "mode": d.mode,
            "parts": [{"space": "mu", "mode": REAL,
                       "values": _values_to_json(row, REAL)}
                      for row in d.parts_matrix],
            "coeffs": coeffs,
            "trace": {"pre_prune_counts": d.trace.level_counts()}}


def cell_decomposition_to_json(cd: CellDecomposition) -> dict:
    return {"spaces": {"mu": space_to_json(cd.space)},
            "mode": cd.mode,
            "cells": [list(c) for c in cd.cells],
            "parts": [{"space": "mu", "mode": REAL,
                       "values": _values_to_json(row, REAL)}
                      for row in cd.parts_matrix],
            "coeffs": [[_scalar_to_json(a, COMPLEX) for a in row]
                       for row in cd.alphas],
            "epsilon": cd.epsilon}
