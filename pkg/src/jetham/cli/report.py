"""Builders for the ``jetham/1`` JSON documents."""

from __future__ import annotations

import json

import numpy as np

from ..bundle import DTensor, IndexKind, PForm, PVec
from ..connections import (
    BRACKET_KINDS,
    DEFLECTION_KINDS,
    adapted_frame,
    almost_product,
    bracket_coefficients,
    deflection_tensors,
)
from ..bundle import fundamental_metric
from ..errors import DomainError, ScenarioError
from ..scenario import Scenario
from ..tensors import STRUCTURAL_ZEROS, curvature_table, torsion_table

SCHEMA = "jetham/1"
WHATS = ("frames", "brackets", "torsion", "curvature", "deflection", "fundamental-metric", "almost-product")

BRACKET_NAMES = {
    "R_tt": "R^(a)_(i)bc",
    "R_tx": "R^(a)_(i)bk",
    "R_xx": "R^(a)_(i)jk",
    "B_t": "B^(a)(k)_(i)b(c)",
    "B_x": "B^(a)(k)_(i)j(c)",
}
DEFLECTION_NAMES = {"delta_t": "Delta^(a)_(i)b", "delta_x": "Delta^(a)_(i)j", "theta": "theta^(a)(j)_(i)(b)"}


def _num(v) -> float:
    v = float(v)
    if not np.isfinite(v):
        raise DomainError("serialize", v)
    return 0.0 if v == 0 else v


def _axis_label(kind: IndexKind) -> str:
    return {PVec: "PVec(i,a)", PForm: "PForm(i,a)"}.get(kind, kind.name)


def entries(comps, kinds, dims) -> list:
    """Every component with its 1-based index tuple (paired axes expand to (i, a))."""
    m = dims.m
    comps = np.asarray(comps, dtype=float)
    out = []
    for idx in np.ndindex(*comps.shape):
        label = []
        for k, kind in zip(idx, kinds):
            if kind in (PVec, PForm):
                label.extend([k // m + 1, k % m + 1])
            else:
                label.append(k + 1)
        out.append({"index": label, "value": _num(comps[idx])})
    return out


def family(name, tensor: DTensor, extra=None) -> dict:
    doc = {
        "family": name,
        "kinds": [_axis_label(k) for k in tensor.kinds],
        "entries": entries(tensor.components, tensor.kinds, tensor.dims),
    }
    if extra:
        doc.update(extra)
    return doc


def _matrix(a) -> list:
    return [[_num(v) for v in row] for row in np.asarray(a)]


def compute_point(sc: Scenario, what: str, pt) -> dict:
    dims = sc.dims
    if what == "frames":
        fr = adapted_frame(sc.nlc, pt)
        return {
            "frame": _matrix(fr.frame),
            "coframe": _matrix(fr.coframe),
            "duality_max_deviation": _num(np.max(np.abs(fr.duality() - np.eye(dims.K)))),
        }
    if what == "brackets":
        br = bracket_coefficients(sc.nlc, pt)
        return {"families": [family(BRACKET_NAMES[k], DTensor(BRACKET_KINDS[k], getattr(br, k), dims))
                             for k in BRACKET_NAMES]}
    if what == "torsion":
        tab = torsion_table(sc.connection, pt)
        return {"families": [family(k, v, {"structural_zero": k in STRUCTURAL_ZEROS}) for k, v in tab.items()]}
    if what == "curvature":
        tab = curvature_table(sc.connection, pt)
        return {"families": [family(k, v) for k, v in tab.items()]}
    if what == "deflection":
        d = deflection_tensors(sc.connection, pt)
        return {"families": [family(DEFLECTION_NAMES[k], DTensor(DEFLECTION_KINDS[k], getattr(d, k), dims))
                             for k in DEFLECTION_NAMES]}
    if what == "fundamental-metric":
        if sc.hamiltonian_field is None:
            raise ScenarioError("what=fundamental-metric needs a 'hamiltonian' expression")
        return {"families": [family("G^(i)(j)_(a)(b)", fundamental_metric(sc.hamiltonian_field, pt))]}
    if what == "almost-product":
        ap = almost_product(sc.nlc, pt)
        eig = np.round(np.linalg.eigvals(ap.natural).real).astype(int)
        return {
            "adapted": _matrix(ap.adapted),
            "natural": _matrix(ap.natural),
            "trace": _num(np.trace(ap.adapted)),
            "multiplicity_plus_one": int(np.sum(eig == 1)),
            "multiplicity_minus_one": int(np.sum(eig == -1)),
        }
    raise ScenarioError(f"unknown quantity {what!r}; choose from {', '.join(WHATS)}")


def compute_document(sc: Scenario, what: str, mapper=map) -> dict:
    if what not in WHATS:
        raise ScenarioError(f"unknown quantity {what!r}; choose from {', '.join(WHATS)}")
    results = list(mapper(lambda pt: compute_point(sc, what, pt), sc.eval_points))
    return {
        "schema": SCHEMA,
        "command": "compute",
        "what": what,
        "scenario": sc.to_dict(),
        "points": [{"point": pt.to_dict(), **res} for pt, res in zip(sc.eval_points, results)],
    }


def verify_document(sc: Scenario, suite: str, results) -> dict:
    return {
        "schema": SCHEMA,
        "command": "verify",
        "suite": suite,
        "scenario": sc.to_dict(),
        "checks": [r.to_dict() for r in results],
        "pass": all(r.passed for r in results),
    }


def dumps(doc: dict) -> str:
    """Deterministic text: fixed key order, shortest round-trip floats."""
    return json.dumps(doc, indent=1, ensure_ascii=False, allow_nan=False) + "\n"


__all__ = ["SCHEMA", "WHATS", "compute_document", "compute_point", "dumps", "entries", "verify_document"]
