"""Scenario documents: JSON inputs that name metrics, connections and evaluation points.

A scenario is plain data; :meth:`Scenario.build` turns it into the geometric
objects (metrics, nonlinear and N-linear connections) on demand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .bundle import CoordinateChange, Dims, Point
from .connections import NLinearConnection, NonlinearConnection, berwald_connection, canonical_nlc
from .connections.nlinear import FAMILIES, nested_shape
from .errors import JethamError, ScenarioError
from .expr import FieldArray, parse
from .expr.field import ScalarField
from .metrics import LinearConnectionCoeffs, SpatialMetric, TemporalMetric

MODES = ("canonical-berwald", "custom")
_KEYS = {
    "dims",
    "temporal_metric",
    "spatial_metric",
    "hamiltonian",
    "nonlinear_connection",
    "n_linear_connection",
    "connection_mode",
    "eval_points",
    "seed",
    "coordinate_changes",
}
_CHANGE_KEYS = {"name", "t", "x", "t_inverse", "x_inverse", "nonlinear_connection", "n_linear_connection"}


def _require(cond, msg):
    if not cond:
        raise ScenarioError(msg)


def _texts(nested, dims, shape, what):
    try:
        return FieldArray.parse(nested, dims, shape).texts()
    except JethamError as exc:
        raise ScenarioError(f"{what}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{what}: expected a nested list of expression strings of shape {shape}") from exc


def _nlc_texts(spec, dims, what):
    _require(isinstance(spec, dict) and set(spec) <= {"N1", "N2"}, f"{what} must be an object with N1 and N2")
    m, n = dims
    out = {}
    for key, shape in (("N1", (n, m, m)), ("N2", (n, m, n))):
        out[key] = _texts(spec.get(key, np.zeros(shape).tolist()), dims, shape, f"{what}.{key}")
    return out


def _dlc_texts(spec, dims, what):
    _require(isinstance(spec, dict), f"{what} must be an object keyed by coefficient family")
    unknown = set(spec) - set(FAMILIES)
    _require(not unknown, f"{what}: unknown families {sorted(unknown)}")
    return {k: _texts(spec[k], dims, nested_shape(k, dims), f"{what}.{k}") for k in FAMILIES if k in spec}


def _point(d, dims, k):
    _require(isinstance(d, dict) and {"t", "x", "p"} <= set(d), f"eval_points[{k}] needs t, x and p")
    try:
        pt = Point(np.asarray(d["t"], float), np.asarray(d["x"], float), np.asarray(d["p"], float))
    except (TypeError, ValueError, JethamError) as exc:
        raise ScenarioError(f"eval_points[{k}]: {exc}") from exc
    _require(pt.dims == dims, f"eval_points[{k}] has dims {tuple(pt.dims)}, expected {tuple(dims)}")
    return pt


@dataclass(frozen=True)
class ChangeSpec:
    name: str
    t: list
    x: list
    t_inverse: list
    x_inverse: list
    nonlinear_connection: dict | None = None
    n_linear_connection: dict | None = None

    def change(self, dims) -> CoordinateChange:
        return CoordinateChange(dims, self.t, self.x, self.t_inverse, self.x_inverse, self.name)

    def to_dict(self) -> dict:
        out = {"name": self.name, "t": self.t, "x": self.x, "t_inverse": self.t_inverse, "x_inverse": self.x_inverse}
        if self.nonlinear_connection is not None:
            out["nonlinear_connection"] = self.nonlinear_connection
        if self.n_linear_connection is not None:
            out["n_linear_connection"] = self.n_linear_connection
        return out


@dataclass(frozen=True)
class Scenario:
    dims: Dims
    temporal_metric: list
    spatial_metric: list
    eval_points: tuple
    connection_mode: str = "canonical-berwald"
    hamiltonian: str | None = None
    nonlinear_connection: dict | None = None
    n_linear_connection: dict | None = None
    seed: int = 0
    coordinate_changes: tuple = field(default=())

    # -- parsing ----------------------------------------------------------
    @staticmethod
    def from_dict(doc) -> "Scenario":
        _require(isinstance(doc, dict), "scenario must be a JSON object")
        unknown = set(doc) - _KEYS
        _require(not unknown, f"unknown scenario keys: {sorted(unknown)}")
        for key in ("dims", "temporal_metric", "spatial_metric", "eval_points"):
            _require(key in doc, f"missing required key {key!r}")
        d = doc["dims"]
        _require(
            isinstance(d, list) and len(d) == 2 and all(isinstance(v, int) and not isinstance(v, bool) and v > 0 for v in d),
            "dims must be [m, n] with positive integers",
        )
        dims = Dims(*d)
        m, n = dims
        mode = doc.get("connection_mode", "canonical-berwald")
        _require(mode in MODES, f"connection_mode must be one of {MODES}")
        seed = doc.get("seed", 0)
        _require(isinstance(seed, int) and not isinstance(seed, bool), "seed must be an integer")
        tm = _texts(doc["temporal_metric"], dims, (m, m), "temporal_metric")
        sm = _texts(doc["spatial_metric"], dims, (n, n), "spatial_metric")
        ham = doc.get("hamiltonian")
        if ham is not None:
            _require(isinstance(ham, str), "hamiltonian must be an expression string")
            try:
                ham = parse(ham, dims).text
            except JethamError as exc:
                raise ScenarioError(f"hamiltonian: {exc}") from exc
        nlc = doc.get("nonlinear_connection")
        nlc = None if nlc is None else _nlc_texts(nlc, dims, "nonlinear_connection")
        dlc = doc.get("n_linear_connection")
        dlc = None if dlc is None else _dlc_texts(dlc, dims, "n_linear_connection")
        _require(mode == "custom" or (nlc is None and dlc is None),
                 "custom connection expressions require connection_mode 'custom'")
        pts = doc["eval_points"]
        _require(isinstance(pts, list) and len(pts) >= 1, "eval_points must be a non-empty list")
        points = tuple(_point(p, dims, k) for k, p in enumerate(pts))
        changes = []
        for k, c in enumerate(doc.get("coordinate_changes", []) or []):
            what = f"coordinate_changes[{k}]"
            _require(isinstance(c, dict) and {"t", "x", "t_inverse", "x_inverse"} <= set(c) and set(c) <= _CHANGE_KEYS,
                     f"{what} needs t, x, t_inverse, x_inverse")
            spec = ChangeSpec(
                name=str(c.get("name", f"change{k + 1}")),
                t=_texts(c["t"], dims, (m,), f"{what}.t"),
                x=_texts(c["x"], dims, (n,), f"{what}.x"),
                t_inverse=_texts(c["t_inverse"], dims, (m,), f"{what}.t_inverse"),
                x_inverse=_texts(c["x_inverse"], dims, (n,), f"{what}.x_inverse"),
                nonlinear_connection=None if c.get("nonlinear_connection") is None
                else _nlc_texts(c["nonlinear_connection"], dims, f"{what}.nonlinear_connection"),
                n_linear_connection=None if c.get("n_linear_connection") is None
                else _dlc_texts(c["n_linear_connection"], dims, f"{what}.n_linear_connection"),
            )
            try:
                spec.change(dims)
            except JethamError as exc:
                raise ScenarioError(f"{what}: {exc}") from exc
            changes.append(spec)
        sc = Scenario(dims, tm, sm, points, mode, ham, nlc, dlc, seed, tuple(changes))
        sc._check_metrics()
        return sc

    @staticmethod
    def from_json(text: str) -> "Scenario":
        return Scenario.from_dict(json.loads(text))

    def _check_metrics(self):
        try:
            for metric, block in ((self.temporal, "t"), (self.spatial, "x")):
                for pt in self.eval_points:
                    _require(metric.check_symmetric(getattr(pt, block), 1e-12),
                             f"{'temporal' if block == 't' else 'spatial'} metric is not symmetric")
        except ScenarioError:
            raise
        except JethamError:
            # singular or undefined values surface when the scenario is evaluated
            pass

    def to_dict(self) -> dict:
        out = {
            "dims": list(self.dims),
            "temporal_metric": self.temporal_metric,
            "spatial_metric": self.spatial_metric,
            "connection_mode": self.connection_mode,
            "eval_points": [p.to_dict() for p in self.eval_points],
            "seed": self.seed,
        }
        if self.hamiltonian is not None:
            out["hamiltonian"] = self.hamiltonian
        if self.nonlinear_connection is not None:
            out["nonlinear_connection"] = self.nonlinear_connection
        if self.n_linear_connection is not None:
            out["n_linear_connection"] = self.n_linear_connection
        if self.coordinate_changes:
            out["coordinate_changes"] = [c.to_dict() for c in self.coordinate_changes]
        return out

    def equivalent(self, other: "Scenario") -> bool:
        return self.to_dict() == other.to_dict()

    # -- geometric objects --------------------------------------------------
    @cached_property
    def temporal(self) -> TemporalMetric:
        return TemporalMetric.from_strings(self.dims, self.temporal_metric)

    @cached_property
    def spatial(self) -> SpatialMetric:
        return SpatialMetric.from_strings(self.dims, self.spatial_metric)

    @cached_property
    def linear(self) -> LinearConnectionCoeffs:
        return LinearConnectionCoeffs.from_metrics(self.temporal, self.spatial)

    @cached_property
    def hamiltonian_field(self) -> ScalarField | None:
        return None if self.hamiltonian is None else parse(self.hamiltonian, self.dims)

    @cached_property
    def nlc(self) -> NonlinearConnection:
        if self.nonlinear_connection is not None:
            return NonlinearConnection.from_strings(self.dims, self.nonlinear_connection["N1"],
                                                    self.nonlinear_connection["N2"], "custom")
        return canonical_nlc(self.temporal, self.spatial)

    @cached_property
    def connection(self) -> NLinearConnection:
        if self.connection_mode == "custom" and self.n_linear_connection is not None:
            return NLinearConnection.from_strings(self.nlc, self.n_linear_connection)
        if self.connection_mode == "custom" and self.nonlinear_connection is not None:
            return NLinearConnection.zero(self.nlc)
        return berwald_connection(self.linear, self.nlc)

    @property
    def is_canonical(self) -> bool:
        return self.connection_mode == "canonical-berwald"


__all__ = ["Scenario", "ChangeSpec", "MODES"]
