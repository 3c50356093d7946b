"""Scenario-level suites combining the individual checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bundle import (
    CoordinateChange,
    JetPoint,
    Point,
    fundamental_metric,
    h_normalization_tensor,
    liouville_hamilton,
    polymomentum_hamilton_tensor,
)
from ..connections import (
    BRACKET_KINDS,
    DEFLECTION_KINDS,
    NLinearConnection,
    NonlinearConnection,
    berwald_connection,
    bracket_coefficients,
    canonical_nlc,
    deflection_tensors,
    integrability_check,
)
from ..bundle import DTensor
from ..expr.field import ScalarField
from ..scenario import Scenario
from ..tensors import both_tables, oracle_tables
from .changes import default_changes, probe_points
from .checks import check_connection_coeff_rules, check_dtensor_covariance, check_nlc_covariance

MUTATION_EPS = 0.1


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float | None = None
    note: str = ""

    def to_dict(self) -> dict:
        r = float(self.residual)
        out = {"check": self.name, "pass": self.passed, "max_residual": r if np.isfinite(r) else repr(r)}
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        if self.note:
            out["note"] = self.note
        return out


def _acceptable(sc: Scenario):
    def accept(pt):
        for metric, u in ((sc.temporal, pt.t), (sc.spatial, pt.x)):
            g = metric.values(u)
            if abs(np.linalg.det(g)) < 0.05 or np.linalg.cond(g) > 50:
                return False
        return True

    return accept


def scenario_probes(sc: Scenario, count: int = 10, radius: float = 0.25) -> list[Point]:
    """Probe points scattered around the scenario's eval points, away from metric singularities."""
    pts = []
    per = -(-count // len(sc.eval_points))
    for k, center in enumerate(sc.eval_points):
        pts.extend(probe_points(sc.dims, per, seed=sc.seed * 1000 + k, center=center, radius=radius,
                                accept=_acceptable(sc)))
    return pts[:count]


# ---------------------------------------------------------------------------
# tilde-chart objects

class ChartPair:
    """Old-chart objects of a scenario and their natively computed tilde versions."""

    def __init__(self, sc: Scenario, chg: CoordinateChange, spec=None):
        self.sc = sc
        self.chg = chg
        dims = sc.dims
        self.h_new = sc.temporal.transformed(chg)
        self.phi_new = sc.spatial.transformed(chg)
        self.nlc_independent = True
        self.dlc_independent = True
        if spec is not None and spec.nonlinear_connection is not None:
            self.N_new = NonlinearConnection.from_strings(dims, spec.nonlinear_connection["N1"],
                                                          spec.nonlinear_connection["N2"], "custom~")
        elif sc.nonlinear_connection is None:
            self.N_new = canonical_nlc(self.h_new, self.phi_new)
        else:
            self.N_new = sc.nlc.transformed(chg)
            self.nlc_independent = False
        if spec is not None and spec.n_linear_connection is not None:
            self.D_new = NLinearConnection.from_strings(self.N_new, spec.n_linear_connection, "custom~")
        elif sc.connection.label == "berwald":
            self.D_new = berwald_connection(sc.linear.transformed(chg), self.N_new)
        else:
            self.D_new = sc.connection.transformed(chg, self.N_new)
            self.dlc_independent = False
        H = sc.hamiltonian_field
        self.H_new = None if H is None else _pulled_scalar(H, chg)


class _PulledScalar:
    def __init__(self, f: ScalarField, chg: CoordinateChange):
        self.f = f
        self.chg = chg
        self.dims = f.dims

    def at(self, z):
        return self.f.at(self.chg.pull(JetPoint(self.dims, z)).z)


def _pulled_scalar(f, chg):
    return _PulledScalar(f, chg)


def _tensor_fields(sc: Scenario, D, N, h, phi, H) -> dict:
    """Name -> (point -> DTensor) for every d-tensor family the suite covers."""
    cache = {}

    def tables(pt):
        key = tuple(pt.flat())
        if key not in cache:
            cache[key] = both_tables(D, pt)
        return cache[key]

    out = {}
    from ..tensors import CURVATURE_FAMILIES, TORSION_FAMILIES

    for name, *_ in TORSION_FAMILIES:
        out[f"torsion:{name}"] = lambda pt, n=name: tables(pt)[0][n]
    for name, *_ in CURVATURE_FAMILIES:
        out[f"curvature:{name}"] = lambda pt, n=name: tables(pt)[1][n]
    for name, kinds in DEFLECTION_KINDS.items():
        out[f"deflection:{name}"] = lambda pt, n=name, k=kinds: DTensor(k, getattr(deflection_tensors(D, pt), n), sc.dims)
    for name in ("R_tt", "R_tx", "R_xx"):
        out[f"bracket:{name}"] = lambda pt, n=name: DTensor(BRACKET_KINDS[n], getattr(bracket_coefficients(N, pt), n), sc.dims)
    out["C*"] = liouville_hamilton
    out["H"] = lambda pt: polymomentum_hamilton_tensor(phi, pt)
    out["J"] = lambda pt: h_normalization_tensor(h, pt)
    if H is not None:
        out["G"] = lambda pt: fundamental_metric(H, pt)
    return out


METRIC_DERIVED = {"C*", "H", "J", "G"}


def _guard(name, base, perturbed) -> CheckResult:
    """A guard only means something when the unperturbed check passes."""
    if not base.passed:
        return CheckResult(name, True, perturbed.max_abs_residual, perturbed.tolerance, "not applicable: base check failed")
    return CheckResult(name, not perturbed.passed, perturbed.max_abs_residual, perturbed.tolerance,
                       "perturbed input must fail")


def covariance_suite(sc: Scenario, changes=None, pts=None) -> list[CheckResult]:
    dims = sc.dims
    pts = pts if pts is not None else scenario_probes(sc)
    specs = list(sc.coordinate_changes)
    if changes is None:
        changes = [s.change(dims) for s in specs] if specs else default_changes(dims, sc.seed)
        specs = specs or [None] * len(changes)
    else:
        specs = [None] * len(changes)
    results = []
    old_fields = _tensor_fields(sc, sc.connection, sc.nlc, sc.temporal, sc.spatial, sc.hamiltonian_field)
    for chg, spec in zip(changes, specs):
        pair = ChartPair(sc, chg, spec)
        tag = f"[{chg.name}]"

        if pair.nlc_independent:
            rep = check_nlc_covariance(sc.nlc, chg, pts, pair.N_new, 1e-8)
            results.append(CheckResult(f"nlc-rule {tag}", rep.passed, rep.max_abs_residual, rep.tolerance))
            bad = check_nlc_covariance(sc.nlc.perturbed("N1", (0, 0), MUTATION_EPS), chg, pts[:1], pair.N_new, 1e-8)
            results.append(_guard(f"mutation nlc-rule {tag}", rep, bad))
        if pair.dlc_independent:
            rep = check_connection_coeff_rules(sc.connection, chg, pts, pair.D_new, 1e-8)
            results.append(CheckResult(f"coefficient-rules {tag}", rep.passed, rep.max_abs_residual, rep.tolerance))
            bad = check_connection_coeff_rules(sc.connection.perturbed("A_tt", (0, 0, 0), MUTATION_EPS), chg,
                                               pts[:1], pair.D_new, 1e-8)
            results.append(_guard(f"mutation coefficient-rules {tag}", rep, bad))

        new_fields = _tensor_fields(sc, pair.D_new, pair.N_new, pair.h_new, pair.phi_new, pair.H_new)
        for name, f_old in old_fields.items():
            tol = 1e-8 if name in METRIC_DERIVED else 1e-6
            rep = check_dtensor_covariance(f_old, new_fields[name], chg, pts, tol, name)
            results.append(CheckResult(f"d-tensor {name} {tag}", rep.passed, rep.max_abs_residual, tol))
            first = (0,) * len(f_old(pts[0]).kinds)
            bad = check_dtensor_covariance(f_old, new_fields[name], chg, pts[:1], tol, name, (first, MUTATION_EPS))
            results.append(_guard(f"mutation d-tensor {name} {tag}", rep, bad))
    return results


def oracle_suite(sc: Scenario, pts=None, tol: float = 1e-6) -> list[CheckResult]:
    pts = pts if pts is not None else list(sc.eval_points)
    worst_t = {}
    worst_c = {}
    for pt in pts:
        tt, ct = both_tables(sc.connection, pt)
        to, co = oracle_tables(sc.connection, pt)
        for k, v in tt.max_abs_diff(to).items():
            worst_t[k] = max(worst_t.get(k, 0.0), v)
        for k, v in ct.max_abs_diff(co).items():
            worst_c[k] = max(worst_c.get(k, 0.0), v)
    out = [CheckResult(f"torsion-oracle {k}", v <= tol, v, tol) for k, v in worst_t.items()]
    out += [CheckResult(f"curvature-oracle {k}", v <= tol, v, tol) for k, v in worst_c.items()]
    return out


def integrability_suite(sc: Scenario, pts=None) -> list[CheckResult]:
    """Reports integrability as a finding; the check itself always passes."""
    pts = pts if pts is not None else list(sc.eval_points)
    rep = integrability_check(sc.nlc, pts)
    verdict = "integrable" if rep.integrable else "not integrable"
    return [CheckResult("integrability", True, rep.max_violation, 1e-9, verdict)]


SUITES = ("covariance", "oracle", "integrability", "all")


def run_suite(sc: Scenario, suite: str) -> list[CheckResult]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    out = []
    if suite in ("covariance", "all"):
        out += covariance_suite(sc)
    if suite in ("oracle", "all"):
        out += oracle_suite(sc)
    if suite in ("integrability", "all"):
        out += integrability_suite(sc)
    return out


__all__ = [
    "CheckResult",
    "ChartPair",
    "SUITES",
    "covariance_suite",
    "integrability_suite",
    "oracle_suite",
    "run_suite",
    "scenario_probes",
]
