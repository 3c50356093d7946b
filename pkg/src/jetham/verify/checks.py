"""Transformation-law checks.  Every residual is new-from-old: the tilde-chart
object evaluated natively at the image point minus the law applied to the
old-chart object."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..bundle import CoordinateChange, DTensor, JetPoint, dtensor_transform
from ..connections.nlinear import FAMILIES, NLinearConnection, predicted_new_coefficients
from ..connections.nonlinear import NonlinearConnection
from ..expr import dual
from ..expr.dual import Dual3
from ..expr.field import ScalarField, gradient


@dataclass(frozen=True)
class CovarianceReport:
    object_id: str
    change_id: str
    max_abs_residual: float
    residuals: np.ndarray  # per-slot maximum over the probe points
    tolerance: float
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.max_abs_residual < self.tolerance)

    def to_dict(self) -> dict:
        return {
            "object": self.object_id,
            "change": self.change_id,
            "max_abs_residual": self.max_abs_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def _report(object_id, chg, slot_residuals, tol, detail=None) -> CovarianceReport:
    res = np.max(np.stack(slot_residuals), axis=0) if slot_residuals else np.zeros(0)
    top = float(np.max(res, initial=0.0))
    if not np.all(np.isfinite(res)):
        top = float("inf")
    return CovarianceReport(object_id, chg.name, top, res, tol, detail or {})


def check_nlc_covariance(N: NonlinearConnection, chg: CoordinateChange, pts, N_new: NonlinearConnection | None = None,
                         tol: float = 1e-8, object_id: str = "N") -> CovarianceReport:
    """Residual of the inhomogeneous law for ``(N1, N2)``.

    ``N_new`` is the tilde-chart connection obtained independently (re-derived
    from transformed metrics, or given by the user).  Without it the rule is
    compared with itself and the residual is zero by construction.
    """
    ruled = N.transformed(chg)
    target = N_new if N_new is not None else ruled
    slots = []
    for pt in pts:
        q = chg.push(pt).point()
        a1, a2 = target.values(q)
        b1, b2 = ruled.values(q)
        slots.append(np.concatenate([np.abs(a1 - b1).ravel(), np.abs(a2 - b2).ravel()]))
    return _report(object_id, chg, slots, tol)


def check_dtensor_covariance(field_old, field_new, chg: CoordinateChange, pts, tol: float = 1e-6,
                             object_id: str = "T", perturb=None) -> CovarianceReport:
    """``field_new(push(pt)) - (law applied to field_old(pt))`` over ``pts``.

    ``perturb=(index, eps)`` shifts one old component before the law is
    applied (mutation guard).
    """
    slots = []
    for pt in pts:
        old = field_old(pt)
        if perturb is not None:
            comps = np.array(old.components, dtype=float)
            comps[perturb[0]] += perturb[1]
            old = DTensor(old.kinds, comps, old.dims)
        new = field_new(chg.push(pt).point())
        pred = dtensor_transform(old, chg, pt)
        if new.kinds != old.kinds:
            raise ValueError(f"{object_id}: kinds differ between charts")
        slots.append(np.abs(np.asarray(new.components) - np.asarray(pred.components)).ravel())
    return _report(object_id, chg, slots, tol)


def check_connection_coeff_rules(D: NLinearConnection, chg: CoordinateChange, pts,
                                 D_new: NLinearConnection | None = None, tol: float = 1e-8,
                                 object_id: str = "D") -> CovarianceReport:
    """Residual of each of the nine coefficient rules (``detail`` maps family to residual)."""
    target = D_new if D_new is not None else D.transformed(chg)
    slots = []
    per_family = {f: 0.0 for f in FAMILIES}
    for pt in pts:
        jp = JetPoint.of(pt, D.dims)
        q = chg.push(jp)
        old = D.at(JetPoint.of(jp.point()))
        pred = predicted_new_coefficients(old, chg, JetPoint.of(jp.point()), Dual3.lift(np.asarray(q.x.value)))
        new = target.values(q.point())
        row = []
        for name, a, b in zip(FAMILIES, new, pred):
            r = np.abs(np.asarray(a) - np.asarray(dual.value(b))).ravel()
            per_family[name] = max(per_family[name], float(np.max(r, initial=0.0)))
            row.append(r)
        slots.append(np.concatenate(row))
    return _report(object_id, chg, slots, tol, per_family)


# ---------------------------------------------------------------------------
# AD versus finite differences

@dataclass(frozen=True)
class ADFDReport:
    max_rel_first: float
    max_rel_second: float
    max_mixed_asymmetry: float
    tolerance: float = 1e-5
    symmetry_tolerance: float = 1e-12

    @property
    def passed(self) -> bool:
        return (
            self.max_rel_first < self.tolerance
            and self.max_rel_second < self.tolerance
            and self.max_mixed_asymmetry < self.symmetry_tolerance
        )


def _rel(a, b):
    return np.abs(a - b) / np.maximum(1.0, np.abs(a))


def _hessian(f: ScalarField, z) -> np.ndarray:
    z = Dual3.lift(np.asarray(z, float))
    return np.asarray(dual.jacobian(lambda u: dual.jacobian(lambda w: Dual3.lift(f.at(w)), u), z).value)


def ad_fd_crosscheck(fields, pts, h1: float = 1e-5, h2: float = 1e-4) -> ADFDReport:
    """Central differences of orders one and two against forward-mode AD."""
    first = second = asym = 0.0
    for f in fields:
        for pt in pts:
            z = np.asarray(pt.flat() if callable(getattr(pt, "flat", None)) else pt, float)
            k = len(z)
            ev = lambda u: float(np.asarray(dual.value(f.at(u))))  # noqa: E731
            g = gradient(f, z)
            eye = np.eye(k)
            fd = np.array([(ev(z + h1 * eye[j]) - ev(z - h1 * eye[j])) / (2 * h1) for j in range(k)])
            first = max(first, float(np.max(_rel(g, fd), initial=0.0)))
            hess = _hessian(f, z)
            asym = max(asym, float(np.max(np.abs(hess - hess.T), initial=0.0)))
            f0 = ev(z)
            fd2 = np.empty((k, k))
            for i in range(k):
                for j in range(i, k):
                    if i == j:
                        v = (ev(z + h2 * eye[i]) - 2 * f0 + ev(z - h2 * eye[i])) / h2**2
                    else:
                        ei, ej = h2 * eye[i], h2 * eye[j]
                        v = (ev(z + ei + ej) - ev(z + ei - ej) - ev(z - ei + ej) + ev(z - ei - ej)) / (4 * h2**2)
                    fd2[i, j] = fd2[j, i] = v
            second = max(second, float(np.max(_rel(hess, fd2), initial=0.0)))
    return ADFDReport(first, second, asym)


__all__ = [
    "CovarianceReport",
    "check_nlc_covariance",
    "check_dtensor_covariance",
    "check_connection_coeff_rules",
    "ADFDReport",
    "ad_fd_crosscheck",
]
