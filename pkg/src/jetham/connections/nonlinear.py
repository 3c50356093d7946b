"""Nonlinear connections: adapted frames, bracket coefficients, almost product structure.

Array layouts (paired axes flattened spatial-first, ``P = i*m + a``):

* ``N1[P, b]`` is ``N1^{(a)}_{(i)b}``;  ``N2[P, j]`` is ``N2^{(a)}_{(i)j}``.
* Frame matrix ``E[I, alpha]``: natural component ``I`` of adapted vector
  ``alpha`` in the order (d/dt^a, d/dx^i, d/dp_i^a).
* Coframe matrix ``F[alpha, I]`` for (dt^a, dx^i, delta p_i^a).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..bundle import CoordinateChange, Dims, JetPoint, PVec, PForm, SDown, TDown, jet_gradient, kind_factors
from ..expr import dual
from ..expr.dual import Dual3
from ..expr.field import FieldArray
from ..metrics import LinearConnectionCoeffs, SpatialMetric, TemporalMetric


class NonlinearConnection:
    """Coefficient families ``(N1, N2)`` as a function of a (jet) point."""

    def __init__(self, dims, fn, label: str = "N", texts: dict | None = None):
        self.dims = Dims(*dims)
        self._fn = fn
        self.label = label
        self.texts = texts

    def at(self, pt) -> tuple[Dual3, Dual3]:
        jp = JetPoint.of(pt, self.dims)
        n1, n2 = self._fn(jp)
        return Dual3.lift(n1), Dual3.lift(n2)

    def values(self, pt) -> tuple[np.ndarray, np.ndarray]:
        n1, n2 = self.at(JetPoint.of(pt, self.dims).point())
        return np.asarray(n1.value), np.asarray(n2.value)

    @staticmethod
    def from_strings(dims, N1, N2, label="N") -> "NonlinearConnection":
        """``N1`` nested as ``[i][a][b]``, ``N2`` as ``[i][a][j]``."""
        dims = Dims(*dims)
        m, n = dims
        f1 = FieldArray.parse(N1, dims, (n, m, m))
        f2 = FieldArray.parse(N2, dims, (n, m, n))

        def fn(jp):
            return f1.at(jp.z).reshape(n * m, m), f2.at(jp.z).reshape(n * m, n)

        return NonlinearConnection(dims, fn, label, {"N1": f1.texts(), "N2": f2.texts()})

    @staticmethod
    def zero(dims) -> "NonlinearConnection":
        dims = Dims(*dims)
        return NonlinearConnection(
            dims, lambda jp: (np.zeros((dims.mn, dims.m)), np.zeros((dims.mn, dims.n))), "zero"
        )

    def perturbed(self, family: str, index, eps: float = 0.1) -> "NonlinearConnection":
        """Copy with one coefficient shifted by ``eps`` (mutation guard)."""

        def fn(jp):
            n1, n2 = self.at(jp)
            bump = np.zeros((n1 if family == "N1" else n2).shape)
            bump[index] = eps
            return (n1 + bump, n2) if family == "N1" else (n1, n2 + bump)

        return NonlinearConnection(self.dims, fn, f"{self.label}+{eps}@{family}{index}")

    def transformed(self, chg: CoordinateChange) -> "NonlinearConnection":
        """Tilde-chart coefficients defined by the inhomogeneous transformation rule."""
        dims = self.dims
        m, n = dims

        def fn(jp_new):
            jp = chg.pull(jp_new)
            n1, n2 = self.at(jp)
            jt = chg.jac_t(jp.t)
            jx = chg.jac_x(jp.x)
            pvec = kind_factors(jt, jx)[PVec]
            dpt, dpx = _dp_new_dbase(chg, jp)
            new1 = dual.matmul(dual.matmul(pvec, n1) - dpt, dual.inv(jt))
            new2 = dual.matmul(dual.matmul(pvec, n2) - dpx, dual.inv(jx))
            return new1, new2

        return NonlinearConnection(dims, fn, f"{self.label}~{chg.name}")


def _dp_new_dbase(chg: CoordinateChange, jp: JetPoint):
    """``d p~[P] / d t^a`` and ``d p~[P] / d x^i`` at fixed old polymomenta."""
    m, n = jp.dims
    p = jp.p

    def p_new(t, x):
        return dual.einsum("ji,ab,jb->ia", dual.inv(chg.jac_x(x)), chg.jac_t(t), p).reshape(n * m)

    dpt = dual.jacobian(lambda t: p_new(t, jp.x), jp.t)
    dpx = dual.jacobian(lambda x: p_new(jp.t, x), jp.x)
    return dpt, dpx


def nlc_from_linear(coeffs: LinearConnectionCoeffs, label="N(chi,Gamma)") -> NonlinearConnection:
    """``N1 = chi^a_cb p_i^c``, ``N2 = -Gamma^i_jk p_i^b``."""
    dims = coeffs.dims
    m, n = dims

    def fn(jp):
        chi = coeffs.temporal.at(jp.t)
        gam = coeffs.spatial.at(jp.x)
        p = jp.p
        n1 = dual.einsum("acb,ic->iab", chi, p).reshape(n * m, m)
        n2 = -dual.einsum("ijk,ib->jbk", gam, p).reshape(n * m, n)
        return n1, n2

    return NonlinearConnection(dims, fn, label)


def canonical_nlc(h: TemporalMetric, phi: SpatialMetric) -> NonlinearConnection:
    """``N1 = kappa^b_ac p_j^a``, ``N2 = -gamma^i_jk p_i^b`` from the metrics' Christoffels."""
    return nlc_from_linear(LinearConnectionCoeffs.from_metrics(h, phi), "canonical")


# ---------------------------------------------------------------------------
# adapted frame

@dataclass(frozen=True)
class AdaptedFrame:
    frame: np.ndarray  # E[I, alpha]
    coframe: np.ndarray  # F[alpha, I]

    def duality(self) -> np.ndarray:
        return self.coframe @ self.frame


def frame_matrices(dims: Dims, n1, n2) -> tuple[Dual3, Dual3]:
    """Jet-aware frame ``E`` and coframe ``F`` built from ``N1``, ``N2``."""
    m, n = dims
    K = dims.K
    eye = np.eye(K)
    sel_t, sel_x, sel_p = eye[:, dims.ts], eye[:, dims.xs], eye[:, dims.ps]
    frame = Dual3.lift(eye) - dual.einsum("IP,Pb,Jb->IJ", sel_p, n1, sel_t) - dual.einsum(
        "IP,Pj,Jj->IJ", sel_p, n2, sel_x
    )
    coframe = Dual3.lift(eye) + dual.einsum("IP,Pb,Jb->IJ", sel_p, n1, sel_t) + dual.einsum(
        "IP,Pj,Jj->IJ", sel_p, n2, sel_x
    )
    return frame, coframe


def adapted_frame(N: NonlinearConnection, pt) -> AdaptedFrame:
    n1, n2 = N.values(pt)
    e, f = frame_matrices(N.dims, n1, n2)
    return AdaptedFrame(np.asarray(e.value), np.asarray(f.value))


# ---------------------------------------------------------------------------
# adapted derivations applied to gradients

def delta_t(grad, n1):
    """``d/dt^c - N1[Q, c] d/dp_Q`` applied to a gradient with K as last axis."""
    dims_split = n1.shape
    nm, m = dims_split
    K = grad.shape[-1]
    n = K - m - nm
    g_t = grad[..., :m]
    g_p = grad[..., m + n:]
    return g_t - _contract_last(g_p, n1)


def delta_x(grad, n2):
    nm, n = n2.shape
    K = grad.shape[-1]
    m = K - n - nm
    g_x = grad[..., m:m + n]
    g_p = grad[..., m + n:]
    return g_x - _contract_last(g_p, n2)


def vertical(grad, nm):
    return grad[..., grad.shape[-1] - nm:]


def _contract_last(g, mat):
    if isinstance(g, Dual3) or isinstance(mat, Dual3):
        return dual.einsum("...Q,Qc->...c", g, mat)
    return np.einsum("...Q,Qc->...c", g, mat)


class BracketCoefficients(NamedTuple):
    """Lie-bracket coefficients of the adapted frame.

    ``R_tt[P,b,c]``, ``R_tx[P,b,k]``, ``R_xx[P,j,k]``: [d_b, d_c] etc. in terms
    of d/dp_P.  ``B_t[P,b,Q]``, ``B_x[P,j,Q]``: [delta_b, d/dp_Q] coefficients.
    """

    R_tt: np.ndarray
    R_tx: np.ndarray
    R_xx: np.ndarray
    B_t: np.ndarray
    B_x: np.ndarray


BRACKET_KINDS = {
    "R_tt": (PVec, TDown, TDown),
    "R_tx": (PVec, TDown, SDown),
    "R_xx": (PVec, SDown, SDown),
    "B_t": (PVec, TDown, PForm),
    "B_x": (PVec, SDown, PForm),
}


def brackets_from_gradient(n1, n2, g1, g2) -> BracketCoefficients:
    nm = n1.shape[0]
    d1t, d1x = delta_t(g1, n1), delta_x(g1, n2)
    d2t, d2x = delta_t(g2, n1), delta_x(g2, n2)
    return BracketCoefficients(
        R_tt=d1t - d1t.swapaxes(1, 2),
        R_tx=d1x - d2t.swapaxes(1, 2),
        R_xx=d2x - d2x.swapaxes(1, 2),
        B_t=vertical(g1, nm),
        B_x=vertical(g2, nm),
    )


def bracket_coefficients(N: NonlinearConnection, pt) -> BracketCoefficients:
    jp = JetPoint.of(JetPoint.of(pt, N.dims).point())
    n1, n2 = N.at(jp)
    g1, g2 = jet_gradient(N.at, jp)
    br = brackets_from_gradient(n1, n2, g1, g2)
    return BracketCoefficients(*(np.asarray(a.value) for a in br))


@dataclass(frozen=True)
class IntegrabilityReport:
    integrable: bool
    max_violation: float
    max_by_family: dict


def integrability_check(N: NonlinearConnection, probe_points, tol: float = 1e-9) -> IntegrabilityReport:
    worst = {"R_tt": 0.0, "R_tx": 0.0, "R_xx": 0.0}
    for pt in probe_points:
        br = bracket_coefficients(N, pt)
        for name in worst:
            worst[name] = max(worst[name], float(np.max(np.abs(getattr(br, name)), initial=0.0)))
    top = max(worst.values())
    return IntegrabilityReport(top < tol, top, worst)


# ---------------------------------------------------------------------------
# almost product structure

@dataclass(frozen=True)
class AlmostProduct:
    adapted: np.ndarray  # P in the adapted frame
    natural: np.ndarray  # the same operator in the natural frame
    h_T: np.ndarray
    h_M: np.ndarray
    w: np.ndarray


def almost_product(N: NonlinearConnection, pt) -> AlmostProduct:
    dims = N.dims
    K = dims.K
    h_T = np.zeros((K, K))
    h_M = np.zeros((K, K))
    w = np.zeros((K, K))
    h_T[dims.ts, dims.ts] = np.eye(dims.m)
    h_M[dims.xs, dims.xs] = np.eye(dims.n)
    w[dims.ps, dims.ps] = np.eye(dims.mn)
    P = np.eye(K) - 2 * w
    fr = adapted_frame(N, pt)
    return AlmostProduct(P, fr.frame @ P @ fr.coframe, h_T, h_M, w)


__all__ = [
    "NonlinearConnection",
    "nlc_from_linear",
    "canonical_nlc",
    "AdaptedFrame",
    "adapted_frame",
    "frame_matrices",
    "BracketCoefficients",
    "BRACKET_KINDS",
    "bracket_coefficients",
    "brackets_from_gradient",
    "delta_t",
    "delta_x",
    "vertical",
    "IntegrabilityReport",
    "integrability_check",
    "AlmostProduct",
    "almost_product",
]
