"""N-linear connections: nine adapted coefficient families, covariant derivatives, deflections.

Family layouts (paired axes flattened spatial-first, ``P = i*m + a``)::

    A_tt[a, b, c]  = A^a_bc              H_tt[a, b, k]  = H^a_bk
    A_xx[i, j, c]  = A^i_jc              H_xx[i, j, k]  = H^i_jk
    A_pp[P, Q, c]  = A^(a)(j)_(i)(b)c    H_pp[P, Q, k]  = H^(a)(j)_(i)(b)k
    C_tt[a, b, Q]  = C^a(k)_b(c)         C_xx[i, j, Q]  = C^i(k)_j(c)
    C_pp[P, Q, R]  = C^(a)(j)(k)_(i)(b)(c)

with ``P = (i, a)``, ``Q = (j, b)`` or ``(k, c)``, ``R = (k, c)``.  The last
axis is always the direction of differentiation.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..bundle import (
    CoordinateChange,
    Dims,
    DTensor,
    IndexKind,
    JetPoint,
    PForm,
    PVec,
    SDown,
    SUp,
    TDown,
    TUp,
    jet_gradient,
    kind_factors,
    transform_components,
)
from ..errors import ShapeMismatch
from ..expr import dual
from ..expr.dual import Dual3
from ..expr.field import FieldArray
from ..metrics import LinearConnectionCoeffs
from .nonlinear import NonlinearConnection, delta_t, delta_x, nlc_from_linear, vertical


class Coefficients(NamedTuple):
    A_tt: Dual3
    A_xx: Dual3
    A_pp: Dual3
    H_tt: Dual3
    H_xx: Dual3
    H_pp: Dual3
    C_tt: Dual3
    C_xx: Dual3
    C_pp: Dual3


FAMILIES = Coefficients._fields

FAMILY_KINDS = {
    "A_tt": (TUp, TDown, TDown),
    "A_xx": (SUp, SDown, TDown),
    "A_pp": (PVec, PForm, TDown),
    "H_tt": (TUp, TDown, SDown),
    "H_xx": (SUp, SDown, SDown),
    "H_pp": (PVec, PForm, SDown),
    "C_tt": (TUp, TDown, PForm),
    "C_xx": (SUp, SDown, PForm),
    "C_pp": (PVec, PForm, PForm),
}


def family_shape(name: str, dims) -> tuple:
    return tuple(k.length(dims) for k in FAMILY_KINDS[name])


def nested_shape(name: str, dims) -> tuple:
    """Shape of the unflattened input layout (paired axes as (i, a))."""
    m, n = dims
    out = []
    for k in FAMILY_KINDS[name]:
        out.extend({TUp: [m], TDown: [m], SUp: [n], SDown: [n]}.get(k, [n, m]))
    return tuple(out)


class NLinearConnection:
    """Nine coefficient families over a nonlinear connection."""

    def __init__(self, nlc: NonlinearConnection, fn, label: str = "D", texts: dict | None = None):
        self.nlc = nlc
        self.dims = nlc.dims
        self._fn = fn
        self.label = label
        self.texts = texts

    def at(self, pt) -> Coefficients:
        jp = JetPoint.of(pt, self.dims)
        return Coefficients(*(Dual3.lift(a) for a in self._fn(jp)))

    def values(self, pt) -> Coefficients:
        c = self.at(JetPoint.of(pt, self.dims).point())
        return Coefficients(*(np.asarray(a.value) for a in c))

    @staticmethod
    def from_strings(nlc: NonlinearConnection, families: dict, label="custom") -> "NLinearConnection":
        """Families given as nested expression lists in the unflattened layout.

        Missing families are zero.
        """
        dims = nlc.dims
        unknown = set(families) - set(FAMILIES)
        if unknown:
            raise ShapeMismatch(f"unknown coefficient families: {sorted(unknown)}")
        arrays = {}
        for name in FAMILIES:
            if name in families:
                arrays[name] = FieldArray.parse(families[name], dims, nested_shape(name, dims))
            else:
                arrays[name] = FieldArray.zeros(nested_shape(name, dims), dims)

        def fn(jp):
            return tuple(arrays[name].at(jp.z).reshape(family_shape(name, dims)) for name in FAMILIES)

        return NLinearConnection(nlc, fn, label, {k: v.texts() for k, v in arrays.items()})

    @staticmethod
    def zero(nlc: NonlinearConnection) -> "NLinearConnection":
        dims = nlc.dims
        return NLinearConnection(nlc, lambda jp: tuple(np.zeros(family_shape(f, dims)) for f in FAMILIES), "zero")

    def with_nlc(self, nlc: NonlinearConnection) -> "NLinearConnection":
        return NLinearConnection(nlc, self._fn, self.label, self.texts)

    def perturbed(self, family: str, index, eps: float = 0.1) -> "NLinearConnection":
        k = FAMILIES.index(family)

        def fn(jp):
            vals = list(self.at(jp))
            bump = np.zeros(vals[k].shape)
            bump[index] = eps
            vals[k] = vals[k] + bump
            return tuple(vals)

        return NLinearConnection(self.nlc, fn, f"{self.label}+{eps}@{family}{index}")

    def transformed(self, chg: CoordinateChange, nlc_new: NonlinearConnection | None = None) -> "NLinearConnection":
        """Tilde-chart connection defined by the nine transformation rules."""
        dims = self.dims
        nlc_new = nlc_new if nlc_new is not None else self.nlc.transformed(chg)

        def fn(jp_new):
            jp = chg.pull(jp_new)
            return predicted_new_coefficients(self.at(jp), chg, jp, jp_new.x)

        return NLinearConnection(nlc_new, fn, f"{self.label}~{chg.name}")


def inhomogeneous_terms(chg: CoordinateChange, jp: JetPoint, x_new) -> dict:
    """Second-derivative terms of the nine rules, written in old components.

    Each rule reads ``old = (tensor law applied to new) + inhom``.
    """
    m, n = jp.dims
    jt = chg.jac_t(jp.t)
    jx = chg.jac_x(jp.x)
    ht = chg.hess_t(jp.t)
    hx = chg.hess_x(jp.x)
    hinv = chg.inv_hess_x(x_new)  # [j, r, s] = d2 x^j / dx~^r dx~^s
    inh_a = dual.einsum("de,ebc->dbc", dual.inv(jt), ht)
    inh_h = dual.einsum("li,ijk->ljk", dual.inv(jx), hx)
    inh_app = -dual.einsum("ij,abc->iajbc", np.eye(n), inh_a).reshape(n * m, n * m, m)
    inh_hpp = -dual.einsum("ab,ri,sk,jrs->iajbk", np.eye(m), jx, jx, hinv).reshape(n * m, n * m, n)
    return {"A_tt": inh_a, "A_pp": inh_app, "H_xx": inh_h, "H_pp": inh_hpp}


def predicted_new_coefficients(old: Coefficients, chg: CoordinateChange, jp: JetPoint, x_new) -> tuple:
    factors = kind_factors(chg.jac_t(jp.t), chg.jac_x(jp.x))
    inh = inhomogeneous_terms(chg, jp, x_new)
    out = []
    for name, arr in zip(FAMILIES, old):
        if name in inh:
            arr = arr - inh[name]
        out.append(transform_components(arr, FAMILY_KINDS[name], factors))
    return tuple(out)


def berwald_connection(coeffs: LinearConnectionCoeffs, nlc: NonlinearConnection | None = None) -> NLinearConnection:
    """``(chi, 0, -delta chi, 0, Gamma, delta Gamma, 0, 0, 0)`` over ``N(chi, Gamma)``."""
    dims = coeffs.dims
    m, n = dims
    nlc = nlc if nlc is not None else nlc_from_linear(coeffs)

    def fn(jp):
        chi = coeffs.temporal.at(jp.t)
        gam = coeffs.spatial.at(jp.x)
        a_pp = -dual.einsum("ij,abc->iajbc", np.eye(n), chi).reshape(n * m, n * m, m)
        h_pp = dual.einsum("ab,jik->iajbk", np.eye(m), gam).reshape(n * m, n * m, n)
        return (
            chi,
            np.zeros((n, n, m)),
            a_pp,
            np.zeros((m, m, n)),
            gam,
            h_pp,
            np.zeros((m, m, n * m)),
            np.zeros((n, n, n * m)),
            np.zeros((n * m, n * m, n * m)),
        )

    return NLinearConnection(nlc, fn, "berwald")


# ---------------------------------------------------------------------------
# covariant derivatives

DIRECTIONS = {"/": "t", "t": "t", "|": "x", "x": "x", "v": "p", "p": "p"}
_DIRECTION_KIND = {"t": TDown, "x": SDown, "p": PForm}
_LETTERS = "abcdefghijklmnopqrstuvwxy"


def _direction_families(coeffs: Coefficients, direction: str):
    if direction == "t":
        return coeffs.A_tt, coeffs.A_xx, coeffs.A_pp
    if direction == "x":
        return coeffs.H_tt, coeffs.H_xx, coeffs.H_pp
    return coeffs.C_tt, coeffs.C_xx, coeffs.C_pp


def covariant_from_parts(values, grad, kinds, coeffs: Coefficients, n1, n2, direction: str):
    """Covariant derivative from component values and their natural gradient.

    Upper-type kinds (TUp, SUp, PVec) gain ``+G[out, in, g] T[in]``; lower-type
    kinds gain ``-G[in, out, g] T[in]``.  The paired families enter with a minus
    sign because ``D d/dp_Q = -A_pp[P, Q] d/dp_P``.
    """
    direction = DIRECTIONS[direction]
    kinds = tuple(IndexKind(k) for k in kinds)
    if direction == "t":
        out = delta_t(grad, n1)
    elif direction == "x":
        out = delta_x(grad, n2)
    else:
        out = vertical(grad, n1.shape[0])
    g_t, g_x, g_p = _direction_families(coeffs, direction)
    conn = {TUp: g_t, TDown: g_t, SUp: g_x, SDown: g_x, PVec: -g_p, PForm: -g_p}
    rank = len(kinds)
    sub = _LETTERS[:rank]
    for k, kind in enumerate(kinds):
        new = sub[:k] + "Y" + sub[k + 1:]
        if kind in (TUp, SUp, PVec):
            spec = f"Y{sub[k]}Z,{sub}->{new}Z"
            out = out + dual.einsum(spec, conn[kind], values)
        else:
            spec = f"{sub[k]}YZ,{sub}->{new}Z"
            out = out - dual.einsum(spec, conn[kind], values)
    return out


def covariant_derivative(D: NLinearConnection, field, kinds, direction: str, pt) -> DTensor:
    """Covariant derivative of a d-tensor field given by adapted components.

    ``field`` maps a JetPoint to the component array for ``kinds``.
    ``direction`` is ``"/"`` (T-horizontal), ``"|"`` (M-horizontal) or ``"v"``
    (vertical); the new index is appended as TDown, SDown or PForm.
    """
    dims = D.dims
    jp = JetPoint.of(JetPoint.of(pt, dims).point())
    kinds = tuple(IndexKind(k) for k in kinds)
    values = Dual3.lift(field(jp))
    if values.shape != tuple(k.length(dims) for k in kinds):
        raise ShapeMismatch(f"field shape {values.shape} does not match kinds")
    grad = jet_gradient(lambda q: Dual3.lift(field(q)), jp)
    n1, n2 = D.nlc.at(jp)
    out = covariant_from_parts(values, grad, kinds, D.at(jp), n1, n2, direction)
    return DTensor(kinds + (_DIRECTION_KIND[DIRECTIONS[direction]],), out.value, dims)


# ---------------------------------------------------------------------------
# deflection tensors

class Deflections(NamedTuple):
    delta_t: np.ndarray  # Delta^(a)_(i)b   kinds (PVec, TDown)
    delta_x: np.ndarray  # Delta^(a)_(i)j   kinds (PVec, SDown)
    theta: np.ndarray  # theta^(a)(j)_(i)(b) kinds (PVec, PForm)


DEFLECTION_KINDS = {"delta_t": (PVec, TDown), "delta_x": (PVec, SDown), "theta": (PVec, PForm)}


def deflection_tensors(D: NLinearConnection, pt) -> Deflections:
    jp = JetPoint.of(JetPoint.of(pt, D.dims).point())
    c = D.values(jp)
    n1, n2 = D.nlc.values(jp)
    p = np.asarray(jp.pf.value)
    return Deflections(
        delta_t=-n1 - np.einsum("PQb,Q->Pb", c.A_pp, p),
        delta_x=-n2 - np.einsum("PQj,Q->Pj", c.H_pp, p),
        theta=np.eye(D.dims.mn) - np.einsum("PKQ,K->PQ", c.C_pp, p),
    )


def deflections_via_covariant(D: NLinearConnection, pt) -> Deflections:
    """The same tensors as covariant derivatives of the Liouville-Hamilton field."""

    def liouville(jp):
        return jp.pf

    return Deflections(
        *(covariant_derivative(D, liouville, (PVec,), d, pt).components for d in ("/", "|", "v"))
    )


__all__ = [
    "Coefficients",
    "FAMILIES",
    "FAMILY_KINDS",
    "family_shape",
    "nested_shape",
    "NLinearConnection",
    "berwald_connection",
    "inhomogeneous_terms",
    "predicted_new_coefficients",
    "covariant_from_parts",
    "covariant_derivative",
    "Deflections",
    "DEFLECTION_KINDS",
    "deflection_tensors",
    "deflections_via_covariant",
]
