"""Definition-based torsion and curvature on the whole jet bundle.

The connection is assembled into one array ``Omega[g, b, d]`` with
``D_{e_d} e_b = Omega[g, b, d] e_g`` over the adapted frame
``e = (delta/delta t, delta/delta x, d/dp)``.  Frame brackets come from the
natural-frame commutator of the frame matrix (differentiated by AD), so no
bracket formula enters this route.
"""

from __future__ import annotations

import numpy as np

from ..bundle import JetPoint
from ..connections.nlinear import NLinearConnection
from ..connections.nonlinear import frame_matrices
from ..expr import dual
from ..expr.dual import Dual3
from .tables import (
    CURVATURE_FAMILIES,
    CURVATURE_KINDS,
    TORSION_FAMILIES,
    TORSION_KINDS,
    CurvatureTable,
    TorsionTable,
    _wrap,
)


def _slices(dims) -> dict:
    return {"t": dims.ts, "x": dims.xs, "p": dims.ps}


def connection_array(D: NLinearConnection, jp: JetPoint) -> Dual3:
    dims = D.dims
    K = dims.K
    eye = np.eye(K)
    sel = {k: eye[:, s] for k, s in _slices(dims).items()}
    c = D.at(jp)
    blocks = (
        ("t", "t", c.A_tt, 1.0), ("x", "t", c.A_xx, 1.0), ("p", "t", c.A_pp, -1.0),
        ("t", "x", c.H_tt, 1.0), ("x", "x", c.H_xx, 1.0), ("p", "x", c.H_pp, -1.0),
        ("t", "p", c.C_tt, 1.0), ("x", "p", c.C_xx, 1.0), ("p", "p", c.C_pp, -1.0),
    )
    total = Dual3.zeros((K, K, K))
    for field_block, direction, arr, sign in blocks:
        s_f, s_d = sel[field_block], sel[direction]
        total = total + sign * dual.einsum("Aa,Bb,Cc,abc->ABC", s_f, s_f, s_d, arr)
    return total


def _frame(D: NLinearConnection, jp: JetPoint):
    n1, n2 = D.nlc.at(jp)
    return frame_matrices(D.dims, n1, n2)


def frame_commutators(D: NLinearConnection, pt) -> np.ndarray:
    """``c[g, b, a]`` with ``[e_b, e_a] = c[g, b, a] e_g``."""
    dims = D.dims
    jp = JetPoint.of(JetPoint.of(pt, dims).point())
    E, F = (np.asarray(m.value) for m in _frame(D, jp))
    dE = np.asarray(dual.jacobian(lambda z: _frame(D, JetPoint(dims, z))[0], jp.z).value)  # [J, a, I]
    nat = np.einsum("Ib,JaI->Jba", E, dE) - np.einsum("Ia,JbI->Jba", E, dE)
    return np.einsum("gJ,Jba->gba", F, nat)


def _full(D: NLinearConnection, pt):
    dims = D.dims
    jp = JetPoint.of(JetPoint.of(pt, dims).point())
    E = np.asarray(_frame(D, jp)[0].value)
    om = np.asarray(connection_array(D, jp).value)
    d_om = np.asarray(dual.jacobian(lambda z: connection_array(D, JetPoint(dims, z)), jp.z).value)
    e_om = np.einsum("gabJ,Jd->gabd", d_om, E)  # e_d(Omega[g, a, b])
    comm = frame_commutators(D, jp.point())
    return om, e_om, comm


def torsion_full(om, comm) -> np.ndarray:
    """``T[g, b, a] = T(e_b, e_a)^g``."""
    return om.transpose(0, 2, 1) - om - comm


def curvature_full(om, e_om, comm) -> np.ndarray:
    """``R[g, a, d, b] = (R(e_d, e_b) e_a)^g``."""
    return (
        e_om.transpose(0, 1, 3, 2)
        - e_om
        + np.einsum("eab,ged->gadb", om, om)
        - np.einsum("ead,geb->gadb", om, om)
        - np.einsum("edb,gae->gadb", comm, om)
    )


def _torsion_extract(T, dims) -> dict:
    s = _slices(dims)
    return {name: T[s[o], s[f], s[sec]].transpose(0, 2, 1) for name, f, sec, o in TORSION_FAMILIES}


def _curvature_extract(R, dims) -> dict:
    s = _slices(dims)
    out = {}
    for name, f, sec, z in CURVATURE_FAMILIES:
        block = R[s[z], s[z], s[f], s[sec]].transpose(0, 1, 3, 2)
        out[name] = -block if z == "p" else block
    return out


def torsion_oracle(D: NLinearConnection, pt, family: str | None = None):
    """Torsion from its definition; one family (by table name) or the whole table."""
    om, _, comm = _full(D, pt)
    table = _wrap(TorsionTable, _torsion_extract(torsion_full(om, comm), D.dims), TORSION_KINDS, D.dims)
    return table if family is None else table[family]


def curvature_oracle(D: NLinearConnection, pt, family: str | None = None):
    om, e_om, comm = _full(D, pt)
    R = curvature_full(om, e_om, comm)
    table = _wrap(CurvatureTable, _curvature_extract(R, D.dims), CURVATURE_KINDS, D.dims)
    return table if family is None else table[family]


def oracle_tables(D: NLinearConnection, pt):
    om, e_om, comm = _full(D, pt)
    dims = D.dims
    return (
        _wrap(TorsionTable, _torsion_extract(torsion_full(om, comm), dims), TORSION_KINDS, dims),
        _wrap(CurvatureTable, _curvature_extract(curvature_full(om, e_om, comm), dims), CURVATURE_KINDS, dims),
    )
