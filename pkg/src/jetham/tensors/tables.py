"""Torsion (12 effective + 6 structural zeros) and curvature (18) d-tensor tables.

Slot conventions.  A torsion family stores ``T(e_first, e_second)`` projected
onto one block as ``[out, second, first]``; e.g. ``T^c_aj`` is the
``h_T`` part of ``T(d/dx^j, d/dt^a)`` at ``[c, a, j]``.  A curvature family
stores ``R(e_first, e_second) e_z`` as ``[out, z, second, first]``; the
paired (vertical) families carry the extra minus sign of
``R(X, Y) d/dp_I = -R[L, I, ...] d/dp_L``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bundle import Dims, DTensor, IndexKind, JetPoint, PForm, PVec, SDown, SUp, TDown, TUp, jet_gradient
from ..expr.dual import Dual3
from ..connections.nlinear import NLinearConnection, covariant_from_parts
from ..connections.nonlinear import bracket_coefficients, delta_t, delta_x, vertical

UPPER = {"t": TUp, "x": SUp, "p": PVec}
LOWER = {"t": TDown, "x": SDown, "p": PForm}

# (name, first-argument block, second-argument block, output block)
TORSION_FAMILIES = (
    ("T^c_ab", "t", "t", "t"),
    ("T^k_ab", "t", "t", "x"),
    ("R^(f)_(r)ab", "t", "t", "p"),
    ("T^c_aj", "x", "t", "t"),
    ("T^k_aj", "x", "t", "x"),
    ("R^(f)_(r)aj", "x", "t", "p"),
    ("P^c(j)_a(b)", "p", "t", "t"),
    ("P^k(j)_a(b)", "p", "t", "x"),
    ("P^(f)(j)_(r)a(b)", "p", "t", "p"),
    ("T^c_ij", "x", "x", "t"),
    ("T^k_ij", "x", "x", "x"),
    ("R^(f)_(r)ij", "x", "x", "p"),
    ("P^c(j)_i(b)", "p", "x", "t"),
    ("P^k(j)_i(b)", "p", "x", "x"),
    ("P^(f)(j)_(r)i(b)", "p", "x", "p"),
    ("S^c(i)(j)_(a)(b)", "p", "p", "t"),
    ("S^k(i)(j)_(a)(b)", "p", "p", "x"),
    ("S^(f)(i)(j)_(r)(a)(b)", "p", "p", "p"),
)

STRUCTURAL_ZEROS = ("T^k_ab", "P^k(j)_a(b)", "T^c_ij", "P^c(j)_i(b)", "S^c(i)(j)_(a)(b)", "S^k(i)(j)_(a)(b)")

# (name, first-argument block, second-argument block, block of the transported field)
CURVATURE_FAMILIES = (
    ("R^d_abc", "t", "t", "t"),
    ("R^d_abk", "x", "t", "t"),
    ("P^d(k)_ab(c)", "p", "t", "t"),
    ("R^d_ajk", "x", "x", "t"),
    ("P^d(k)_aj(c)", "p", "x", "t"),
    ("S^d(j)(k)_a(b)(c)", "p", "p", "t"),
    ("R^l_ibc", "t", "t", "x"),
    ("R^l_ibk", "x", "t", "x"),
    ("P^l(k)_ib(c)", "p", "t", "x"),
    ("R^l_ijk", "x", "x", "x"),
    ("P^l(k)_ij(c)", "p", "x", "x"),
    ("S^l(j)(k)_i(b)(c)", "p", "p", "x"),
    ("R^(d)(i)_(l)(a)bc", "t", "t", "p"),
    ("R^(d)(i)_(l)(a)bk", "x", "t", "p"),
    ("P^(d)(i)(k)_(l)(a)b(c)", "p", "t", "p"),
    ("R^(d)(i)_(l)(a)jk", "x", "x", "p"),
    ("P^(d)(i)(k)_(l)(a)j(c)", "p", "x", "p"),
    ("S^(d)(i)(j)(k)_(l)(a)(b)(c)", "p", "p", "p"),
)

TORSION_KINDS = {name: (UPPER[o], LOWER[s], LOWER[f]) for name, f, s, o in TORSION_FAMILIES}
CURVATURE_KINDS = {name: (UPPER[z], LOWER[z], LOWER[s], LOWER[f]) for name, f, s, z in CURVATURE_FAMILIES}


@dataclass(frozen=True)
class _Table:
    """Ordered family name -> DTensor at one point."""

    entries: dict

    def __getitem__(self, name) -> DTensor:
        return self.entries[name]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def items(self):
        return self.entries.items()

    def arrays(self) -> dict:
        return {k: v.components for k, v in self.entries.items()}

    def max_abs_diff(self, other) -> dict:
        return {
            k: float(np.max(np.abs(v.components - other[k].components), initial=0.0))
            for k, v in self.entries.items()
        }


class TorsionTable(_Table):
    pass


class CurvatureTable(_Table):
    pass


def _wrap(cls, arrays: dict, kinds: dict, dims) -> _Table:
    return cls({name: DTensor(kinds[name], np.asarray(arrays[name], dtype=float), dims) for name in kinds})


def _blocks(dims) -> dict:
    return {"t": dims.m, "x": dims.n, "p": dims.mn}


class _Derivs:
    """Adapted derivatives of every coefficient family at one point."""

    def __init__(self, D: NLinearConnection, pt):
        self.dims = D.dims
        jp = JetPoint.of(JetPoint.of(pt, D.dims).point())
        self.jp = jp
        self.coeffs_dual = D.at(jp)
        self.c = type(self.coeffs_dual)(*(np.asarray(a.value) for a in self.coeffs_dual))
        self.grads = jet_gradient(lambda q: tuple(D.at(q)), jp)
        n1, n2 = D.nlc.at(jp)
        self.n1 = np.asarray(n1.value)
        self.n2 = np.asarray(n2.value)
        self.br = bracket_coefficients(D.nlc, jp.point())

    def _grad(self, name):
        return np.asarray(self.grads[self.c._fields.index(name)].value)

    def t(self, name):
        return delta_t(self._grad(name), self.n1)

    def x(self, name):
        return delta_x(self._grad(name), self.n2)

    def p(self, name):
        return vertical(self._grad(name), self.dims.mn)

    def cov(self, name, kinds, direction):
        out = covariant_from_parts(
            Dual3.lift(self.c._asdict()[name]),
            Dual3.lift(self._grad(name)),
            kinds,
            self.c,
            self.n1,
            self.n2,
            direction,
        )
        return np.asarray(out.value)


def torsion_arrays(D: NLinearConnection, pt, derivs: _Derivs | None = None) -> dict:
    d = derivs or _Derivs(D, pt)
    c, br = d.c, d.br
    m, n = D.dims
    nm = D.dims.mn
    P_tp = br.B_t + c.A_pp.transpose(0, 2, 1)
    P_xp = br.B_x + c.H_pp.transpose(0, 2, 1)
    return {
        "T^c_ab": c.A_tt - c.A_tt.transpose(0, 2, 1),
        "T^k_ab": np.zeros((n, m, m)),
        "R^(f)_(r)ab": br.R_tt,
        "T^c_aj": c.H_tt,
        "T^k_aj": -c.A_xx.transpose(0, 2, 1),
        "R^(f)_(r)aj": br.R_tx,
        "P^c(j)_a(b)": c.C_tt,
        "P^k(j)_a(b)": np.zeros((n, m, nm)),
        "P^(f)(j)_(r)a(b)": P_tp,
        "T^c_ij": np.zeros((m, n, n)),
        "T^k_ij": c.H_xx - c.H_xx.transpose(0, 2, 1),
        "R^(f)_(r)ij": br.R_xx,
        "P^c(j)_i(b)": np.zeros((m, n, nm)),
        "P^k(j)_i(b)": c.C_xx,
        "P^(f)(j)_(r)i(b)": P_xp,
        "S^c(i)(j)_(a)(b)": np.zeros((m, nm, nm)),
        "S^k(i)(j)_(a)(b)": np.zeros((n, nm, nm)),
        "S^(f)(i)(j)_(r)(a)(b)": -(c.C_pp - c.C_pp.transpose(0, 2, 1)),
    }


def torsion_table(D: NLinearConnection, pt) -> TorsionTable:
    return _wrap(TorsionTable, torsion_arrays(D, pt), TORSION_KINDS, D.dims)


def curvature_arrays(D: NLinearConnection, pt, derivs: _Derivs | None = None) -> dict:
    d = derivs or _Derivs(D, pt)
    c, br = d.c, d.br
    tors = torsion_arrays(D, pt, d)
    P_tp = tors["P^(f)(j)_(r)a(b)"]
    P_xp = tors["P^(f)(j)_(r)i(b)"]
    es = np.einsum
    out = {}

    # items 1-6 (transported field on T), 7-12 (on M), 13-18 (vertical).
    for z, A, H, C, kinds_c in (
        ("t", "A_tt", "H_tt", "C_tt", (TUp, TDown, PForm)),
        ("x", "A_xx", "H_xx", "C_xx", (SUp, SDown, PForm)),
    ):
        a, h, cc = getattr(c, A), getattr(c, H), getattr(c, C)
        up = "d" if z == "t" else "l"
        lo = "a" if z == "t" else "i"
        a_t, a_x, a_p = d.t(A), d.x(A), d.p(A)
        h_t, h_x, h_p = d.t(H), d.x(H), d.p(H)
        c_p = d.p(C)
        c_cov_t = d.cov(C, kinds_c, "/")  # [u, z, Q, b]
        c_cov_x = d.cov(C, kinds_c, "|")  # [u, z, Q, j]
        out[f"R^{up}_{lo}bc"] = (
            a_t - a_t.swapaxes(2, 3)
            + es("fab,dfc->dabc", a, a)
            - es("fac,dfb->dabc", a, a)
            + es("daP,Pbc->dabc", cc, br.R_tt)
        )
        out[f"R^{up}_{lo}bk"] = (
            a_x
            - h_t.swapaxes(2, 3)
            + es("fab,dfk->dabk", a, h)
            - es("fak,dfb->dabk", h, a)
            + es("daP,Pbk->dabk", cc, br.R_tx)
        )
        out[f"P^{up}(k)_{lo}b(c)"] = a_p - c_cov_t.swapaxes(2, 3) + es("daR,RbQ->dabQ", cc, P_tp)
        out[f"R^{up}_{lo}jk"] = (
            h_x - h_x.swapaxes(2, 3)
            + es("faj,dfk->dajk", h, h)
            - es("fak,dfj->dajk", h, h)
            + es("daP,Pjk->dajk", cc, br.R_xx)
        )
        out[f"P^{up}(k)_{lo}j(c)"] = h_p - c_cov_x.swapaxes(2, 3) + es("daR,RjQ->dajQ", cc, P_xp)
        out[f"S^{up}(j)(k)_{lo}(b)(c)"] = (
            c_p - c_p.swapaxes(2, 3)
            + es("faJ,dfQ->daJQ", cc, cc)
            - es("faQ,dfJ->daJQ", cc, cc)
        )

    a, h, cc = c.A_pp, c.H_pp, c.C_pp
    a_t, a_x, a_p = d.t("A_pp"), d.x("A_pp"), d.p("A_pp")
    h_t, h_x, h_p = d.t("H_pp"), d.x("H_pp"), d.p("H_pp")
    c_p = d.p("C_pp")
    kinds_cpp = (PVec, PForm, PForm)
    c_cov_t = d.cov("C_pp", kinds_cpp, "/")
    c_cov_x = d.cov("C_pp", kinds_cpp, "|")
    out["R^(d)(i)_(l)(a)bc"] = (
        a_t - a_t.swapaxes(2, 3)
        + es("LFb,FIc->LIbc", a, a)
        - es("LFc,FIb->LIbc", a, a)
        + es("LIR,Rbc->LIbc", cc, br.R_tt)
    )
    out["R^(d)(i)_(l)(a)bk"] = (
        a_x
        - h_t.swapaxes(2, 3)
        + es("LFb,FIk->LIbk", a, h)
        - es("LFk,FIb->LIbk", h, a)
        + es("LIR,Rbk->LIbk", cc, br.R_tx)
    )
    out["P^(d)(i)(k)_(l)(a)b(c)"] = a_p - c_cov_t.swapaxes(2, 3) + es("LIR,RbQ->LIbQ", cc, P_tp)
    out["R^(d)(i)_(l)(a)jk"] = (
        h_x - h_x.swapaxes(2, 3)
        + es("LFj,FIk->LIjk", h, h)
        - es("LFk,FIj->LIjk", h, h)
        + es("LIR,Rjk->LIjk", cc, br.R_xx)
    )
    out["P^(d)(i)(k)_(l)(a)j(c)"] = h_p - c_cov_x.swapaxes(2, 3) + es("LIR,RjQ->LIjQ", cc, P_xp)
    out["S^(d)(i)(j)(k)_(l)(a)(b)(c)"] = (
        c_p - c_p.swapaxes(2, 3)
        + es("LFJ,FIQ->LIJQ", cc, cc)
        - es("LFQ,FIJ->LIJQ", cc, cc)
    )
    return out


def curvature_table(D: NLinearConnection, pt) -> CurvatureTable:
    return _wrap(CurvatureTable, curvature_arrays(D, pt), CURVATURE_KINDS, D.dims)


def both_tables(D: NLinearConnection, pt) -> tuple[TorsionTable, CurvatureTable]:
    """Torsion and curvature tables sharing one derivative evaluation."""
    d = _Derivs(D, pt)
    return (
        _wrap(TorsionTable, torsion_arrays(D, pt, d), TORSION_KINDS, D.dims),
        _wrap(CurvatureTable, curvature_arrays(D, pt, d), CURVATURE_KINDS, D.dims),
    )
