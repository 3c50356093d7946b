"""Points, coordinate changes and distinguished tensors on the dual 1-jet bundle.

Coordinates are ordered as one flat vector ``z = (t^1..t^m, x^1..x^n, p)``
where the polymomenta are stored spatial-first: ``p_i^a`` sits at
``m + n + (i-1)*m + (a-1)``.  Paired tensor axes (PVec, PForm) use the same
flattening, ``P = i*m + a`` with zero-based ``i`` and ``a``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ShapeMismatch, SingularJacobian
from .expr import dual
from .expr.dual import Dual3
from .expr.field import FieldArray, ScalarField, as_flat, parse


class Dims(NamedTuple):
    m: int
    n: int

    @property
    def mn(self) -> int:
        return self.m * self.n

    @property
    def K(self) -> int:
        """Dimension of the total space."""
        return self.m + self.n + self.m * self.n

    def validate(self) -> "Dims":
        if self.m < 1 or self.n < 1:
            raise ShapeMismatch(f"dims must be positive, got {tuple(self)}")
        return self

    # slices of the flat coordinate vector
    @property
    def ts(self) -> slice:
        return slice(0, self.m)

    @property
    def xs(self) -> slice:
        return slice(self.m, self.m + self.n)

    @property
    def ps(self) -> slice:
        return slice(self.m + self.n, self.K)


@dataclass(frozen=True)
class Point:
    t: np.ndarray
    x: np.ndarray
    p: np.ndarray  # shape (n, m); p[i, a] = p_i^a

    def __post_init__(self):
        for name in ("t", "x", "p"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.t.ndim != 1 or self.x.ndim != 1 or self.p.shape != (len(self.x), len(self.t)):
            raise ShapeMismatch(f"inconsistent point shapes t{self.t.shape} x{self.x.shape} p{self.p.shape}")
        if not (np.all(np.isfinite(self.t)) and np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.p))):
            raise ShapeMismatch("point entries must be finite")

    @property
    def dims(self) -> Dims:
        return Dims(len(self.t), len(self.x))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.t, self.x, self.p.ravel()])

    @staticmethod
    def from_flat(dims, z) -> "Point":
        dims = Dims(*dims)
        z = np.asarray(dual.value(z), dtype=float)
        return Point(z[dims.ts], z[dims.xs], z[dims.ps].reshape(dims.n, dims.m))

    def to_dict(self) -> dict:
        return {"t": self.t.tolist(), "x": self.x.tolist(), "p": self.p.tolist()}


class JetPoint:
    """A point whose coordinates are Dual3 scalars (for nested derivatives)."""

    __slots__ = ("dims", "z")

    def __init__(self, dims, z):
        self.dims = Dims(*dims)
        self.z = Dual3.lift(z)

    @staticmethod
    def of(pt, dims=None) -> "JetPoint":
        if isinstance(pt, JetPoint):
            return pt
        if isinstance(pt, Point):
            return JetPoint(pt.dims, pt.flat())
        return JetPoint(dims, as_flat(pt, dims))

    @property
    def t(self) -> Dual3:
        return self.z[self.dims.ts]

    @property
    def x(self) -> Dual3:
        return self.z[self.dims.xs]

    @property
    def pf(self) -> Dual3:
        """Polymomenta flattened spatial-first."""
        return self.z[self.dims.ps]

    @property
    def p(self) -> Dual3:
        return self.pf.reshape(self.dims.n, self.dims.m)

    def point(self) -> Point:
        return Point.from_flat(self.dims, self.z.value)


def jet_gradient(fn, pt: JetPoint):
    """Derivatives of ``fn(JetPoint)`` along all K coordinates (last axis)."""
    dims = pt.dims
    return dual.jacobian(lambda z: fn(JetPoint(dims, z)), pt.z)


# ---------------------------------------------------------------------------
# index kinds and d-tensors

class IndexKind(enum.Enum):
    TUp = "TUp"
    TDown = "TDown"
    SUp = "SUp"
    SDown = "SDown"
    PVec = "PVec"  # X^{(a)}_{(i)}
    PForm = "PForm"  # w^{(i)}_{(a)}

    def length(self, dims) -> int:
        m, n = dims
        return {"TUp": m, "TDown": m, "SUp": n, "SDown": n}.get(self.value, m * n)

    @property
    def dual(self) -> "IndexKind":
        return _DUAL[self]


_DUAL = {
    IndexKind.TUp: IndexKind.TDown,
    IndexKind.TDown: IndexKind.TUp,
    IndexKind.SUp: IndexKind.SDown,
    IndexKind.SDown: IndexKind.SUp,
    IndexKind.PVec: IndexKind.PForm,
    IndexKind.PForm: IndexKind.PVec,
}

TUp, TDown, SUp, SDown, PVec, PForm = (
    IndexKind.TUp,
    IndexKind.TDown,
    IndexKind.SUp,
    IndexKind.SDown,
    IndexKind.PVec,
    IndexKind.PForm,
)


def kinds_shape(kinds, dims) -> tuple:
    return tuple(k.length(dims) for k in kinds)


@dataclass(frozen=True)
class DTensor:
    """Adapted components of a d-tensor at one point."""

    kinds: tuple
    components: np.ndarray
    dims: Dims

    def __post_init__(self):
        kinds = tuple(IndexKind(k) if not isinstance(k, IndexKind) else k for k in self.kinds)
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "dims", Dims(*self.dims))
        comps = np.array(dual.value(self.components), dtype=float)
        if comps.shape != kinds_shape(kinds, self.dims):
            raise ShapeMismatch(f"components {comps.shape} do not match kinds {kinds_shape(kinds, self.dims)}")
        comps.setflags(write=False)
        object.__setattr__(self, "components", comps)

    @property
    def rank(self) -> int:
        return len(self.kinds)

    def __add__(self, other: "DTensor") -> "DTensor":
        if self.kinds != other.kinds:
            raise ShapeMismatch("cannot add d-tensors of different kinds")
        return DTensor(self.kinds, self.components + other.components, self.dims)

    def __sub__(self, other: "DTensor") -> "DTensor":
        return self + other.scaled(-1.0)

    def scaled(self, c: float) -> "DTensor":
        return DTensor(self.kinds, c * self.components, self.dims)

    def tensor(self, other: "DTensor") -> "DTensor":
        comps = np.multiply.outer(self.components, other.components)
        return DTensor(self.kinds + other.kinds, comps, self.dims)

    def contract(self, i: int, j: int) -> "DTensor":
        return DTensor(*contract_kinds(self.kinds, self.components, i, j), self.dims)


def contract_kinds(kinds, comps, i: int, j: int):
    """Trace over axes ``i`` and ``j``; only dual kind pairs may be contracted."""
    kinds = tuple(kinds)
    if kinds[i].dual is not kinds[j]:
        raise ShapeMismatch(f"cannot contract {kinds[i].value} with {kinds[j].value}")
    out = dual.einsum(_trace_spec(len(kinds), i, j), comps) if isinstance(comps, Dual3) else np.trace(comps, axis1=i, axis2=j)
    rest = tuple(k for a, k in enumerate(kinds) if a not in (i, j))
    return rest, out


def _trace_spec(rank, i, j):
    letters = "abcdefghijklmnopqrstuvwxy"
    sub = list(letters[:rank])
    sub[j] = sub[i]
    out = "".join(s for a, s in enumerate(sub) if a not in (i, j))
    return "".join(sub) + "->" + out


def transform_components(comps, kinds, factors: dict):
    """Contract every axis with its kind's new-from-old factor matrix.

    ``factors[kind][out, in]``; works on ndarrays and Dual3 alike.
    """
    letters = "abcdefghijklmnopqrstuvwxy"
    rank = len(kinds)
    out = comps
    for k, kind in enumerate(kinds):
        sub_in = letters[:rank]
        sub_out = sub_in[:k] + "z" + sub_in[k + 1:]
        spec = f"z{sub_in[k]},{sub_in}->{sub_out}"
        mat = factors[IndexKind(kind)]
        if isinstance(out, Dual3) or isinstance(mat, Dual3):
            out = dual.einsum(spec, mat, out)
        else:
            out = np.einsum(spec, mat, out)
    return out


# ---------------------------------------------------------------------------
# coordinate changes

def _det_check(mat, what):
    d = np.linalg.det(np.asarray(dual.value(mat)))
    if not np.all(np.abs(d) > 1e-10):
        raise SingularJacobian(f"{what} Jacobian is singular (det={float(np.min(np.abs(d)))!r})")


class CoordinateChange:
    """Product-form change ``t~(t), x~(x)`` with explicit inverse maps."""

    def __init__(self, dims, tmap, xmap, tinv, xinv, name: str = "change"):
        self.dims = Dims(*dims)
        m, n = self.dims
        self.tmap = _as_fields(tmap, self.dims, (m,))
        self.xmap = _as_fields(xmap, self.dims, (n,))
        self.tinv = _as_fields(tinv, self.dims, (m,))
        self.xinv = _as_fields(xinv, self.dims, (n,))
        self.name = name
        for label, fa, allowed in (
            ("t map", self.tmap, range(0, m)),
            ("x map", self.xmap, range(m, m + n)),
            ("inverse t map", self.tinv, range(0, m)),
            ("inverse x map", self.xinv, range(m, m + n)),
        ):
            if not fa.used() <= set(allowed):
                raise ShapeMismatch(f"{label} of {name} must depend only on its own block")

    @staticmethod
    def from_strings(dims, t, x, t_inverse, x_inverse, name="change") -> "CoordinateChange":
        return CoordinateChange(dims, t, x, t_inverse, x_inverse, name)

    @staticmethod
    def identity(dims) -> "CoordinateChange":
        m, n = dims
        ts = [f"t[{a + 1}]" for a in range(m)]
        xs = [f"x[{i + 1}]" for i in range(n)]
        return CoordinateChange(dims, ts, xs, ts, xs, "identity")

    @staticmethod
    def affine(dims, Lt, ct, Lx, cx, name="affine") -> "CoordinateChange":
        """``t~ = Lt t + ct``, ``x~ = Lx x + cx`` with exact-decimal inverses."""
        Lt, ct, Lx, cx = (np.asarray(v, dtype=float) for v in (Lt, ct, Lx, cx))
        Lti, Lxi = np.linalg.inv(Lt), np.linalg.inv(Lx)
        fwd_t = _affine_strings(Lt, ct, "t")
        fwd_x = _affine_strings(Lx, cx, "x")
        inv_t = _affine_strings(Lti, -Lti @ ct, "t")
        inv_x = _affine_strings(Lxi, -Lxi @ cx, "x")
        return CoordinateChange(dims, fwd_t, fwd_x, inv_t, inv_x, name)

    def inverse(self) -> "CoordinateChange":
        return CoordinateChange(self.dims, self.tinv, self.xinv, self.tmap, self.xmap, self.name + "^-1")

    def spec(self) -> dict:
        return {
            "name": self.name,
            "t": self.tmap.texts(),
            "x": self.xmap.texts(),
            "t_inverse": self.tinv.texts(),
            "x_inverse": self.xinv.texts(),
        }

    # block maps on Dual3 vectors ----------------------------------------
    def _embed_t(self, t):
        m, n = self.dims
        return dual.concatenate([Dual3.lift(t), np.zeros(n + m * n)])

    def _embed_x(self, x):
        m, n = self.dims
        return dual.concatenate([np.zeros(m), Dual3.lift(x), np.zeros(m * n)])

    def fwd_t(self, t):
        return self.tmap.at(self._embed_t(t))

    def fwd_x(self, x):
        return self.xmap.at(self._embed_x(x))

    def inv_t(self, tt):
        return self.tinv.at(self._embed_t(tt))

    def inv_x(self, xx):
        return self.xinv.at(self._embed_x(xx))

    def jac_t(self, t):
        """``[a, b] = dt~^a/dt^b``."""
        return dual.jacobian(self.fwd_t, Dual3.lift(t))

    def jac_x(self, x):
        return dual.jacobian(self.fwd_x, Dual3.lift(x))

    def hess_t(self, t):
        """``[a, b, c] = d2 t~^a / dt^b dt^c``."""
        return dual.jacobian(self.jac_t, Dual3.lift(t))

    def hess_x(self, x):
        return dual.jacobian(self.jac_x, Dual3.lift(x))

    def inv_jac_t(self, tt):
        return dual.jacobian(self.inv_t, Dual3.lift(tt))

    def inv_jac_x(self, xx):
        return dual.jacobian(self.inv_x, Dual3.lift(xx))

    def inv_hess_t(self, tt):
        return dual.jacobian(self.inv_jac_t, Dual3.lift(tt))

    def inv_hess_x(self, xx):
        """``[j, r, s] = d2 x^j / dx~^r dx~^s``."""
        return dual.jacobian(self.inv_jac_x, Dual3.lift(xx))

    # points --------------------------------------------------------------
    def push(self, pt) -> JetPoint:
        """Image of a (jet) point; polymomenta follow the induced law."""
        jp = JetPoint.of(pt, self.dims)
        m, n = self.dims
        jt = self.jac_t(jp.t)
        jx = self.jac_x(jp.x)
        _det_check(jt, "temporal")
        _det_check(jx, "spatial")
        jx_inv = dual.inv(jx)
        p_new = dual.einsum("ji,ab,jb->ia", jx_inv, jt, jp.p)
        z = dual.concatenate([self.fwd_t(jp.t), self.fwd_x(jp.x), p_new.reshape(m * n)])
        return JetPoint(self.dims, z)

    def pull(self, pt) -> JetPoint:
        return self.inverse().push(pt)

    def factors(self, pt) -> dict:
        """New-from-old factor matrices per IndexKind at ``pt`` (jet-aware)."""
        jp = JetPoint.of(pt, self.dims)
        jt = self.jac_t(jp.t)
        jx = self.jac_x(jp.x)
        _det_check(jt, "temporal")
        _det_check(jx, "spatial")
        return kind_factors(jt, jx)


def kind_factors(jt, jx) -> dict:
    """Per-kind new-from-old factors from the block Jacobians dt~/dt, dx~/dx."""
    jt_inv = dual.inv(jt)
    jx_inv = dual.inv(jx)
    m = jt.shape[0]
    n = jx.shape[0]
    # PVec: X~[(i,a)] = dx^j/dx~^i dt~^a/dt^b X[(j,b)]
    pvec = dual.einsum("ji,ab->iajb", jx_inv, jt).reshape(n * m, n * m)
    # PForm: w~[(j,b)] = dx~^j/dx^i dt^a/dt~^b w[(i,a)]
    pform = dual.einsum("ji,ab->jbia", jx, jt_inv).reshape(n * m, n * m)
    return {
        TUp: jt,
        TDown: jt_inv.T,
        SUp: jx,
        SDown: jx_inv.T,
        PVec: pvec,
        PForm: pform,
    }


def _as_fields(spec, dims, shape) -> FieldArray:
    if isinstance(spec, FieldArray):
        return spec
    return FieldArray.parse(list(spec), dims, shape)


def _fmt(v: float) -> str:
    return repr(float(v)) if v >= 0 else f"({float(v)!r})"


def _affine_strings(L, c, block):
    out = []
    for a in range(L.shape[0]):
        terms = [f"{_fmt(L[a, b])}*{block}[{b + 1}]" for b in range(L.shape[1]) if L[a, b] != 0]
        terms.append(_fmt(c[a]))
        out.append(" + ".join(terms))
    return out


def push_point(chg: CoordinateChange, pt: Point) -> Point:
    return chg.push(pt).point()


def _numeric_factors(chg: CoordinateChange, pt) -> dict:
    return {k: np.asarray(dual.value(v)) for k, v in chg.factors(pt).items()}


adapted_jacobians = _numeric_factors


def natural_frame_jacobians(chg: CoordinateChange, pt) -> np.ndarray:
    """Full matrix ``[J, I] = dz~^J / dz^I`` (includes the mixed p-blocks)."""
    jp = JetPoint.of(pt, chg.dims)
    z = Dual3.lift(np.asarray(jp.z.value))
    return np.asarray(dual.jacobian(lambda y: chg.push(JetPoint(chg.dims, y)).z, z).value)


def dtensor_transform(T: DTensor, chg: CoordinateChange, pt, adapted_jacobians=None) -> DTensor:
    if T.dims != chg.dims:
        raise ShapeMismatch("tensor and change have different dims")
    factors = adapted_jacobians if adapted_jacobians is not None else _numeric_factors(chg, pt)
    return DTensor(T.kinds, transform_components(T.components, T.kinds, factors), T.dims)


# ---------------------------------------------------------------------------
# d-tensor examples

def liouville_hamilton(pt) -> DTensor:
    pt = pt if isinstance(pt, Point) else JetPoint.of(pt).point()
    return DTensor((PVec,), pt.p.ravel(), pt.dims)


def fundamental_metric(H: ScalarField, pt) -> DTensor:
    """``G[(i,a),(j,b)] = 1/2 d2H / dp_i^a dp_j^b``."""
    jp = JetPoint.of(pt, H.dims)
    dims = jp.dims

    def hp(z):
        return dual.jacobian(lambda q: Dual3.lift(H.at(dual.concatenate([z[: dims.m + dims.n], q]))), z[dims.ps])

    z = Dual3.lift(np.asarray(jp.z.value))
    hess = dual.jacobian(lambda q: hp(dual.concatenate([z[: dims.m + dims.n], q])), z[dims.ps])
    return DTensor((PForm, PForm), 0.5 * np.asarray(hess.value), dims)


def _metric_values(metric, arg):
    if hasattr(metric, "at"):
        return metric.at(arg)
    return Dual3.lift(np.asarray(metric, dtype=float))


def polymomentum_hamilton_tensor(phi, pt) -> DTensor:
    """``H^{(a)}_{(i)jk} = phi_ij p_k^a`` with kinds (PVec, SDown, SDown)."""
    jp = JetPoint.of(pt)
    dims = jp.dims
    g = _metric_values(phi, jp.x)
    comps = dual.einsum("ij,ka->iajk", g, jp.p).reshape(dims.mn, dims.n, dims.n)
    return DTensor((PVec, SDown, SDown), comps.value, dims)


def h_normalization_tensor(h, pt) -> DTensor:
    """``J^{(i)}_{(a)bj} = h_ab delta^i_j`` with kinds (PForm, TDown, SDown)."""
    jp = JetPoint.of(pt)
    dims = jp.dims
    g = _metric_values(h, jp.t)
    comps = dual.einsum("ab,ij->iabj", g, np.eye(dims.n)).reshape(dims.mn, dims.m, dims.n)
    return DTensor((PForm, TDown, SDown), comps.value, dims)


__all__ = [
    "Dims",
    "Point",
    "JetPoint",
    "IndexKind",
    "TUp",
    "TDown",
    "SUp",
    "SDown",
    "PVec",
    "PForm",
    "DTensor",
    "CoordinateChange",
    "push_point",
    "natural_frame_jacobians",
    "adapted_jacobians",
    "dtensor_transform",
    "transform_components",
    "kind_factors",
    "liouville_hamilton",
    "fundamental_metric",
    "polymomentum_hamilton_tensor",
    "h_normalization_tensor",
    "jet_gradient",
    "parse",
]
