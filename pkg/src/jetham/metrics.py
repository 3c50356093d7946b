"""Semi-Riemannian metrics on T and M, their Christoffel symbols and curvature.

Block fields (metrics and connection coefficients) are functions of one base
block only: ``t`` for objects on T, ``x`` for objects on M.  They are
evaluated on Dual3 vectors so the callers can differentiate through them.

Curvature convention::

    R[d, a, b, c] = d_c G^d_ab - d_b G^d_ac + G^f_ab G^d_fc - G^f_ac G^d_fb

i.e. ``R(e_c, e_b) e_a = R^d_abc e_d``, the argument order under which the
Berwald torsion and curvature tables hold verbatim.  For the round sphere
``diag(1, sin^2 x1)`` this gives ``r[0, 1, 1, 0] = +sin^2 x1`` and
``r[0, 1, 0, 1] = -sin^2 x1``.
"""

from __future__ import annotations

import numpy as np

from .bundle import CoordinateChange, Dims
from .errors import ShapeMismatch, SingularMetric
from .expr import dual
from .expr.dual import Dual3
from .expr.field import FieldArray


def embed(dims: Dims, block: str, u) -> Dual3:
    """Flat coordinate vector carrying ``u`` in ``block`` and zeros elsewhere."""
    m, n = dims
    u = Dual3.lift(u)
    if block == "t":
        return dual.concatenate([u, np.zeros(n + m * n)])
    return dual.concatenate([np.zeros(m), u, np.zeros(m * n)])


def _block_size(dims, block):
    return dims.m if block == "t" else dims.n


def _check_block(fa: FieldArray, dims, block, what):
    m, n = dims
    allowed = set(range(m)) if block == "t" else set(range(m, m + n))
    if not fa.used() <= allowed:
        raise ShapeMismatch(f"{what} may depend only on {block}")


class BlockField:
    """Array-valued function of one base block (t or x)."""

    def __init__(self, dims, block: str, fn, texts=None):
        self.dims = Dims(*dims)
        self.block = block
        self._fn = fn
        self.texts = texts

    def at(self, u) -> Dual3:
        return Dual3.lift(self._fn(Dual3.lift(u)))

    def __call__(self, pt):
        """Evaluate at a Point/JetPoint by reading the owning block."""
        u = pt.t if self.block == "t" else pt.x
        return self.at(u if isinstance(u, Dual3) else np.asarray(u))

    def values(self, u) -> np.ndarray:
        return np.asarray(self.at(np.asarray(u, dtype=float)).value)

    @staticmethod
    def from_strings(dims, block, nested, rank, what="field") -> "BlockField":
        dims = Dims(*dims)
        k = _block_size(dims, block)
        fa = FieldArray.parse(nested, dims, (k,) * rank)
        _check_block(fa, dims, block, what)
        return BlockField(dims, block, lambda u: fa.at(embed(dims, block, u)), fa.texts())

    def old_coords(self, chg: CoordinateChange, u_new):
        """Old block coordinates and block Jacobians at the image ``u_new``."""
        if self.block == "t":
            u = chg.inv_t(u_new)
            return u, chg.jac_t(u), chg.hess_t(u)
        u = chg.inv_x(u_new)
        return u, chg.jac_x(u), chg.hess_x(u)


class Metric(BlockField):
    """Symmetric, invertible block field of rank 2."""

    def at(self, u) -> Dual3:
        g = super().at(u)
        det = np.linalg.det(np.asarray(g.value))
        if not abs(det) > 1e-10:
            raise SingularMetric(f"metric on {self.block} is singular (det={det!r})")
        return g

    def check_symmetric(self, u, tol=1e-12) -> bool:
        g = self.values(u)
        return bool(np.max(np.abs(g - g.T), initial=0.0) <= tol)

    def transformed(self, chg: CoordinateChange) -> "Metric":
        """The same metric written in the tilde chart (tensor law, two lower indices)."""
        block = self.block
        inv_map = chg.inv_t if block == "t" else chg.inv_x
        inv_jac = chg.inv_jac_t if block == "t" else chg.inv_jac_x

        def fn(u_new):
            j = inv_jac(u_new)
            return dual.einsum("ca,cd,db->ab", j, Metric.at(self, inv_map(u_new)), j)

        return type(self)(self.dims, block, fn)


class TemporalMetric(Metric):
    @staticmethod
    def from_strings(dims, rows) -> "TemporalMetric":
        f = BlockField.from_strings(dims, "t", rows, 2, "temporal metric")
        return TemporalMetric(f.dims, "t", f._fn, f.texts)


class SpatialMetric(Metric):
    @staticmethod
    def from_strings(dims, rows) -> "SpatialMetric":
        f = BlockField.from_strings(dims, "x", rows, 2, "spatial metric")
        return SpatialMetric(f.dims, "x", f._fn, f.texts)


class CoefficientField(BlockField):
    """Linear connection coefficients ``G[a, b, c] = G^a_bc`` on one block."""

    def transformed(self, chg: CoordinateChange) -> "CoefficientField":
        """Tilde-chart coefficients by the inhomogeneous linear-connection law."""

        def fn(u_new):
            u, j, hess = self.old_coords(chg, u_new)
            j_inv = dual.inv(j)
            inhom = dual.einsum("de,ebc->dbc", j_inv, hess)
            return dual.einsum("ad,dbc,bf,cg->afg", j, self.at(u) - inhom, j_inv, j_inv)

        return CoefficientField(self.dims, self.block, fn)


def christoffel(metric: Metric) -> CoefficientField:
    """Levi-Civita symbols ``G^a_bc = 1/2 g^ad (d_b g_dc + d_c g_db - d_d g_bc)``."""

    def fn(u):
        g = metric.at(u)
        dg = dual.jacobian(metric.at, u)  # dg[d, c, b] = d_b g_dc
        term = dg.transpose(0, 2, 1) + dg - dg.transpose(2, 0, 1)
        return 0.5 * dual.einsum("ad,dbc->abc", dual.inv(g), term)

    return CoefficientField(metric.dims, metric.block, fn)


def riemann(coeffs) -> BlockField:
    """Curvature of linear connection coefficients (or of a metric's Christoffels)."""
    if isinstance(coeffs, Metric):
        coeffs = christoffel(coeffs)

    def fn(u):
        g = coeffs.at(u)
        dg = dual.jacobian(coeffs.at, u)  # dg[d, a, b, c] = d_c G^d_ab
        return (
            dg
            - dg.swapaxes(2, 3)
            + dual.einsum("fab,dfc->dabc", g, g)
            - dual.einsum("fac,dfb->dabc", g, g)
        )

    return BlockField(coeffs.dims, coeffs.block, fn)


class LinearConnectionCoeffs:
    """A pair of linear connections: ``chi`` on T and ``Gamma`` on M."""

    def __init__(self, temporal: CoefficientField, spatial: CoefficientField):
        self.temporal = temporal
        self.spatial = spatial
        self.dims = temporal.dims

    @staticmethod
    def from_strings(dims, chi, Gamma) -> "LinearConnectionCoeffs":
        t = BlockField.from_strings(dims, "t", chi, 3, "temporal connection")
        x = BlockField.from_strings(dims, "x", Gamma, 3, "spatial connection")
        return LinearConnectionCoeffs(
            CoefficientField(t.dims, "t", t._fn, t.texts),
            CoefficientField(x.dims, "x", x._fn, x.texts),
        )

    @staticmethod
    def from_metrics(h: TemporalMetric, phi: SpatialMetric) -> "LinearConnectionCoeffs":
        return LinearConnectionCoeffs(christoffel(h), christoffel(phi))

    @staticmethod
    def zero(dims) -> "LinearConnectionCoeffs":
        dims = Dims(*dims)
        return LinearConnectionCoeffs(
            CoefficientField(dims, "t", lambda u: np.zeros((dims.m,) * 3)),
            CoefficientField(dims, "x", lambda u: np.zeros((dims.n,) * 3)),
        )

    def transformed(self, chg: CoordinateChange) -> "LinearConnectionCoeffs":
        return LinearConnectionCoeffs(self.temporal.transformed(chg), self.spatial.transformed(chg))


__all__ = [
    "BlockField",
    "Metric",
    "TemporalMetric",
    "SpatialMetric",
    "CoefficientField",
    "LinearConnectionCoeffs",
    "christoffel",
    "riemann",
    "embed",
]
