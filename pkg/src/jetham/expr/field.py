"""Scalar fields over the coordinates (t, x, p) and their exact partials."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from ..errors import OrderTooHigh, ShapeMismatch
from . import dual
from .dual import Dual3
from .parser import Const, Node, coordinate_name, parse_ast, parse_coordinate


def n_coords(dims) -> int:
    m, n = dims
    return m + n + n * m


def as_flat(pt, dims=None):
    """Flat coordinate vector of a point-like object.

    Accepts a ``Point`` / ``JetPoint`` (anything with ``flat()`` or ``z``),
    a Dual3 vector, or an array.
    """
    if hasattr(pt, "z"):
        z = pt.z
    elif hasattr(pt, "flat") and callable(pt.flat):
        z = pt.flat()
    else:
        z = pt
    if dims is not None and len(z) != n_coords(dims):
        raise ShapeMismatch(f"point has {len(z)} coordinates, dims {tuple(dims)} need {n_coords(dims)}")
    return z


def components(z) -> list:
    """Scalar components of a flat coordinate vector (Dual3 or array)."""
    if isinstance(z, Dual3):
        if z.units == 0:
            return [float(v) for v in z.value]
        return [z[k] for k in range(len(z))]
    return [float(v) for v in np.asarray(z, dtype=float)]


@dataclass(frozen=True)
class ScalarField:
    """A parsed expression bound to bundle dimensions ``(m, n)``."""

    expression: Node
    dims: tuple
    used: frozenset = dc_field(default=frozenset())

    @staticmethod
    def of(node: Node, dims) -> "ScalarField":
        return ScalarField(node, tuple(dims), frozenset(node.coords()))

    @property
    def text(self) -> str:
        return self.expression.text()

    @property
    def is_zero(self) -> bool:
        return isinstance(self.expression, Const) and self.expression.value == 0.0

    def at(self, z):
        """Evaluate at a flat coordinate vector; Dual3 in, Dual3 out."""
        return self.expression.ev(components(z) if not isinstance(z, list) else z)

    def __call__(self, pt):
        return self.at(as_flat(pt, self.dims))

    def substitute(self, mapping: dict) -> "ScalarField":
        """Replace coordinate references (by flat index) with AST nodes."""
        return ScalarField.of(self.expression.substitute(mapping), self.dims)

    def __str__(self):
        return self.text


def parse(text: str, dims) -> ScalarField:
    return ScalarField.of(parse_ast(text, tuple(dims)), tuple(dims))


def pretty(f: ScalarField) -> str:
    return f.text


def evaluate(f: ScalarField, pt) -> float:
    z = as_flat(pt, f.dims)
    out = f.at(np.asarray(dual.value(z), dtype=float))
    return float(dual.value(out))


def partial(f: ScalarField, coords, pt) -> float:
    """Exact mixed partial of ``f`` along up to three coordinates."""
    coords = list(coords)
    if len(coords) > dual.MAX_UNITS:
        raise OrderTooHigh(f"order {len(coords)} exceeds {dual.MAX_UNITS}")
    flats = [c if isinstance(c, (int, np.integer)) else parse_coordinate(c, f.dims) for c in coords]
    z = Dual3.lift(np.asarray(dual.value(as_flat(pt, f.dims)), dtype=float))
    k = len(z)

    def nest(level):
        if level == len(flats):
            return lambda y: Dual3.lift(f.at(y))
        inner = nest(level + 1)
        e = np.zeros(k)
        e[flats[level]] = 1.0
        return lambda y: dual.directional(inner, y, e)

    return float(nest(0)(z).value)


def gradient(f: ScalarField, pt) -> np.ndarray:
    z = Dual3.lift(np.asarray(dual.value(as_flat(pt, f.dims)), dtype=float))
    return dual.jacobian(lambda y: Dual3.lift(f.at(y)), z).value


class FieldArray:
    """Dense array of ScalarFields evaluated together.

    Zero entries are skipped at evaluation time, so sparse coefficient
    families stay cheap.
    """

    def __init__(self, fields: np.ndarray, dims):
        self.fields = fields
        self.dims = tuple(dims)
        self.shape = fields.shape
        self._live = [
            (idx, f) for idx, f in np.ndenumerate(fields) if not f.is_zero
        ]

    @staticmethod
    def parse(nested, dims, shape=None) -> "FieldArray":
        arr = np.asarray(nested, dtype=object)
        if shape is not None and arr.shape != tuple(shape):
            raise ShapeMismatch(f"expected shape {tuple(shape)}, got {arr.shape}")
        out = np.empty(arr.shape, dtype=object)
        for idx, text in np.ndenumerate(arr):
            out[idx] = text if isinstance(text, ScalarField) else parse(str(text), dims)
        return FieldArray(out, dims)

    @staticmethod
    def zeros(shape, dims) -> "FieldArray":
        out = np.empty(shape, dtype=object)
        zero = ScalarField.of(Const(0.0), dims)
        for idx in np.ndindex(*shape):
            out[idx] = zero
        return FieldArray(out, dims)

    def at(self, z) -> Dual3:
        comps = components(z)
        return dual.scatter(self.shape, {idx: f.at(comps) for idx, f in self._live})

    def __call__(self, pt) -> Dual3:
        return self.at(as_flat(pt, self.dims))

    def texts(self):
        out = np.empty(self.shape, dtype=object)
        for idx, f in np.ndenumerate(self.fields):
            out[idx] = f.text
        return out.tolist()

    def used(self) -> set:
        s = set()
        for _, f in self._live:
            s |= f.used
        return s

    def with_entry(self, idx, f: ScalarField) -> "FieldArray":
        arr = self.fields.copy()
        arr[idx] = f
        return FieldArray(arr, self.dims)


__all__ = [
    "ScalarField",
    "FieldArray",
    "parse",
    "pretty",
    "evaluate",
    "partial",
    "gradient",
    "coordinate_name",
    "n_coords",
    "as_flat",
]
