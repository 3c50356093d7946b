"""Truncated hyper-dual numbers carrying exact mixed partials up to order 3.

A :class:`Dual3` is a polynomial in up to three nilpotent units e1, e2, e3
with ``ek**2 == 0``.  Each coefficient is stored under the bitmask of the
units it multiplies, so the coefficient of ``e1*e3`` lives under ``0b101``.
Seeding a coordinate with one unit per requested direction and reading back
the coefficient of the full product yields the mixed partial exactly.

Coefficients are numpy arrays of a common shape, which lets whole coefficient
families (Christoffel symbols, connection arrays) be differentiated at once.
Units are allocated on demand by :func:`directional`; nesting deeper than
three directions raises :class:`OrderTooHigh`.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError, OrderTooHigh

MAX_UNITS = 3


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


class Dual3:
    """Array-valued truncated hyper-dual number."""

    __slots__ = ("parts",)
    __array_ufunc__ = None  # make ndarray op Dual3 defer to the reflected method

    def __init__(self, parts: dict):
        self.parts = parts

    # construction -----------------------------------------------------
    @staticmethod
    def lift(v) -> "Dual3":
        if isinstance(v, Dual3):
            return v
        return Dual3({0: np.asarray(v, dtype=float)})

    @staticmethod
    def zeros(shape) -> "Dual3":
        return Dual3({0: np.zeros(shape)})

    # inspection -------------------------------------------------------
    @property
    def value(self) -> np.ndarray:
        return self.parts[0]

    @property
    def units(self) -> int:
        mask = 0
        for m in self.parts:
            mask |= m
        return mask

    @property
    def shape(self) -> tuple:
        part = self.parts.get(0)
        if part is None:
            part = next(iter(self.parts.values()))
        return np.shape(part)

    @property
    def ndim(self) -> int:
        return len(self.shape)

    def __len__(self):
        return self.shape[0]

    def coefficient(self, mask: int) -> np.ndarray:
        """Coefficient of the unit product ``mask`` (zeros if absent)."""
        part = self.parts.get(mask)
        return np.zeros(self.shape) if part is None else part

    def __repr__(self):
        body = ", ".join(f"{m:03b}: {np.array2string(np.asarray(a))}" for m, a in sorted(self.parts.items()))
        return f"Dual3({{{body}}})"

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = Dual3.lift(other)
        sa, sb = self.shape, other.shape
        shape = sa if sa == sb else np.broadcast_shapes(sa, sb)
        out = {}
        for m in self.parts.keys() | other.parts.keys():
            a = self.parts.get(m)
            b = other.parts.get(m)
            if a is None:
                out[m] = b if sb == shape else np.broadcast_to(b, shape)
            elif b is None:
                out[m] = a if sa == shape else np.broadcast_to(a, shape)
            else:
                out[m] = a + b
        return Dual3(out)

    __radd__ = __add__

    def __neg__(self):
        return Dual3({m: -a for m, a in self.parts.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-Dual3.lift(other))

    def __rsub__(self, other):
        return Dual3.lift(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Dual3):
            c = np.asarray(other, dtype=float)
            return Dual3({m: a * c for m, a in self.parts.items()})
        out = {}
        for ma, a in self.parts.items():
            for mb, b in other.parts.items():
                if ma & mb:
                    continue
                m = ma | mb
                prod = a * b
                out[m] = out[m] + prod if m in out else prod
        return Dual3(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Dual3):
            c = np.asarray(other, dtype=float)
            if np.any(c == 0):
                raise DomainError("division", 0.0)
            return Dual3({m: a / c for m, a in self.parts.items()})
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return Dual3.lift(other) * self.reciprocal()

    def __pow__(self, exponent):
        if isinstance(exponent, Dual3):
            if exponent.units == 0:
                return self._powc(exponent.value)
            return exp(exponent * log(self))
        return self._powc(exponent)

    def __rpow__(self, base):
        return Dual3.lift(base) ** self

    # elementwise function application ----------------------------------
    def apply(self, derivs) -> "Dual3":
        """Compose with a scalar function given by its derivative list.

        ``derivs(v, k)`` returns ``[f(v), f'(v), ..., f^(k)(v)]``.
        """
        u = _popcount(self.units)
        ds = derivs(self.parts[0], u)
        out = Dual3({0: np.asarray(ds[0], dtype=float)})
        if u == 0:
            return out
        h = Dual3({m: a for m, a in self.parts.items() if m})
        hk = h
        for k in range(1, u + 1):
            out = out + hk * (np.asarray(ds[k], dtype=float) / math.factorial(k))
            if k < u:
                hk = hk * h
        return out

    def reciprocal(self) -> "Dual3":
        def d(v, k):
            if np.any(v == 0):
                raise DomainError("division", _first(v, v == 0))
            r = 1.0 / v
            return [r, -r * r, 2 * r**3, -6 * r**4][: k + 1]

        return self.apply(d)

    def _powc(self, c) -> "Dual3":
        c = float(np.asarray(c))
        if c.is_integer():
            n = int(c)

            def d(v, k):
                out = []
                ff = 1.0
                for j in range(k + 1):
                    if ff == 0.0:
                        out.append(np.zeros_like(v, dtype=float))
                    else:
                        if n - j < 0 and np.any(v == 0):
                            raise DomainError("power", _first(v, v == 0))
                        out.append(ff * np.power(np.asarray(v, dtype=float), n - j))
                    ff *= n - j
                return out

            return self.apply(d)

        def d(v, k):
            bad = v < 0 if k == 0 and c > 0 else v <= 0
            if np.any(bad):
                raise DomainError("power", _first(v, bad))
            out = []
            ff = 1.0
            for j in range(k + 1):
                out.append(ff * np.power(v, c - j))
                ff *= c - j
            return out

        return self.apply(d)

    # array manipulation -------------------------------------------------
    def __getitem__(self, idx):
        return Dual3({m: a[idx] for m, a in self.parts.items()})

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Dual3({m: np.reshape(a, shape) for m, a in self.parts.items()})

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return Dual3({m: np.transpose(a, axes or None) for m, a in self.parts.items()})

    @property
    def T(self):
        return self.transpose()

    def swapaxes(self, a1, a2):
        return Dual3({m: np.swapaxes(a, a1, a2) for m, a in self.parts.items()})

    def sum(self, axis=None):
        return Dual3({m: np.sum(a, axis=axis) for m, a in self.parts.items()})


def _first(v, mask):
    v = np.asarray(v)
    if v.ndim == 0:
        return float(v)
    return float(v[mask].flat[0])


# ---------------------------------------------------------------------------
# elementwise functions

def _fn(name, derivs):
    def f(x):
        if isinstance(x, Dual3):
            return x.apply(derivs)
        return derivs(np.asarray(x, dtype=float), 0)[0]

    f.__name__ = name
    return f


def _sin(v, k):
    s, c = np.sin(v), np.cos(v)
    return [s, c, -s, -c][: k + 1]


def _cos(v, k):
    s, c = np.sin(v), np.cos(v)
    return [c, -s, -c, s][: k + 1]


def _tan(v, k):
    if np.any(np.cos(v) == 0):
        raise DomainError("tan", _first(v, np.cos(v) == 0))
    t = np.tan(v)
    s2 = 1 + t * t
    return [t, s2, 2 * t * s2, s2 * (2 + 6 * t * t)][: k + 1]


def _exp(v, k):
    e = np.exp(v)
    return [e] * (k + 1)


def _log(v, k):
    if np.any(v <= 0):
        raise DomainError("log", _first(v, v <= 0))
    r = 1.0 / v
    return [np.log(v), r, -r * r, 2 * r**3][: k + 1]


def _sqrt(v, k):
    bad = v < 0 if k == 0 else v <= 0
    if np.any(bad):
        raise DomainError("sqrt", _first(v, bad))
    s = np.sqrt(v)
    if k == 0:
        return [s]
    return [s, 0.5 / s, -0.25 / s**3, 0.375 / s**5][: k + 1]


def _sinh(v, k):
    s, c = np.sinh(v), np.cosh(v)
    return [s, c, s, c][: k + 1]


def _cosh(v, k):
    s, c = np.sinh(v), np.cosh(v)
    return [c, s, c, s][: k + 1]


sin = _fn("sin", _sin)
cos = _fn("cos", _cos)
tan = _fn("tan", _tan)
exp = _fn("exp", _exp)
log = _fn("log", _log)
sqrt = _fn("sqrt", _sqrt)
sinh = _fn("sinh", _sinh)
cosh = _fn("cosh", _cosh)

FUNCTIONS = {
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "sinh": sinh,
    "cosh": cosh,
}


# ---------------------------------------------------------------------------
# array algebra

def lift(v) -> Dual3:
    return Dual3.lift(v)


def value(v):
    return v.value if isinstance(v, Dual3) else np.asarray(v, dtype=float)


def einsum(subscripts: str, *operands) -> Dual3:
    """``np.einsum`` over the unit algebra (product rule on every term)."""
    ops = [Dual3.lift(o) for o in operands]
    out: dict = {}
    items = [list(o.parts.items()) for o in ops]

    def rec(i, mask, arrays):
        if i == len(ops):
            val = np.einsum(subscripts, *arrays)
            out[mask] = out[mask] + val if mask in out else val
            return
        for m, a in items[i]:
            if m & mask:
                continue
            rec(i + 1, mask | m, arrays + [a])

    rec(0, 0, [])
    return Dual3(out)


def matmul(a, b) -> Dual3:
    return einsum("...ij,...jk->...ik", a, b)


def inv(mat) -> Dual3:
    """Matrix inverse over the last two axes.

    Raises ``numpy.linalg.LinAlgError`` for a singular value part.
    """
    mat = Dual3.lift(mat)
    m0inv = np.linalg.inv(mat.parts[0])
    u = _popcount(mat.units)
    out = Dual3({0: m0inv})
    if u == 0:
        return out
    h = Dual3({m: a for m, a in mat.parts.items() if m})
    step = -einsum("...ij,...jk->...ik", m0inv, h)
    term = out
    for _ in range(u):
        term = matmul(step, term)
        out = out + term
    return out


def stack(items, axis=0) -> Dual3:
    ds = [Dual3.lift(x) for x in items]
    shape = np.broadcast_shapes(*(d.shape for d in ds))
    masks = set()
    for d in ds:
        masks |= d.parts.keys()
    out = {}
    for m in masks:
        out[m] = np.stack(
            [np.broadcast_to(d.parts[m], shape) if m in d.parts else np.zeros(shape) for d in ds],
            axis=axis,
        )
    return Dual3(out)


def concatenate(items, axis=0) -> Dual3:
    ds = [Dual3.lift(x) for x in items]
    masks = set()
    for d in ds:
        masks |= d.parts.keys()
    return Dual3({m: np.concatenate([d.coefficient(m) for d in ds], axis=axis) for m in masks})


def from_nested(nested) -> Dual3:
    """Build an array Dual3 from nested lists of scalar Dual3 or numbers."""
    if isinstance(nested, (list, tuple)):
        return stack([from_nested(x) for x in nested])
    return Dual3.lift(nested)


def scatter(shape, entries) -> Dual3:
    """Array Dual3 of ``shape`` that is zero except at ``{index: scalar}``."""
    out = {0: np.zeros(shape)}
    for idx, v in entries.items():
        v = Dual3.lift(v)
        for m, a in v.parts.items():
            if m not in out:
                out[m] = np.zeros(shape)
            out[m][idx] = a
    return Dual3(out)


# ---------------------------------------------------------------------------
# differentiation

def _leaves(tree):
    if isinstance(tree, Dual3):
        yield tree
    elif isinstance(tree, dict):
        for v in tree.values():
            yield from _leaves(v)
    elif isinstance(tree, (list, tuple)):
        for v in tree:
            yield from _leaves(v)


def tree_map(fn, tree):
    if isinstance(tree, Dual3):
        return fn(tree)
    if isinstance(tree, dict):
        return {k: tree_map(fn, v) for k, v in tree.items()}
    if isinstance(tree, tuple) and hasattr(tree, "_fields"):
        return type(tree)(*(tree_map(fn, v) for v in tree))
    if isinstance(tree, (list, tuple)):
        return type(tree)(tree_map(fn, v) for v in tree)
    return fn(Dual3.lift(tree))


def tree_stack(trees, axis=-1):
    first = trees[0]
    if isinstance(first, Dual3) or not isinstance(first, (dict, list, tuple)):
        return stack(trees, axis=axis)
    if isinstance(first, dict):
        return {k: tree_stack([t[k] for t in trees], axis) for k in first}
    if isinstance(first, tuple) and hasattr(first, "_fields"):
        return type(first)(*(tree_stack([t[i] for t in trees], axis) for i in range(len(first))))
    return type(first)(tree_stack([t[i] for t in trees], axis) for i in range(len(first)))


def free_unit(*trees) -> int:
    """Lowest unit bit not used by any leaf of ``trees``."""
    used = 0
    for leaf in _leaves(trees):
        used |= leaf.units
    for b in range(MAX_UNITS):
        if not used & (1 << b):
            return 1 << b
    raise OrderTooHigh(f"differentiation nested deeper than {MAX_UNITS} directions")


def seed(x: Dual3, unit: int, direction) -> Dual3:
    parts = dict(x.parts)
    parts[unit] = np.broadcast_to(np.asarray(direction, dtype=float), x.shape)
    return Dual3(parts)


def take(tree, unit: int):
    """Coefficient of ``unit`` in every leaf, with ``unit`` removed."""

    def one(d: Dual3) -> Dual3:
        parts = {m ^ unit: a for m, a in d.parts.items() if m & unit}
        if 0 not in parts:
            parts[0] = np.zeros(d.shape)
            for m in list(parts):
                if m:
                    parts[m] = np.broadcast_to(parts[m], d.shape)
        return Dual3(parts)

    return tree_map(one, tree)


def directional(fn, x: Dual3, direction):
    """Derivative of ``fn`` at ``x`` along ``direction`` (exact, forward mode)."""
    x = Dual3.lift(x)
    unit = free_unit(x)
    return take(fn(seed(x, unit, direction)), unit)


def jacobian(fn, x: Dual3):
    """Stack of directional derivatives along every basis vector of 1-D ``x``.

    The derivative index is appended as the last axis of each output leaf.
    """
    x = Dual3.lift(x)
    k = x.shape[0]
    eye = np.eye(k)
    return tree_stack([directional(fn, x, eye[j]) for j in range(k)], axis=-1)
