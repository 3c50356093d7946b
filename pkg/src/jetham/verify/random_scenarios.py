"""Seeded random scenario documents (analytic metrics, custom connections, field corpus)."""

from __future__ import annotations

import numpy as np

from ..bundle import Dims
from ..connections.nlinear import FAMILIES, nested_shape
from ..expr.parser import coordinate_name


def _c(v: float) -> str:
    v = round(float(v), 3)
    return repr(v) if v >= 0 else f"({v!r})"


def _block_names(dims, block):
    m, n = dims
    return [f"{block}[{k + 1}]" for k in range(m if block == "t" else n)]


def random_metric(dims, block: str, rng) -> list:
    """Symmetric, diagonally dominant (hence definite) analytic metric on one block."""
    names = _block_names(dims, block)
    k = len(names)
    g = [[None] * k for _ in range(k)]
    for a in range(k):
        u = names[rng.integers(k)]
        g[a][a] = f"{_c(1.5 + rng.uniform(0, 1))} + {_c(rng.uniform(0.1, 0.4))}*sin({_c(rng.uniform(0.5, 1.5))}*{u})"
        for b in range(a + 1, k):
            w = names[rng.integers(k)]
            s = f"{_c(rng.uniform(-0.15, 0.15))}*cos({w})"
            g[a][b] = g[b][a] = s
    return g


def _monomial(dims, rng) -> str:
    K = dims.K
    i, j = rng.integers(K, size=2)
    ci, cj = coordinate_name(int(i), dims), coordinate_name(int(j), dims)
    form = rng.integers(4)
    if form == 0:
        return f"{ci}*{cj}"
    if form == 1:
        return f"sin({ci})"
    if form == 2:
        return f"cos({ci} - {cj})"
    return f"exp({_c(0.3)}*{ci})"


def random_expression(dims, rng, scale: float = 0.3, terms: int = 2) -> str:
    dims = Dims(*dims)
    parts = [_c(rng.uniform(-scale, scale))]
    for _ in range(terms):
        parts.append(f"{_c(rng.uniform(-scale, scale))}*{_monomial(dims, rng)}")
    return " + ".join(parts)


def _nested(shape, dims, rng, density, scale):
    arr = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        arr[idx] = random_expression(dims, rng, scale) if rng.uniform() < density else "0"
    return arr.tolist()


def random_point(dims, rng, radius: float = 0.8) -> dict:
    m, n = dims
    return {
        "t": np.round(rng.uniform(-radius, radius, m), 4).tolist(),
        "x": np.round(rng.uniform(-radius, radius, n), 4).tolist(),
        "p": np.round(rng.uniform(-radius, radius, (n, m)), 4).tolist(),
    }


def random_metric_scenario(dims, seed: int, points: int = 10) -> dict:
    """Canonical Berwald scenario over a random analytic metric pair."""
    dims = Dims(*dims)
    rng = np.random.default_rng([seed, 1])
    return {
        "dims": list(dims),
        "temporal_metric": random_metric(dims, "t", rng),
        "spatial_metric": random_metric(dims, "x", rng),
        "connection_mode": "canonical-berwald",
        "eval_points": [random_point(dims, rng) for _ in range(points)],
        "seed": seed,
    }


def random_connection_scenario(dims, seed: int, points: int = 1, density: float = 0.35) -> dict:
    """Custom scenario: random N and all nine coefficient families (C-families included)."""
    dims = Dims(*dims)
    m, n = dims
    rng = np.random.default_rng([seed, 2])
    doc = random_metric_scenario(dims, seed, points)
    doc["connection_mode"] = "custom"
    doc["nonlinear_connection"] = {
        "N1": _nested((n, m, m), dims, rng, density, 0.3),
        "N2": _nested((n, m, n), dims, rng, density, 0.3),
    }
    fams = {}
    for name in FAMILIES:
        fams[name] = _nested(nested_shape(name, dims), dims, rng, density, 0.3)
    # guarantee the C-families are exercised
    for name in ("C_tt", "C_xx", "C_pp"):
        shape = nested_shape(name, dims)
        arr = np.array(fams[name], dtype=object)
        arr[(0,) * len(shape)] = random_expression(dims, rng)
        fams[name] = arr.tolist()
    doc["n_linear_connection"] = fams
    return doc


SCENARIO_DIMS = ((1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (2, 3), (3, 2), (3, 3))


def random_field_corpus(dims, seed: int, count: int = 12) -> list[str]:
    """Expression strings mixing polynomials, trig, exp, log, sqrt and powers."""
    dims = Dims(*dims)
    rng = np.random.default_rng([seed, 3])
    out = []
    for k in range(count):
        a, b = (coordinate_name(int(i), dims) for i in rng.integers(dims.K, size=2))
        kind = k % 6
        if kind == 0:
            out.append(f"{a}^3*{b} - 2*{a}*{b}^2 + 0.5")
        elif kind == 1:
            out.append(f"sin({a})*cos({b}) + tan(0.3*{a})")
        elif kind == 2:
            out.append(f"exp(0.5*{a} - {b}^2)")
        elif kind == 3:
            out.append(f"log(2 + {a}^2)*sqrt(3 + {b})")
        elif kind == 4:
            out.append(f"(1 + {a}^2)^1.5 / (2 + cos({b}))")
        else:
            out.append(f"sinh(0.4*{a})*cosh({b}) + {a}*{b}")
    return out


__all__ = [
    "SCENARIO_DIMS",
    "random_connection_scenario",
    "random_expression",
    "random_field_corpus",
    "random_metric",
    "random_metric_scenario",
    "random_point",
]
