"""Seeded coordinate changes and probe points for the verification harness."""

from __future__ import annotations

import numpy as np

from ..bundle import CoordinateChange, Dims, Point
from ..errors import JethamError


def _num(v: float) -> str:
    return repr(float(v)) if v >= 0 else f"({float(v)!r})"


def _mix(L, args):
    """Expression strings for ``L @ args`` where ``args`` are expression strings."""
    rows = []
    for a in range(L.shape[0]):
        rows.append(" + ".join(f"{_num(L[a, b])}*({args[b]})" for b in range(L.shape[1]) if L[a, b] != 0) or "0")
    return rows


def _near_identity(k, rng, scale=0.3, max_cond=3.0):
    while True:
        L = np.round(np.eye(k) + scale * rng.uniform(-1, 1, size=(k, k)), 3)
        if np.linalg.cond(L) < max_cond:
            return L


_PROFILES = {
    # name: (forward template, inverse template) in the variable {u}
    "exp": ("2*(exp({u}/2) - 1)", "2*log(1 + {u}/2)"),
    "quad": ("{u} + 0.1*{u}^2", "(sqrt(1 + 0.4*{u}) - 1)/0.2"),
    "sinh": ("2*sinh({u}/2)", "2*log({u}/2 + sqrt(({u}/2)^2 + 1))"),
}


def _profile_change(dims, block_profiles, Lt, Lx, name):
    """``t~ = Lt phi(t)``, ``x~ = Lx psi(x)`` with inverses ``phi^-1(Lt^-1 t~)``."""
    m, n = dims
    out = {}
    for block, k, L, prof in (("t", m, Lt, block_profiles[0]), ("x", n, Lx, block_profiles[1])):
        fwd, inv = _PROFILES[prof]
        coords = [f"{block}[{a + 1}]" for a in range(k)]
        out[block] = _mix(L, [fwd.format(u=c) for c in coords])
        pre = _mix(np.linalg.inv(L), coords)
        out[block + "_inv"] = [inv.format(u=f"({s})") for s in pre]
    return CoordinateChange(dims, out["t"], out["x"], out["t_inv"], out["x_inv"], name)


def default_changes(dims, seed: int = 0) -> list[CoordinateChange]:
    """Identity, two affine and two mild nonlinear changes (near-identity Jacobians)."""
    dims = Dims(*dims)
    m, n = dims
    rng = np.random.default_rng([seed, 7919])
    changes = [CoordinateChange.identity(dims)]
    for k in range(2):
        changes.append(
            CoordinateChange.affine(
                dims,
                _near_identity(m, rng),
                np.round(rng.uniform(-0.5, 0.5, m), 3),
                _near_identity(n, rng),
                np.round(rng.uniform(-0.5, 0.5, n), 3),
                name=f"affine{k + 1}",
            )
        )
    changes.append(_profile_change(dims, ("exp", "sinh"), _near_identity(m, rng, 0.2), _near_identity(n, rng, 0.2), "nonlinear1"))
    changes.append(_profile_change(dims, ("quad", "exp"), _near_identity(m, rng, 0.2), _near_identity(n, rng, 0.2), "nonlinear2"))
    return changes


def probe_points(dims, count: int, seed: int = 0, center=None, radius: float = 1.0, accept=None,
                 max_tries: int = 10000) -> list[Point]:
    """Uniform points in a box around ``center`` (default the origin).

    ``accept(pt)`` may reject points, e.g. near metric singularities; a
    JethamError raised by it also rejects the point.
    """
    dims = Dims(*dims)
    rng = np.random.default_rng([seed, 104729])
    c = np.zeros(dims.K) if center is None else np.asarray(center.flat() if hasattr(center, "flat") else center, float)
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise JethamError(f"could not find {count} acceptable probe points")
        pt = Point.from_flat(dims, c + rng.uniform(-radius, radius, dims.K))
        try:
            ok = accept is None or accept(pt)
        except JethamError:
            ok = False
        if ok:
            out.append(pt)
    return out


__all__ = ["default_changes", "probe_points"]
