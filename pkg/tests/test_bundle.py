import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jetham.bundle import (
    CoordinateChange,
    DTensor,
    IndexKind,
    PForm,
    PVec,
    Point,
    SDown,
    SUp,
    TDown,
    TUp,
    dtensor_transform,
    fundamental_metric,
    h_normalization_tensor,
    liouville_hamilton,
    natural_frame_jacobians,
    polymomentum_hamilton_tensor,
    push_point,
)
from jetham.errors import ShapeMismatch, SingularJacobian
from jetham.expr import parse
from jetham.metrics import SpatialMetric, TemporalMetric
from jetham.verify import default_changes


def pt(t, x, p):
    return Point(np.array(t, float), np.array(x, float), np.array(p, float))


def rand_point(dims, rng, r=0.5):
    m, n = dims
    return pt(rng.uniform(-r, r, m), rng.uniform(-r, r, n), rng.uniform(-r, r, (n, m)))


def test_identity_push():
    z = pt([0.1, 0.2], [0.3], [[0.4, 0.5]])
    q = push_point(CoordinateChange.identity((2, 1)), z)
    np.testing.assert_array_equal(q.flat(), z.flat())


def test_temporal_rescale_doubles_p():
    chg = CoordinateChange((1, 2), ["2*t[1]"], ["x[1]", "x[2]"], ["t[1]/2"], ["x[1]", "x[2]"])
    z = pt([0.3], [0.1, 0.2], [[1.5], [-2.0]])
    np.testing.assert_allclose(push_point(chg, z).p, 2 * z.p, rtol=1e-15)


def test_push_square_cube():
    chg = CoordinateChange((1, 1), ["t[1]^2"], ["x[1]^3"], ["sqrt(t[1])"], ["x[1]^(1/3)"])
    q = push_point(chg, pt([1], [1], [[1]]))
    # p~ = (dx/dx~)(dt~/dt) p = (1/3)(2)(1)
    assert q.p[0, 0] == pytest.approx(2 / 3, abs=1e-14)
    back = push_point(chg.inverse(), q)
    np.testing.assert_allclose(back.flat(), [1, 1, 1], atol=1e-12)


def test_singular_jacobian():
    chg = CoordinateChange((1, 1), ["t[1]^3"], ["x[1]"], ["t[1]"], ["x[1]"])
    with pytest.raises(SingularJacobian):
        push_point(chg, pt([0], [1], [[1]]))


def test_change_block_structure():
    with pytest.raises(ShapeMismatch):
        CoordinateChange((1, 1), ["t[1] + x[1]"], ["x[1]"], ["t[1]"], ["x[1]"])


def test_natural_jacobian_identity_and_affine():
    dims = (2, 2)
    z = pt([0.1, 0.2], [0.3, 0.4], [[1, 2], [3, 4]])
    np.testing.assert_allclose(natural_frame_jacobians(CoordinateChange.identity(dims), z), np.eye(8), atol=0)
    chg = CoordinateChange.affine(dims, [[2, 1], [0, 1]], [0.5, 0], [[1, 0.5], [0.2, 1]], [0, 1])
    J = natural_frame_jacobians(chg, z)
    np.testing.assert_allclose(J[4:, :4], 0, atol=1e-14)


def _fd_push_jacobian(chg, z, h=1e-6):
    dims = chg.dims
    f0 = z.flat()
    cols = []
    for k in range(len(f0)):
        e = np.zeros_like(f0)
        e[k] = h
        a = push_point(chg, Point.from_flat(dims, f0 + e)).flat()
        b = push_point(chg, Point.from_flat(dims, f0 - e)).flat()
        cols.append((a - b) / (2 * h))
    return np.array(cols).T


def test_natural_jacobian_mixed_blocks_fd():
    chg = CoordinateChange((1, 1), ["t[1]^2"], ["x[1]^3"], ["sqrt(t[1])"], ["x[1]^(1/3)"])
    z = pt([1], [1], [[1]])
    J = natural_frame_jacobians(chg, z)
    np.testing.assert_allclose(J, _fd_push_jacobian(chg, z), atol=1e-8)
    # p~ = 2 t p / (3 x^2): d/dt = 2/3, d/dx = -4/3
    assert J[2, 0] == pytest.approx(2 / 3, abs=1e-14)
    assert J[2, 1] == pytest.approx(-4 / 3, abs=1e-14)


@pytest.mark.parametrize("dims", [(1, 2), (2, 2), (2, 3)])
def test_natural_jacobian_composes_to_identity(dims):
    rng = np.random.default_rng(1)
    for chg in default_changes(dims, 3):
        z = rand_point(dims, rng)
        q = push_point(chg, z)
        J = natural_frame_jacobians(chg, z)
        Ji = natural_frame_jacobians(chg.inverse(), q)
        np.testing.assert_allclose(Ji @ J, np.eye(len(z.flat())), atol=1e-8)
        np.testing.assert_allclose(push_point(chg.inverse(), q).flat(), z.flat(), atol=1e-8)


def test_dtensor_scalar_and_tup():
    dims = (1, 1)
    chg = CoordinateChange(dims, ["2*t[1]"], ["x[1]"], ["t[1]/2"], ["x[1]"])
    z = pt([0.3], [0.2], [[1.0]])
    s = DTensor((), np.array(3.5), dims)
    assert float(dtensor_transform(s, chg, z).components) == 3.5
    v = DTensor((TUp,), np.array([1.25]), dims)
    assert dtensor_transform(v, chg, z).components[0] == 2.5


def test_pvec_scaling():
    dims = (1, 1)
    chg = CoordinateChange(dims, ["2*t[1]"], ["3*x[1]"], ["t[1]/2"], ["x[1]/3"])
    v = DTensor((PVec,), np.array([1.0]), dims)
    assert dtensor_transform(v, chg, pt([0], [0], [[0]])).components[0] == pytest.approx(2 / 3, abs=1e-15)


def test_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        DTensor((TUp, SDown), np.zeros((2, 2)), (1, 2))


def test_contraction_pairs_only():
    dims = (2, 3)
    T = DTensor((TUp, TDown), np.arange(4.0).reshape(2, 2), dims)
    assert float(T.contract(0, 1).components) == 3.0
    with pytest.raises(ShapeMismatch):
        DTensor((TUp, SDown), np.zeros((2, 3)), dims).contract(0, 1)


KINDS = list(IndexKind)


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from([(1, 1), (1, 2), (2, 1), (2, 2)]),
    st.lists(st.sampled_from(KINDS), min_size=0, max_size=3),
    st.integers(0, 10_000),
    st.integers(0, 4),
)
def test_transform_round_trip(dims, kinds, seed, which):
    rng = np.random.default_rng(seed)
    chg = default_changes(dims, seed % 7)[which]
    z = rand_point(dims, rng)
    comps = rng.normal(size=tuple(k.length(dims) for k in kinds))
    T = DTensor(tuple(kinds), comps, dims)
    q = push_point(chg, z)
    back = dtensor_transform(dtensor_transform(T, chg, z), chg.inverse(), q)
    np.testing.assert_allclose(back.components, comps, rtol=1e-8, atol=1e-8 * (1 + np.max(np.abs(comps), initial=0)))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(1, 2), (2, 2), (3, 1)]), st.integers(0, 10_000))
def test_contraction_invariant(dims, seed):
    rng = np.random.default_rng(seed)
    chg = default_changes(dims, seed % 5)[3]
    z = rand_point(dims, rng)
    for up, down in ((TUp, TDown), (SUp, SDown), (PVec, PForm)):
        T = DTensor((up, down), rng.normal(size=(up.length(dims), down.length(dims))), dims)
        new = dtensor_transform(T, chg, z)
        assert float(new.contract(0, 1).components) == pytest.approx(float(T.contract(0, 1).components), abs=1e-9)


def test_liouville():
    assert np.all(liouville_hamilton(pt([1], [2], [[0.0]])).components == 0)
    assert liouville_hamilton(pt([1], [2], [[7.0]])).components[0] == 7
    C = liouville_hamilton(pt([0.5, 1], [0.2], [[3.0, 4.0]]))
    assert C.kinds == (PVec,)
    np.testing.assert_array_equal(C.components, [3, 4])


def test_liouville_transform_equals_pushed_p():
    dims = (1, 2)
    chg = CoordinateChange(dims, ["2*t[1]"], ["x[1]", "x[2]"], ["t[1]/2"], ["x[1]", "x[2]"])
    z = pt([0.3], [0.1, 0.2], [[1.5], [-2.0]])
    np.testing.assert_allclose(
        dtensor_transform(liouville_hamilton(z), chg, z).components, push_point(chg, z).p.ravel(), rtol=1e-15
    )


def test_fundamental_metric_examples():
    dims = (2, 2)
    z = pt([0.1, 0.2], [0.3, 0.4], [[1, 2], [3, 4]])
    quad = " + ".join(f"p[{i}][{a}]^2" for i in (1, 2) for a in (1, 2))
    np.testing.assert_allclose(fundamental_metric(parse(quad, dims), z).components, np.eye(4), atol=1e-14)
    np.testing.assert_array_equal(fundamental_metric(parse("sin(t[1])*x[2]", dims), z).components, 0)
    G = fundamental_metric(parse("p[1][1]^3", (1, 1)), pt([0], [0], [[2.0]]))
    assert G.components[0, 0] == pytest.approx(6.0, abs=1e-13)


def test_fundamental_metric_fd_and_symmetry():
    dims = (2, 2)
    H = parse("exp(0.3*p[1][2]*p[2][1]) + p[1][1]^2*x[1] + sin(p[2][2])*t[2]", dims)
    z = pt([0.1, 0.2], [0.3, 0.4], [[0.5, -0.2], [0.7, 0.1]])
    G = fundamental_metric(H, z).components
    assert np.max(np.abs(G - G.T)) <= 1e-12
    h = 1e-4
    f0 = z.flat()
    from jetham.expr import evaluate

    ev = lambda v: evaluate(H, v)  # noqa: E731
    fd = np.zeros((4, 4))
    for i, j in itertools.product(range(4), repeat=2):
        ei = np.zeros(8)
        ej = np.zeros(8)
        ei[4 + i] = h
        ej[4 + j] = h
        fd[i, j] = (ev(f0 + ei + ej) - ev(f0 + ei - ej) - ev(f0 - ei + ej) + ev(f0 - ei - ej)) / (4 * h * h)
    np.testing.assert_allclose(G, 0.5 * fd, atol=1e-6)


def test_polymomentum_hamilton_tensor():
    dims = (1, 1)
    phi = SpatialMetric.from_strings(dims, [["1"]])
    assert polymomentum_hamilton_tensor(phi, pt([0], [0], [[5.0]])).components.ravel()[0] == 5
    assert np.all(polymomentum_hamilton_tensor(phi, pt([0], [0], [[0.0]])).components == 0)
    dims = (2, 2)
    phi = SpatialMetric.from_strings(dims, [["2", "x[1]"], ["x[1]", "3"]])
    z = pt([0, 0], [0.5, 0], [[1, 2], [3, 4]])
    Ht = polymomentum_hamilton_tensor(phi, z)
    g = np.array([[2, 0.5], [0.5, 3]])
    ref = np.einsum("ij,ka->iajk", g, z.p).reshape(4, 2, 2)
    np.testing.assert_allclose(Ht.components, ref, atol=1e-15)
    assert Ht.kinds == (PVec, SDown, SDown)


def test_h_normalization_tensor():
    dims = (2, 2)
    h = TemporalMetric.from_strings(dims, [["2", "0"], ["0", "3"]])
    J = h_normalization_tensor(h, pt([0, 0], [0, 0], [[0, 0], [0, 0]]))
    assert J.kinds == (PForm, TDown, SDown)
    c = J.components.reshape(2, 2, 2, 2)  # [i, a, b, j]
    for i, a, b, j in itertools.product(range(2), repeat=4):
        assert c[i, a, b, j] == (np.diag([2, 3])[a, b] if i == j else 0)
