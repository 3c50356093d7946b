import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jetham.bundle import Point
from jetham.errors import ArityError, DomainError, ExprSyntaxError, OrderTooHigh, UnknownCoordinate
from jetham.expr import evaluate, parse, partial, pretty
from jetham.verify import ad_fd_crosscheck
from jetham.verify.random_scenarios import random_expression, random_field_corpus

from oracles import sympy_value


def pt(t, x, p):
    return Point(np.array(t, float), np.array(x, float), np.array(p, float))


def test_zero_constant():
    f = parse("0", (1, 1))
    assert evaluate(f, pt([0.3], [1.2], [[4.0]])) == 0.0


def test_sin_squared():
    f = parse("sin(x[1])^2", (1, 2))
    assert evaluate(f, pt([0], [0.7, 2], [[1], [1]])) == pytest.approx(math.sin(0.7) ** 2, abs=1e-15)


def test_mixed_example():
    f = parse("p[1][1]*t[1] + exp(x[2])", (2, 2))
    val = evaluate(f, pt([1, 0], [0, 1], np.ones((2, 2))))
    # independent oracle: sympy
    ref = sympy_value("p[1][1]*t[1] + exp(x[2])", (2, 2), pt([1, 0], [0, 1], np.ones((2, 2))))
    assert val == pytest.approx(ref, abs=1e-12)
    assert val == pytest.approx(3.718281828, abs=1e-9)


def test_constant_and_polynomial():
    assert evaluate(parse("5", (1, 1)), pt([9], [9], [[9]])) == 5
    assert evaluate(parse("t[1]*t[1]", (1, 1)), pt([3], [0], [[0]])) == 9


def test_log_domain():
    with pytest.raises(DomainError):
        evaluate(parse("log(x[1])", (1, 1)), pt([0], [-1], [[0]]))


def test_division_by_zero_domain():
    with pytest.raises(DomainError):
        evaluate(parse("1/x[1]", (1, 1)), pt([0], [0], [[0]]))


@pytest.mark.parametrize(
    "text,value",
    [("-2^2", -4.0), ("2^3^2", 512.0), ("2*3+4", 10.0), ("2+3*4", 14.0), ("8/4/2", 1.0), ("-(1-3)", 2.0)],
)
def test_precedence(text, value):
    assert evaluate(parse(text, (1, 1)), pt([0], [0], [[0]])) == value


def test_syntax_error_position():
    with pytest.raises(ExprSyntaxError) as info:
        parse("1 + * 2", (1, 1))
    assert info.value.position == 5
    assert "number" in info.value.expected


def test_unknown_coordinate():
    with pytest.raises(UnknownCoordinate) as info:
        parse("x[3]", (1, 2))
    assert "x[1..2]" in str(info.value)
    with pytest.raises(UnknownCoordinate):
        parse("p[1][2]", (1, 2))


def test_arity():
    with pytest.raises(ArityError):
        parse("sin(x[1], x[2])", (1, 2))


def test_partials():
    z = pt([2.0], [0.0], [[0.0]])
    assert partial(parse("7", (1, 1)), ["t[1]"], z) == 0
    assert partial(parse("sin(x[1])", (1, 1)), ["x[1]", "x[1]"], z) == pytest.approx(0.0, abs=1e-15)
    assert partial(parse("t[1]^4", (1, 1)), ["t[1]"] * 3, z) == pytest.approx(48.0, rel=1e-13)


def test_order_too_high():
    with pytest.raises(OrderTooHigh):
        partial(parse("t[1]^4", (1, 1)), ["t[1]"] * 4, pt([1], [0], [[0]]))


def test_chain_rule_all_functions():
    # d/dx of each unary node against its textbook derivative
    x0 = 0.37
    z = pt([0], [x0], [[0]])
    cases = {
        "sin(x[1])": math.cos(x0),
        "cos(x[1])": -math.sin(x0),
        "tan(x[1])": 1 / math.cos(x0) ** 2,
        "exp(x[1])": math.exp(x0),
        "log(x[1])": 1 / x0,
        "sqrt(x[1])": 0.5 / math.sqrt(x0),
        "sinh(x[1])": math.cosh(x0),
        "cosh(x[1])": math.sinh(x0),
        "x[1]^x[1]": x0**x0 * (math.log(x0) + 1),
    }
    for text, ref in cases.items():
        assert partial(parse(text, (1, 1)), ["x[1]"], z) == pytest.approx(ref, rel=1e-13), text


def test_third_order_mixed():
    f = parse("exp(t[1]*x[1])*p[1][1]", (1, 1))
    t, x, p = 0.3, -0.8, 1.7
    z = pt([t], [x], [[p]])
    # d/dt d/dx d/dp of p e^{tx} = (1 + t x) e^{tx}
    assert partial(f, ["t[1]", "x[1]", "p[1][1]"], z) == pytest.approx((1 + t * x) * math.exp(t * x), rel=1e-13)


def test_corpus_ad_vs_fd():
    dims = (2, 2)
    fields = [parse(s, dims) for s in random_field_corpus(dims, 5)]
    rng = np.random.default_rng(0)
    pts = [rng.uniform(-0.6, 0.6, 8) for _ in range(3)]
    rep = ad_fd_crosscheck(fields, pts)
    assert rep.passed, rep


seeds = st.integers(min_value=0, max_value=10_000)
dims_st = st.sampled_from([(1, 1), (1, 2), (2, 1), (2, 2)])


@settings(max_examples=60, deadline=None)
@given(seeds, dims_st)
def test_mixed_partial_symmetry(seed, dims):
    rng = np.random.default_rng(seed)
    f = parse(random_expression(dims, rng, terms=3), dims)
    k = dims[0] + dims[1] + dims[0] * dims[1]
    z = rng.uniform(-1, 1, k)
    i, j = rng.integers(k, size=2)
    a, b = partial(f, [int(i), int(j)], z), partial(f, [int(j), int(i)], z)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@settings(max_examples=60, deadline=None)
@given(seeds, dims_st)
def test_ad_matches_fd(seed, dims):
    rng = np.random.default_rng(seed)
    f = parse(random_expression(dims, rng, terms=3), dims)
    k = dims[0] + dims[1] + dims[0] * dims[1]
    rep = ad_fd_crosscheck([f], [rng.uniform(-1, 1, k)])
    assert rep.passed, rep


@settings(max_examples=60, deadline=None)
@given(seeds, dims_st)
def test_pretty_round_trip(seed, dims):
    rng = np.random.default_rng(seed)
    f = parse(random_expression(dims, rng, terms=3), dims)
    g = parse(pretty(f), dims)
    k = dims[0] + dims[1] + dims[0] * dims[1]
    z = rng.uniform(-1, 1, k)
    assert evaluate(g, z) == evaluate(f, z)
    assert pretty(g) == pretty(f)


@pytest.mark.parametrize("text", random_field_corpus((1, 2), 11))
def test_corpus_round_trip(text):
    f = parse(text, (1, 2))
    z = np.array([0.2, 0.4, -0.3, 0.5, 0.1])
    assert evaluate(parse(pretty(f), (1, 2)), z) == evaluate(f, z)


def test_field_is_thread_safe():
    from concurrent.futures import ThreadPoolExecutor

    f = parse("sin(t[1])*exp(x[1]) + p[1][1]^2", (1, 1))
    zs = [np.array([0.01 * k, 0.3, 0.2]) for k in range(200)]
    serial = [evaluate(f, z) for z in zs]
    with ThreadPoolExecutor(8) as ex:
        assert list(ex.map(lambda z: evaluate(f, z), zs)) == serial
