import numpy as np
import pytest

from jetham.bundle import CoordinateChange, DTensor, Point, liouville_hamilton
from jetham.connections import berwald_connection
from jetham.expr import parse
from jetham.metrics import LinearConnectionCoeffs, SpatialMetric, TemporalMetric
from jetham.scenario import Scenario
from jetham.verify import (
    ChartPair,
    ad_fd_crosscheck,
    check_connection_coeff_rules,
    check_dtensor_covariance,
    check_nlc_covariance,
    covariance_suite,
    default_changes,
    scenario_probes,
)
from jetham.verify.random_scenarios import random_metric_scenario
from jetham.tensors import torsion_table


def pt(t, x, p):
    return Point(np.array(t, float), np.array(x, float), np.array(p, float))


@pytest.fixture(scope="module")
def metric_scenario():
    return Scenario.from_dict(random_metric_scenario((2, 2), 21, points=2))


def test_default_changes_shape():
    chgs = default_changes((2, 3), 0)
    assert [c.name for c in chgs][0] == "identity" and len(chgs) == 5
    rng = np.random.default_rng(0)
    for c in chgs:
        for _ in range(5):
            t, x = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 3)
            assert np.linalg.cond(np.asarray(c.jac_t(t).value)) < 10
            assert np.linalg.cond(np.asarray(c.jac_x(x).value)) < 10


def test_identity_residuals_zero(metric_scenario):
    sc = metric_scenario
    chg = CoordinateChange.identity(sc.dims)
    pts = scenario_probes(sc, 3)
    pair = ChartPair(sc, chg)
    assert check_nlc_covariance(sc.nlc, chg, pts, pair.N_new).max_abs_residual == 0
    assert check_connection_coeff_rules(sc.connection, chg, pts, pair.D_new).max_abs_residual == 0


@pytest.mark.parametrize("which", [1, 2])
def test_affine_changes(metric_scenario, which):
    sc = metric_scenario
    chg = default_changes(sc.dims, 3)[which]
    pts = scenario_probes(sc, 4)
    pair = ChartPair(sc, chg)
    assert check_nlc_covariance(sc.nlc, chg, pts, pair.N_new).max_abs_residual < 1e-8
    rep = check_connection_coeff_rules(sc.connection, chg, pts, pair.D_new, tol=1e-10)
    assert rep.passed, rep.detail


def test_corrupted_nlc_fails(metric_scenario):
    sc = metric_scenario
    chg = default_changes(sc.dims, 3)[3]
    pts = scenario_probes(sc, 2)
    pair = ChartPair(sc, chg)
    assert check_nlc_covariance(sc.nlc, chg, pts, pair.N_new).passed
    assert not check_nlc_covariance(sc.nlc.perturbed("N2", (1, 0), 0.1), chg, pts, pair.N_new).passed


def test_quadratic_temporal_change_flat_berwald():
    dims = (1, 1)
    h = TemporalMetric.from_strings(dims, [["1"]])
    phi = SpatialMetric.from_strings(dims, [["1"]])
    lin = LinearConnectionCoeffs.from_metrics(h, phi)
    D = berwald_connection(lin)
    chg = CoordinateChange(dims, ["t[1] + t[1]^2/4"], ["x[1]"], ["2*(sqrt(1 + t[1]) - 1)"], ["x[1]"], "quadratic")
    D_new = berwald_connection(lin.transformed(chg))
    pts = [pt([0.05 * k], [0.3], [[0.7]]) for k in range(-2, 3)]
    rep = check_connection_coeff_rules(D, chg, pts, D_new)
    assert rep.detail["A_tt"] < 1e-8 and rep.passed
    # the inhomogeneous term is really exercised: the new coefficient is nonzero
    assert abs(np.asarray(D_new.values(chg.push(pts[0]).point()).A_tt)[0, 0, 0]) > 0.1
    assert not check_connection_coeff_rules(D.perturbed("A_tt", (0, 0, 0)), chg, pts[:1], D_new).passed


def test_scalar_and_liouville_covariance(metric_scenario):
    sc = metric_scenario
    chg = default_changes(sc.dims, 1)[4]
    pts = scenario_probes(sc, 4)
    f = parse("sin(t[1])*x[2]", sc.dims)

    def scalar_old(z):
        return DTensor((), np.array(f(z)), sc.dims)

    def scalar_new(q):
        return DTensor((), np.array(f(chg.pull(q).point())), sc.dims)

    assert check_dtensor_covariance(scalar_old, scalar_new, chg, pts).max_abs_residual < 1e-14
    rep = check_dtensor_covariance(liouville_hamilton, liouville_hamilton, chg, pts, 1e-10)
    assert rep.passed


def test_berwald_torsion_nonlinear_change(metric_scenario):
    sc = metric_scenario
    chg = default_changes(sc.dims, 2)[3]
    pair = ChartPair(sc, chg)
    pts = scenario_probes(sc, 3)
    old = lambda z: torsion_table(sc.connection, z)["R^(f)_(r)ab"]  # noqa: E731
    new = lambda q: torsion_table(pair.D_new, q)["R^(f)_(r)ab"]  # noqa: E731
    assert check_dtensor_covariance(old, new, chg, pts).max_abs_residual < 1e-6
    bad = check_dtensor_covariance(old, new, chg, pts[:1], perturb=((0, 0, 0), 0.1))
    assert not bad.passed


def test_report_pass_semantics():
    chg = CoordinateChange.identity((1, 1))
    z = [pt([0], [0], [[1]])]
    rep = check_dtensor_covariance(liouville_hamilton, liouville_hamilton, chg, z, tol=0.0)
    assert rep.max_abs_residual == 0 and not rep.passed  # strict inequality
    assert rep.to_dict()["pass"] is False


def test_ad_fd_examples():
    dims = (1, 2)
    z = [np.array([0.3, 0.2, -0.4, 0.5, 0.1])]
    poly = ad_fd_crosscheck([parse("t[1]^3*x[1] - 2*x[2]^2*p[1][1]", dims)], z)
    assert poly.max_rel_first < 1e-9 and poly.passed
    trig = ad_fd_crosscheck([parse("sin(x[1])*cos(t[1]) + tan(p[2][1])", dims)], z)
    assert trig.passed
    const = ad_fd_crosscheck([parse("3.5", dims)], z)
    assert const.max_rel_first == 0 and const.max_rel_second == 0


def test_covariance_suite_custom_with_user_tilde():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "scenarios"
    good = Scenario.from_json((root / "custom.json").read_text())
    bad = Scenario.from_json((root / "custom_corrupted.json").read_text())
    assert all(r.passed for r in covariance_suite(good))
    failed = [r.name for r in covariance_suite(bad) if not r.passed]
    assert failed and all("nlc-rule" in n or "bracket" in n or "deflection" in n or "torsion" in n
                          or "curvature" in n for n in failed)
