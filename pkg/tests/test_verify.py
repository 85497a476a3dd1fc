import json
import math

import numpy as np
import pytest

from warpgeo import verify as V
from warpgeo.manifold import ChartManifold, ConnectionField
from warpgeo.warped import GTILDE, PreconditionViolated

from conftest import line, plane, scene


def zero_conn(dim):
    return ConnectionField(lambda p: np.zeros((dim, dim, dim)), dim)


def test_sample_points_stay_in_shrunk_box():
    pts = V.sample_points([(0.0, 10.0), (-1.0, 1.0)], 500, np.random.default_rng(0))
    assert pts[:, 0].min() >= 1.0 and pts[:, 0].max() <= 9.0
    assert pts[:, 1].min() >= -0.8 and pts[:, 1].max() <= 0.8


def test_report_fields_and_json_round_trip():
    M = ChartManifold.diagonal(["1", "x0^2"], box=[(0.5, 2.0), (0.0, 3.0)])
    lc = M.levi_civita_field()
    r = V.check_conjugacy(M.metric_at, lc, lc, M.box, 30, 4)
    rec = json.loads(r.to_json())
    assert list(rec) == list(V.RECORD_FIELDS)
    assert rec["samples"] == 30 and rec["seed"] == 4 and rec["passed"]
    back = V.IdentityReport.from_json(r.to_json())
    assert back.to_json() == r.to_json()
    assert back.max_residual == r.max_residual


def test_mean_is_compensated():
    r = V._report("x", "a", [1e16, 1.0, -1e16, 1.0], [], 1e20, 0)
    assert r.mean_residual == 0.5


def test_deterministic_given_seed():
    M = ChartManifold.diagonal(["1", "sin(x0)^2"])
    lc = M.levi_civita_field()
    a = V.check_conjugacy(M.metric_at, lc, lc, M.box, 20, 7)
    b = V.check_conjugacy(M.metric_at, lc, lc, M.box, 20, 7)
    c = V.check_conjugacy(M.metric_at, lc, lc, M.box, 20, 8)
    assert a.to_json() == b.to_json()
    assert a.mean_residual != c.mean_residual


def test_non_metric_pair_fails():
    M = line(metric="exp(2*x0)", box=(-1.0, 1.0))
    z = zero_conn(1)
    r = V.check_conjugacy(M.metric_at, z, z, M.box, 50, 0)
    assert not r.passed and r.max_residual > 1e-3
    # |∂g| = 2 e^{2x} >= 2 e^{-1.6} on the shrunk box
    assert r.max_residual >= 2 * math.exp(-1.6)
    assert 0 < len(r.failures) <= V.MAX_FAILURES


def test_statistical_checks():
    M = line(metric="exp(2*x0)", box=(-1.0, 1.0), conn=[[["0"]]])
    cf = M.connection_field()
    assert V.check_torsion_free(cf, M.box, 20).passed
    assert V.check_nabla_g_symmetric(M.metric_at, cf, M.box, 20).passed
    twisted = ChartManifold.diagonal(["1", "1"], conn=[[["0", "0.01"], ["0", "0"]], [["0", "0"], ["0", "0"]]],
                                     torsion_free=False)
    rep = V.check_torsion_free(twisted.connection_field(), twisted.box, 20)
    assert not rep.passed and rep.max_residual == pytest.approx(0.01)
    for name in ("polar", "sphere"):
        entries = ["1", "x0^2"] if name == "polar" else ["1", "sin(x0)^2"]
        S = ChartManifold.diagonal(entries)
        assert V.check_nabla_g_symmetric(S.metric_at, S.levi_civita_field(), S.box, 20).passed


def test_curvature_duality_checks():
    S = ChartManifold.diagonal(["1", "sin(x0)^2"])
    lc = S.levi_civita_field()
    assert V.check_curvature_duality(S.metric_at, lc, lc, S.box, 10, tol=1e-5).passed
    E = ChartManifold.diagonal(["1", "1"])
    z = zero_conn(2)
    r = V.check_curvature_duality(E.metric_at, z, z, E.box, 5)
    assert r.max_residual == 0.0


def test_midpoint_and_endpoints(catalog):
    M = catalog["statistical"].scene.base
    conn, star = M.connection_pair()
    assert V.check_midpoint(M, conn, star, 20).passed
    assert V.check_lambda_endpoints(conn, star, M.box, 20).max_residual <= 1e-14


def test_warped_curvature_trivial_and_linear(flat_linear):
    S = scene(line(), plane(), "2", "3", 0.4)
    r = V.check_warped_curvature(S, 5)
    assert r.passed and r.max_residual < 1e-12
    assert V.check_warped_curvature(flat_linear, 10).passed


def test_warped_curvature_refuses(catalog):
    with pytest.raises(PreconditionViolated):
        V.check_warped_curvature(catalog["polar_sphere"].scene, 5)


def test_corollary_constant_classical_case():
    S = scene(line(), plane(), "0.5*x0", "1", 0.0)
    assert V.corollary_constant(S, (1.0, 1.0, 1.0)) == 0.25


def test_corollary_on_flat_linear(flat_linear):
    reps = V.check_dually_flat_corollary(flat_linear, 10)
    assert all(r.passed for r in reps)
    vals = V.fiber_coefficients(flat_linear, 10)
    assert max(abs(v + 0.2) for v in vals) < 1e-5


def test_corollary_witness_for_nonconstant_f2():
    S = scene(line(), plane(), "0.5*x0", "1 + 0.5*y0", 1.0)
    reps = {r.identity.split(" (")[0]: r for r in V.check_dually_flat_corollary(S, 10)}
    witness = reps["corollary: mixed block R(X1^h,Y2^v)Z1^h = 0"]
    assert not witness.passed and witness.max_residual > 1e-2


def test_corollary_preconditions():
    with pytest.raises(PreconditionViolated):
        V.check_dually_flat_corollary(scene(line(), plane(), "2", "1", 1.0), 5)
    with pytest.raises(PreconditionViolated):
        V.check_dually_flat_corollary(scene(line(), plane(), "x0", "1", 0.0), 5)


def test_metric_condition_reports(gen_warped):
    reps = V.check_metric_condition(gen_warped)
    assert [r.passed for r in reps] == [True, True]
    assert reps[0].max_residual == 0.25
    deg = scene(line(), line("y"), "x0", "y0", 1.0)
    reps = V.check_metric_condition(deg)
    assert not reps[0].passed and reps[0].max_residual == 1.0
    assert not reps[1].passed
    assert reps[2].passed and reps[2].max_residual <= 1e-10


def test_reconstruction_and_lifts(gen_warped):
    assert V.check_reconstruction(gen_warped, 20).passed
    assert all(r.passed for r in V.check_lift_identities(gen_warped, 10))


def test_fd_order_sanity():
    M = ChartManifold.diagonal(["1", "sin(x0)^2"])
    lc = M.levi_civita_field()
    rep = V.fd_order_sanity(lambda h: V.check_conjugacy(M.metric_at, lc, lc, M.box, 10, 0, h), 1e-2)
    assert rep.passed
