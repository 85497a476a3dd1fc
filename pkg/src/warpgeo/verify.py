"""Sampled, tolerance-gated identity checks.

Every check draws points uniformly from its box shrunk by 10% per side (so
finite-difference stencils stay inside), evaluates a residual array at each
point and condenses the result into an :class:`IdentityReport`.  Reports are
deterministic given the seed.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .manifold import ChartManifold, ConnectionField, curvature_from, lambda_connection, sectional_curvature
from .product import VectorField, directional_derivative, lie_bracket_fd
from .tensor_core import FD_STEP, FD_STEP_NESTED, central_fd
from .warped import BLOCKS, GTILDE, PreconditionViolated, WarpedProductScene

# tolerance classes
TOL_FIRST = 1e-6
TOL_NESTED = 1e-4
TOL_ALGEBRAIC = 1e-12

MAX_FAILURES = 10
SHRINK = 0.1
RECORD_FIELDS = ("identity", "anchor", "samples", "max_residual", "mean_residual", "tolerance", "passed", "seed")


@dataclass
class IdentityReport:
    identity: str
    anchor: str
    samples: int
    max_residual: float
    mean_residual: float
    tolerance: float
    passed: bool
    seed: int
    failures: list = field(default_factory=list)

    def record(self) -> dict:
        return {k: getattr(self, k) for k in RECORD_FIELDS}

    def to_json(self) -> str:
        return json.dumps(self.record(), ensure_ascii=False, sort_keys=False)

    @classmethod
    def from_json(cls, line: str) -> IdentityReport:
        return cls(**json.loads(line))

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}  {self.identity}  max={self.max_residual:.3e} mean={self.mean_residual:.3e} "
                f"tol={self.tolerance:.1e} n={self.samples} seed={self.seed}")


def sample_points(box, n: int, rng: np.random.Generator, shrink: float = SHRINK) -> np.ndarray:
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    width = hi - lo
    lo, hi = lo + shrink * width, hi - shrink * width
    return lo + (hi - lo) * rng.random((n, len(box)))


def _report(identity: str, anchor: str, per_sample: Sequence[float], failures: list,
            tol: float, seed: int) -> IdentityReport:
    per_sample = [float(v) for v in per_sample]
    mx = max(per_sample) if per_sample else 0.0
    if any(math.isnan(v) for v in per_sample):
        mx = math.nan
    mean = math.fsum(per_sample) / len(per_sample) if per_sample else 0.0
    passed = bool(mx <= tol)
    if not passed and not failures:
        failures = [(None, None, mx)]
    return IdentityReport(identity, anchor, len(per_sample), mx, mean, tol, passed, seed, failures[:MAX_FAILURES])


def run_identity(identity: str, anchor: str, box, residuals: Callable[[np.ndarray, np.random.Generator], np.ndarray],
                 n: int, seed: int, tol: float) -> IdentityReport:
    """Evaluate ``residuals(x, rng)`` at ``n`` sampled points."""
    if n < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    points = sample_points(box, n, rng)
    per_sample, failures = [], []
    for x in points:
        r = np.abs(np.asarray(residuals(x, rng), dtype=float))
        worst = float(np.max(r)) if r.size else 0.0
        if np.isnan(r).any():
            worst = math.nan
        per_sample.append(worst)
        if len(failures) < MAX_FAILURES and not worst <= tol:
            bad = np.argwhere(~(r <= tol))
            for idx in bad[: MAX_FAILURES - len(failures)]:
                failures.append((tuple(float(v) for v in x), tuple(int(i) for i in idx), float(r[tuple(idx)])))
    return _report(identity, anchor, per_sample, failures, tol, seed)


# ---------------------------------------------------------------------------
# connection identities


def conjugacy_residual(metric_fn, gamma: np.ndarray, gamma_star: np.ndarray, x, h: float = FD_STEP) -> np.ndarray:
    """``A[k, i, j] = ∂_k g_ij - Γ_{ki,j} - Γ*_{kj,i}``, with ``∂g`` by central differences."""
    g = metric_fn(x)
    dg = np.array([central_fd(metric_fn, x, k, h) for k in range(len(x))])
    return dg - np.einsum("lki,lj->kij", gamma, g) - np.einsum("lkj,li->kij", gamma_star, g)


def check_conjugacy(metric_fn, conn_fn, conn_star_fn, box, n: int = 100, seed: int = 0,
                    h: float = FD_STEP, tol: float = TOL_FIRST, identity: str = "conjugacy") -> IdentityReport:
    """``X g(Y,Z) = g(∇_X Y, Z) + g(Y, ∇*_X Z)`` on all coordinate triples."""
    return run_identity(identity, "X g(Y,Z) = g(∇_X Y,Z) + g(Y,∇*_X Z)", box,
                        lambda x, _: conjugacy_residual(metric_fn, conn_fn(x), conn_star_fn(x), x, h),
                        n, seed, tol)


def check_torsion_free(conn_fn, box, n: int = 100, seed: int = 0, tol: float = TOL_ALGEBRAIC,
                       identity: str = "torsion-free") -> IdentityReport:
    def res(x, _):
        gamma = conn_fn(x)
        return gamma - np.swapaxes(gamma, 1, 2)
    return run_identity(identity, "T(X,Y) = ∇_X Y - ∇_Y X - [X,Y] = 0", box, res, n, seed, tol)


def nabla_g(metric_fn, gamma: np.ndarray, x, h: float = FD_STEP) -> np.ndarray:
    """``(∇g)[i, j, k] = ∂_i g_jk - Γ_{ij,k} - Γ_{ik,j}``."""
    g = metric_fn(x)
    dg = np.array([central_fd(metric_fn, x, i, h) for i in range(len(x))])
    low = np.einsum("lij,lk->ijk", gamma, g)
    return dg - low - np.swapaxes(low, 1, 2)


def check_nabla_g_symmetric(metric_fn, conn_fn, box, n: int = 100, seed: int = 0, h: float = FD_STEP,
                            tol: float = TOL_FIRST, identity: str = "nabla-g-symmetric") -> IdentityReport:
    def res(x, _):
        A = nabla_g(metric_fn, conn_fn(x), x, h)
        return A - np.swapaxes(A, 0, 1)
    return run_identity(identity, "(∇g)(X,Y,Z) = (∇g)(Y,X,Z)", box, res, n, seed, tol)


def check_midpoint(manifold: ChartManifold, conn_fn, conn_star_fn, n: int = 100, seed: int = 0,
                   tol: float = 1e-10, identity: str = "midpoint") -> IdentityReport:
    """``Γ^(0) = ½(Γ + Γ*)`` equals the Levi-Civita connection."""
    return run_identity(identity, "½(∇ + ∇*) = Levi-Civita", manifold.box,
                        lambda x, _: lambda_connection(conn_fn(x), conn_star_fn(x), 0.0) - manifold.levi_civita_at(x),
                        n, seed, tol)


def check_lambda_endpoints(conn_fn, conn_star_fn, box, n: int = 100, seed: int = 0, tol: float = 1e-14,
                           identity: str = "lambda-endpoints") -> IdentityReport:
    def res(x, _):
        gamma, gamma_star = conn_fn(x), conn_star_fn(x)
        return np.concatenate([(lambda_connection(gamma, gamma_star, 1.0) - gamma).ravel(),
                               (lambda_connection(gamma, gamma_star, -1.0) - gamma_star).ravel()])
    return run_identity(identity, "∇^(1) = ∇, ∇^(-1) = ∇*", box, res, n, seed, tol)


def lambda_field(conn: ConnectionField, conn_star: ConnectionField, lam: float) -> ConnectionField:
    return ConnectionField(lambda x: lambda_connection(conn(x), conn_star(x), lam), conn.dim,
                           h=conn.h, name=f"∇^({lam:g})")


# ---------------------------------------------------------------------------
# curvature


def _curvature(conn: ConnectionField, x, h: float | None) -> np.ndarray:
    if h is None and conn.symbolic:
        return curvature_from(conn(x), conn.derivative(x))
    return curvature_from(conn(x), conn.derivative(x, FD_STEP_NESTED if h is None else h))


def check_curvature_duality(metric_fn, conn: ConnectionField, conn_star: ConnectionField, box, n: int = 50,
                            seed: int = 0, h: float | None = None, tol: float = TOL_NESTED,
                            identity: str = "curvature-duality") -> IdentityReport:
    """``g(R(∂i,∂j)∂k, ∂m) + g(∂k, R*(∂i,∂j)∂m) = 0`` on all index quadruples."""
    def res(x, _):
        g = metric_fn(x)
        R = _curvature(conn, x, h)
        Rs = _curvature(conn_star, x, h)
        return np.einsum("ml,lijk->ijkm", g, R) + np.einsum("kl,lijm->ijkm", g, Rs)
    return run_identity(identity, "g(R(X,Y)Z,W) + g(Z,R*(X,Y)W) = 0", box, res, n, seed, tol)


def check_flat(conn: ConnectionField, box, n: int = 50, seed: int = 0, h: float | None = None,
               tol: float = TOL_FIRST, identity: str = "flat") -> IdentityReport:
    return run_identity(identity, "R = 0", box, lambda x, _: _curvature(conn, x, h), n, seed, tol)


# ---------------------------------------------------------------------------
# warped products


def check_warped_curvature(S: WarpedProductScene, n: int = 50, seed: int = 0, h: float | None = None,
                           tol: float = TOL_NESTED, blocks: Sequence[str] = BLOCKS,
                           identity: str = "warped-curvature") -> IdentityReport:
    """Closed-form ``G~`` curvature blocks against numerical curvature of the product connection."""
    box = S.box
    # refuse up front, on the box probes, rather than mid-run
    for x in sample_points(box, 8, np.random.default_rng(seed)):
        S.require_parallel_gradients(x)

    def res(x, rng):
        R = S.numerical_curvature(GTILDE, x, h=h)
        out = []
        for block in blocks:
            dims = {"hhh": (S.m1,) * 3, "vvv": (S.m2,) * 3, "hhv": (S.m1, S.m1, S.m2), "hvh": (S.m1, S.m2, S.m1)}[block]
            inputs = [rng.standard_normal(d) for d in dims]
            closed = S.closed_form_curvature_Gtilde(block, inputs, x)
            U, V, W = S.lift_inputs(block, inputs)
            out.append(closed - np.einsum("lijk,i,j,k->l", R, U, V, W))
        return np.concatenate(out)
    return run_identity(identity, "closed-form curvature of ∇ for G~ (parallel warping gradients)",
                        box, res, n, seed, tol)


def corollary_constant(S: WarpedProductScene, x) -> float:
    """``b1 / (1 + (c f2)² b1)`` at ``x``."""
    p, q = S.chart.split(x)
    b1 = S.base.grad_norm_sq(S.f1, p)
    return b1 / (1.0 + (S.c * S.f2(q)) ** 2 * b1)


def fiber_plane_curvatures(S: WarpedProductScene, x, X, Y, h: float | None = None) -> tuple[float, float]:
    """``(sec_g2(R2)(X,Y), sec_g2(dπ2 R(X^v,Y^v) Y^v))`` on a fiber 2-plane."""
    p, q = S.chart.split(x)
    g2 = S.fiber.metric_at(q)
    R2 = S.fiber.curvature_at(S.fiber.connection_field(), q)
    R = S.numerical_curvature(GTILDE, x, h=h)
    Xv, Yv = S.chart.embed(2, X), S.chart.embed(2, Y)
    A = S.chart.project(2, np.einsum("lijk,i,j,k->l", R, Xv, Yv, Yv))
    den = (X @ g2 @ X) * (Y @ g2 @ Y) - (X @ g2 @ Y) ** 2
    return sectional_curvature(g2, R2, X, Y), float(X @ g2 @ A / den)


def check_fiber_coefficient(S: WarpedProductScene, n: int = 50, seed: int = 0, h: float | None = None,
                            tol: float = 1e-5) -> IdentityReport:
    """Coefficient of the wedge term in the fiber block of the numerical ``G~`` curvature.

    ``sec_g2(dπ2 R(X^v,Y^v)Y^v) - sec_g2(R2)`` on random fiber 2-planes should
    equal ``-b1/(1+(c f2)² b1)``.
    """
    for x in sample_points(S.box, 8, np.random.default_rng(seed)):
        S.require_parallel_gradients(x)

    def res(x, rng):
        X, Y = rng.standard_normal(S.m2), rng.standard_normal(S.m2)
        sec2, sec_prod = fiber_plane_curvatures(S, x, X, Y, h)
        return np.array([(sec_prod - sec2) + corollary_constant(S, x)])
    return run_identity("warped-curvature: fiber block coefficient = -b1/(1+(c f2)^2 b1)",
                        "fiber block of the G~ curvature under parallel warping gradients", S.box, res, n, seed, tol)


def fiber_coefficients(S: WarpedProductScene, n: int = 20, seed: int = 0, h: float | None = None) -> list[float]:
    """Sampled wedge coefficients, for reporting the value itself."""
    rng = np.random.default_rng(seed)
    out = []
    for x in sample_points(S.box, n, rng):
        X, Y = rng.standard_normal(S.m2), rng.standard_normal(S.m2)
        sec2, sec_prod = fiber_plane_curvatures(S, x, X, Y, h)
        out.append(sec_prod - sec2)
    return out


def check_dually_flat_corollary(S: WarpedProductScene, n: int = 20, seed: int = 0, h: float | None = None,
                                tol: float = 1e-5, base_tol: float = TOL_FIRST,
                                witness_tol: float = TOL_NESTED) -> list[IdentityReport]:
    """Consequences of a dually flat ``G~`` structure on the factors.

    * base curvature of ``∇^1`` and ``∇*^1`` vanishes;
    * the fiber carries constant sectional curvature ``b1/(1+(c f2)² b1)``.
      On each sampled 2-plane the fiber value is read off the relation between
      ``R^2`` and the product fiber block, ``sec(R^2) - sec(dπ2 R)``; this is
      ``sec(R^2)`` itself when the product is flat;
    * the mixed block ``R(X1^h, Y2^v) Z1^h`` vanishes (it forces ``f2`` constant).
    """
    if S.f1.is_constant or S.c == 0.0:
        raise PreconditionViolated("requires a non-constant f1 and c != 0")
    for x in sample_points(S.box, 8, np.random.default_rng(seed)):
        S.require_parallel_gradients(x)
    reports = []
    base = S.base
    for star in (False, True):
        reports.append(check_flat(base.connection_field(star), base.box, n, seed, h, base_tol,
                                  identity=f"corollary: base {'∇*' if star else '∇'} flat"))
    if S.m2 >= 2:
        values = []

        def constant_res(x, rng):
            X, Y = rng.standard_normal(S.m2), rng.standard_normal(S.m2)
            sec2, sec_prod = fiber_plane_curvatures(S, x, X, Y, h)
            kappa = sec2 - sec_prod
            values.append(kappa)
            return np.array([kappa - corollary_constant(S, x)])
        rep = run_identity("corollary: fiber sectional curvature = b1/(1+(c f2)^2 b1)",
                           "constant sectional curvature of the fiber", S.box, constant_res, n, seed, tol)
        rep.identity = f"corollary: fiber sectional curvature {math.fsum(values) / len(values):.6g} = b1/(1+(c f2)^2 b1)"
        reports.append(rep)
        spread = max(values) - min(values)
        reports.append(_report("corollary: fiber sectional curvature spread", "constant sectional curvature of the fiber",
                               [spread], [], tol, seed))

    def witness(x, rng):
        R = S.numerical_curvature(GTILDE, x, h=h)
        e1 = [S.chart.embed(1, v) for v in np.eye(S.m1)]
        e2 = [S.chart.embed(2, v) for v in np.eye(S.m2)]
        return np.array([np.einsum("lijk,i,j,k->l", R, a, b, cc) for a in e1 for b in e2 for cc in e1]).ravel()
    reports.append(run_identity("corollary: mixed block R(X1^h,Y2^v)Z1^h = 0 (f2 constant)",
                                "f2 is a constant function", S.box, witness, n, seed, witness_tol))
    return reports


def probe_grid(box, per_axis: int = 5) -> np.ndarray:
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in box]
    return np.array(np.meshgrid(*axes, indexing="ij")).reshape(len(box), -1).T


def check_metric_condition(S: WarpedProductScene, per_axis: int = 5, seed: int = 0,
                           degeneracy_tol: float = 1e-10) -> list[IdentityReport]:
    """Admissibility ``0 <= c² b1 b2 < 1``, positive definiteness of ``G`` and the degenerate case."""
    grid = probe_grid(S.box, per_axis)
    values = np.array([S.metric_condition(x).value for x in grid])
    below_one = math.nextafter(1.0, 0.0)
    fails = [(tuple(x), (), float(v)) for x, v in zip(grid, values) if not 0.0 <= v < 1.0]
    reports = [_report("metric-condition: 0 <= c^2 b1 b2 < 1", "G is a Riemannian metric iff 0 <= c^2 b1 b2 < 1",
                       values, fails, below_one, seed)]
    pd = []
    for x in grid:
        try:
            np.linalg.cholesky(S.assemble_G(x))
            pd.append(0.0)
        except np.linalg.LinAlgError:
            pd.append(1.0)
    reports.append(_report("metric-condition: G positive definite", "G is a Riemannian metric iff 0 <= c^2 b1 b2 < 1",
                           pd, [], 0.0, seed))
    if np.all(np.abs(values - 1.0) <= 1e-12):
        dets = []
        for x in grid:
            Gm = S.assemble_G(x)
            scale = float(np.prod(np.max(np.abs(Gm), axis=1)))
            dets.append(abs(np.linalg.det(Gm)) / scale)
        reports.append(_report("metric-condition: degenerate when c^2 b1 b2 = 1", "degenerate G forces b_i = 1/(c^2 b_j)",
                               dets, [], degeneracy_tol, seed))
    return reports


def check_reconstruction(S: WarpedProductScene, n: int = 100, seed: int = 0, tol: float = 1e-9) -> IdentityReport:
    """The reconstructed ``X`` satisfies both defining ``G``-equations for every coordinate ``Z``."""
    m1, m2 = S.m1, S.m2

    def res(x, rng):
        phi1, phi2, psi1, psi2 = rng.uniform(-2, 2, 4)
        X1, Y1 = rng.standard_normal(m1), rng.standard_normal(m1)
        X2, Y2 = rng.standard_normal(m2), rng.standard_normal(m2)
        X = S.reconstruct_X(phi1, phi2, psi1, psi2, X1, Y1, X2, Y2, x)
        Gm = S.assemble_G(x)
        lhs_h = np.concatenate([phi2 * X1, phi1 * X2])
        lhs_v = np.concatenate([psi2 * Y1, psi1 * Y2])
        base_eq = (Gm @ (X - lhs_h))[:m1]
        fiber_eq = (Gm @ (X - lhs_v))[m1:]
        return np.concatenate([base_eq, fiber_eq])
    return run_identity("reconstruction lemma", "X from its G-pairings with lifted fields", S.box, res, n, seed, tol)


def _random_field(rng, dim: int, prefix: str) -> VectorField:
    """A smooth polynomial-trigonometric vector field with random coefficients."""
    from .expr import parse

    comps = []
    for _ in range(dim):
        a, b, cc = (float(v) for v in rng.uniform(-1, 1, 3))
        i, j = rng.integers(0, dim, 2)
        comps.append(parse(f"({a!r})*{prefix}{i}*{prefix}{j} + ({b!r})*sin({prefix}{j}) + ({cc!r})", dim, prefix))
    return VectorField(comps)


def check_lift_identities(S: WarpedProductScene, n: int = 100, seed: int = 0, tol: float = 1e-10,
                          bracket_tol: float = 1e-8) -> list[IdentityReport]:
    """Lift calculus on ``M1 x M2`` with random factor fields, functions and 1-forms.

    ``X_i^I(phi) = X_i(phi_i)^I``, ``alpha_i^I(X) = alpha_i(X_i)^I`` and
    ``[X, Y_i^I] = [X_i, Y_i]^I`` (the last by central differences), plus the
    exterior derivative and projection identities.
    """
    from .product import OneForm

    P = S.chart
    m1, m2 = S.m1, S.m2
    bp = S.base.metric[0][0].prefix
    fp = S.fiber.metric[0][0].prefix

    def draw(rng):
        X1, Y1 = _random_field(rng, m1, bp), _random_field(rng, m1, bp)
        X2, Y2 = _random_field(rng, m2, fp), _random_field(rng, m2, fp)
        phi1 = _random_field(rng, m1, bp).components[0]
        phi2 = _random_field(rng, m2, fp).components[0]
        a1 = OneForm(_random_field(rng, m1, bp).components)
        a2 = OneForm(_random_field(rng, m2, fp).components)
        return X1, Y1, X2, Y2, phi1, phi2, a1, a2

    def algebraic(x, rng):
        X1, Y1, X2, Y2, phi1, phi2, a1, a2 = draw(rng)
        p, q = P.split(x)
        phi = P.lift_function(phi1, 1) + P.lift_function(phi2, 2)
        X1h, X2v = P.lift_vector(X1, 1), P.lift_vector(X2, 2)
        X = X1h(x) + X2v(x)
        out = [
            directional_derivative(X1h, phi, x) - X1.apply(phi1)(p),
            directional_derivative(X2v, phi, x) - X2.apply(phi2)(q),
            P.lift_one_form(a1, 1)(x) @ X - a1(p) @ X1(p),
            P.lift_one_form(a2, 2)(x) @ X - a2(q) @ X2(q),
        ]
        # dπ_i ∘ lift_i = id, dπ_{3-i} ∘ lift_i = 0
        out.extend(P.project(1, X1h(x)) - X1(p))
        out.extend(P.project(2, X1h(x)))
        out.extend(P.project(2, X2v(x)) - X2(q))
        out.extend(P.project(1, X2v(x)))
        return np.array(out)

    def bracket(x, rng):
        X1, Y1, X2, Y2, *_ = draw(rng)
        p, q = P.split(x)
        X1h, X2v = P.lift_vector(X1, 1), P.lift_vector(X2, 2)
        Y1h, Y2v = P.lift_vector(Y1, 1), P.lift_vector(Y2, 2)

        def X(z):
            return X1h(z) + X2v(z)
        out = [lie_bracket_fd(X, Y1h, x) - P.embed(1, X1.bracket(Y1)(p)),
               lie_bracket_fd(X, Y2v, x) - P.embed(2, X2.bracket(Y2)(q)),
               # coordinate lifts commute
               lie_bracket_fd(P.lift_vector(VectorField.coordinate(0, m1), 1),
                              P.lift_vector(VectorField.coordinate(0, m2), 2), x)]
        return np.concatenate(out)

    def exterior(x, rng):
        *_, phi1, phi2, a1, a2 = draw(rng)
        p, q = P.split(x)
        phi = P.lift_function(phi1, 1) + P.lift_function(phi2, 2)
        dphi = np.array([central_fd(phi, x, k) for k in range(P.dim)])
        want0 = np.concatenate([[phi1.diff(k)(p) for k in range(m1)], [phi2.diff(k)(q) for k in range(m2)]])
        omega = OneForm([a + b for a, b in zip(P.lift_one_form(a1, 1).components, P.lift_one_form(a2, 2).components)])

        def comps(z):
            return omega(z)
        dcomp = np.array([central_fd(comps, x, k) for k in range(P.dim)])
        domega = dcomp - dcomp.T
        want1 = np.zeros((P.dim, P.dim))
        want1[:m1, :m1] = a1.exterior_derivative(p)
        want1[m1:, m1:] = a2.exterior_derivative(q)
        return np.concatenate([dphi - want0, (domega - want1).ravel()])

    return [
        run_identity("lift: X_i^I(phi) = X_i(phi_i)^I, alpha_i^I(X) = alpha_i(X_i)^I, projections",
                     "lift calculus on M1 x M2", S.box, algebraic, n, seed, tol),
        run_identity("lift: [X, Y_i^I] = [X_i, Y_i]^I (FD commutator)", "lift calculus on M1 x M2",
                     S.box, bracket, n, seed, bracket_tol),
        run_identity("lift: d(w1^h + w2^v) = (dw1)^h + (dw2)^v (FD)", "lift calculus on M1 x M2",
                     S.box, exterior, n, seed, bracket_tol),
    ]


def fd_order_sanity(check: Callable[[float], IdentityReport], h: float, identity: str | None = None,
                    floor: float = 1e-12) -> IdentityReport:
    """``residual(h/2) <= 0.5 residual(h) + floor`` for an FD-based check."""
    full, half = check(h), check(h / 2.0)
    excess = half.max_residual - 0.5 * full.max_residual
    name = identity or f"fd-order: {full.identity}"
    return _report(name, f"O(h^2) truncation: max {full.max_residual:.3e} at h={h:g}, {half.max_residual:.3e} at h/2",
                   [max(excess, 0.0)], [], floor, full.seed)


def reports_to_jsonl(reports: Sequence[IdentityReport]) -> str:
    return "".join(r.to_json() + "\n" for r in reports)


def as_dict(report: IdentityReport) -> dict:
    return asdict(report)
