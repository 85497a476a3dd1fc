"""Named suites: which identity checks run for a scene, in a fixed order."""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import verify as V
from .manifold import ChartManifold
from .scenespec import SceneSpec
from .warped import G, GTILDE, InadmissibleMetric, PreconditionViolated, WarpedProductScene

SUITE_ORDER = ("conjugacy", "statistical", "curvature", "warped-curvature", "dually-flat", "metric-condition", "lifts")
DIAGNOSTIC_PREFIX = "diagnostic: "

# per-check sample counts when neither the scene nor the command line sets one
DEFAULT_SAMPLES = {"first": 100, "curvature": 50, "corollary": 20}


@dataclass
class RunOptions:
    seed: int = 0
    samples: int | None = None
    h: float = 1e-5
    h_curvature: float = 1e-4
    tol: float | None = None
    tol_first: float = 1e-6
    tol_nested: float = 1e-4
    tol_algebraic: float = 1e-12
    diagnostic: bool = False

    @classmethod
    def from_spec(cls, spec: SceneSpec, **overrides) -> RunOptions:
        opts = cls(seed=spec.seed, samples=spec.samples, h=spec.fd_h, h_curvature=spec.fd_h_curvature,
                   tol_first=spec.tol_first, tol_nested=spec.tol_nested, tol_algebraic=spec.tol_algebraic)
        return replace(opts, **{k: v for k, v in overrides.items() if v is not None})

    def n(self, kind: str) -> int:
        return self.samples or DEFAULT_SAMPLES[kind]

    def t(self, value: float) -> float:
        return value if self.tol is None else self.tol


@dataclass
class SuiteResult:
    reports: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports if not r.identity.startswith(DIAGNOSTIC_PREFIX))


def _admissible_everywhere(S: WarpedProductScene, seed: int) -> bool:
    pts = np.vstack([V.probe_grid(S.box, 3), V.sample_points(S.box, 16, np.random.default_rng(seed))])
    return all(S.metric_condition(x).admissible for x in pts)


def _factors(S: WarpedProductScene):
    return (("base", S.base), ("fiber", S.fiber))


def _metric(S, kind):
    return lambda x: S.metric(kind, x)


def suite_conjugacy(S: WarpedProductScene, o: RunOptions, out: SuiteResult):
    n, seed = o.n("first"), o.seed
    for label, M in _factors(S):
        lc = M.levi_civita_field()
        out.reports.append(V.check_conjugacy(M.metric_at, lc, lc, M.box, n, seed, o.h, o.t(o.tol_first),
                                             identity=f"self-conjugacy: {label} Levi-Civita"))
        conn, conn_star = M.connection_pair()
        out.reports.append(V.check_conjugacy(M.metric_at, conn, conn_star, M.box, n, seed, o.h, o.t(o.tol_first),
                                             identity=f"conjugacy: {label} (g, ∇, ∇*)"))
        out.reports.append(V.check_midpoint(M, conn, conn_star, n, seed, o.t(1e-10),
                                            identity=f"midpoint: {label} ∇^(0) = Levi-Civita"))
        out.reports.append(V.check_lambda_endpoints(conn, conn_star, M.box, n, seed, o.t(1e-14),
                                                    identity=f"lambda-endpoints: {label}"))
    kinds = [GTILDE]
    if _admissible_everywhere(S, seed):
        kinds.insert(0, G)
    else:
        out.skipped.append("G product connections: metric condition fails on the box")
    for kind in kinds:
        out.reports.append(V.check_conjugacy(_metric(S, kind), S.connection_field(kind), S.connection_field(kind, True),
                                             S.box, n, seed, o.h, o.t(o.tol_first),
                                             identity=f"conjugacy: product {kind} pair"))
    for kind in kinds:
        out.reports.append(check_factor_recovery(S, kind, n, seed, o.t(1e-8)))
    if o.diagnostic and G in kinds:
        for label, kw in (("alternate B reading (1/f_j scaling)", {"b_reading": "lifted"}),
                          ("lifted factor gradients", {"gradient": "factor"})):
            out.reports.append(V.check_conjugacy(
                _metric(S, G), S.connection_field(G, False, **kw), S.connection_field(G, True, **kw),
                S.box, n, seed, o.h, o.t(o.tol_first), identity=f"{DIAGNOSTIC_PREFIX}conjugacy: product G, {label}"))


def check_factor_recovery(S: WarpedProductScene, kind: str, n: int, seed: int, tol: float) -> V.IdentityReport:
    """Recover both factor connections (and duals) from the product connection."""
    fields = {star: S.connection_field(kind, star) for star in (False, True)}

    def res(x, _):
        p, q = S.chart.split(x)
        out = []
        for side, M, pt in ((1, S.base, p), (2, S.fiber, q)):
            for star in (False, True):
                rec = S.factor_connection_from_product(kind, side, star, fields[star], x)
                out.append((rec - M.connection_field(star)(pt)).ravel())
        return np.concatenate(out)
    return V.run_identity(f"factor recovery: {kind}", "factor connections recovered from the product connection",
                          S.box, res, n, seed, tol)


def suite_statistical(S: WarpedProductScene, o: RunOptions, out: SuiteResult):
    n, seed = o.n("first"), o.seed
    for label, M in _factors(S):
        for star in (False, True):
            cf = M.connection_field(star)
            name = f"{label} {'∇*' if star else '∇'}"
            out.reports.append(V.check_torsion_free(cf, M.box, n, seed, o.t(o.tol_algebraic),
                                                    identity=f"torsion-free: {name}"))
            out.reports.append(V.check_nabla_g_symmetric(M.metric_at, cf, M.box, n, seed, o.h, o.t(1e-8),
                                                         identity=f"nabla-g-symmetric: {name}"))
    kinds = [G, GTILDE] if _admissible_everywhere(S, seed) else [GTILDE]
    for kind in kinds:
        for star in (False, True):
            cf = S.connection_field(kind, star)
            name = f"product {kind} {'∇*' if star else '∇'}"
            out.reports.append(V.check_torsion_free(cf, S.box, n, seed, o.t(o.tol_algebraic),
                                                    identity=f"torsion-free: {name}"))
            out.reports.append(V.check_nabla_g_symmetric(_metric(S, kind), cf, S.box, n, seed, o.h, o.t(1e-8),
                                                         identity=f"nabla-g-symmetric: {name}"))


def suite_curvature(S: WarpedProductScene, o: RunOptions, out: SuiteResult):
    n, seed = o.n("curvature"), o.seed
    for label, M in _factors(S):
        conn, conn_star = M.connection_pair()
        out.reports.append(V.check_curvature_duality(M.metric_at, conn, conn_star, M.box, n, seed, o.h_curvature,
                                                     o.t(1e-5), identity=f"curvature-duality: {label}"))
        lam = 0.5
        out.reports.append(V.check_curvature_duality(
            M.metric_at, V.lambda_field(conn, conn_star, lam), V.lambda_field(conn, conn_star, -lam), M.box, n, seed,
            o.h_curvature, o.t(1e-5), identity=f"curvature-duality: {label} (∇^({lam:g}), ∇^({-lam:g}))"))
    kinds = [G, GTILDE] if _admissible_everywhere(S, seed) else [GTILDE]
    for kind in kinds:
        out.reports.append(V.check_curvature_duality(_metric(S, kind), S.connection_field(kind),
                                                     S.connection_field(kind, True), S.box, n, seed, o.h_curvature,
                                                     o.t(o.tol_nested), identity=f"curvature-duality: product {kind}"))


def suite_warped_curvature(S: WarpedProductScene, o: RunOptions, out: SuiteResult):
    n, seed = o.n("curvature"), o.seed
    out.reports.append(V.check_warped_curvature(S, n, seed, o.h_curvature, o.t(o.tol_nested)))
    if S.m2 >= 2:
        out.reports.append(V.check_fiber_coefficient(S, n, seed, o.h_curvature, o.t(1e-5)))


def suite_dually_flat(S: WarpedProductScene, o: RunOptions, out: SuiteResult, expect_hypothesis: bool = False):
    n, seed = o.n("corollary"), o.seed
    if expect_hypothesis and not S.f2.is_constant:
        # a dually flat G~ forces f2 constant, so the hypothesis is known false
        raise PreconditionViolated(f"f2 = {S.f2} is not constant, so G~ cannot be dually flat")
    out.reports.extend(V.check_dually_flat_corollary(S, n, seed, o.h_curvature, o.t(1e-5), o.t(o.tol_first),
                                                     o.t(o.tol_nested)))
    if o.diagnostic:
        for star in (False, True):
            out.reports.append(V.check_flat(S.connection_field(GTILDE, star), S.box, n, seed, o.h_curvature,
                                            o.t(o.tol_first),
                                            identity=f"{DIAGNOSTIC_PREFIX}product G~ {'∇*' if star else '∇'} flat"))


def suite_metric_condition(S: WarpedProductScene, o: RunOptions, out: SuiteResult):
    out.reports.extend(V.check_metric_condition(S, seed=o.seed))


def suite_lifts(S: WarpedProductScene, o: RunOptions, out: SuiteResult):
    n, seed = o.n("first"), o.seed
    out.reports.extend(V.check_lift_identities(S, n, seed, o.t(1e-10), o.t(1e-8)))
    if _admissible_everywhere(S, seed):
        out.reports.append(V.check_reconstruction(S, n, seed, o.t(1e-9)))
    else:
        out.skipped.append("reconstruction lemma: metric condition fails on the box")


SUITE_FUNCS: dict[str, Callable] = {
    "conjugacy": suite_conjugacy,
    "statistical": suite_statistical,
    "curvature": suite_curvature,
    "warped-curvature": suite_warped_curvature,
    "dually-flat": suite_dually_flat,
    "metric-condition": suite_metric_condition,
    "lifts": suite_lifts,
}


def run_suite(spec: SceneSpec | WarpedProductScene, suite: str, opts: RunOptions | None = None,
              log=sys.stderr) -> SuiteResult:
    """Run one suite (or ``all``).

    Explicitly requested suites whose preconditions fail produce a failing
    record; under ``all`` they are skipped with a note on ``log``.
    """
    S = spec.scene if isinstance(spec, SceneSpec) else spec
    if opts is None:
        opts = RunOptions.from_spec(spec) if isinstance(spec, SceneSpec) else RunOptions()
    names = SUITE_ORDER if suite == "all" else (suite,)
    if suite != "all" and suite not in SUITE_FUNCS:
        raise ValueError(f"unknown suite {suite!r}")
    out = SuiteResult()
    for name in names:
        try:
            if name == "dually-flat":
                suite_dually_flat(S, opts, out, expect_hypothesis=suite == "all")
            else:
                SUITE_FUNCS[name](S, opts, out)
        except (PreconditionViolated, InadmissibleMetric) as e:
            if suite == "all":
                out.skipped.append(f"{name}: {e}")
            else:
                out.reports.append(V.IdentityReport(f"{name}: precondition", "preconditions of the suite", 0,
                                                    float("nan"), float("nan"), 0.0, False, opts.seed,
                                                    [(None, None, str(e))]))
    if log is not None:
        for note in out.skipped:
            print(f"skipped {note}", file=log)
    return out


def factor_catalog(specs) -> list[tuple[str, ChartManifold]]:
    """Distinct factor manifolds of a list of scene specs, by name."""
    seen = {}
    for spec in specs:
        for M in (spec.scene.base, spec.scene.fiber):
            seen.setdefault(M.name, M)
    return list(seen.items())
