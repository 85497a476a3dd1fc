"""Generalized warped products and their dualistic structures.

Two product metrics are built from factor metrics ``g1``, ``g2``, positive
warping functions ``f1`` (base) and ``f2`` (fiber) and a real constant ``c``:

``G``   base block ``f2² g1``, fiber block ``f1² g2``, mixed block
        ``c f1 f2 df1 ⊗ df2``;
``G~``  base block ``g1 + (c f2)² df1 ⊗ df1``, fiber block ``f1² g2``, no
        mixed block.

For each metric a pair of product connections is assembled from the factor
pairs ``(∇^i, ∇*^i)``.  Gradients of lifted warping functions in the ``G``
formulas are taken with respect to ``G`` itself; in the ``G~`` formulas the
normalising factor ``1 + (c f2)² b1`` is explicit and the lifted factor
gradients are used.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .expr import ScalarExpr
from .manifold import ChartManifold, ConnectionField, curvature_from, probe_points
from .product import ProductChart
from .tensor_core import solve_sym, symmetrize

G, GTILDE = "G", "Gtilde"
BLOCKS = ("hhh", "vvv", "hhv", "hvh")
PARALLEL_GRADIENT_TOL = 1e-8


class InadmissibleMetric(ValueError):
    """``c² b1 b2`` left ``[0, 1)``: ``G`` is not a Riemannian metric there."""


class PreconditionViolated(ValueError):
    pass


@dataclass(frozen=True)
class MetricCondition:
    value: float
    admissible: bool


@dataclass(frozen=True)
class _Factor:
    """Everything about one warping function at one factor point."""
    f: float
    df: np.ndarray
    g: np.ndarray
    grad: np.ndarray
    b: float
    gamma: np.ndarray
    hess: np.ndarray


@dataclass(frozen=True, eq=False)
class WarpedProductScene:
    base: ChartManifold
    fiber: ChartManifold
    f1: ScalarExpr
    f2: ScalarExpr
    c: float
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.f1.arity != self.base.dim or self.f2.arity != self.fiber.dim:
            raise ValueError("warping function arity must match its factor dimension")
        for label, f, man in (("f1", self.f1, self.base), ("f2", self.f2, self.fiber)):
            for p in probe_points(man.box):
                v = f(p)
                if not (np.isfinite(v) and v > 0.0):
                    raise ValueError(f"{self.name or 'scene'}: non-positive warping function {label}={v!r} at {tuple(p)}")
                b = man.grad_norm_sq(f, p)
                if not np.isfinite(b):
                    raise ValueError(f"{self.name or 'scene'}: g(grad {label}, grad {label}) not finite at {tuple(p)}")

    @cached_property
    def chart(self) -> ProductChart:
        return ProductChart(self.base, self.fiber)

    @property
    def m1(self) -> int:
        return self.base.dim

    @property
    def m2(self) -> int:
        return self.fiber.dim

    @property
    def dim(self) -> int:
        return self.m1 + self.m2

    @property
    def box(self):
        return self.base.box + self.fiber.box

    def with_factors(self, base: ChartManifold | None = None, fiber: ChartManifold | None = None) -> WarpedProductScene:
        return WarpedProductScene(base or self.base, fiber or self.fiber, self.f1, self.f2, self.c, self.name)

    # --- factor data ------------------------------------------------------

    def _factor(self, side: int, star: bool, pt) -> _Factor:
        man, f = (self.base, self.f1) if side == 1 else (self.fiber, self.f2)
        n = man.dim
        g = man.metric_at(pt)
        df = np.array([f.diff(k)(pt) for k in range(n)])
        grad = solve_sym(g, df)
        gamma = man.connection_field(star)(pt)
        ddf = symmetrize([[f.diff(i).diff(j)(pt) if j >= i else 0.0 for j in range(n)] for i in range(n)])
        hess = ddf - np.einsum("kij,k->ij", gamma, df)
        return _Factor(f(pt), df, g, grad, float(df @ grad), gamma, hess)

    def b_values(self, x) -> tuple[float, float]:
        """``b_i = g_i(grad f_i, grad f_i)`` at the factor points of ``x``."""
        p, q = self.chart.split(x)
        return self.base.grad_norm_sq(self.f1, p), self.fiber.grad_norm_sq(self.f2, q)

    # --- metrics ----------------------------------------------------------

    def assemble_G(self, x) -> np.ndarray:
        p, q = self.chart.split(x)
        f1, f2 = self.f1(p), self.f2(q)
        df1 = np.array([self.f1.diff(k)(p) for k in range(self.m1)])
        df2 = np.array([self.f2.diff(k)(q) for k in range(self.m2)])
        out = np.zeros((self.dim, self.dim))
        out[: self.m1, : self.m1] = f2 ** 2 * self.base.metric_at(p)
        out[self.m1:, self.m1:] = f1 ** 2 * self.fiber.metric_at(q)
        out[: self.m1, self.m1:] = self.c * f1 * f2 * np.outer(df1, df2)
        return symmetrize(out)

    def assemble_Gtilde(self, x) -> np.ndarray:
        p, q = self.chart.split(x)
        f1, f2 = self.f1(p), self.f2(q)
        df1 = np.array([self.f1.diff(k)(p) for k in range(self.m1)])
        out = np.zeros((self.dim, self.dim))
        out[: self.m1, : self.m1] = self.base.metric_at(p) + (self.c * f2) ** 2 * np.outer(df1, df1)
        out[self.m1:, self.m1:] = f1 ** 2 * self.fiber.metric_at(q)
        return symmetrize(out)

    def metric(self, kind: str, x) -> np.ndarray:
        return self.assemble_G(x) if kind == G else self.assemble_Gtilde(x)

    def metric_condition(self, x) -> MetricCondition:
        b1, b2 = self.b_values(x)
        value = self.c ** 2 * b1 * b2
        return MetricCondition(value, 0.0 <= value < 1.0)

    # --- B tensors --------------------------------------------------------

    def b_tensor(self, side: int, star: bool, X, Y, pt, metric_scale: float = 1.0) -> float:
        """``B_f(X,Y) = c f H^f(X,Y) + c X(f) Y(f) - metric_scale * g(X,Y)`` on factor ``side``.

        ``H^f`` is the Hessian with respect to ``∇^i`` (``∇*^i`` when ``star``).
        """
        d = self._factor(side, star, pt)
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        return float(self.c * d.f * (X @ d.hess @ Y) + self.c * (X @ d.df) * (Y @ d.df)
                     - metric_scale * (X @ d.g @ Y))

    def _b_matrix(self, d: _Factor, metric_scale: float = 1.0) -> np.ndarray:
        return self.c * d.f * d.hess + self.c * np.outer(d.df, d.df) - metric_scale * d.g

    # --- product connections ----------------------------------------------

    def product_connection_G(self, star: bool, x, *, b_reading: str = "factor",
                             gradient: str = "product") -> np.ndarray:
        """``Γ^k_{ij}`` of ∇ (∇* when ``star``) for ``G`` in product coordinates.

        ``b_reading="lifted"`` scales the metric term of ``B_{f_i}`` by ``1/f_j``
        and ``gradient="factor"`` replaces the ``G``-gradients by lifted factor
        gradients; both exist for diagnostics only.
        """
        x = np.asarray(x, dtype=float)
        cond = self.metric_condition(x)
        if not cond.admissible:
            raise InadmissibleMetric(f"c^2 b1 b2 = {cond.value:.6g} outside [0, 1) at {tuple(x)}")
        m1, m2, n = self.m1, self.m2, self.dim
        p, q = self.chart.split(x)
        d1, d2 = self._factor(1, star, p), self._factor(2, star, q)
        c = self.c
        if gradient == "product":
            Gm = self.assemble_G(x)
            grads = solve_sym(Gm, np.column_stack([np.concatenate([d1.df, np.zeros(m2)]),
                                                   np.concatenate([np.zeros(m1), d2.df])]))
            grad1, grad2 = grads[:, 0], grads[:, 1]
        else:
            grad1 = np.concatenate([d1.grad, np.zeros(m2)])
            grad2 = np.concatenate([np.zeros(m1), d2.grad])
        s1 = 1.0 / d2.f if b_reading == "lifted" else 1.0
        s2 = 1.0 / d1.f if b_reading == "lifted" else 1.0
        B1 = self._b_matrix(d1, s1)
        B2 = self._b_matrix(d2, s2)

        gamma = np.zeros((n, n, n))
        gamma[:m1, :m1, :m1] = d1.gamma
        gamma[:, :m1, :m1] += d2.f * np.einsum("ij,k->kij", B1, grad2)
        gamma[m1:, m1:, m1:] = d2.gamma
        gamma[:, m1:, m1:] += d1.f * np.einsum("ab,k->kab", B2, grad1)
        # mixed: ∇_{∂i^h} ∂a^v = ∇_{∂a^v} ∂i^h
        mixed = -c * np.einsum("i,a,k->kia", d1.df, d2.df, d2.f * grad1 + d1.f * grad2)
        mixed[:m1] += np.einsum("a,ki->kia", d2.df / d2.f, np.eye(m1))
        mixed[m1:] += np.einsum("i,ka->kia", d1.df / d1.f, np.eye(m2))
        gamma[:, :m1, m1:] = mixed
        gamma[:, m1:, :m1] = np.swapaxes(mixed, 1, 2)
        return gamma

    def product_connection_Gtilde(self, star: bool, x) -> np.ndarray:
        """``Γ^k_{ij}`` of ∇ (∇* when ``star``) for ``G~`` in product coordinates."""
        x = np.asarray(x, dtype=float)
        m1, m2, n = self.m1, self.m2, self.dim
        p, q = self.chart.split(x)
        d1, d2 = self._factor(1, star, p), self._factor(2, star, q)
        c = self.c
        D = 1.0 + (c * d2.f) ** 2 * d1.b
        dlog1 = d1.df / d1.f

        gamma = np.zeros((n, n, n))
        gamma[:m1, :m1, :m1] = d1.gamma + (c * d2.f) ** 2 / D * np.einsum("ij,k->kij", d1.hess, d1.grad)
        gamma[m1:, :m1, :m1] = -c ** 2 * d2.f * np.einsum("i,j,k->kij", dlog1, dlog1, d2.grad)
        gamma[m1:, m1:, m1:] = d2.gamma
        gamma[:m1, m1:, m1:] = -d1.f / D * np.einsum("ab,k->kab", d2.g, d1.grad)
        mixed = np.zeros((n, m1, m2))
        mixed[:m1] = c ** 2 * d2.f / D * np.einsum("a,i,k->kia", d2.df, d1.df, d1.grad)
        mixed[m1:] = np.einsum("i,ka->kia", dlog1, np.eye(m2))
        gamma[:, :m1, m1:] = mixed
        gamma[:, m1:, :m1] = np.swapaxes(mixed, 1, 2)
        return gamma

    def product_connection(self, kind: str, star: bool, x, **kw) -> np.ndarray:
        if kind == G:
            return self.product_connection_G(star, x, **kw)
        return self.product_connection_Gtilde(star, x)

    def connection_field(self, kind: str, star: bool = False, **kw) -> ConnectionField:
        key = (kind, star, tuple(sorted(kw.items())))
        cf = self._cache.get(key)
        if cf is None:
            cf = ConnectionField(lambda x: self.product_connection(kind, star, x, **kw), self.dim,
                                 name=f"{'∇*' if star else '∇'}[{kind}]({self.name})")
            self._cache[key] = cf
        return cf

    # --- projection back to the factors -----------------------------------

    def factor_connection_from_product(self, kind: str, side: int, star: bool, product_conn, x) -> np.ndarray:
        """Recover ``Γ^i`` (``Γ*^i``) on factor ``side`` from a product connection at ``x``."""
        x = np.asarray(x, dtype=float)
        gamma = np.asarray(product_conn(x) if callable(product_conn) else product_conn, dtype=float)
        m1 = self.m1
        p, q = self.chart.split(x)
        d1, d2 = self._factor(1, star, p), self._factor(2, star, q)
        blk = slice(0, m1) if side == 1 else slice(m1, None)
        other = slice(m1, None) if side == 1 else slice(0, m1)
        own = gamma[blk, blk, blk]  # dπ_i(∇_{∂i^I} ∂j^I)
        if kind == G:
            mine, theirs = (d1, d2) if side == 1 else (d2, d1)
            # (∇_{X^I} Y^I)(f_j^J): other-block components against df_j
            along = np.einsum("kij,k->ij", gamma[other, blk, blk], theirs.df)
            return own + self.c * mine.f / theirs.f * np.einsum("ij,k->kij", along, mine.grad)
        if side == 2:
            return own.copy()
        # H^{f1^h}(∂i^h, ∂j^h) with respect to the product connection
        ddf = np.array([[self.f1.diff(i).diff(j)(p) for j in range(m1)] for i in range(m1)])
        hprod = ddf - np.einsum("kij,k->ij", gamma[:m1, :m1, :m1], d1.df)
        return own - (self.c * d2.f) ** 2 * np.einsum("ij,k->kij", hprod, d1.grad)

    # --- the reconstruction lemma -----------------------------------------

    def reconstruct_X(self, phi1: float, phi2: float, psi1: float, psi2: float,
                      X1, Y1, X2, Y2, x) -> np.ndarray:
        """The vector ``X`` with ``G(X, Z1^h) = G(phi2 X1^h + phi1 X2^v, Z1^h)`` and
        ``G(X, Z2^v) = G(psi2 Y1^h + psi1 Y2^v, Z2^v)`` for all ``Z``.

        Scalars are the factor functions' values at ``x``.
        """
        x = np.asarray(x, dtype=float)
        cond = self.metric_condition(x)
        if not cond.admissible:
            raise InadmissibleMetric(f"c^2 b1 b2 = {cond.value:.6g} outside [0, 1) at {tuple(x)}")
        m1, m2 = self.m1, self.m2
        p, q = self.chart.split(x)
        f1, f2 = self.f1(p), self.f2(q)
        df1 = np.array([self.f1.diff(k)(p) for k in range(m1)])
        df2 = np.array([self.f2.diff(k)(q) for k in range(m2)])
        X1, Y1, X2, Y2 = (np.asarray(v, dtype=float) for v in (X1, Y1, X2, Y2))
        grads = solve_sym(self.assemble_G(x), np.column_stack([np.concatenate([df1, np.zeros(m2)]),
                                                               np.concatenate([np.zeros(m1), df2])]))
        grad1, grad2 = grads[:, 0], grads[:, 1]
        cff = self.c * f1 * f2
        out = np.concatenate([phi2 * X1, psi1 * Y2])
        out += cff * (psi2 * (Y1 @ df1) - phi2 * (X1 @ df1)) * grad2
        out -= cff * (psi1 * (Y2 @ df2) - phi1 * (X2 @ df2)) * grad1
        return out

    # --- curvature of G~ ---------------------------------------------------

    def parallel_gradient_probe(self, x) -> dict[tuple[int, bool], float]:
        """``max |∇^i grad f_i|`` at the factor points of ``x`` for all four factor connections."""
        p, q = self.chart.split(x)
        out = {}
        for side, man, f, pt in ((1, self.base, self.f1, p), (2, self.fiber, self.f2, q)):
            for star in (False, True):
                D = man.covariant_derivative_of_gradient(f, man.connection_field(star), pt)
                out[side, star] = float(np.max(np.abs(D)))
        return out

    def require_parallel_gradients(self, x, tol: float = PARALLEL_GRADIENT_TOL) -> None:
        probe = self.parallel_gradient_probe(x)
        bad = {k: v for k, v in probe.items() if not v < tol}
        if bad:
            names = ", ".join(f"{'∇*' if star else '∇'}{side} grad f{side}: {v:.3e}" for (side, star), v in bad.items())
            raise PreconditionViolated(f"warping gradients not parallel at {tuple(float(v) for v in np.asarray(x))} ({names})")

    def closed_form_curvature_Gtilde(self, block: str, inputs, x, star: bool = False,
                                     check: bool = True) -> np.ndarray:
        """Product curvature of ∇ for ``G~`` on lifted fields, from factor data.

        ``block`` selects ``R(X1^h,Y1^h)Z1^h`` ("hhh"), ``R(X2^v,Y2^v)Z2^v``
        ("vvv"), ``R(X1^h,Y1^h)Z2^v`` ("hhv") or ``R(X1^h,Y2^v)Z1^h`` ("hvh");
        ``inputs`` are the three factor vectors in that order.  Valid only when
        the warping gradients are parallel; refuses otherwise.
        """
        if block not in BLOCKS:
            raise ValueError(f"unknown block {block!r}; expected one of {BLOCKS}")
        x = np.asarray(x, dtype=float)
        if check:
            self.require_parallel_gradients(x)
        U, V, W = (np.asarray(v, dtype=float) for v in inputs)
        p, q = self.chart.split(x)
        d1, d2 = self._factor(1, star, p), self._factor(2, star, q)
        c = self.c
        D = 1.0 + (c * d2.f) ** 2 * d1.b
        emb = self.chart.embed
        if block == "hhh":
            R1 = self.base.curvature_at(self.base.connection_field(star), p)
            return emb(1, np.einsum("lijk,i,j,k->l", R1, U, V, W))
        if block == "hhv":
            return np.zeros(self.dim)
        if block == "hvh":
            coef = c ** 2 * (U @ d1.df / d1.f) * (W @ d1.df / d1.f) * (V @ d2.df) / D
            return emb(2, coef * d2.grad)
        R2 = self.fiber.curvature_at(self.fiber.connection_field(star), q)
        wedge = (V @ d2.g @ W) * U - (U @ d2.g @ W) * V
        out = emb(2, np.einsum("lijk,i,j,k->l", R2, U, V, W) - d1.b / D * wedge)
        out += emb(1, c ** 2 * d1.f * d2.f * d1.b / D ** 2 * (wedge @ d2.df) * d1.grad)
        return out

    def numerical_curvature(self, kind: str, x, star: bool = False, h: float | None = None) -> np.ndarray:
        cf = self.connection_field(kind, star)
        x = np.asarray(x, dtype=float)
        return curvature_from(cf(x), cf.derivative(x, h))

    def lift_inputs(self, block: str, inputs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        sides = {"hhh": (1, 1, 1), "vvv": (2, 2, 2), "hhv": (1, 1, 2), "hvh": (1, 2, 1)}[block]
        return tuple(self.chart.embed(s, v) for s, v in zip(sides, inputs))
