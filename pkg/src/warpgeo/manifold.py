"""Single-chart manifolds carrying a metric and a pair of affine connections.

Index conventions used throughout the package:

* connection coefficients ``gamma[k, i, j]`` are ``Γ^k_{ij}``, so that
  ``∇_{∂i} ∂j = Σ_k Γ^k_{ij} ∂k``;
* Christoffel symbols of the first kind ``first[i, j, k]`` are ``Γ_{ij,k}``;
* curvature ``R[l, i, j, k]`` is ``R^l_{ijk}`` with
  ``R(∂i, ∂j) ∂k = Σ_l R^l_{ijk} ∂l`` and
  ``R(X, Y) Z = ∇_X ∇_Y Z - ∇_Y ∇_X Z - ∇_[X,Y] Z``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .expr import ScalarExpr, parse
from .tensor_core import (
    DegenerateMatrix,
    FD_STEP_NESTED,
    check_nondegenerate,
    fd_gradient,
    inverse_sym,
    solve_sym,
    symmetrize,
)

DEFAULT_BOX = (0.5, 2.0)
PROBE_COUNT = 32
TORSION_PROBE_TOL = 1e-12

Box = tuple[tuple[float, float], ...]


class ConnectionField:
    """Point -> ``Γ^k_{ij}`` array, with a derivative for curvature.

    When ``derivative`` is not given, ``∂_a Γ`` is taken by central
    differences with step ``h``.
    """

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], dim: int,
                 derivative: Callable[[np.ndarray], np.ndarray] | None = None,
                 h: float = FD_STEP_NESTED, name: str = ""):
        self._fn = fn
        self.dim = dim
        self._derivative = derivative
        self.h = h
        self.name = name

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self._fn(np.asarray(p, dtype=float)), dtype=float)

    def derivative(self, p, h: float | None = None) -> np.ndarray:
        """``dgamma[a, k, i, j] = ∂_a Γ^k_{ij}``."""
        if self._derivative is not None and h is None:
            return np.asarray(self._derivative(np.asarray(p, dtype=float)), dtype=float)
        return fd_gradient(self, p, self.h if h is None else h)

    @property
    def symbolic(self) -> bool:
        return self._derivative is not None

    def with_step(self, h: float) -> ConnectionField:
        return ConnectionField(self._fn, self.dim, self._derivative, h, self.name)


def expr_connection(exprs, dim: int, name: str = "") -> ConnectionField:
    """Connection given by an expression array ``exprs[k][i][j]``; derivatives are symbolic."""
    flat = [exprs[k][i][j] for k in range(dim) for i in range(dim) for j in range(dim)]
    shape = (dim, dim, dim)

    def fn(p):
        return np.array([e(p) for e in flat]).reshape(shape)

    def deriv(p):
        return np.array([[e.diff(a)(p) for e in flat] for a in range(dim)]).reshape((dim,) + shape)

    return ConnectionField(fn, dim, deriv, name=name)


def lambda_connection(gamma: np.ndarray, gamma_star: np.ndarray, lam: float) -> np.ndarray:
    """``Γ^(λ) = ((1+λ)/2) Γ + ((1-λ)/2) Γ*``."""
    return 0.5 * (1.0 + lam) * np.asarray(gamma) + 0.5 * (1.0 - lam) * np.asarray(gamma_star)


def curvature_from(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    """Riemann tensor ``R^l_{ijk}`` from ``Γ`` and ``∂Γ`` at one point.

    ``R^l_{ijk} = ∂_i Γ^l_{jk} - ∂_j Γ^l_{ik} + Γ^m_{jk} Γ^l_{im} - Γ^m_{ik} Γ^l_{jm}``.
    The result is antisymmetric in ``(i, j)`` to the last bit.
    """
    # t[l, i, j, k] = ∂_i Γ^l_{jk} + Σ_m Γ^m_{jk} Γ^l_{im}
    t = np.einsum("iljk->lijk", dgamma) + np.einsum("mjk,lim->lijk", gamma, gamma)
    return t - np.swapaxes(t, 1, 2)


def lower_curvature(g: np.ndarray, R: np.ndarray) -> np.ndarray:
    """``R_{ijkm} = g(R(∂i, ∂j) ∂k, ∂m)``."""
    return np.einsum("ml,lijk->ijkm", g, R)


def sectional_curvature(g: np.ndarray, R: np.ndarray, X, Y) -> float:
    """``g(R(X,Y)Y, X) / (g(X,X) g(Y,Y) - g(X,Y)^2)``."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    RXYY = np.einsum("lijk,i,j,k->l", R, X, Y, Y)
    num = X @ g @ RXYY
    den = (X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2
    return float(num / den)


def probe_points(box: Box, n: int = PROBE_COUNT, seed: int = 0) -> np.ndarray:
    """Deterministic probe points covering a box (corners first, then random)."""
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    rng = np.random.default_rng(seed)
    pts = [lo, hi, 0.5 * (lo + hi)]
    pts.extend(lo + (hi - lo) * rng.random(len(box)) for _ in range(max(n - 3, 0)))
    return np.array(pts[:n])


@dataclass(frozen=True, eq=False)
class ChartManifold:
    """A manifold described in one chart: metric field, optional connection pair, sampling box.

    Without explicit connections the pair defaults to (Levi-Civita, Levi-Civita).
    With only ``conn`` given, ``conn_star`` is its conjugate with respect to the metric.
    """

    dim: int
    metric: tuple[tuple[ScalarExpr, ...], ...]
    box: Box
    conn: tuple | None = None
    conn_star: tuple | None = None
    torsion_free: bool = True
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if len(self.box) != self.dim or any(lo >= hi for lo, hi in self.box):
            raise ValueError(f"{self.name or 'manifold'}: box must give lo < hi for each of {self.dim} coordinates")
        self._validate()

    # --- construction -----------------------------------------------------

    @classmethod
    def from_strings(cls, metric: Sequence[Sequence[str]], box: Sequence[Sequence[float]] | None = None,
                     conn=None, conn_star=None, torsion_free: bool = True, name: str = "",
                     prefix: str = "x") -> ChartManifold:
        """Build from expression text.  Only the upper triangle of ``metric`` is read."""
        n = len(metric)
        upper = {}
        for i in range(n):
            if len(metric[i]) != n:
                raise ValueError(f"{name or 'manifold'}: metric must be {n}x{n}")
            for j in range(i, n):
                upper[i, j] = parse(str(metric[i][j]), n, prefix)
        rows = tuple(tuple(upper[min(i, j), max(i, j)] for j in range(n)) for i in range(n))
        if box is None:
            box = [DEFAULT_BOX] * n
        box = tuple((float(lo), float(hi)) for lo, hi in box)

        def conn_exprs(c):
            if c is None:
                return None
            if len(c) != n or any(len(row) != n or any(len(v) != n for v in row) for row in c):
                raise ValueError(f"{name or 'manifold'}: connection must be a {n}x{n}x{n} array")
            return tuple(tuple(tuple(parse(str(c[k][i][j]), n, prefix) for j in range(n))
                               for i in range(n)) for k in range(n))

        return cls(n, rows, box, conn_exprs(conn), conn_exprs(conn_star), torsion_free, name)

    @classmethod
    def diagonal(cls, entries: Sequence[str], box=None, **kw) -> ChartManifold:
        n = len(entries)
        metric = [[entries[i] if i == j else "0" for j in range(n)] for i in range(n)]
        return cls.from_strings(metric, box, **kw)

    def _validate(self):
        label = self.name or "manifold"
        for i in range(self.dim):
            for j in range(self.dim):
                if self.metric[i][j] is not self.metric[j][i]:
                    raise ValueError(f"{label}: metric[{i}][{j}] and metric[{j}][{i}] must be the same expression")
        for p in probe_points(self.box):
            try:
                np.linalg.cholesky(self.metric_at(p))
            except np.linalg.LinAlgError as e:
                if isinstance(e, DegenerateMatrix):
                    raise
                raise ValueError(f"{label}: metric not positive definite at {tuple(float(v) for v in p)}") from e
            for which, c in (("conn", self.conn), ("conn_star", self.conn_star)):
                if c is None:
                    continue
                gamma = np.array([[[e(p) for e in row] for row in plane] for plane in c])
                if not np.all(np.isfinite(gamma)):
                    raise ValueError(f"{label}: {which} not finite at {tuple(p)}")
                if self.torsion_free and np.max(np.abs(gamma - np.swapaxes(gamma, 1, 2))) > TORSION_PROBE_TOL:
                    raise ValueError(f"{label}: {which} declared torsion-free but Γ^k_ij != Γ^k_ji at {tuple(p)}")

    # --- metric -----------------------------------------------------------

    def metric_at(self, p) -> np.ndarray:
        g = symmetrize([[self.metric[i][j](p) if j >= i else 0.0 for j in range(self.dim)]
                        for i in range(self.dim)])
        if not np.all(np.isfinite(g)):
            raise ValueError(f"{self.name or 'manifold'}: metric not finite at {tuple(p)}")
        check_nondegenerate(g)
        return g

    def metric_partials(self, p) -> np.ndarray:
        """``dg[k, i, j] = ∂_k g_ij`` from symbolic derivatives."""
        n = self.dim
        dg = np.zeros((n, n, n))
        for k in range(n):
            for i in range(n):
                for j in range(i, n):
                    dg[k, i, j] = dg[k, j, i] = self.metric[i][j].diff(k)(p)
        return dg

    def cometric_at(self, p) -> np.ndarray:
        return inverse_sym(self.metric_at(p))

    def sharp(self, p, alpha) -> np.ndarray:
        return solve_sym(self.metric_at(p), alpha)

    def flat(self, p, X) -> np.ndarray:
        return self.metric_at(p) @ np.asarray(X, dtype=float)

    def cometric_inner(self, p, alpha, beta) -> float:
        g = self.metric_at(p)
        return float(solve_sym(g, alpha) @ g @ solve_sym(g, beta))

    # --- connections ------------------------------------------------------

    def christoffel_first_kind(self, p) -> np.ndarray:
        """``Γ_{ij,k} = ½(∂_j g_ik + ∂_i g_jk - ∂_k g_ij)`` as ``first[i, j, k]``."""
        dg = self.metric_partials(p)
        return 0.5 * (np.einsum("jik->ijk", dg) + dg - np.einsum("kij->ijk", dg))

    def levi_civita_at(self, p) -> np.ndarray:
        first = self.christoffel_first_kind(p)
        gamma = solve_sym(self.metric_at(p), first.reshape(-1, self.dim).T)
        gamma = gamma.reshape(self.dim, self.dim, self.dim)
        # exact symmetry in the lower indices
        return 0.5 * (gamma + np.swapaxes(gamma, 1, 2))

    def conjugate_at(self, p, gamma) -> np.ndarray:
        """The conjugate connection: solves ``Σ_l g_il Γ*^l_kj = ∂_k g_ij - Γ_{ki,j}``."""
        gamma = np.asarray(gamma, dtype=float)
        g = self.metric_at(p)
        dg = self.metric_partials(p)
        lowered = np.einsum("lki,lj->kij", gamma, g)  # Γ_{ki,j}
        rhs = dg - lowered  # indexed [k, i, j]; unknown is g_il Γ*^l_kj
        # rhs[k, i, j] = Σ_l g_il Γ*^l_{kj}  ->  solve for each (k, j)
        sol = solve_sym(g, np.einsum("kij->ikj", rhs).reshape(self.dim, -1))
        return sol.reshape(self.dim, self.dim, self.dim)

    def levi_civita_field(self) -> ConnectionField:
        return ConnectionField(self.levi_civita_at, self.dim, name=f"LC({self.name})")

    def connection_field(self, star: bool = False) -> ConnectionField:
        """The manifold's ∇ (or ∇* when ``star``) as a field."""
        key = ("conn", star)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        primary, dual = (self.conn_star, self.conn) if star else (self.conn, self.conn_star)
        label = f"{'∇*' if star else '∇'}({self.name})"
        if primary is not None:
            cf = expr_connection(primary, self.dim, label)
        elif dual is not None:
            other = expr_connection(dual, self.dim)
            cf = ConnectionField(lambda p: self.conjugate_at(p, other(p)), self.dim, name=label)
        else:
            cf = ConnectionField(self.levi_civita_at, self.dim, name=label)
        self._cache[key] = cf
        return cf

    def connection_pair(self) -> tuple[ConnectionField, ConnectionField]:
        return self.connection_field(False), self.connection_field(True)

    def curvature_at(self, conn: ConnectionField, p, h: float | None = None) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return curvature_from(conn(p), conn.derivative(p, h))

    # --- functions --------------------------------------------------------

    def gradient_at(self, f: ScalarExpr, p) -> np.ndarray:
        return self.sharp(p, [f.diff(i)(p) for i in range(self.dim)])

    def hessian_at(self, f: ScalarExpr, gamma, p) -> np.ndarray:
        """``H_ij = ∂_i ∂_j f - Σ_k Γ^k_ij ∂_k f``; ``gamma`` is an array or a field."""
        if callable(gamma):
            gamma = gamma(p)
        df = np.array([f.diff(k)(p) for k in range(self.dim)])
        ddf = np.array([[f.diff(i).diff(j)(p) for j in range(self.dim)] for i in range(self.dim)])
        return ddf - np.einsum("kij,k->ij", gamma, df)

    def grad_norm_sq(self, f: ScalarExpr, p) -> float:
        """``g(grad f, grad f)``."""
        df = np.array([f.diff(k)(p) for k in range(self.dim)])
        return float(df @ solve_sym(self.metric_at(p), df))

    def covariant_derivative_of_gradient(self, f: ScalarExpr, conn: ConnectionField, p) -> np.ndarray:
        """``D[a, k] = (∇_{∂a} grad f)^k``, exact via ``∂(g⁻¹) = -g⁻¹ ∂g g⁻¹``."""
        p = np.asarray(p, dtype=float)
        ginv = self.cometric_at(p)
        dg = self.metric_partials(p)
        df = np.array([f.diff(k)(p) for k in range(self.dim)])
        ddf = np.array([[f.diff(a).diff(b)(p) for b in range(self.dim)] for a in range(self.dim)])
        grad = ginv @ df
        dgrad = np.einsum("kl,alm,m->ak", -ginv, dg, grad) + ddf @ ginv  # ∂_a grad^k
        return dgrad + np.einsum("kab,b->ak", conn(p), grad)
