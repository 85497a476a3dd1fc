"""Product charts ``M1 x M2``: lifts, projections and pull-back connections.

Product coordinates are always base-then-fiber: ``(x0..x(m1-1), y0..y(m2-1))``.
``side`` is ``1`` for the base (horizontal lift) and ``2`` for the fiber
(vertical lift).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .expr import ScalarExpr, constant
from .manifold import ChartManifold, ConnectionField
from .tensor_core import FD_STEP, central_fd

HORIZONTAL, VERTICAL = "horizontal", "vertical"


class VectorField:
    """Vector field whose components are expressions in chart coordinates."""

    def __init__(self, components: Sequence[ScalarExpr]):
        self.components = tuple(components)
        self.arity = self.components[0].arity

    @classmethod
    def constant(cls, values: Sequence[float], arity: int) -> VectorField:
        return cls([constant(v, arity) for v in values])

    @classmethod
    def coordinate(cls, i: int, dim: int) -> VectorField:
        return cls.constant([1.0 if k == i else 0.0 for k in range(dim)], dim)

    def __len__(self):
        return len(self.components)

    def __call__(self, p) -> np.ndarray:
        return np.array([c(p) for c in self.components])

    def apply(self, phi: ScalarExpr) -> ScalarExpr:
        """The function ``X(phi) = Σ X^a ∂_a phi``."""
        out = constant(0.0, self.arity)
        for a, c in enumerate(self.components):
            out = out + c * phi.diff(a)
        return out

    def bracket(self, other: VectorField) -> VectorField:
        """Symbolic Lie bracket ``[X, Y]^k = X(Y^k) - Y(X^k)``."""
        return VectorField([self.apply(yk) - other.apply(xk)
                            for xk, yk in zip(self.components, other.components)])


class OneForm:
    """1-form with expression components ``alpha_a``."""

    def __init__(self, components: Sequence[ScalarExpr]):
        self.components = tuple(components)
        self.arity = self.components[0].arity

    def __call__(self, p) -> np.ndarray:
        return np.array([c(p) for c in self.components])

    def pair(self, X: VectorField, p) -> float:
        return float(self(p) @ X(p))

    def exterior_derivative(self, p) -> np.ndarray:
        """``(dα)_{ab} = ∂_a α_b - ∂_b α_a`` at ``p``."""
        n = len(self.components)
        d = np.array([[self.components[b].diff(a)(p) for b in range(n)] for a in range(n)])
        return d - d.T


@dataclass(frozen=True, eq=False)
class ProductChart:
    base: ChartManifold
    fiber: ChartManifold

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

    def factor(self, side: int) -> ChartManifold:
        return self.base if side == 1 else self.fiber

    def split(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        return x[: self.m1], x[self.m1:]

    def project(self, side: int, V) -> np.ndarray:
        """``dπ_side`` applied to product components."""
        V = np.asarray(V, dtype=float)
        return V[: self.m1] if side == 1 else V[self.m1:]

    def dpi(self, side: int) -> np.ndarray:
        """``dπ1 = [I | 0]``, ``dπ2 = [0 | I]`` as matrices."""
        eye = np.eye(self.dim)
        return eye[: self.m1] if side == 1 else eye[self.m1:]

    def embed(self, side: int, v) -> np.ndarray:
        """Block-embed factor components (values, not fields)."""
        out = np.zeros(self.dim)
        v = np.asarray(v, dtype=float)
        if side == 1:
            out[: self.m1] = v
        else:
            out[self.m1:] = v
        return out

    # --- lifts ------------------------------------------------------------

    def lift_function(self, phi: ScalarExpr, side: int) -> ScalarExpr:
        """``phi^h = phi∘π1`` or ``phi^v = phi∘π2`` as a product expression."""
        if phi.arity != self.factor(side).dim:
            raise ValueError(f"function arity {phi.arity} does not match factor {side} dimension")
        offset = 0 if side == 1 else self.m1
        return phi.shifted(offset, self.dim)

    def lift_vector(self, X: VectorField, side: int) -> LiftedVectorField:
        if len(X) != self.factor(side).dim:
            raise ValueError(f"field dimension {len(X)} does not match factor {side}")
        zero = constant(0.0, self.dim)
        lifted = [self.lift_function(c, side) for c in X.components]
        pad = [zero] * (self.m2 if side == 1 else self.m1)
        comps = lifted + pad if side == 1 else pad + lifted
        return LiftedVectorField(comps, HORIZONTAL if side == 1 else VERTICAL, X)

    def lift_one_form(self, alpha: OneForm, side: int) -> OneForm:
        """``α^h(X) = α(dπ1 X)``: block-embedded components."""
        zero = constant(0.0, self.dim)
        lifted = [self.lift_function(c, side) for c in alpha.components]
        pad = [zero] * (self.m2 if side == 1 else self.m1)
        return OneForm(lifted + pad if side == 1 else pad + lifted)

    def reconstruct_from_projections(self, phi: ScalarExpr, psi: ScalarExpr,
                                     X1: VectorField, X2: VectorField, x) -> np.ndarray:
        """``X = phi X1^h + psi X2^v`` given ``dπ1 X = phi X1∘π1``, ``dπ2 X = psi X2∘π2``.

        ``phi`` and ``psi`` are product functions.
        """
        p, q = self.split(x)
        return np.concatenate([phi(x) * X1(p), psi(x) * X2(q)])

    def pullback_derivative(self, side: int, X, Y: VectorField, x,
                            conn: ConnectionField | None = None) -> np.ndarray:
        """``∇^{π_i}_X (Y∘π_i) = ∇^i_{dπ_i X} Y`` at ``x``.

        Components ``(dπ_i X)^a (∂_a Y^k + Γ^k_{ab} Y^b)`` in factor coordinates.
        """
        factor = self.factor(side)
        if conn is None:
            conn = factor.connection_field()
        pt = self.split(x)[side - 1]
        u = self.project(side, X)
        dY = np.array([[Y.components[k].diff(a)(pt) for k in range(factor.dim)] for a in range(factor.dim)])
        return u @ dY + np.einsum("kab,a,b->k", conn(pt), u, Y(pt))


class LiftedVectorField(VectorField):
    def __init__(self, components, kind: str, factor_field: VectorField):
        super().__init__(components)
        self.kind = kind
        self.factor_field = factor_field


def directional_derivative(X, phi: ScalarExpr, x) -> float:
    """``X(phi)`` at ``x`` with ``X`` given by components (array or field)."""
    if callable(X):
        X = X(x)
    return float(sum(X[a] * phi.diff(a)(x) for a in range(phi.arity)))


def lie_bracket_fd(X, Y, x, h: float = FD_STEP) -> np.ndarray:
    """``[X, Y]^k = X^a ∂_a Y^k - Y^a ∂_a X^k`` with central differences on components."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    dX = np.array([central_fd(X, x, a, h) for a in range(n)])
    dY = np.array([central_fd(Y, x, a, h) for a in range(n)])
    return X(x) @ dY - Y(x) @ dX
