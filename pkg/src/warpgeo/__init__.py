"""Numerical verification of dual affine connections on generalized warped products."""
from .expr import ExprError, ScalarExpr, differentiate, evaluate, parse
from .manifold import ChartManifold, ConnectionField, lambda_connection
from .product import ProductChart, VectorField
from .scenespec import SceneSpec, SpecError, load_catalog, load_spec
from .verify import IdentityReport
from .warped import G, GTILDE, InadmissibleMetric, PreconditionViolated, WarpedProductScene

__version__ = "0.1.0"

__all__ = [
    "ChartManifold", "ConnectionField", "ExprError", "G", "GTILDE", "IdentityReport", "InadmissibleMetric",
    "PreconditionViolated", "ProductChart", "ScalarExpr", "SceneSpec", "SpecError", "VectorField",
    "WarpedProductScene", "differentiate", "evaluate", "lambda_connection", "load_catalog", "load_spec", "parse",
]
