"""Scene files: TOML text describing two factor manifolds and a warping.

Schema (every key except ``[base]``, ``[fiber]``, ``f1``, ``f2`` and ``c`` is
optional)::

    name = "flat_linear"          # defaults to the file stem
    description = "..."
    c = 1.0
    f1 = "0.5*x0"                 # base expression, variables x0, x1, ...
    f2 = "1"                      # fiber expression, variables y0, y1, ...
    suites = ["all"]              # run when no --suite is given
    seed = 0
    samples = 100                 # overrides every per-check default

    [base]                        # and [fiber]
    dim = 1                       # optional when it can be inferred
    box = [[0.5, 2.0]]            # default [0.5, 2] per coordinate
    metric = [["1"]]              # full symmetric matrix ...
    diagonal = ["1"]              # ... or its diagonal (exactly one of the two)
    conn = [[["0"]]]              # conn[k][i][j] = Γ^k_ij (optional)
    conn_star = [[["0"]]]         # optional; conjugate of conn when omitted
    torsion_free = true

    [fd]
    h = 1e-5                      # first derivatives
    h_curvature = 1e-4            # nested derivatives in curvature

    [tolerance]
    first = 1e-6
    nested = 1e-4
    algebraic = 1e-12

Expressions use the engine grammar: numbers, variables, ``+ - * / ^``
(integer exponents), parentheses and ``exp log sin cos sqrt``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import tomli

from .expr import ExprArityError, ExprDomainError, ExprError, ExprSyntaxError, parse
from .manifold import ChartManifold
from .tensor_core import FD_STEP, FD_STEP_NESTED, DegenerateMatrix
from .warped import WarpedProductScene

SUITES = ("conjugacy", "statistical", "curvature", "warped-curvature", "dually-flat", "metric-condition", "lifts", "all")

TOP_KEYS = {"name", "description", "c", "f1", "f2", "suites", "seed", "samples", "base", "fiber", "fd", "tolerance"}
FACTOR_KEYS = {"dim", "box", "metric", "diagonal", "conn", "conn_star", "torsion_free", "name"}
FD_KEYS = {"h", "h_curvature"}
TOL_KEYS = {"first", "nested", "algebraic"}


class SpecError(Exception):
    """A scene file that cannot be turned into a scene.

    ``line``/``col`` are set for syntax errors, ``field`` for validation errors.
    """

    def __init__(self, msg: str, path: str = "", line: int | None = None, col: int | None = None,
                 field: str | None = None):
        self.msg, self.path, self.line, self.col, self.field = msg, path, line, col, field
        where = path or "<spec>"
        if line is not None:
            where += f":{line}:{col}"
        if field:
            where += f": {field}"
        super().__init__(f"{where}: {msg}")


@dataclass
class SceneSpec:
    scene: WarpedProductScene
    name: str
    description: str = ""
    suites: tuple = ("all",)
    seed: int = 0
    samples: int | None = None
    fd_h: float = FD_STEP
    fd_h_curvature: float = FD_STEP_NESTED
    tol_first: float = 1e-6
    tol_nested: float = 1e-4
    tol_algebraic: float = 1e-12
    source: str = ""
    raw: dict = field(default_factory=dict, repr=False)


def _reject_unknown(table: dict, allowed: set, where: str, path: str):
    extra = sorted(set(table) - allowed)
    if extra:
        raise SpecError(f"unknown key {extra[0]!r} (allowed: {', '.join(sorted(allowed))})", path,
                        field=f"{where}{extra[0]}")


def _number(v, fld: str, path: str, positive: bool = False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecError(f"expected a number, got {v!r}", path, field=fld)
    v = float(v)
    if positive and not v > 0:
        raise SpecError(f"must be positive, got {v!r}", path, field=fld)
    return v


def _expr(text, arity: int, prefix: str, fld: str, path: str):
    if not isinstance(text, (str, int, float)) or isinstance(text, bool):
        raise SpecError(f"expected an expression string, got {text!r}", path, field=fld)
    try:
        return parse(str(text), arity, prefix)
    except ExprSyntaxError as e:
        raise SpecError(f"syntax error at offset {e.offset} in {str(text)!r}: {e.message}", path, field=fld) from e
    except ExprArityError as e:
        raise SpecError(f"arity error: {e}", path, field=fld) from e
    except ExprError as e:
        raise SpecError(str(e), path, field=fld) from e


def _nested(v, depth: int, n: int, fld: str, path: str):
    """Check ``v`` is an ``n x ... x n`` list of the given depth."""
    if depth == 0:
        return
    if not isinstance(v, list) or len(v) != n:
        raise SpecError(f"expected a list of length {n}", path, field=fld)
    for i, item in enumerate(v):
        _nested(item, depth - 1, n, f"{fld}[{i}]", path)


def _factor(table, where: str, prefix: str, path: str) -> ChartManifold:
    if not isinstance(table, dict):
        raise SpecError("expected a table", path, field=where)
    _reject_unknown(table, FACTOR_KEYS, f"{where}.", path)
    has_m, has_d = "metric" in table, "diagonal" in table
    if has_m == has_d:
        raise SpecError("give exactly one of 'metric' or 'diagonal'", path, field=where)
    if has_d:
        diag = table["diagonal"]
        if not isinstance(diag, list) or not diag:
            raise SpecError("expected a non-empty list", path, field=f"{where}.diagonal")
        n = len(diag)
        metric = [[diag[i] if i == j else "0" for j in range(n)] for i in range(n)]
    else:
        metric = table["metric"]
        n = len(metric) if isinstance(metric, list) else 0
        if n == 0:
            raise SpecError("expected a non-empty square matrix", path, field=f"{where}.metric")
        _nested(metric, 2, n, f"{where}.metric", path)
    dim = table.get("dim", n)
    if isinstance(dim, bool) or not isinstance(dim, int) or dim != n:
        raise SpecError(f"dim {dim!r} does not match the {n}x{n} metric", path, field=f"{where}.dim")

    mfield = f"{where}.{'diagonal' if has_d else 'metric'}"
    for i in range(n):
        for j in range(n):
            e = _expr(metric[i][j], n, prefix, f"{mfield}[{i}]" if has_d else f"{mfield}[{i}][{j}]", path)
            if j < i and str(e) != str(_expr(metric[j][i], n, prefix, f"{mfield}[{j}][{i}]", path)):
                raise SpecError(f"metric must be symmetric: [{i}][{j}] = {e} but [{j}][{i}] differs",
                                path, field=f"{mfield}[{i}][{j}]")

    box = table.get("box")
    if box is not None:
        _nested(box, 1, n, f"{where}.box", path)
        for i, iv in enumerate(box):
            if not isinstance(iv, list) or len(iv) != 2:
                raise SpecError("expected [lo, hi]", path, field=f"{where}.box[{i}]")
            lo, hi = (_number(v, f"{where}.box[{i}]", path) for v in iv)
            if not lo < hi:
                raise SpecError(f"need lo < hi, got [{lo}, {hi}]", path, field=f"{where}.box[{i}]")
    conns = {}
    for key in ("conn", "conn_star"):
        if key in table:
            _nested(table[key], 3, n, f"{where}.{key}", path)
            for k in range(n):
                for i in range(n):
                    for j in range(n):
                        _expr(table[key][k][i][j], n, prefix, f"{where}.{key}[{k}][{i}][{j}]", path)
            conns[key] = table[key]
    tf = table.get("torsion_free", True)
    if not isinstance(tf, bool):
        raise SpecError("expected true or false", path, field=f"{where}.torsion_free")
    name = table.get("name", where)
    try:
        return ChartManifold.from_strings(metric, box, conns.get("conn"), conns.get("conn_star"),
                                          torsion_free=tf, name=str(name), prefix=prefix)
    except ExprDomainError as e:
        raise SpecError(f"cannot evaluate {e.subexpr} at probe point {tuple(e.point)}: {e.reason}",
                        path, field=where) from e
    except DegenerateMatrix as e:
        raise SpecError(f"metric is degenerate at a probe point ({e})", path, field=f"{where}.metric") from e
    except ValueError as e:
        raise SpecError(str(e), path, field=where) from e


def parse_spec(text: str, path: str = "<spec>") -> SceneSpec:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        line, col = getattr(e, "lineno", None), getattr(e, "colno", None)
        msg = getattr(e, "msg", str(e))
        raise SpecError(msg, path, line=line, col=col) from e
    return spec_from_dict(data, path)


def spec_from_dict(data: dict, path: str = "<spec>") -> SceneSpec:
    _reject_unknown(data, TOP_KEYS, "", path)
    for key in ("base", "fiber", "f1", "f2", "c"):
        if key not in data:
            raise SpecError("missing required key", path, field=key)
    base = _factor(data["base"], "base", "x", path)
    fiber = _factor(data["fiber"], "fiber", "y", path)
    f1 = _expr(data["f1"], base.dim, "x", "f1", path)
    f2 = _expr(data["f2"], fiber.dim, "y", "f2", path)
    c = _number(data["c"], "c", path)
    name = data.get("name", Path(path).stem if path else "scene")
    try:
        scene = WarpedProductScene(base, fiber, f1, f2, c, str(name))
    except ExprDomainError as e:
        raise SpecError(f"cannot evaluate {e.subexpr} at probe point {tuple(e.point)}: {e.reason}", path,
                        field="f1" if "x" in str(e.subexpr) else "f2") from e
    except ValueError as e:
        msg = str(e)
        fld = "f1" if "f1" in msg else "f2" if "f2" in msg else None
        raise SpecError(msg.split(": ", 1)[-1], path, field=fld) from e

    suites = data.get("suites", ["all"])
    if not isinstance(suites, list) or not suites:
        raise SpecError("expected a non-empty list of suite names", path, field="suites")
    for s in suites:
        if s not in SUITES:
            raise SpecError(f"unknown suite {s!r} (expected one of {', '.join(SUITES)})", path, field="suites")
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise SpecError("expected a non-negative integer", path, field="seed")
    samples = data.get("samples")
    if samples is not None and (isinstance(samples, bool) or not isinstance(samples, int) or samples < 1):
        raise SpecError("expected a positive integer", path, field="samples")

    fd = data.get("fd", {})
    tol = data.get("tolerance", {})
    for table, allowed, where in ((fd, FD_KEYS, "fd"), (tol, TOL_KEYS, "tolerance")):
        if not isinstance(table, dict):
            raise SpecError("expected a table", path, field=where)
        _reject_unknown(table, allowed, f"{where}.", path)
    num = lambda t, k, d, w: _number(t[k], f"{w}.{k}", path, positive=True) if k in t else d  # noqa: E731
    return SceneSpec(
        scene=scene, name=str(name), description=str(data.get("description", "")), suites=tuple(suites),
        seed=seed, samples=samples,
        fd_h=num(fd, "h", FD_STEP, "fd"), fd_h_curvature=num(fd, "h_curvature", FD_STEP_NESTED, "fd"),
        tol_first=num(tol, "first", 1e-6, "tolerance"), tol_nested=num(tol, "nested", 1e-4, "tolerance"),
        tol_algebraic=num(tol, "algebraic", 1e-12, "tolerance"),
        source=path, raw=data,
    )


# --- catalog ----------------------------------------------------------------

CATALOG_SUFFIX = ".scene"


def catalog_names() -> list[str]:
    root = resources.files("warpgeo") / "catalog"
    return sorted(p.name[: -len(CATALOG_SUFFIX)] for p in root.iterdir() if p.name.endswith(CATALOG_SUFFIX))


def catalog_text(name: str) -> str:
    if name.endswith(CATALOG_SUFFIX):
        name = name[: -len(CATALOG_SUFFIX)]
    res = resources.files("warpgeo") / "catalog" / f"{name}{CATALOG_SUFFIX}"
    if not res.is_file():
        raise SpecError(f"no such catalog scene (available: {', '.join(catalog_names())})", name)
    return res.read_text(encoding="utf-8")


def load_catalog(name: str) -> SceneSpec:
    stem = name[: -len(CATALOG_SUFFIX)] if name.endswith(CATALOG_SUFFIX) else name
    return parse_spec(catalog_text(stem), f"{stem}{CATALOG_SUFFIX}")


def load_spec(path) -> SceneSpec:
    """Load a scene file; a bare name (or ``name.scene`` not on disk) falls back to the catalog."""
    p = Path(path)
    if p.is_file():
        try:
            text = p.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise SpecError(f"cannot read file: {e}", str(path)) from e
        return parse_spec(text, str(path))
    if p.parent == Path(".") and p.stem in catalog_names():
        return load_catalog(p.stem)
    raise SpecError("no such file or catalog scene", str(path))
