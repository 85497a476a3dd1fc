import numpy as np
import pytest

from warpgeo.scenespec import SpecError, catalog_names, load_catalog, load_spec, parse_spec

GOOD = """
c = 0.5
f1 = "x0"
f2 = "y0"
[base]
diagonal = ["1"]
[fiber]
diagonal = ["1"]
"""


def test_catalog_contents():
    names = catalog_names()
    for required in ("flat_linear", "gen_warped", "degenerate", "statistical", "polar_sphere", "flat_cone"):
        assert required in names


def test_flat_linear_loads(catalog):
    spec = catalog["flat_linear"]
    S = spec.scene
    assert (S.m1, S.m2, S.c) == (1, 2, 1.0)
    for x in [(0.5, 0.5, 0.5), (2.0, 2.0, 2.0), (1.3, 0.7, 1.9)]:
        b1, b2 = S.b_values(x)
        assert b1 == 0.25 and b2 == 0.0
        assert S.metric_condition(x).value == 0.0


def test_defaults():
    spec = parse_spec(GOOD)
    assert spec.seed == 0 and spec.samples is None and spec.suites == ("all",)
    assert spec.fd_h == 1e-5 and spec.fd_h_curvature == 1e-4
    assert spec.scene.base.box == ((0.5, 2.0),)


def test_full_metric_and_connections():
    text = """
c = 0.1
f1 = "1 + x0"
f2 = "1"
seed = 3
samples = 7
suites = ["conjugacy", "curvature"]
[base]
metric = [["2", "0.1*x0"], ["0.1*x0", "3"]]
box = [[0.5, 1.5], [0.0, 1.0]]
[fiber]
dim = 1
diagonal = ["exp(2*y0)"]
conn = [[["0"]]]
[fd]
h = 2e-5
[tolerance]
first = 1e-7
"""
    spec = parse_spec(text)
    assert spec.seed == 3 and spec.samples == 7 and spec.suites == ("conjugacy", "curvature")
    assert spec.fd_h == 2e-5 and spec.tol_first == 1e-7
    assert np.allclose(spec.scene.base.metric_at([1.0, 0.5]), [[2.0, 0.1], [0.1, 3.0]])
    assert spec.scene.fiber.connection_field(True)([0.0])[0, 0, 0] == pytest.approx(2.0)


def err(text) -> SpecError:
    with pytest.raises(SpecError) as exc:
        parse_spec(text, "t.scene")
    return exc.value


def test_toml_syntax_error_has_line_and_column():
    e = err('c = 0.5\nf1 = "x0\n')
    assert e.line == 2 and e.col is not None


def test_unknown_keys_rejected():
    assert err("extra = 1\n" + GOOD).field == "extra"
    assert err(GOOD.replace('diagonal = ["1"]\n[fiber]', 'diagonal = ["1"]\ncolour = 1\n[fiber]')).field == "base.colour"
    assert err(GOOD + "[fd]\nstep = 1e-3\n").field == "fd.step"


def test_validation_errors_name_the_field():
    e = err(GOOD.replace('f1 = "x0"', 'f1 = "-x0"'))
    assert e.field == "f1" and "non-positive" in str(e)
    e = err(GOOD.replace('diagonal = ["1"]\n[fiber]', 'diagonal = ["1", "x2"]\n[fiber]'))
    assert e.field.startswith("base.diagonal") and "arity" in str(e)
    e = err(GOOD.replace('f2 = "y0"', 'f2 = "y0 +"'))
    assert e.field == "f2" and "offset" in str(e)
    assert err(GOOD.replace("c = 0.5", 'c = "big"')).field == "c"
    assert err(GOOD.replace("c = 0.5\n", "")).field == "c"
    e = err(GOOD.replace('c = 0.5', 'c = 0.5\nsuites = ["everything"]'))
    assert e.field == "suites"
    e = err(GOOD.replace('diagonal = ["1"]\n[fiber]', 'metric = [["1", "x0"], ["0", "1"]]\n[fiber]'))
    assert "symmetric" in str(e)
    e = err(GOOD.replace('diagonal = ["1"]\n[fiber]', 'diagonal = ["1"]\nbox = [[2.0, 1.0]]\n[fiber]'))
    assert e.field == "base.box[0]"


def test_domain_error_names_probe_point():
    e = err(GOOD.replace('f1 = "x0"', 'f1 = "log(x0 - 1)"'))
    assert "probe point" in str(e) or "at (" in str(e)


def test_load_spec_paths(tmp_path):
    p = tmp_path / "mine.scene"
    p.write_text(GOOD)
    assert load_spec(p).name == "mine"
    assert load_spec("flat_linear").name == "flat_linear"
    assert load_spec("flat_linear.scene").name == "flat_linear"
    with pytest.raises(SpecError):
        load_spec(tmp_path / "missing.scene")
    with pytest.raises(SpecError):
        load_catalog("nope")
