import numpy as np
import pytest

from warpgeo.expr import parse
from warpgeo.manifold import ChartManifold
from warpgeo.scenespec import load_catalog
from warpgeo.warped import WarpedProductScene


def line(prefix="x", metric="1", box=(0.5, 2.0), **kw):
    return ChartManifold.diagonal([metric], box=[box], prefix=prefix, **kw)


def plane(prefix="y", box=(0.5, 2.0)):
    return ChartManifold.diagonal(["1", "1"], box=[box, box], prefix=prefix)


def scene(base, fiber, f1, f2, c):
    return WarpedProductScene(base, fiber, parse(f1, base.dim, "x"), parse(f2, fiber.dim, "y"), c)


@pytest.fixture
def gen_warped():
    return scene(line(), line("y"), "x0", "y0", 0.5)


@pytest.fixture
def flat_linear():
    return scene(line(), plane(), "0.5*x0", "1", 1.0)


@pytest.fixture(scope="session")
def catalog():
    from warpgeo.scenespec import catalog_names
    return {name: load_catalog(name) for name in catalog_names()}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
