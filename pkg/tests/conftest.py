import numpy as np
import pytest

from lpimd.config import load_benchmark
from lpimd.geometry import BoundaryGroup, SUPPORT, generate_rect_mesh
from lpimd.model import Model


def clamp_left(mesh):
    groups = [BoundaryGroup(g.tag, g.edges, role=SUPPORT) if g.tag == "left" else g
              for g in mesh.groups]
    return mesh.replace_groups(groups)


@pytest.fixture
def small_beam():
    """2 x 1 quad beam, clamped left, shear traction on the right: 16 elements."""
    mesh = clamp_left(generate_rect_mesh(2.0, 1.0, 4, 2))
    return Model(mesh, tractions={"right": (0.0, -5.0)})


def _tri_beam():
    mesh = clamp_left(generate_rect_mesh(2.0, 1.0, 4, 3, kind="tri3"))
    return Model(mesh, tractions={"right": (1.0, -3.0), "top": (0.5, 0.0)})


@pytest.fixture
def small_tri_beam():
    return _tri_beam()


@pytest.fixture(scope="session")
def small_tri_beam_cached():
    """Shared instance for property tests; must not be mutated."""
    return _tri_beam()


_MODELS = {}


def benchmark_model(name):
    if name not in _MODELS:
        cfg = load_benchmark(name)
        model = Model(cfg.build_mesh(), **cfg.model_kwargs())
        model.rep
        _MODELS[name] = (cfg, model)
    return _MODELS[name]


@pytest.fixture(scope="session")
def lshape():
    return benchmark_model("lshape")


@pytest.fixture(scope="session")
def cantilever():
    return benchmark_model("cantilever")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
