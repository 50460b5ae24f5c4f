import functools

import numpy as np
import pytest

from flatpair.mesh import triangulate
from flatpair.surface import bundled, double_cover


@functools.lru_cache(maxsize=None)
def mesh_of(name: str, h: float):
    """Mesh of a bundled surface; half-translation surfaces are meshed on their double cover."""
    S = bundled(name)
    if S.is_translation:
        return None, triangulate(S, h)
    D = double_cover(S)
    return D, triangulate(D.cover, h)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.summary_lines():
            terminalreporter.write_line(line)
