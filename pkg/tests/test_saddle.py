import math

import numpy as np
import pytest

from flatpair.saddle import saddle_connections, sigma_distances, systole
from flatpair.surface import bundled

from oracles import octagon_ray_oracle, primitive_vectors


@pytest.mark.parametrize("L", [0.5, 1.0, 1.5, 3.0, 5.0])
def test_square_torus_lattice(L):
    # one marked point: saddle connections are primitive lattice vectors up to sign
    sc = saddle_connections(bundled("square_torus"), L)
    assert len(sc) == len(primitive_vectors(L)) // 2
    assert sorted(round(s.length, 9) for s in sc) == sorted(
        round(math.hypot(*v), 9) for v in primitive_vectors(L) if v > (0, 0))


@pytest.mark.parametrize("L", [0.6, 1.2, 2.5])
def test_torus_2x1_lattice(L):
    # the four marked points form the lattice Z x (1/2)Z, so each point starts
    # one connection per primitive vector of that lattice
    sc = saddle_connections(bundled("torus_2x1"), L)
    assert len(sc) == 4 * len(primitive_vectors(L, 1.0, 0.5)) // 2


@pytest.mark.parametrize("L", [2.0, 3.0, 5.0])
def test_octagon_matches_ray_tracing(L):
    sc = saddle_connections(bundled("octagon"), L)
    oracle = octagon_ray_oracle(L)
    assert len(sc) == len(oracle)
    if L == 2.0:
        # the four glued sides and the eight short diagonals
        assert len(sc) == 12
    assert np.allclose(sorted(s.length for s in sc), sorted(oracle))


def test_systoles():
    assert systole(bundled("square_torus")) == 1.0
    assert systole(bundled("torus_2x1")) == 0.5
    assert systole(bundled("octagon")) == pytest.approx(1.0, abs=1e-12)
    assert systole(bundled("square_torus_2marked")) == pytest.approx(math.sqrt(0.5), abs=1e-12)


def test_scaling():
    S = bundled("octagon")
    a = [s.length for s in saddle_connections(S, 2.0)]
    b = [s.length for s in saddle_connections(S.scaled(3.0), 6.0)]
    assert np.allclose(3 * np.array(a), b)


def test_sigma_distances_symmetric():
    D = np.array(sigma_distances(bundled("square_torus_2marked")))
    assert np.allclose(D, D.T)
    assert D[0, 1] == pytest.approx(math.sqrt(0.5))
