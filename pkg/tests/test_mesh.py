import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatpair.errors import HalfTranslationInput, HTooLarge
from flatpair.mesh import (TreeCotree, check_genus, homology_basis, intersection_matrix, omega_cochain,
                           relative_paths, triangulate)
from flatpair.pairing import relative_deformation
from flatpair.surface import BUNDLED, bundled, cone_points, genus_area

from conftest import mesh_of


@pytest.mark.parametrize("name", BUNDLED)
def test_topology_and_area(name):
    S = bundled(name)
    M = triangulate(S, 0.25)
    assert check_genus(M)
    assert M.area == pytest.approx(genus_area(S)[1], rel=1e-12)
    assert np.all(M.face_area > 0)
    assert abs(M.d1 @ M.d0).max() == 0


@pytest.mark.parametrize("name", ["octagon", "q1111", "square_torus_2marked"])
def test_angle_sums(name):
    S = bundled(name)
    M = triangulate(S, 0.2)
    ang = M.vertex_angle_sums()
    cone = {int(v): cp.total_angle for v, cp in zip(M.cone_vertex, cone_points(S))}
    for v in range(M.n_vertices):
        expect = cone.get(v, 2 * math.pi)
        assert ang[v] == pytest.approx(expect, abs=1e-9)
    assert np.max(M.face_holonomy_sums()) < 1e-12


@settings(max_examples=6, deadline=None)
@given(st.sampled_from([0.5, 0.3, 0.2, 0.15]), st.sampled_from(["octagon", "torus_2x1"]))
def test_euler_any_h(h, name):
    S = bundled(name)
    M = triangulate(S, h)
    assert M.euler_characteristic == 2 - 2 * genus_area(S)[0]


def test_intersection_form_is_symplectic():
    _, M = mesh_of("octagon", 0.25)
    J = intersection_matrix(M)
    assert J.shape == (4, 4)
    assert np.array_equal(J, -J.T)
    assert round(abs(np.linalg.det(J))) == 1


def test_tree_cotree_cycle_count():
    _, M = mesh_of("q1111", 0.25)
    assert len(TreeCotree(M).cycles()) == 2 * M.genus == 10


def test_omega_cochain_is_holonomy():
    _, M = mesh_of("octagon", 0.25)
    w = omega_cochain(M)
    assert np.allclose(w.alpha, 1) and np.allclose(w.beta, 0, atol=1e-12)
    with pytest.raises(HalfTranslationInput):
        omega_cochain(triangulate(bundled("pillowcase"), 0.25))


def test_involution_maps():
    D, M = mesh_of("q1111", 0.25)
    vperm, eperm, esign, fperm = M.involution_maps(D.involution)
    assert np.array_equal(vperm[vperm], np.arange(M.n_vertices))
    assert np.array_equal(fperm[fperm], np.arange(M.n_faces))
    assert np.allclose(M.edge_holonomy[eperm] * esign, -M.edge_holonomy)
    assert np.allclose(M.face_area[fperm], M.face_area)


def test_bad_h():
    with pytest.raises(HTooLarge):
        triangulate(bundled("octagon"), 0.0)


def test_grading_refines_near_cone_point():
    _, M = mesh_of("octagon", 0.25)
    v = int(M.cone_vertex[0])
    near = np.any(M.face_vertices == v, axis=1)
    assert M.face_area[near].max() < 0.1 * np.median(M.face_area)


def test_homology_cycles_are_closed():
    _, M = mesh_of("octagon", 0.25)
    cycles = homology_basis(M)
    assert len(cycles) == 4
    assert all(c.boundary(M) == {} for c in cycles)


def test_relative_paths():
    _, M = mesh_of("square_torus_2marked", 0.2)
    (path,) = relative_paths(M)
    assert path.boundary(M) == {path.end: 1, path.start: -1}
    # d f integrates to f(end) - f(start) along the path
    eta = relative_deformation(M, [1.0, 3j])
    assert eta.integrate(path.edges) == pytest.approx(3j - 1.0)
    assert relative_paths(triangulate(bundled("octagon"), 0.3)) == []
