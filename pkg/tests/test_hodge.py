import json

import numpy as np
import pytest

from flatpair.forms import OneForm
from flatpair.hodge import (anti_invariant_basis, basis_export, codifferential, gram, harmonic_basis, hodge_inner, hodge_norm,
                            holomorphic_basis, involution, type_decompose)
from flatpair.mesh import omega_cochain, wedge_matrix

from conftest import mesh_of


@pytest.mark.parametrize("h", [0.25, 0.1, 0.05])
def test_flat_torus_basis_exact(h):
    _, M = mesh_of("square_torus", h)
    (w,) = holomorphic_basis(M)
    # on the unit square torus the normalised holomorphic form is a unimodular multiple of dz
    assert np.max(np.abs(w.alpha - w.alpha[0])) < 1e-9
    assert abs(abs(w.alpha[0]) - 1) < 1e-9
    assert np.max(np.abs(w.beta)) < 1e-9
    hb = harmonic_basis(M)
    for f in hb.forms:
        assert np.ptp(f.face_covectors.real, axis=0).max() < 1e-9


@pytest.mark.parametrize("name", ["octagon", "q1111"])
def test_harmonic_forms_are_coclosed(name):
    _, M = mesh_of(name, 0.2)
    for f in harmonic_basis(M).forms:
        assert f.closedness_defect < 1e-10
        assert np.max(np.abs(codifferential(M, f))) < 1e-9


def test_octagon_basis_orthonormal_and_contains_omega():
    _, M = mesh_of("octagon", 0.1)
    hb = holomorphic_basis(M)
    assert len(hb) == 2
    assert np.allclose(gram(M, hb), np.eye(2), atol=1e-12)
    w = omega_cochain(M)
    # omega is holomorphic, so it lies in the span up to discretisation error
    coeffs = np.array([hodge_inner(M, w, b) for b in hb])
    assert np.linalg.norm(coeffs) / hodge_norm(M, w) == pytest.approx(1.0, abs=1e-3)


def test_closed_holomorphic_bilinear_relation():
    # int c ^ conj(c) = -2i (||c^{1,0}||^2 - ||c^{0,1}||^2), with a small (0,1) part
    _, M = mesh_of("octagon", 0.1)
    for b in holomorphic_basis(M, closed=True):
        W = wedge_matrix(M, [b.edge_values, np.conj(b.edge_values)])
        a2 = np.sum(M.face_area * np.abs(b.alpha) ** 2)
        b2 = np.sum(M.face_area * np.abs(b.beta) ** 2)
        assert W[0, 1] == pytest.approx(-2j * (a2 - b2), rel=1e-10)
        assert b2 / a2 < 0.05


def test_type_decomposition():
    _, M = mesh_of("octagon", 0.2)
    f = harmonic_basis(M).forms[0]
    a, b = type_decompose(M, f)
    assert np.allclose(a.face_covectors + b.face_covectors, f.face_covectors)
    assert np.allclose(a.beta, 0) and np.allclose(b.alpha, 0)


@pytest.mark.parametrize("name,dim", [("pillowcase", 1), ("q1111", 3)])
def test_anti_invariant_dimension(name, dim):
    D, M = mesh_of(name, 0.2)
    ab = anti_invariant_basis(D, M)
    assert len(ab.holomorphic) == dim
    assert len(ab.harmonic) == 2 * dim
    tau = involution(D, M)
    for b in ab.holomorphic_closed:
        assert np.allclose(tau.pullback(b).edge_values, -b.edge_values, atol=1e-9)
    assert np.allclose(gram(M, ab.holomorphic), np.eye(dim), atol=1e-12)


def test_conjugate_basis_is_antiholomorphic():
    D, M = mesh_of("q1111", 0.2)
    for b in anti_invariant_basis(D, M).antiholomorphic:
        assert np.max(np.abs(b.alpha)) < 1e-12


def test_omega_is_anti_invariant():
    D, M = mesh_of("q1111", 0.2)
    w = omega_cochain(M)
    tau = involution(D, M)
    assert np.allclose(tau.pullback(w).edge_values, -w.edge_values)
    hb = anti_invariant_basis(D, M).holomorphic
    coeffs = np.array([hodge_inner(M, w, b) for b in hb])
    assert np.linalg.norm(coeffs) / hodge_norm(M, w) == pytest.approx(1.0, abs=1e-3)


def test_forms_arithmetic():
    _, M = mesh_of("octagon", 0.25)
    f, g = harmonic_basis(M).forms[:2]
    s = f + 2j * g
    assert isinstance(s, OneForm)
    assert np.allclose(s.edge_values, f.edge_values + 2j * g.edge_values)
    assert np.allclose(f.conj().edge_values, np.conj(f.edge_values))


def test_basis_export():
    _, M = mesh_of("octagon", 0.25)
    d = json.loads(json.dumps(basis_export(M)))
    assert d["genus"] == 2
    assert np.array(d["harmonic_periods"]).shape == (4, 4, 2)
    G = np.array(d["holomorphic_gram"])
    assert np.allclose(G[..., 0], np.eye(2)) and np.allclose(G[..., 1], 0, atol=1e-12)
