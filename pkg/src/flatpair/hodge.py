"""Discrete Hodge theory on flat meshes.

Harmonic representatives minimise the cotangent-weighted Dirichlet energy
over exact corrections; type splitting is done per face on the constant
covector ``alpha dz + beta dzbar``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NonEquivariantMesh, RankDeficient, SolverFailure
from .forms import OneForm
from .mesh import Mesh, TreeCotree, period_vector


def _cache(M: Mesh) -> dict:
    if not hasattr(M, "_hodge_cache"):
        M._hodge_cache = {}
    return M._hodge_cache


def _laplace_solver(M: Mesh):
    cache = _cache(M)
    if "lu" not in cache:
        W = sp.diags(M.cotan_weight)
        L = (M.d0.T @ W @ M.d0).tocsc()
        # pin vertex 0 to remove the constants
        keep = np.arange(1, M.n_vertices)
        cache["lu"] = spla.splu(L[keep][:, keep].tocsc())
        cache["keep"] = keep
    return cache["lu"], cache["keep"]


def codifferential(M: Mesh, eta: OneForm) -> np.ndarray:
    return M.d0.T @ (M.cotan_weight * eta.edge_values)


def dirichlet_energy(M: Mesh, eta: OneForm) -> float:
    """Sum of cotangent weight times squared edge value (equals the L2 norm squared of a real closed form)."""
    return float(np.sum(M.cotan_weight * np.abs(eta.edge_values) ** 2))


def harmonic_representative(M: Mesh, c: OneForm, tol: float = 1e-9) -> OneForm:
    """The cohomologous form ``c + df`` of least energy."""
    if M.n_vertices < 2:
        return OneForm(M, c.edge_values.copy())
    lu, keep = _laplace_solver(M)
    rhs = -(M.d0.T @ (M.cotan_weight * c.edge_values))
    f = np.zeros(M.n_vertices, dtype=complex)
    f[keep] = lu.solve(np.ascontiguousarray(rhs[keep].real)) + 1j * lu.solve(np.ascontiguousarray(rhs[keep].imag))
    out = OneForm(M, c.edge_values + M.d0 @ f)
    scale = max(float(np.max(np.abs(c.edge_values), initial=0.0)), 1.0)
    resid = np.max(np.abs(codifferential(M, out)), initial=0.0)
    if not np.isfinite(resid) or resid > tol * scale * max(1.0, np.max(np.abs(M.cotan_weight))):
        raise SolverFailure(f"harmonic solve residual {resid:.3e}")
    return out


def type_decompose(M: Mesh, eta: OneForm) -> tuple[OneForm, OneForm]:
    cov = eta.face_covectors
    z = np.zeros(len(cov), dtype=complex)
    return (OneForm(M, covectors=np.stack([cov[:, 0], z], axis=1)),
            OneForm(M, covectors=np.stack([z, cov[:, 1]], axis=1)))


def hodge_inner(M: Mesh, a: OneForm, b: OneForm) -> complex:
    ca, cb = a.face_covectors, b.face_covectors
    return complex(np.sum(M.face_area * (ca[:, 0] * np.conj(cb[:, 0]) + ca[:, 1] * np.conj(cb[:, 1]))))


def hodge_norm(M: Mesh, eta: OneForm) -> float:
    cov = eta.face_covectors
    return float(np.sqrt(np.sum(M.face_area * (np.abs(cov[:, 0]) ** 2 + np.abs(cov[:, 1]) ** 2))))


def gram(M: Mesh, forms, part: slice = slice(0, 2)) -> np.ndarray:
    C = np.stack([f.face_covectors[:, part] for f in forms], axis=0)  # (n, F, k)
    return np.einsum("ifk,jfk,f->ij", C, np.conj(C), M.face_area)


@dataclass
class HarmonicBasis:
    forms: list
    cycles: list
    period_matrix: np.ndarray
    gram: np.ndarray


def harmonic_basis(M: Mesh) -> HarmonicBasis:
    cache = _cache(M)
    if "harmonic" not in cache:
        tc = TreeCotree(M)
        cycles = tc.cycles()
        forms = [harmonic_representative(M, OneForm(M, c)) for c in tc.dual_cochains()]
        P = np.array([period_vector(f, cycles) for f in forms]) if forms else np.zeros((0, 0))
        G = gram(M, forms) if forms else np.zeros((0, 0))
        cache["harmonic"] = HarmonicBasis(forms, cycles, P, G)
    return cache["harmonic"]


def combine(M: Mesh, forms, coeffs) -> OneForm:
    ev = sum(c * f.edge_values for c, f in zip(coeffs, forms))
    return OneForm(M, np.asarray(ev, dtype=complex))


def _holomorphic_coefficients(M: Mesh, forms, k: int):
    """Coefficient vectors of the ``k`` combinations closest to type (1,0)."""
    A = gram(M, forms)
    A01 = gram(M, forms, slice(1, 2))
    # v^H A01 v / v^H A v with Gram matrices stored as conj-linear in the second slot
    lam, V = sla.eigh(A01.T, A.T)
    if k and lam[k - 1] > 0.25:
        raise RankDeficient(f"holomorphic subspace not resolved (eigenvalue {lam[k - 1]:.3f})")
    return lam, V[:, :k]


def _orthonormal(M: Mesh, forms):
    G = gram(M, forms)
    # coefficient matrix C with C^H G^T C = I; rows of the result are combinations
    w, U = np.linalg.eigh(G.T)
    if np.min(w, initial=1.0) <= 1e-14 * max(np.max(w, initial=1.0), 1.0):
        raise RankDeficient("forms are linearly dependent")
    return U @ np.diag(w ** -0.5) @ U.conj().T


def _project_10(M: Mesh, eta: OneForm) -> OneForm:
    return type_decompose(M, eta)[0]


def holomorphic_basis(M: Mesh, closed: bool = False) -> list[OneForm]:
    """Hodge-orthonormal basis of discrete holomorphic forms.

    By default each form pairs the edge values of a closed harmonic cochain
    (so periods are exact sums) with the per-face (1,0) part of its
    covector, so the (0,1) part vanishes identically.  With ``closed=True``
    the closed harmonic cochains are returned with their own covectors.
    """
    hb = harmonic_basis(M)
    g = len(hb.forms) // 2
    if g == 0:
        return []
    key = ("holo", closed)
    cache = _cache(M)
    if key not in cache:
        _, V = _holomorphic_coefficients(M, hb.forms, g)
        closed_forms = [combine(M, hb.forms, V[:, j]) for j in range(g)]
        proj = [_project_10(M, f) for f in closed_forms]
        C = _orthonormal(M, proj)
        out_closed = [combine(M, closed_forms, C[:, j]) for j in range(g)]
        out_proj = [OneForm(M, f.edge_values, sum(C[i, j] * proj[i].face_covectors for i in range(g)))
                    for j, f in enumerate(out_closed)]
        cache[("holo", True)] = out_closed
        cache[("holo", False)] = out_proj
    return cache[key]


def _pairs(A: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(A)]


def basis_export(M: Mesh) -> dict:
    """Periods on the tree-cotree cycles and Gram matrices of the harmonic and holomorphic bases.

    Complex entries are written as [re, im] pairs so the result is JSON ready.
    """
    hb = harmonic_basis(M)
    holo = holomorphic_basis(M)
    Ph = np.array([period_vector(f, hb.cycles) for f in holo]) if holo else np.zeros((0, 0))
    return {
        "genus": len(hb.forms) // 2,
        "harmonic_periods": _pairs(hb.period_matrix),
        "harmonic_gram": _pairs(hb.gram),
        "holomorphic_periods": _pairs(Ph) if holo else [],
        "holomorphic_gram": _pairs(gram(M, holo)) if holo else [],
    }


# ---------------------------------------------------------------------------
# deck involution on a double cover
# ---------------------------------------------------------------------------

class Involution:
    """Action of the deck involution on cochains of an equivariant mesh."""

    def __init__(self, D, M: Mesh, tol: float = 1e-9):
        self.mesh = M
        vperm, eperm, esign, fperm = M.involution_maps(D.involution)
        self.vperm, self.eperm, self.esign, self.fperm = vperm, eperm, esign, fperm
        if not (np.all(vperm[vperm] == np.arange(M.n_vertices)) and np.all(fperm[fperm] == np.arange(M.n_faces))):
            raise NonEquivariantMesh("involution does not square to the identity")
        if np.max(np.abs(M.cotan_weight[eperm] - M.cotan_weight)) > tol * (1 + np.max(np.abs(M.cotan_weight))):
            raise NonEquivariantMesh("cotangent weights are not invariant")
        if np.max(np.abs(M.edge_holonomy[eperm] * esign + M.edge_holonomy)) > tol:
            raise NonEquivariantMesh("involution does not negate edge holonomy")

    def pullback(self, eta: OneForm) -> OneForm:
        ev = self.esign * eta.edge_values[self.eperm]
        cov = None
        if eta._cov is not None:
            cov = -eta._cov[self.fperm]
        return OneForm(self.mesh, ev, cov)

    def ramification_vertices(self) -> np.ndarray:
        return np.nonzero(self.vperm == np.arange(self.mesh.n_vertices))[0]


@dataclass
class AntiInvariantBasis:
    holomorphic: list  # H^{1,0}_{-1}, type-projected, orthonormal
    antiholomorphic: list  # H^{0,1}_{-1}, conjugates of the above
    harmonic: list  # closed anti-invariant harmonic forms spanning H^1_{-1}
    holomorphic_closed: list  # closed harmonic cochains behind ``holomorphic``


def anti_invariant_basis(D, M: Mesh) -> AntiInvariantBasis:
    cache = _cache(M)
    if "anti" in cache:
        return cache["anti"]
    tau = Involution(D, M)
    hb = harmonic_basis(M)
    n = len(hb.forms)
    if n == 0:
        out = AntiInvariantBasis([], [], [], [])
        cache["anti"] = out
        return out
    # tau* in the harmonic basis: periods of tau*h_i on the dual cycles
    Pinv = np.linalg.inv(hb.period_matrix)
    T = np.array([period_vector(tau.pullback(f), hb.cycles) for f in hb.forms]) @ Pinv
    # rows of T: tau* h_i = sum_j T[i, j] h_j ; anti-invariant combos v with v^T T = -v^T
    w, V = np.linalg.eig(T.T)
    anti = V[:, np.abs(w + 1) < 1e-6]
    if anti.shape[1] == 0:
        raise NonEquivariantMesh("no anti-invariant classes found")
    Q, _ = np.linalg.qr(anti)
    harm = [combine(M, hb.forms, Q[:, j]) for j in range(Q.shape[1])]
    k = len(harm) // 2
    _, Vh = _holomorphic_coefficients(M, harm, k)
    closed = [combine(M, harm, Vh[:, j]) for j in range(k)]
    proj = [_project_10(M, f) for f in closed]
    C = _orthonormal(M, proj)
    holo_closed = [combine(M, closed, C[:, j]) for j in range(k)]
    holo = [OneForm(M, f.edge_values, sum(C[i, j] * proj[i].face_covectors for i in range(k)))
            for j, f in enumerate(holo_closed)]
    out = AntiInvariantBasis(holo, [b.conj() for b in holo], harm, holo_closed)
    cache["anti"] = out
    cache["tau"] = tau
    return out


def involution(D, M: Mesh) -> Involution:
    cache = _cache(M)
    if "tau" not in cache:
        cache["tau"] = Involution(D, M)
    return cache["tau"]
