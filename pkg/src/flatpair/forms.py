"""Complex one-forms on a flat mesh.

A form is stored two ways: as a 1-cochain (one complex number per oriented
edge) and as one constant covector ``alpha dz + beta dzbar`` per face.  For a
closed cochain the covector is an exact reconstruction; forms produced by
type projection carry covectors first and derive edge values from them.
"""

from __future__ import annotations

import numpy as np


class OneForm:
    __slots__ = ("mesh", "edge_values", "_cov", "_closed_hint")

    def __init__(self, mesh, edge_values=None, covectors=None):
        if edge_values is None and covectors is None:
            raise ValueError("need edge values or face covectors")
        self.mesh = mesh
        if edge_values is None:
            edge_values = edge_values_from_covectors(mesh, covectors)
        self.edge_values = np.asarray(edge_values, dtype=complex)
        self._cov = None if covectors is None else np.asarray(covectors, dtype=complex)

    @property
    def face_covectors(self) -> np.ndarray:
        """Array of shape (F, 2): columns are alpha and beta."""
        if self._cov is None:
            self._cov = reconstruct_covectors(self.mesh, self.edge_values)
        return self._cov

    @property
    def alpha(self) -> np.ndarray:
        return self.face_covectors[:, 0]

    @property
    def beta(self) -> np.ndarray:
        return self.face_covectors[:, 1]

    def face_sums(self) -> np.ndarray:
        m = self.mesh
        return np.sum(m.face_edge_signs * self.edge_values[m.face_edges], axis=1)

    @property
    def closedness_defect(self) -> float:
        return float(np.max(np.abs(self.face_sums()))) if self.mesh.n_faces else 0.0

    def is_closed(self, rtol: float = 1e-12) -> bool:
        scale = max(float(np.max(np.abs(self.edge_values), initial=0.0)), 1e-300)
        return self.closedness_defect <= rtol * scale

    def reconstruction_residual(self) -> float:
        pred = edge_values_per_side(self.mesh, self.face_covectors)
        m = self.mesh
        actual = m.face_edge_signs * self.edge_values[m.face_edges]
        return float(np.max(np.abs(pred - actual), initial=0.0))

    def integrate(self, chain: dict) -> complex:
        return complex(sum(coef * self.edge_values[e] for e, coef in chain.items()))

    # arithmetic keeps both representations in sync
    def _combine(self, other, fn):
        cov = None
        if self._cov is not None or other._cov is not None:
            cov = fn(self.face_covectors, other.face_covectors)
        return OneForm(self.mesh, fn(self.edge_values, other.edge_values), cov)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __mul__(self, c):
        c = complex(c)
        cov = None if self._cov is None else c * self._cov
        return OneForm(self.mesh, c * self.edge_values, cov)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def conj(self) -> "OneForm":
        """Complex conjugate: ``alpha dz + beta dzbar`` becomes ``conj(beta) dz + conj(alpha) dzbar``."""
        cov = None
        if self._cov is not None:
            cov = np.conj(self._cov[:, ::-1])
        return OneForm(self.mesh, np.conj(self.edge_values), cov)

    def __repr__(self):
        return f"OneForm(edges={len(self.edge_values)}, closed_defect={self.closedness_defect:.2e})"


def side_vectors(mesh) -> np.ndarray:
    """(F, 3) chart vectors of the sides v0->v1, v1->v2, v2->v0."""
    P = mesh.face_pos
    return np.stack([P[:, 1] - P[:, 0], P[:, 2] - P[:, 1], P[:, 0] - P[:, 2]], axis=1)


def edge_values_per_side(mesh, cov) -> np.ndarray:
    u = side_vectors(mesh)
    return cov[:, 0:1] * u + cov[:, 1:2] * np.conj(u)


def reconstruct_covectors(mesh, edge_values) -> np.ndarray:
    """Per-face least-squares fit of ``alpha u + beta conj(u)`` to the side values."""
    b = mesh.face_edge_signs * np.asarray(edge_values)[mesh.face_edges]
    pinv = mesh.covector_pinv
    return np.einsum("fij,fj->fi", pinv, b)


def edge_values_from_covectors(mesh, cov) -> np.ndarray:
    """Edge values averaged over the faces adjacent to each edge."""
    per_side = edge_values_per_side(mesh, np.asarray(cov)) * mesh.face_edge_signs
    acc = np.zeros(mesh.n_edges, dtype=complex)
    np.add.at(acc, mesh.face_edges.ravel(), per_side.ravel())
    return acc / mesh.edge_face_count
