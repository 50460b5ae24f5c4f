"""Pairing of a relative class [eta] with a quadratic differential q.

Everything is evaluated in the flat coordinate w of omega, so omega = dw
on every face and the integrand q eta^{0,1}/omega of a face is the constant
``q_f beta_f`` (the ``dz dzbar`` convention integrates it against dx dy).

Around a point z_j of Sigma the faces within the chart radius are developed
with z_j at the origin.  The excluded disk is the regular polygon with
``samples`` vertices per full turn, identical on every sheet of the cone, so
the contour and the clipped bulk integrals see exactly the same region and
the Stokes identity behind radius invariance holds face by face.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import NotClosed, NotHarmonic, NotPrincipal, RadiusTooLarge
from .forms import OneForm, edge_values_from_covectors
from .mesh import Mesh, omega_cochain

DEFAULT_RADIUS_FACTOR = 0.4
DEFAULT_CONTOUR_SAMPLES = 512  # polygon vertices per 2 pi of cone angle
# rotation of the contour polygon (fraction of one chord) keeping its vertices off mesh rays
_PHASE = 0.3819660112501051


# ---------------------------------------------------------------------------
# quadratic differentials
# ---------------------------------------------------------------------------

class QDElement:
    """Quadratic differential ``sum c_ij w_i w_j`` over a list of one-forms.

    Only the (1,0) parts of the forms enter, so per face the value is
    ``sum c_ij alpha_i alpha_j`` in the coefficient of dw^2.
    """

    def __init__(self, forms, coeffs):
        self.forms = list(forms)
        c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
        if c.shape != (len(self.forms), len(self.forms)):
            raise ValueError("coefficient matrix does not match the number of forms")
        self.coeffs = 0.5 * (c + c.T)

    @property
    def mesh(self) -> Mesh:
        return self.forms[0].mesh

    @classmethod
    def omega_squared(cls, M: Mesh, c: complex = 1.0) -> "QDElement":
        return cls([omega_cochain(M)], [[c]])

    @classmethod
    def omega_times(cls, M: Mesh, forms, coeffs) -> "QDElement":
        """``omega * sum_k c_k beta_k``, the form used for pulled-back differentials on a cover."""
        k = len(forms)
        C = np.zeros((k + 1, k + 1), dtype=complex)
        C[0, 1:] = C[1:, 0] = 0.5 * np.asarray(coeffs, dtype=complex)
        return cls([omega_cochain(M)] + list(forms), C)

    def face_values(self) -> np.ndarray:
        A = np.stack([f.alpha for f in self.forms])
        return np.einsum("ij,if,jf->f", self.coeffs, A, A)

    def __mul__(self, lam) -> "QDElement":
        return QDElement(self.forms, complex(lam) * self.coeffs)

    __rmul__ = __mul__

    def __add__(self, other: "QDElement") -> "QDElement":
        n, m = len(self.forms), len(other.forms)
        C = np.zeros((n + m, n + m), dtype=complex)
        C[:n, :n] = self.coeffs
        C[n:, n:] = other.coeffs
        return QDElement(self.forms + other.forms, C)

    def reconstruction_defect(self) -> float:
        """Largest relative (0,1) content among the factor forms."""
        M = self.mesh
        out = 0.0
        for f in self.forms:
            cov = f.face_covectors
            tot = np.sum(M.face_area * (np.abs(cov[:, 0]) ** 2 + np.abs(cov[:, 1]) ** 2))
            if tot > 0:
                out = max(out, float(np.sqrt(np.sum(M.face_area * np.abs(cov[:, 1]) ** 2) / tot)))
        return out


def _q_values(M: Mesh, q) -> np.ndarray:
    if q is None:
        return np.ones(M.n_faces, dtype=complex)
    if isinstance(q, QDElement):
        return q.face_values()
    g = np.asarray(q, dtype=complex)
    return np.full(M.n_faces, g) if g.ndim == 0 else g


# ---------------------------------------------------------------------------
# developed neighbourhoods of points of Sigma
# ---------------------------------------------------------------------------

def _dist_to_triangle(D) -> float:
    a, b, c = D
    if all(((y - x).conjugate() * (0 - x)).imag >= 0 for x, y in ((a, b), (b, c), (c, a))):
        return 0.0
    out = math.inf
    for x, y in ((a, b), (b, c), (c, a)):
        d = y - x
        u = min(1.0, max(0.0, -(x.conjugate() * d).real / abs(d) ** 2))
        out = min(out, abs(x + u * d))
    return out


class ConeChart:
    """Faces within flat distance ``radius`` of a point of Sigma, developed around it.

    A face may occur several times (once per sheet it meets); each occurrence
    is a *state* with its own translation offset.  ``zeta`` maps a developed
    point to the uniformizing coordinate in which omega = (n+1) zeta^n dzeta.
    """

    def __init__(self, M: Mesh, j: int, radius: float):
        if not M.is_translation:
            raise NotImplementedError("cone charts need a translation mesh")
        self.mesh = M
        self.index = j
        self.radius = float(radius)
        cp = M.cone_points[j]
        self.order = cp.order
        self.total_angle = cp.total_angle
        v0 = int(M.cone_vertex[j])
        f0, k0 = map(int, np.argwhere(M.face_vertices == v0)[0])
        tol = 1e-9 * max(1.0, self.radius)

        off0 = -M.face_pos[f0, k0]
        faces, offsets, parent = [f0], [off0], [(-1, -1, k0)]
        index = {(f0, int(round(off0.real / tol)), int(round(off0.imag / tol))): 0}
        nbr = []
        head = 0
        while head < len(faces):
            s = head
            head += 1
            f, off = faces[s], offsets[s]
            row = []
            for k in range(3):
                e = M.face_edges[f, k]
                other = [(g, kk) for g, kk in M.edge_faces[e] if (g, kk) != (f, k)]
                g, kk = other[0]
                tail = M.face_pos[f, k] if M.face_edge_signs[f, k] > 0 else M.face_pos[f, (k + 1) % 3]
                tail2 = M.face_pos[g, kk] if M.face_edge_signs[g, kk] > 0 else M.face_pos[g, (kk + 1) % 3]
                off2 = tail + off - tail2
                D = M.face_pos[g] + off2
                if _dist_to_triangle(D) > self.radius:
                    row.append(-1)
                    continue
                key = (int(g), int(round(off2.real / tol)), int(round(off2.imag / tol)))
                if key not in index:
                    index[key] = len(faces)
                    faces.append(int(g))
                    offsets.append(off2)
                    parent.append((s, k, kk))
                row.append(index[key])
            nbr.append(row)
            if len(faces) > 4 * M.n_faces:
                raise RadiusTooLarge("cone neighbourhood does not embed")
        self.faces = np.array(faces, dtype=np.int64)
        self.offsets = np.array(offsets, dtype=complex)
        self.nbr = np.array(nbr, dtype=np.int64)
        self.parent = parent
        self.pos = M.face_pos[self.faces] + self.offsets[:, None]
        self._check_embedding(v0)
        self._lift_angles()

    def _check_embedding(self, v0: int):
        M = self.mesh
        near0 = np.abs(self.pos) < 1e-9 * max(1.0, self.radius)
        angle = 0.0
        for s, k in zip(*np.nonzero(near0)):
            if M.face_vertices[self.faces[s], k] != v0:
                raise RadiusTooLarge("developed chart is inconsistent")
            P = self.pos[s]
            a, b = P[(k + 1) % 3], P[(k - 1) % 3]
            angle += abs(math.atan2((b / a).imag, (b / a).real))
        if abs(angle - self.total_angle) > 1e-6:
            raise RadiusTooLarge("disk around a point of Sigma overlaps itself")
        sigma = set(int(v) for v in M.cone_vertex)
        for s, k in zip(*np.nonzero(~near0)):
            v = int(M.face_vertices[self.faces[s], k])
            if v in sigma and abs(self.pos[s, k]) < self.radius:
                raise RadiusTooLarge("another point of Sigma lies inside the disk")

    def _lift_angles(self):
        """Continuous angle of each state's centroid, for the uniformizing coordinate."""
        c = self.pos.mean(axis=1)
        lift = np.zeros(len(c))
        lift[0] = math.atan2(c[0].imag, c[0].real)
        for s in range(1, len(c)):
            p = self.parent[s][0]
            d = c[s] / c[p]
            lift[s] = lift[p] + math.atan2(d.imag, d.real)
        self.centroid_angle = lift

    @property
    def n_states(self) -> int:
        return len(self.faces)

    def zeta(self, s: int, w: complex) -> complex:
        """Uniformizing coordinate of the developed point ``w`` lying in state ``s``."""
        n1 = self.order + 1
        ref = self.centroid_angle[s]
        d = w / np.exp(1j * ref)
        theta = ref + math.atan2(d.imag, d.real)
        return complex(abs(w) ** (1.0 / n1) * np.exp(1j * theta / n1))

    def primitive(self, edge_values: np.ndarray) -> np.ndarray:
        """Values of ``F(z) = int_{z_j}^z eta`` at the corners of every state.

        ``edge_values`` has shape (E,) or (K, E); the result has shape (K, S, 3).
        """
        ev = np.atleast_2d(edge_values)
        side = self._side_values(ev)
        F = np.zeros((ev.shape[0], self.n_states, 3), dtype=complex)
        for s in range(self.n_states):
            p, pk, k = self.parent[s]
            if p < 0:
                F[:, s, k] = 0.0
            else:
                F[:, s, k] = F[:, p, (pk + 1) % 3]
            F[:, s, (k + 1) % 3] = F[:, s, k] + side[:, s, k]
            F[:, s, (k + 2) % 3] = F[:, s, (k + 1) % 3] + side[:, s, (k + 1) % 3]
        return F

    def _side_values(self, ev: np.ndarray) -> np.ndarray:
        M = self.mesh
        fe = M.face_edges[self.faces]
        sg = M.face_edge_signs[self.faces]
        return sg[None] * ev[:, fe]

    def vertex_distances(self) -> dict:
        """Smallest developed distance of each mesh vertex inside the chart."""
        M = self.mesh
        out: dict = {}
        for s in range(self.n_states):
            for k in range(3):
                v = int(M.face_vertices[self.faces[s], k])
                d = abs(self.pos[s, k])
                if d < out.get(v, math.inf):
                    out[v] = d
        return out


# ---------------------------------------------------------------------------
# clipping against the contour polygon
# ---------------------------------------------------------------------------

def contour_polygon(r: float, samples: int = DEFAULT_CONTOUR_SAMPLES) -> np.ndarray:
    k = np.arange(samples)
    return r * np.exp(2j * np.pi * (k + _PHASE) / samples)


def _clip_segments(A, B, P, Q):
    """Clip segments A->B to the convex counterclockwise polygon with edges P->Q.

    Returns parameter intervals (t0, t1) per segment (empty when t1 <= t0).
    """
    n = 1j * (Q - P)  # inward normals
    d = B - A
    num = (np.conj(n)[None, :] * (A[:, None] - P[None, :])).real
    den = (np.conj(n)[None, :] * d[:, None]).real
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -num / den
    lower = np.where(den > 0, t, -np.inf)
    upper = np.where(den < 0, t, np.inf)
    t0 = np.maximum(0.0, lower.max(axis=1))
    t1 = np.minimum(1.0, upper.min(axis=1))
    parallel_out = np.any((den == 0) & (num < 0), axis=1)
    t1 = np.where(parallel_out, -1.0, t1)
    return t0, t1


@dataclass
class _Disk:
    """Clipping data for one chart at one contour radius."""

    inside_area: np.ndarray  # (S,) area of each state inside the polygon
    piece_state: np.ndarray  # (P,) state of each contour piece
    piece_dw: np.ndarray  # (P,) complex length of each piece
    piece_mid: np.ndarray  # (P,) developed midpoint
    piece_bary: np.ndarray  # (P, 3) barycentric coordinates of the midpoint
    _ray: object = field(default=None, repr=False)


def _barycentric(D, z):
    a, b, c = D
    det = ((b - a).conjugate() * (c - a)).imag
    l1 = ((z - a).conjugate() * (c - a)).imag / det
    l2 = ((b - a).conjugate() * (z - a)).imag / det
    return np.stack([1 - l1 - l2, l1, l2], axis=-1)


def _build_disk(chart: ConeChart, r: float, samples: int) -> _Disk:
    n1 = chart.order + 1
    V = contour_polygon(r, samples)
    W = np.roll(V, -1)
    inner = r * math.cos(math.pi / samples)
    S = chart.n_states
    area = np.zeros(S)
    ps, pdw, pmid, pbary = [], [], [], []
    face_area = chart.mesh.face_area[chart.faces]
    for s in range(S):
        D = chart.pos[s]
        if np.max(np.abs(D)) <= inner:
            area[s] = face_area[s]
            continue
        if _dist_to_triangle(D) >= r:
            continue
        E = np.roll(D, -1)
        # polygon chords inside the triangle
        t0, t1 = _clip_segments(V, W, D, E)
        keep = t1 > t0
        a = V[keep] + t0[keep] * (W[keep] - V[keep])
        b = V[keep] + t1[keep] * (W[keep] - V[keep])
        # triangle sides inside the polygon
        u0, u1 = _clip_segments(D, E, V, W)
        kt = u1 > u0
        c = D[kt] + u0[kt] * (E[kt] - D[kt])
        d = D[kt] + u1[kt] * (E[kt] - D[kt])
        area[s] = 0.5 * float(np.sum((np.conj(a) * b).imag) + np.sum((np.conj(c) * d).imag))
        if len(a):
            mid = 0.5 * (a + b)
            ps.append(np.full(len(a), s))
            pdw.append(b - a)
            pmid.append(mid)
            pbary.append(_barycentric(D, mid))
    if ps:
        disk = _Disk(area, np.concatenate(ps), np.concatenate(pdw), np.concatenate(pmid), np.concatenate(pbary))
    else:
        disk = _Disk(area, np.zeros(0, dtype=np.int64), np.zeros(0, complex), np.zeros(0, complex), np.zeros((0, 3)))
    # every sheet carries a full copy of the polygon
    expected = n1 * samples * 0.5 * r * r * math.sin(2 * math.pi / samples)
    if abs(area.sum() - expected) > 1e-8 * max(expected, 1e-300) + 1e-12:
        raise RadiusTooLarge(f"contour of radius {r:.4g} is not covered by the developed chart")
    return disk


def _radial_walk(chart: ConeChart, points, states):
    """Straight paths from the origin to each point, as (point index, state, parameter length) triples."""
    pos = chart.pos
    nbr = chart.nbr
    rows, cols, dts = [], [], []
    for i, (p, s) in enumerate(zip(points, states)):
        t_cur = 1.0
        for _ in range(100000):
            D = pos[s]
            best, side = 0.0, -1
            for k in range(3):
                x, y = complex(D[k]), complex(D[(k + 1) % 3])
                n = 1j * (y - x)
                den = (n.conjugate() * p).real
                if den > 0:
                    lb = (n.conjugate() * x).real / den
                    if lb > best:
                        best, side = lb, k
            t_lo = min(best, t_cur)
            if t_cur > t_lo:
                rows.append(i)
                cols.append(s)
                dts.append(t_cur - t_lo)
            if side < 0 or t_lo <= 1e-14:
                break
            t_cur = t_lo
            s = int(nbr[s, side])
            if s < 0:
                raise RadiusTooLarge("radial path leaves the developed chart")
        else:
            raise RuntimeError("radial walk did not terminate")
    return np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64), np.array(dts)


def radial_weights(chart: ConeChart, points, states):
    """Sparse (dw, dwbar) weights: ``W @ alpha[faces]`` integrates alpha dw from the origin to each point."""
    points = [complex(p) for p in points]
    rows, cols, dts = _radial_walk(chart, points, [int(s) for s in states])
    pts = np.asarray(points, dtype=complex)
    shape = (len(points), chart.n_states)
    Wdw = sp.csr_matrix((pts[rows] * dts, (rows, cols)), shape=shape)
    Wdwbar = sp.csr_matrix((np.conj(pts[rows]) * dts, (rows, cols)), shape=shape)
    return Wdw, Wdwbar


def _ray_weights(chart: ConeChart, disk: _Disk):
    if disk._ray is None:
        disk._ray = radial_weights(chart, disk.piece_mid, disk.piece_state)[1]
    return disk._ray


# ---------------------------------------------------------------------------
# radii
# ---------------------------------------------------------------------------

def _cache(M: Mesh) -> dict:
    if not hasattr(M, "_pairing_cache"):
        M._pairing_cache = {}
    return M._pairing_cache


def embedding_radii(M: Mesh) -> np.ndarray:
    """Per point of Sigma: min(distance to the nearest other point of Sigma, systole / 2)."""
    cache = _cache(M)
    if "embed" not in cache:
        from .saddle import sigma_distances, systole

        sys_len = systole(M.surface)
        D = np.array(sigma_distances(M.surface, sys_len * (1 + 1e-9)))
        n = len(D)
        R = np.full(n, sys_len / 2)
        for j in range(n):
            others = [D[j, k] for k in range(n) if k != j]
            if others:
                R[j] = min(R[j], min(others))
        cache["embed"] = (R, D, sys_len)
    return cache["embed"][0]


def default_radii(M: Mesh, factor: float = DEFAULT_RADIUS_FACTOR) -> np.ndarray:
    return factor * embedding_radii(M)


def _check_radii(M: Mesh, radii) -> np.ndarray:
    R = embedding_radii(M)
    r = np.broadcast_to(np.asarray(radii, dtype=float), R.shape).copy()
    if np.any(r <= 0):
        raise RadiusTooLarge("contour radii must be positive")
    D = _cache(M)["embed"][1]
    for j in range(len(r)):
        if r[j] >= R[j]:
            raise RadiusTooLarge(f"radius {r[j]:.4g} at point {j} exceeds the embedding radius {R[j]:.4g}")
        for k in range(j + 1, len(r)):
            if r[j] + r[k] >= D[j, k]:
                raise RadiusTooLarge(f"disks around points {j} and {k} overlap")
    return r


def cone_chart(M: Mesh, j: int, radius: float) -> ConeChart:
    cache = _cache(M)
    key = ("chart", j)
    ch = cache.get(key)
    if ch is None or ch.radius < radius:
        ch = ConeChart(M, j, radius)
        cache[key] = ch
    return ch


def _disk(M: Mesh, j: int, r: float, samples: int) -> tuple[ConeChart, _Disk]:
    cache = _cache(M)
    key = ("disk", j, float(r), int(samples))
    if key not in cache:
        ch = cone_chart(M, j, r)
        cache[key] = (ch, _build_disk(ch, r, samples))
    return cache[key]


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

@dataclass
class PairingResult:
    value: complex
    bulk_term: complex
    contour_terms: list
    radius_used: list
    error_estimate: float

    def to_dict(self) -> dict:
        def c(z):
            return [float(z.real), float(z.imag)]

        return {
            "value": c(self.value),
            "bulk_term": c(self.bulk_term),
            "contour_terms": [c(z) for z in self.contour_terms],
            "radius_used": [float(x) for x in self.radius_used],
            "error_estimate": float(self.error_estimate),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def scaled(self, lam: complex) -> "PairingResult":
        return PairingResult(lam * self.value, lam * self.bulk_term, [lam * z for z in self.contour_terms],
                             list(self.radius_used), abs(lam) * self.error_estimate)


# ---------------------------------------------------------------------------
# the pairing formulas
# ---------------------------------------------------------------------------

def _terms(M: Mesh, eta: OneForm, g: np.ndarray, radii, samples: int):
    """Bulk over the complement of the polygons and the contour terms (1/2i) int F g dw."""
    beta = eta.beta
    dens = g * beta
    bulk = complex(np.sum(dens * M.face_area))
    contours = []
    for j, r in enumerate(radii):
        ch, dk = _disk(M, j, r, samples)
        bulk -= complex(np.sum(dens[ch.faces] * dk.inside_area))
        F = ch.primitive(eta.edge_values)[0]
        Fm = np.einsum("pk,pk->p", F[dk.piece_state], dk.piece_bary)
        contours.append(complex(np.sum(g[ch.faces[dk.piece_state]] * dk.piece_dw * Fm)) / 2j)
    return bulk, contours


def _scale(M: Mesh, eta: OneForm, g: np.ndarray) -> float:
    s = float(np.sum(np.abs(g * eta.beta) * M.face_area))
    return max(s, float(np.sqrt(np.sum(np.abs(g) ** 2 * M.face_area) * np.sum(np.abs(eta.edge_values) ** 2) /
                                max(M.n_edges, 1))), 1e-300)


def _require_closed(eta: OneForm):
    scale = max(float(np.max(np.abs(eta.edge_values), initial=0.0)), 1e-300)
    if eta.closedness_defect > 1e-9 * scale:
        raise NotClosed(f"form is not closed (defect {eta.closedness_defect:.2e})")


def pairing_closed(M: Mesh, eta: OneForm, q=None, radii=None,
                   samples: int = DEFAULT_CONTOUR_SAMPLES) -> PairingResult:
    """Bulk over X' plus (1/2i) sum_j of the contour integrals of F_j q / omega.

    ``q`` is a :class:`QDElement`, an array of per-face dw^2 coefficients, or
    None for omega^2.  The error estimate is the change under halving all
    radii (zero up to rounding when q / omega is continuous across faces).
    """
    _require_closed(eta)
    radii = default_radii(M) if radii is None else radii
    r = _check_radii(M, radii)
    g = _q_values(M, q)
    bulk, contours = _terms(M, eta, g, r, samples)
    value = bulk + sum(contours)
    if len(r):
        b2, c2 = _terms(M, eta, g, r / 2, samples)
        diff = abs(b2 + sum(c2) - value)
    else:
        diff = 0.0
    err = max(diff, 1e-12 * _scale(M, eta, g))
    return PairingResult(value, bulk, contours, [float(x) for x in r], err)


def _require_harmonic(M: Mesh, eta: OneForm, tol: float):
    from .hodge import codifferential

    _require_closed(eta)
    d = np.max(np.abs(codifferential(M, eta)), initial=0.0)
    scale = max(float(np.max(np.abs(eta.edge_values), initial=0.0)), 1e-300) * max(1.0, float(np.max(np.abs(M.cotan_weight))))
    if d > tol * scale:
        raise NotHarmonic(f"form is not harmonic (codifferential {d:.2e})")


def principal_value_bulk(M: Mesh, eta: OneForm, q, eps, samples: int = DEFAULT_CONTOUR_SAMPLES) -> complex:
    """Bulk integral over the complement of the eps-polygons."""
    g = _q_values(M, q)
    dens = g * eta.beta
    out = complex(np.sum(dens * M.face_area))
    for j, e in enumerate(np.broadcast_to(np.asarray(eps, dtype=float), (len(M.cone_vertex),))):
        ch, dk = _disk(M, j, float(e), samples)
        out -= complex(np.sum(dens[ch.faces] * dk.inside_area))
    return out


def _split_contour(M: Mesh, eta: OneForm, g, j: int, r: float, samples: int):
    """Contour integrals (1/2i) of F^{1,0} g dw and F^{0,1} g dw at radius r around point j.

    F^{0,1} is the radial integral of beta dwbar from z_j; F^{1,0} = F - F^{0,1}.
    """
    ch, dk = _disk(M, j, r, samples)
    W = _ray_weights(ch, dk)
    F = ch.primitive(eta.edge_values)[0]
    Fm = np.einsum("pk,pk->p", F[dk.piece_state], dk.piece_bary)
    F01 = W @ eta.beta[ch.faces]
    w = g[ch.faces[dk.piece_state]] * dk.piece_dw
    return complex(np.sum(w * (Fm - F01))) / 2j, complex(np.sum(w * F01)) / 2j


def discarded_contour(M: Mesh, eta: OneForm, q=None, radii=None, samples: int = DEFAULT_CONTOUR_SAMPLES) -> list:
    """Per point of Sigma, (1/2i) times the contour integral of (int eta^{0,1}) q / omega."""
    radii = default_radii(M) if radii is None else radii
    r = _check_radii(M, radii)
    g = _q_values(M, q)
    return [_split_contour(M, eta, g, j, float(x), samples)[1] for j, x in enumerate(r)]


def pairing_harmonic(M: Mesh, eta: OneForm, q=None, eps0=None, samples: int = DEFAULT_CONTOUR_SAMPLES,
                     tol: float = 1e-8) -> PairingResult:
    """Principal value bulk plus pi times the residues of (int eta^{1,0}) q / omega.

    The principal value is Richardson-extrapolated from eps0, eps0/2, eps0/4
    assuming an eps^2 leading error; residues are taken on the eps0 contour.
    ``contour_terms`` holds pi * res per point of Sigma.
    """
    _require_harmonic(M, eta, tol)
    eps0 = 0.5 * default_radii(M) if eps0 is None else eps0
    e = _check_radii(M, eps0)
    g = _q_values(M, q)
    B = [principal_value_bulk(M, eta, g, e / 2 ** i, samples) for i in range(3)]
    R1a = (4 * B[1] - B[0]) / 3
    R1b = (4 * B[2] - B[1]) / 3
    bulk = (16 * R1b - R1a) / 15
    res_terms = [_split_contour(M, eta, g, j, float(x), samples)[0] for j, x in enumerate(e)]
    value = bulk + sum(res_terms)
    # residues are radius independent in the continuum: use their drift as part of the estimate
    drift = 0.0
    if len(e):
        half = [_split_contour(M, eta, g, j, float(x) / 2, samples)[0] for j, x in enumerate(e)]
        drift = abs(sum(half) - sum(res_terms))
    err = max(abs(bulk - R1b), drift, 1e-12 * _scale(M, eta, g))
    return PairingResult(value, bulk, res_terms, [float(x) for x in e], err)


# ---------------------------------------------------------------------------
# quadratic differentials through the holonomy double cover
# ---------------------------------------------------------------------------

def _check_principal(D):
    from .surface import cone_points

    bad = [c.order for c in cone_points(D.base) if c.order >= 2]
    if bad:
        raise NotPrincipal(f"base has zeros of order {sorted(set(bad))}; "
                           "the principal-value formula needs simple zeros")


def pairing_principal(D, M: Mesh, eta: OneForm, q) -> complex:
    """Half the integral over the cover of rho^* q' eta^{0,1} / omega; no disks are removed.

    ``q`` is the pulled-back differential rho_q^* q' on the cover mesh.
    """
    _check_principal(D)
    g = _q_values(M, q)
    return 0.5 * complex(np.sum(g * eta.beta * M.face_area))


def pairing_halftranslation(D, M: Mesh, eta: OneForm, q, radii=None,
                            samples: int = DEFAULT_CONTOUR_SAMPLES) -> PairingResult:
    """Pairing on the cover applied to (1/2) rho_q^* q', i.e. (1/2)[bulk + (1/2i) sum of contours].

    ``q`` is the pulled-back differential rho_q^* q' on the cover mesh.
    """
    return pairing_closed(M, eta, q, radii, samples).scaled(0.5)


def fiber_form(D, M: Mesh, q) -> OneForm:
    """The form rho_q^* q' / (2 omega), built face by face from the pulled-back differential."""
    g = _q_values(M, q)
    cov = np.stack([0.5 * g, np.zeros_like(g)], axis=1)
    return OneForm(M, edge_values_from_covectors(M, cov), cov)


# ---------------------------------------------------------------------------
# purely relative directions
# ---------------------------------------------------------------------------

def _bump(t: np.ndarray) -> np.ndarray:
    """Smooth step: 1 for t <= 1/2, 0 for t >= 1."""
    t = np.asarray(t, dtype=float)
    a = np.clip(1.0 - t, 0.0, None)
    b = np.clip(t - 0.5, 0.0, None)
    with np.errstate(divide="ignore"):
        pa = np.where(a > 0, np.exp(-1.0 / np.where(a > 0, a, 1.0)), 0.0)
        pb = np.where(b > 0, np.exp(-1.0 / np.where(b > 0, b, 1.0)), 0.0)
    return pa / (pa + pb)


def relative_deformation(M: Mesh, values, bump_radii=None) -> OneForm:
    """``d f`` for a bump function f equal to ``values[j]`` near the j-th point of Sigma."""
    c = np.asarray(values, dtype=complex)
    if c.shape != (len(M.cone_vertex),):
        raise ValueError("need one value per point of Sigma")
    rho = 0.5 * default_radii(M) if bump_radii is None else np.broadcast_to(
        np.asarray(bump_radii, dtype=float), c.shape)
    _check_radii(M, rho)
    f = np.zeros(M.n_vertices, dtype=complex)
    for j in range(len(c)):
        if c[j] == 0:
            continue
        ch = cone_chart(M, j, float(rho[j]))
        for v, d in ch.vertex_distances().items():
            if d < rho[j]:
                f[v] += c[j] * _bump(d / rho[j])
    return OneForm(M, M.d0 @ f)


def exact_form(M: Mesh, f: np.ndarray) -> OneForm:
    return OneForm(M, M.d0 @ np.asarray(f, dtype=complex))
