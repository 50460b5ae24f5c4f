"""Hodge and Teichmuller norms on the holonomy double cover, and the bounds comparing them.

Quadratic differentials q' on the base are handled through
``(1/2) rho^* q' = omega * sum_k c_k beta_k`` with beta_k spanning the
anti-invariant holomorphic forms.  In flat coordinates this makes
``int_X q' mu = int_cover (sum c_k alpha_k) b dA`` and
``||q'||_1 = int_cover |sum c_k alpha_k| dA`` for mu = eta^{0,1}/omega with
``eta^{0,1} = b dwbar``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DiskNotEmbedded, NonConvergence
from .forms import OneForm
from .hodge import anti_invariant_basis, hodge_norm, involution
from .mesh import Mesh, omega_cochain
from .pairing import QDElement, _cache, _disk, _q_values, cone_chart, embedding_radii, radial_weights
from .saddle import SaddleConnection, saddle_connections, sigma_distances, systole  # noqa: F401

DEFAULT_RESTARTS = 32
DEFAULT_TOL = 1e-6
FD_STEP = 1e-6


def qd_l1_norm(M: Mesh, q) -> float:
    """Integral of |q| over the mesh (omega = dw, so |q| is the modulus of the dw^2 coefficient)."""
    return float(np.sum(np.abs(_q_values(M, q)) * M.face_area))


# ---------------------------------------------------------------------------
# Teichmuller norm lower bound by optimisation
# ---------------------------------------------------------------------------

@dataclass
class TeichNormEstimate:
    value: float
    maximizer: QDElement  # rho^* q' on the cover, scaled so that ||q'||_1 = 1 on the base
    coefficients: np.ndarray
    restarts_used: int
    converged: bool


def _objective(A: np.ndarray, area: np.ndarray, L: np.ndarray):
    def ratio(c: np.ndarray) -> float:
        N = float(np.sum(area * np.abs(A @ c)))
        return 0.0 if N <= 0 else abs(complex(L @ c)) / N

    return ratio


def _to_complex(x: np.ndarray) -> np.ndarray:
    d = len(x) // 2
    return x[:d] + 1j * x[d:]


def _ascend(f, x0: np.ndarray, tol: float, max_iter: int = 500):
    """Projected gradient ascent of f on the unit sphere with backtracking and central differences."""
    x = x0 / np.linalg.norm(x0)
    fx = f(x)
    step = 0.5
    for it in range(max_iter):
        g = np.empty_like(x)
        for i in range(len(x)):
            e = np.zeros_like(x)
            e[i] = FD_STEP
            g[i] = (f(x + e) - f(x - e)) / (2 * FD_STEP)
        g -= (g @ x) * x  # tangent component
        gn = np.linalg.norm(g)
        if gn * max(1.0, 1.0 / max(fx, 1e-300)) < tol:
            return x, fx, True
        improved = False
        while step > 1e-12:
            y = x + step * g / gn
            y /= np.linalg.norm(y)
            fy = f(y)
            if fy > fx:
                improved = True
                gain = fy - fx
                x, fx = y, fy
                step = min(2 * step, 1.0)
                break
            step *= 0.5
        if not improved or gain <= tol * max(fx, 1e-300):
            return x, fx, True
    return x, fx, False


def teich_norm_estimate(D, M: Mesh, eta: OneForm, restarts: int = DEFAULT_RESTARTS, tol: float = DEFAULT_TOL,
                        seed: int = 0, basis=None) -> TeichNormEstimate:
    """Lower bound for the Teichmuller norm of the Beltrami differential eta^{0,1}/omega.

    Maximises |int q' mu| / ||q'||_1 over q' with (1/2) rho^* q' = omega * sum c_k beta_k.
    ``basis`` defaults to the anti-invariant holomorphic forms; one restart
    starts from the pushforward witness direction.
    """
    forms = anti_invariant_basis(D, M).holomorphic if basis is None else list(basis)
    d = len(forms)
    b = eta.beta
    A = np.stack([f.alpha for f in forms], axis=1) if d else np.zeros((M.n_faces, 0))
    L = (A * (b * M.face_area)[:, None]).sum(axis=0)
    f = _objective(A, M.face_area, L)
    if d == 0 or np.max(np.abs(b), initial=0.0) == 0.0:
        c = np.zeros(d, dtype=complex)
        if d:
            c[0] = 1.0
        return TeichNormEstimate(0.0, _maximizer(M, forms, c, A), c, 0, True)

    def fr(x):
        return f(_to_complex(x))

    rng = np.random.default_rng(seed)
    # witness: the coefficients of conj(eta) in the holomorphic basis (Gram is the identity)
    w = np.conj(L) if np.any(L) else np.ones(d, dtype=complex)
    starts = [np.concatenate([w.real, w.imag])]
    for _ in range(max(restarts, 1) - 1):
        starts.append(rng.normal(size=2 * d))
    best = (-1.0, None, False)
    all_conv = True
    for x0 in starts:
        x, fx, conv = _ascend(fr, x0, tol)
        all_conv &= conv
        # ties broken by lexicographic coefficient order for determinism
        if fx > best[0] + 1e-15 or (abs(fx - best[0]) <= 1e-15 and best[1] is not None and tuple(x) < tuple(best[1])):
            best = (fx, x, conv)
    c = _to_complex(best[1])
    est = TeichNormEstimate(float(best[0]), _maximizer(M, forms, c, A), c, len(starts), all_conv)
    return est


def _maximizer(M: Mesh, forms, c: np.ndarray, A: np.ndarray) -> QDElement:
    N = float(np.sum(M.face_area * np.abs(A @ c))) if len(c) else 0.0
    c = c / N if N > 0 else c
    # (1/2) rho^* q' = omega * sum c_k beta_k, so rho^* q' carries a factor 2
    return QDElement.omega_times(M, forms, 2 * c) if len(forms) else QDElement.omega_squared(M, 0.0)


def teich_norm_or_raise(*args, **kwargs) -> TeichNormEstimate:
    est = teich_norm_estimate(*args, **kwargs)
    if not est.converged:
        raise NonConvergence(f"optimizer did not converge (best {est.value:.6g})")
    return est


# ---------------------------------------------------------------------------
# the pushforward witness
# ---------------------------------------------------------------------------

@dataclass
class Witness:
    q: QDElement  # rho^* q' on the cover
    pushforward: np.ndarray  # per cover face, the dw^2 coefficient of q' in that face's chart
    pairing: complex  # int_X q' mu with mu = conj(beta)/omega
    l1_norm: float  # ||q'||_1 on the base
    beta_norm: float
    omega_norm: float

    @property
    def ratio(self) -> float:
        return abs(self.pairing) / self.l1_norm if self.l1_norm > 0 else 0.0


def lower_bound_witness(D, M: Mesh, beta: OneForm) -> Witness:
    """q' = (rho_q)_*(omega beta), summing omega beta over the two lifts of each base face."""
    tau = involution(D, M)
    a = beta.alpha
    # on tau(f) the chart is rotated by pi, so dw^2 is unchanged and the lifts simply add
    push = a + a[tau.fperm]
    area = M.face_area
    # base integrals are half the sums over cover faces
    l1 = 0.5 * float(np.sum(np.abs(push) * area))
    mu_b = np.conj(a)  # eta^{0,1} coefficient of conj(beta)
    pair = 0.5 * complex(np.sum(push * mu_b * area))
    q = QDElement.omega_times(M, [beta], [2.0])
    return Witness(q, push, pair, l1, hodge_norm(M, beta), hodge_norm(M, omega_cochain(M)))


# ---------------------------------------------------------------------------
# the Hodge versus Teichmuller comparison
# ---------------------------------------------------------------------------

def hodge_teich_report(D, M: Mesh, eta: OneForm, restarts: int = DEFAULT_RESTARTS, tol: float = DEFAULT_TOL,
                       seed: int = 0, quad_tol: float = 1e-2) -> dict:
    """Hodge norm, Teichmuller estimate and r = systole/2, at cover area 1 and at base area 1.

    Norms of eta are scale invariant; the Beltrami differential scales
    inversely with omega, so the estimate is multiplied by sqrt(area) when
    the cover is rescaled to area 1, and r by 1/sqrt(area).
    """
    area = float(np.sum(M.face_area))
    hn = hodge_norm(M, eta)
    est = teich_norm_estimate(D, M, eta, restarts, tol, seed)
    sys_len = systole(D.cover)
    out = {"hodge_norm": hn, "teich_estimate_raw": est.value, "cover_area": area,
           "systole_raw": sys_len, "restarts": est.restarts_used, "converged": bool(est.converged)}
    for label, target in (("cover_area_1", 1.0), ("base_area_1", 2.0)):
        s = math.sqrt(target / area)
        T = est.value / s
        r = s * sys_len / 2
        upper = 4.0 / r * hn
        out[label] = {
            "teich_estimate": T,
            "r": r,
            "lower": hn,
            "upper": upper,
            "lower_ok": bool(T >= (1 - quad_tol) * hn),
            "upper_ok": bool(T <= upper),
            "lower_ratio": T / hn if hn > 0 else 1.0,
        }
    out["ok"] = out["cover_area_1"]["lower_ok"] and out["cover_area_1"]["upper_ok"]
    return out


# ---------------------------------------------------------------------------
# supporting bounds
# ---------------------------------------------------------------------------

def _random_poly(rng, max_degree: int):
    deg = int(rng.integers(0, max_degree + 1))
    rad = np.sqrt(rng.random(deg + 1))
    return rad * np.exp(2j * np.pi * rng.random(deg + 1))


def mean_value_terms(a: np.ndarray, r: float, n_rho: int = 96, n_theta: int = 256):
    """(|f(0)|, disk average of |f|, sqrt of disk average of |f|^2) for f = sum a_k z^k."""
    x, w = np.polynomial.legendre.leggauss(n_rho)
    rho = 0.5 * r * (x + 1)
    wr = 0.5 * r * w * rho
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    z = rho[:, None] * np.exp(1j * th)[None, :]
    fz = np.polyval(a[::-1], z)
    l1 = float(np.sum(wr[:, None] * np.abs(fz)) * (2 * np.pi / n_theta)) / (math.pi * r * r)
    n = np.arange(len(a))
    l2 = math.sqrt(float(np.sum(np.abs(a) ** 2 * r ** (2 * n) / (n + 1))))
    return abs(a[0]), l1, l2


def mean_value_check(n_trials: int = 1000, seed: int = 0, max_degree: int = 10, atol: float = 1e-12) -> dict:
    """Random polynomials on random disks: |f(0)| <= mean |f| <= sqrt(mean |f|^2)."""
    rng = np.random.default_rng(seed)
    bad = 0
    worst = -math.inf
    for _ in range(n_trials):
        a = _random_poly(rng, max_degree)
        r = float(2.0 * (1.0 - rng.random()))  # in (0, 2]
        f0, l1, l2 = mean_value_terms(a, r)
        excess = max(f0 - l1, l1 - l2, f0 - l2)
        worst = max(worst, excess)
        bad += int(excess > atol)
    return {"trials": n_trials, "violations": bad, "max_excess": worst, "seed": seed}


def _sigma_distance_lower(M: Mesh) -> np.ndarray:
    """Per face centroid, a lower bound for min(distance to Sigma, systole / 2).

    A face outside the chart of radius R_j around z_j is at least R_j away
    from it; inside, the developed distance of the centroid is exact.
    """
    cache = _cache(M)
    if "r_low" not in cache:
        R = embedding_radii(M)
        out = np.full(M.n_faces, cache["embed"][2] / 2)
        for j in range(len(R)):
            ch = cone_chart(M, j, float(R[j]))
            dj = np.full(M.n_faces, float(R[j]))
            np.minimum.at(dj, ch.faces, np.abs(ch.pos.mean(axis=1)))
            out = np.minimum(out, dj)
        cache["r_low"] = out
    return cache["r_low"]


def pointwise_ratio_check(M: Mesh, beta: OneForm) -> dict:
    """|beta/omega| <= ||beta|| / (sqrt(pi) r_low) at every face centroid."""
    nb = hodge_norm(M, beta)
    ratio = np.abs(beta.alpha)
    r_low = _sigma_distance_lower(M)
    bound = nb / (math.sqrt(math.pi) * r_low)
    viol = ratio > bound * (1 + 1e-12)
    return {"violations": int(np.sum(viol)), "max_fraction": float(np.max(ratio / bound)) if nb > 0 else 0.0,
            "beta_norm": nb}


def int_beta_bound_check(M: Mesh, beta: OneForm, j: int = 0, r: float | None = None, n_circles: int = 4,
                         samples: int = 128) -> dict:
    """Largest |int_{z0}^z beta| over the radius-r disk around the j-th point of Sigma.

    Checked against ||beta|| ln 2(n+1) and, for zeros of order 2, ||beta||.
    """
    R = float(embedding_radii(M)[j])
    r = R / 2 if r is None else float(r)
    if 2 * r > R * (1 + 1e-9):
        raise DiskNotEmbedded(f"disk of radius {2 * r:.4g} around point {j} is not embedded (limit {R:.4g})")
    n = M.cone_points[j].order
    cone_chart(M, j, r)
    vals = []
    for k in range(1, n_circles + 1):
        ch, dk = _disk(M, j, r * k / n_circles, samples)
        Wdw, _ = radial_weights(ch, dk.piece_mid, dk.piece_state)
        vals.append(Wdw @ beta.alpha[ch.faces])
    vals = np.concatenate(vals)
    nb = hodge_norm(M, beta)
    mx = float(np.max(np.abs(vals), initial=0.0))
    general = nb * math.log(2 * (n + 1))
    out = {"order": n, "radius": r, "max_abs": mx, "beta_norm": nb, "bound_general": general,
           "violations": int(mx > general * (1 + 1e-12))}
    if n == 2:
        out["bound_order2"] = nb
        out["violations"] += int(mx > nb * (1 + 1e-12))
    return out
