"""Saddle connections by wedge development over a triangulation of the polygons.

From every corner at a point of Sigma the surface is developed into the
plane along straight rays.  Each corner owns the half-open angular sector
``[lo, hi)`` between its two sides, so every outgoing direction is explored
exactly once; rays that meet a regular vertex are continued through it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .mesh import _ear_clip
from .surface import FlatSurface, cone_points

_TOL = 1e-11


@dataclass(frozen=True)
class SaddleConnection:
    start: int  # index into cone_points(S)
    end: int
    holonomy: complex  # in the chart of the start corner (sign-ambiguous on half-translation surfaces)
    length: float


def _cross(a: complex, b: complex) -> float:
    return (a.conjugate() * b).imag


class _Triangulation:
    """Diagonal triangulation of each polygon with side adjacency and gluing signs."""

    def __init__(self, S: FlatSurface):
        self.S = S
        orbits = S.corner_orbits()
        sigma = {c.orbit: k for k, c in enumerate(cone_points(S))}
        self.tri_poly: list[int] = []
        self.tri_idx: list[tuple[int, int, int]] = []
        self.pos: list[tuple[complex, complex, complex]] = []
        self.cone: list[tuple[int, int, int]] = []  # cone point index per corner, -1 if regular
        self.orbit: list[tuple[int, int, int]] = []
        side_of: dict = {}
        for p, poly in enumerate(S.polygons):
            for tri in _ear_clip(poly):
                t = len(self.tri_poly)
                self.tri_poly.append(p)
                self.tri_idx.append(tri)
                self.pos.append(tuple(poly[i] for i in tri))
                self.orbit.append(tuple(orbits[(p, i)] for i in tri))
                self.cone.append(tuple(sigma.get(orbits[(p, i)], -1) for i in tri))
                for s in range(3):
                    side_of[(p, tri[s], tri[(s + 1) % 3])] = (t, s)
        self.nbr: list[list] = [[None] * 3 for _ in self.tri_poly]
        for (p, a, b), (t, s) in side_of.items():
            n = len(S.polygons[p])
            if (p, b, a) in side_of:
                self.nbr[t][s] = (*side_of[(p, b, a)], 1)
                continue
            # polygon edge a -> a+1
            e = a if (a + 1) % n == b else b
            (p2, e2), sign = S.gluings[(p, e)]
            n2 = len(S.polygons[p2])
            t2, s2 = side_of[(p2, e2, (e2 + 1) % n2)]
            self.nbr[t][s] = (t2, s2, sign)

    def cross_side(self, t: int, k: int, s: int, tr: complex):
        """Neighbour across side ``k`` of ``t`` with the developing map ``z -> s z + tr`` carried along."""
        t2, k2, sign = self.nbr[t][k]
        s2 = s * sign
        tr2 = s * self.pos[t][(k + 1) % 3] + tr - s2 * self.pos[t2][k2]
        return t2, k2, s2, tr2


class _Search:
    def __init__(self, T: _Triangulation, L: float):
        self.T = T
        self.L = L
        self.found: list = []  # (start cone, end cone, developed endpoint, path)

    def dev(self, t, s, tr):
        return [s * z + tr for z in self.T.pos[t]]

    def _far(self, a: complex, b: complex) -> bool:
        """Whether the segment ab stays farther than L from the origin."""
        d = b - a
        u = 0.0 if d == 0 else min(1.0, max(0.0, -((a.conjugate() * d).real) / abs(d) ** 2))
        return abs(a + u * d) > self.L * (1 + 1e-12)

    def hit(self, start, t, corner, P, path):
        """Ray reached a vertex at developed position P."""
        if abs(P) > self.L * (1 + 1e-12):
            return
        c = self.T.cone[t][corner]
        if c >= 0:
            self.found.append((start, c, P, path))
        else:
            self.through_vertex(start, t, corner, path[-1][1], path[-1][2], P, path)

    def through_vertex(self, start, t, k, s, tr, P, path, depth=0):
        """Continue the ray along direction P past the regular vertex at P (corner k of t)."""
        d = P
        for _ in range(64):
            V = self.dev(t, s, tr)
            u1 = V[(k + 1) % 3] - V[k]
            u2 = V[(k - 1) % 3] - V[k]
            c1, c2 = _cross(u1, d), _cross(d, u2)
            tol = _TOL * abs(d) * max(abs(u1), abs(u2))
            if abs(c1) <= tol and (u1.conjugate() * d).real > 0:
                self.hit(start, t, (k + 1) % 3, V[(k + 1) % 3], path + ((t, s, tr),))
                return
            if c1 > tol and c2 > tol:
                if not self._far(V[(k + 1) % 3], V[(k - 1) % 3]):
                    t2, k2, s2, tr2 = self.T.cross_side(t, (k + 1) % 3, s, tr)
                    self.ray(start, t2, k2, s2, tr2, d, path + ((t, s, tr), (t2, s2, tr2)))
                return
            # rotate counterclockwise around the vertex across side k-1
            t, k2, s, tr = self.T.cross_side(t, (k - 1) % 3, s, tr)
            k = k2
        raise RuntimeError("vertex star traversal did not close")

    def ray(self, start, t, e_in, s, tr, d, path):
        """Follow a single ray in direction d through triangle t entered via side e_in."""
        while True:
            V = self.dev(t, s, tr)
            a, b, v = V[e_in], V[(e_in + 1) % 3], V[(e_in + 2) % 3]
            cr = _cross(d, v)
            if abs(cr) <= _TOL * abs(d) * abs(v) and (d.conjugate() * v).real > 0:
                self.hit(start, t, (e_in + 2) % 3, v, path)
                return
            cw_is_a = _cross(a, b) > 0
            if cr > 0:  # v is counterclockwise of the ray: exit between v and the clockwise endpoint
                k = (e_in + 2) % 3 if cw_is_a else (e_in + 1) % 3
            else:
                k = (e_in + 1) % 3 if cw_is_a else (e_in + 2) % 3
            if self._far(V[k], V[(k + 1) % 3]):
                return
            t, e_in, s, tr = self.T.cross_side(t, k, s, tr)
            path = path + ((t, s, tr),)

    def wedge(self, start, t, e_in, s, tr, lo, hi, path):
        """Explore the open sector (lo, hi) through triangle t entered via side e_in."""
        stack = [(t, e_in, s, tr, lo, hi, path)]
        while stack:
            t, e_in, s, tr, lo, hi, path = stack.pop()
            V = self.dev(t, s, tr)
            a, b, v = V[e_in], V[(e_in + 1) % 3], V[(e_in + 2) % 3]
            ccw_end_is_b = _cross(a, b) > 0
            tol = _TOL * abs(v)
            c_lo = _cross(lo, v) / abs(lo)
            c_hi = _cross(v, hi) / abs(hi)
            k_b, k_a = (e_in + 1) % 3, (e_in + 2) % 3  # sides (b, v) and (v, a)
            if c_lo > tol and c_hi > tol:
                self.hit(start, t, (e_in + 2) % 3, v, path)
                # side touching the counterclockwise endpoint gets (v, hi)
                k_hi, k_lo = (k_b, k_a) if ccw_end_is_b else (k_a, k_b)
                parts = [(k_lo, lo, v), (k_hi, v, hi)]
            elif c_lo <= tol:
                parts = [(k_b if ccw_end_is_b else k_a, lo, hi)]
            else:
                parts = [(k_a if ccw_end_is_b else k_b, lo, hi)]
            for k, l, h in parts:
                if self._far(V[k], V[(k + 1) % 3]):
                    continue
                t2, k2, s2, tr2 = self.T.cross_side(t, k, s, tr)
                stack.append((t2, k2, s2, tr2, l, h, path + ((t2, s2, tr2),)))

    def run(self):
        T = self.T
        for t in range(len(T.tri_poly)):
            for k in range(3):
                c = T.cone[t][k]
                if c < 0:
                    continue
                s, tr = 1, -T.pos[t][k]
                V = self.dev(t, s, tr)
                lo, hi = V[(k + 1) % 3], V[(k - 1) % 3]
                path = ((t, s, tr),)
                self.hit(c, t, (k + 1) % 3, lo, path)
                if not self._far(V[(k + 1) % 3], V[(k + 2) % 3]):
                    t2, k2, s2, tr2 = T.cross_side(t, (k + 1) % 3, s, tr)
                    self.wedge(c, t2, k2, s2, tr2, lo, hi, path + ((t2, s2, tr2),))


def _inside(P, z, tol):
    a, b, c = P
    return (_cross(b - a, z - a) >= -tol and _cross(c - b, z - b) >= -tol and _cross(a - c, z - c) >= -tol)


def _midpoint_key(T: _Triangulation, P: complex, path, scale: float):
    """Canonical surface location of the midpoint of a developed segment plus its unoriented direction."""
    S = T.S
    m = P / 2
    tol = 1e-9 * scale
    for t, s, tr in reversed(path):
        D = [s * z + tr for z in T.pos[t]]
        if _inside(D, m, tol):
            break
    else:
        raise RuntimeError("midpoint not on the developed path")
    p = T.tri_poly[t]
    z = s * (m - tr)
    d = s * P
    poly = S.polygons[p]
    n = len(poly)
    loc = None
    for i, w in enumerate(poly):
        if abs(z - w) <= tol:
            loc = ("v", S.corner_orbits()[(p, i)])
            break
    if loc is None:
        cands = [(p, z, d)]
        for e in range(n):
            a, b = poly[e], poly[(e + 1) % n]
            u = ((z - a) / (b - a))
            if abs(u.imag) * abs(b - a) <= tol and 0 <= u.real <= 1:
                (p2, e2), sign = S.gluings[(p, e)]
                poly2 = S.polygons[p2]
                a2, b2 = poly2[e2], poly2[(e2 + 1) % len(poly2)]
                cands.append((p2, a2 + (1 - u.real) * (b2 - a2), d * (-sign)))
        p, z, d = min(cands, key=lambda c: (c[0], round(c[1].real / tol), round(c[1].imag / tol)))
        loc = (p, round(z.real / tol), round(z.imag / tol))
    if d.imag < -tol or (abs(d.imag) <= tol and d.real < 0):
        d = -d
    return loc, round(d.real / tol), round(d.imag / tol)


def saddle_connections(S: FlatSurface, L: float) -> list[SaddleConnection]:
    """All saddle connections of length at most ``L``, each unoriented connection listed once."""
    if not cone_points(S):
        return []
    T = _Triangulation(S)
    search = _Search(T, L)
    search.run()
    scale = max(S.diameter, 1.0)
    seen = {}
    for c0, c1, P, path in search.found:
        key = (min(c0, c1), max(c0, c1), _midpoint_key(T, P, path, scale))
        if key not in seen:
            seen[key] = SaddleConnection(c0, c1, complex(P), abs(P))
    return sorted(seen.values(), key=lambda sc: (sc.length, sc.start, sc.end, sc.holonomy.real, sc.holonomy.imag))


def systole(S: FlatSurface) -> float:
    """Length of the shortest saddle connection (doubling search)."""
    L = min(abs(S.edge_vector(p, e)) for p, e in S.edges())
    for _ in range(60):
        sc = saddle_connections(S, L)
        if sc:
            return sc[0].length
        L *= 2
    raise RuntimeError("no saddle connection found")


def sigma_distances(S: FlatSurface, L: float | None = None):
    """Shortest saddle connection between each pair of points of Sigma (inf if none up to L)."""
    n = len(cone_points(S))
    L = 2 * systole(S) if L is None else L
    D = [[math.inf] * n for _ in range(n)]
    for sc in saddle_connections(S, L):
        D[sc.start][sc.end] = min(D[sc.start][sc.end], sc.length)
        D[sc.end][sc.start] = min(D[sc.end][sc.start], sc.length)
    return D
