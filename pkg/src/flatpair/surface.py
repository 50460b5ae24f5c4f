"""Translation and half-translation surfaces given by glued polygons.

A surface is a list of counterclockwise polygons (vertices are complex
numbers) together with a pairing of their edges.  Edge ``e`` of polygon ``p``
runs from vertex ``e`` to vertex ``e + 1``.  A pair with sign ``+1`` is glued
by a translation, a pair with sign ``-1`` by ``z -> -z + c``.

Marked points are promoted to polygon corners when the surface is built, so
every point of the singular set is a corner of some polygon.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import AlreadyTranslation, Disconnected, EdgeMismatch, InputError, NonSimplePolygon, ParseError

EDGE_RTOL = 1e-12
TWO_PI = 2.0 * math.pi

Corner = tuple[int, int]
Edge = tuple[int, int]


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        parent = self.parent
        parent.setdefault(x, x)
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


@dataclass(frozen=True)
class ConePoint:
    orbit: int
    total_angle: float
    order: int
    is_marked: bool
    corners: tuple[Corner, ...]

    @property
    def corner(self) -> Corner:
        return self.corners[0]


@dataclass(frozen=True, eq=False)
class FlatSurface:
    """Validated surface.  Build with :func:`validate` or :func:`load`."""

    polygons: tuple[tuple[complex, ...], ...]
    gluings: dict  # (p, e) -> ((p2, e2), sign), symmetric
    marked: frozenset = frozenset()  # marked corners (p, i)

    # -- basic geometry -------------------------------------------------
    def vertices(self, p: int) -> np.ndarray:
        return np.asarray(self.polygons[p], dtype=complex)

    def edge_vector(self, p: int, e: int) -> complex:
        poly = self.polygons[p]
        return poly[(e + 1) % len(poly)] - poly[e]

    def edges(self) -> list[Edge]:
        return [(p, e) for p, poly in enumerate(self.polygons) for e in range(len(poly))]

    def glued(self, p: int, e: int) -> tuple[Edge, int]:
        return self.gluings[(p, e)]

    @property
    def is_translation(self) -> bool:
        return all(sign == 1 for _, sign in self.gluings.values())

    @property
    def diameter(self) -> float:
        pts = np.concatenate([self.vertices(p) for p in range(len(self.polygons))])
        return float(np.max(np.abs(pts[:, None] - pts[None, :])))

    def corner_angle(self, p: int, i: int) -> float:
        poly = self.polygons[p]
        n = len(poly)
        a = poly[(i + 1) % n] - poly[i]
        b = poly[(i - 1) % n] - poly[i]
        ang = math.atan2((b / a).imag, (b / a).real)
        return ang if ang > 0 else ang + TWO_PI

    # -- combinatorics --------------------------------------------------
    def corner_orbits(self) -> dict[Corner, int]:
        """Map every corner to the id of its vertex orbit (ids are 0..V-1)."""
        uf = _UnionFind()
        for p, poly in enumerate(self.polygons):
            for i in range(len(poly)):
                uf.find((p, i))
        for (p, e), ((p2, e2), _sign) in self.gluings.items():
            n, n2 = len(self.polygons[p]), len(self.polygons[p2])
            uf.union((p, e), (p2, (e2 + 1) % n2))
            uf.union((p, (e + 1) % n), (p2, e2))
        roots = {}
        out = {}
        for p, poly in enumerate(self.polygons):
            for i in range(len(poly)):
                r = uf.find((p, i))
                out[(p, i)] = roots.setdefault(r, len(roots))
        return out

    def euler_characteristic(self) -> int:
        v = len(set(self.corner_orbits().values()))
        e = len(self.gluings) // 2 + sum(1 for k, (k2, _) in self.gluings.items() if k == k2)
        return v - e + len(self.polygons)

    def scaled(self, s: float) -> "FlatSurface":
        polys = tuple(tuple(s * z for z in poly) for poly in self.polygons)
        return FlatSurface(polys, dict(self.gluings), self.marked)

    # -- serialization --------------------------------------------------
    def to_dict(self) -> dict:
        gl = []
        for (p, e), ((p2, e2), sign) in sorted(self.gluings.items()):
            if (p, e) <= (p2, e2):
                gl.append({"from": [p, e], "to": [p2, e2], "sign": sign})
        return {
            "polygons": [{"vertices": [[z.real, z.imag] for z in poly]} for poly in self.polygons],
            "gluings": gl,
            "marked_points": [
                {"polygon": p, "position": [self.polygons[p][i].real, self.polygons[p][i].imag]}
                for p, i in sorted(self.marked)
            ],
        }


# ---------------------------------------------------------------------------
# construction and validation
# ---------------------------------------------------------------------------

def _signed_area(poly) -> float:
    z = np.asarray(poly, dtype=complex)
    return 0.5 * float(np.sum((np.conj(z) * np.roll(z, -1)).imag))


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        return ((q - p).conjugate() * (r - p)).imag

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


def _check_simple(poly, p):
    n = len(poly)
    if n < 3:
        raise NonSimplePolygon(f"polygon {p} has fewer than 3 vertices")
    if _signed_area(poly) <= 0:
        raise NonSimplePolygon(f"polygon {p} is not counterclockwise")
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]):
                raise NonSimplePolygon(f"polygon {p}: edges {i} and {j} intersect")
    if len({(round(z.real, 12), round(z.imag, 12)) for z in poly}) != n:
        raise NonSimplePolygon(f"polygon {p} has repeated vertices")


def _shift_edge_refs(gluings: dict, p: int, after: int, by: int = 1) -> dict:
    def fix(key):
        q, e = key
        return (q, e + by) if q == p and e > after else key

    return {fix(k): (fix(v[0]), v[1]) for k, v in gluings.items()}


def _split_edge(polys: list, gluings: dict, p: int, e: int, t: float):
    """Insert a vertex at parameter ``t`` on edge ``(p, e)`` and on its partner."""
    (p2, e2), sign = gluings[(p, e)]
    if (p2, e2) == (p, e):
        # folded edge: only the midpoint is fixed by z -> -z + c
        if abs(t - 0.5) > 1e-12:
            raise InputError("a point on a folded edge must be its midpoint")
        poly = polys[p]
        n = len(poly)
        poly.insert(e + 1, 0.5 * (poly[e] + poly[(e + 1) % n]))
        g = _shift_edge_refs(gluings, p, e)
        g[(p, e)] = ((p, e + 1), -1)
        g[(p, e + 1)] = ((p, e), -1)
        return g
    del gluings[(p, e)], gluings[(p2, e2)]
    poly = polys[p]
    n = len(poly)
    poly.insert(e + 1, poly[e] + t * (poly[(e + 1) % n] - poly[e]))
    g = _shift_edge_refs(gluings, p, e)
    if p2 == p and e2 > e:
        e2 += 1
    poly2 = polys[p2]
    n2 = len(poly2)
    poly2.insert(e2 + 1, poly2[e2] + (1.0 - t) * (poly2[(e2 + 1) % n2] - poly2[e2]))
    g = _shift_edge_refs(g, p2, e2)
    if p2 == p and e > e2:
        e += 1
    # first half of e meets second half of e2 and vice versa
    g[(p, e)] = ((p2, e2 + 1), sign)
    g[(p2, e2 + 1)] = ((p, e), sign)
    g[(p, e + 1)] = ((p2, e2), sign)
    g[(p2, e2)] = ((p, e + 1), sign)
    return g


def _fan_split(polys: list, gluings: dict, marked: set, p: int, z0: complex):
    """Replace polygon ``p`` by triangles with apex at interior point ``z0``."""
    poly = polys[p]
    n = len(poly)
    for i in range(n):
        if ((poly[i] - z0).conjugate() * (poly[(i + 1) % n] - z0)).imag <= 0:
            raise InputError(f"marked point is not visible from every edge of polygon {p}")
    base = len(polys)
    new_ids = [p] + [base + i for i in range(n - 1)]
    tris = [[z0, poly[i], poly[(i + 1) % n]] for i in range(n)]
    remap = {}
    for i in range(n):
        remap[(p, i)] = (new_ids[i], 1)
    g = {}
    for k, (v, sign) in gluings.items():
        g[remap.get(k, k)] = (remap.get(v, v), sign)
    for i in range(n):
        g[(new_ids[i], 2)] = ((new_ids[(i + 1) % n], 0), 1)
        g[(new_ids[(i + 1) % n], 0)] = ((new_ids[i], 2), 1)
    polys[p] = tris[0]
    polys.extend(tris[1:])
    moved = set()
    for q, z in marked:
        if q == p:
            i = min(range(n), key=lambda k: abs(poly[k] - z))
            moved.add((new_ids[i], z))
        else:
            moved.add((q, z))
    marked.clear()
    marked.update(moved)
    marked.add((p, z0))
    return g


def _locate(poly, z, tol):
    """Return ('vertex', i) | ('edge', e, t) | ('interior',) | None."""
    n = len(poly)
    for i, v in enumerate(poly):
        if abs(v - z) <= tol:
            return ("vertex", i)
    for e in range(n):
        a, b = poly[e], poly[(e + 1) % n]
        d = b - a
        t = ((z - a) * d.conjugate()).real / abs(d) ** 2
        if 0 < t < 1 and abs(a + t * d - z) <= tol:
            return ("edge", e, t)
    inside = False
    for e in range(n):
        a, b = poly[e], poly[(e + 1) % n]
        if (a.imag > z.imag) != (b.imag > z.imag):
            x = a.real + (z.imag - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            if x > z.real:
                inside = not inside
    return ("interior",) if inside else None


def validate(raw: dict) -> FlatSurface:
    """Build a :class:`FlatSurface` from the JSON-style description."""
    try:
        polys = [[complex(float(x), float(y)) for x, y in P["vertices"]] for P in raw["polygons"]]
        entries = raw.get("gluings", [])
        marks = raw.get("marked_points", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed surface description: {exc!r}") from exc
    if not polys:
        raise InputError("surface has no polygons")
    for p, poly in enumerate(polys):
        _check_simple(poly, p)

    gluings: dict = {}
    for g in entries:
        a = (int(g["from"][0]), int(g["from"][1]))
        b = (int(g["to"][0]), int(g["to"][1]))
        sign = int(g.get("sign", 1))
        if sign not in (1, -1):
            raise InputError(f"gluing sign must be +1 or -1, got {sign}")
        for key in (a, b):
            if not (0 <= key[0] < len(polys) and 0 <= key[1] < len(polys[key[0]])):
                raise InputError(f"gluing refers to missing edge {key}")
            if key in gluings:
                raise EdgeMismatch(f"edge {key} appears in more than one gluing")
        if a == b and sign == 1:
            raise EdgeMismatch(f"edge {a} cannot be glued to itself by a translation")
        gluings[a] = (b, sign)
        gluings[b] = (a, sign)
    missing = [(p, e) for p, poly in enumerate(polys) for e in range(len(poly)) if (p, e) not in gluings]
    if missing:
        raise EdgeMismatch(f"unglued edges: {missing}")

    pts = np.array([z for poly in polys for z in poly])
    diam = float(np.max(np.abs(pts[:, None] - pts[None, :])))
    tol = EDGE_RTOL * max(diam, 1.0) * 16
    for (p, e), ((p2, e2), sign) in gluings.items():
        v1 = polys[p][(e + 1) % len(polys[p])] - polys[p][e]
        v2 = polys[p2][(e2 + 1) % len(polys[p2])] - polys[p2][e2]
        if abs(v2 - sign * (-v1)) > tol:
            raise EdgeMismatch(f"edges {(p, e)} and {(p2, e2)} have incompatible vectors {v1} and {v2}")

    # connectivity of the polygon adjacency graph
    seen = {0}
    stack = [0]
    while stack:
        p = stack.pop()
        for e in range(len(polys[p])):
            q = gluings[(p, e)][0][0]
            if q not in seen:
                seen.add(q)
                stack.append(q)
    if len(seen) != len(polys):
        raise Disconnected(f"polygons {sorted(set(range(len(polys))) - seen)} are not reachable")

    # folded edges carry a cone point at their midpoint; make it a corner
    for p in range(len(polys)):
        e = 0
        while e < len(polys[p]):
            if gluings[(p, e)][0] == (p, e):
                gluings = _split_edge(polys, gluings, p, e, 0.5)
            e += 1

    marked: set = set()  # (polygon, position) pairs, resolved to corners below
    for m in marks:
        p = int(m["polygon"])
        z = complex(float(m["position"][0]), float(m["position"][1]))
        if not 0 <= p < len(polys):
            raise InputError(f"marked point refers to missing polygon {p}")
        loc = _locate(polys[p], z, 1e-9 * max(diam, 1.0))
        if loc is None:
            raise InputError(f"marked point {z} lies outside polygon {p}")
        if loc[0] == "vertex":
            marked.add((p, polys[p][loc[1]]))
        elif loc[0] == "edge":
            _, e, t = loc
            zs = polys[p][e] + t * (polys[p][(e + 1) % len(polys[p])] - polys[p][e])
            gluings = _split_edge(polys, gluings, p, e, t)
            marked.add((p, zs))
        else:
            gluings = _fan_split(polys, gluings, marked, p, z)
    marked = {(p, min(range(len(polys[p])), key=lambda k: abs(polys[p][k] - z))) for p, z in marked}

    surf = FlatSurface(tuple(tuple(poly) for poly in polys), gluings, frozenset())
    orbits = surf.corner_orbits()
    marked_orbits = {orbits[c] for c in marked}
    full_marked = frozenset(c for c, o in orbits.items() if o in marked_orbits)
    return FlatSurface(surf.polygons, gluings, full_marked)


def load(path) -> FlatSurface:
    with open(path) as fh:
        return loads(fh.read())


def loads(text: str) -> FlatSurface:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ParseError("top level of a surface file must be an object")
    return validate(raw)


# ---------------------------------------------------------------------------
# structural computations
# ---------------------------------------------------------------------------

def orbit_angles(S: FlatSurface) -> dict[int, float]:
    angles: dict[int, float] = {}
    for (p, i), o in S.corner_orbits().items():
        angles[o] = angles.get(o, 0.0) + S.corner_angle(p, i)
    return angles


def cone_points(S: FlatSurface) -> list[ConePoint]:
    """Singular or marked vertex orbits, i.e. the set Sigma.

    Orders follow the cone-angle convention: ``2 pi (k + 1)`` on translation
    surfaces and ``pi (k + 2)`` on half-translation surfaces.
    """
    orbits = S.corner_orbits()
    members: dict[int, list] = {}
    for c, o in orbits.items():
        members.setdefault(o, []).append(c)
    angles = orbit_angles(S)
    marked_orbits = {orbits[c] for c in S.marked}
    out = []
    for o in sorted(members):
        ang = angles[o]
        if S.is_translation:
            k = round(ang / TWO_PI) - 1
        else:
            k = round(ang / math.pi) - 2
        if k == 0 and o not in marked_orbits:
            continue
        out.append(ConePoint(o, ang, k, o in marked_orbits, tuple(sorted(members[o]))))
    return out


def genus_area(S: FlatSurface) -> tuple[int, float]:
    chi = S.euler_characteristic()
    area = sum(_signed_area(poly) for poly in S.polygons)
    return (2 - chi) // 2, area


def stratum_signature(S: FlatSurface) -> str:
    orders = sorted((c.order for c in cone_points(S)), reverse=True)
    head = "H" if S.is_translation else "Q"
    return f"{head}({', '.join(str(k) for k in orders)})"


def gauss_bonnet_defect(S: FlatSurface) -> float:
    """Sum of angle excesses minus 2 pi (2g - 2); zero up to rounding."""
    g, _ = genus_area(S)
    excess = sum(a - TWO_PI for a in orbit_angles(S).values())
    return excess - TWO_PI * (2 * g - 2)


# ---------------------------------------------------------------------------
# holonomy double cover
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DoubleCover:
    """Canonical double cover of a half-translation surface.

    Cover polygon ``j`` with ``j < n`` is a copy of base polygon ``j``; cover
    polygon ``n + j`` is its rotation by pi.  ``projection[j] = (j mod n,
    sign)`` where sign is the chart map ``z -> sign * z``, and ``involution``
    swaps ``j`` and ``j + n`` acting by ``z -> -z`` on charts.
    """

    base: FlatSurface
    cover: FlatSurface
    projection: tuple[tuple[int, int], ...]
    involution: tuple[int, ...]

    def tau_corner(self, c: Corner) -> Corner:
        return (self.involution[c[0]], c[1])

    def ramification_orbits(self) -> set[int]:
        orbits = self.cover.corner_orbits()
        return {o for c, o in orbits.items() if orbits[self.tau_corner(c)] == o}

    @property
    def n_base(self) -> int:
        return len(self.base.polygons)


def double_cover(Q: FlatSurface) -> DoubleCover:
    if Q.is_translation:
        raise AlreadyTranslation("surface is already a translation surface")
    n = len(Q.polygons)
    polys = [tuple(poly) for poly in Q.polygons] + [tuple(-z for z in poly) for poly in Q.polygons]
    gl = {}
    for (p, e), ((p2, e2), sign) in Q.gluings.items():
        if sign == 1:
            gl[(p, e)] = ((p2, e2), 1)
            gl[(p + n, e)] = ((p2 + n, e2), 1)
        else:
            gl[(p, e)] = ((p2 + n, e2), 1)
            gl[(p + n, e)] = ((p2, e2), 1)
    marked = set(Q.marked) | {(p + n, i) for p, i in Q.marked}
    # preimages of every point of Sigma are marked on the cover
    base_orbits = Q.corner_orbits()
    sigma = {c.orbit for c in cone_points(Q)}
    for (p, i), o in base_orbits.items():
        if o in sigma:
            marked.add((p, i))
            marked.add((p + n, i))
    cover = FlatSurface(tuple(polys), gl, frozenset())
    orbits = cover.corner_orbits()
    marked_orbits = {orbits[c] for c in marked}
    cover = FlatSurface(cover.polygons, gl, frozenset(c for c, o in orbits.items() if o in marked_orbits))
    projection = tuple((j, 1) for j in range(n)) + tuple((j, -1) for j in range(n))
    involution = tuple(j + n for j in range(n)) + tuple(range(n))
    return DoubleCover(Q, cover, projection, involution)


def cover_edge_data_squared(D: DoubleCover) -> list[tuple[complex, complex]]:
    """Pairs (base edge vector squared, cover edge vector squared) per cover edge.

    Squaring removes the sign ambiguity of half-translation edge vectors.
    """
    out = []
    for (j, e) in D.cover.edges():
        b, _ = D.projection[j]
        out.append((D.base.edge_vector(b, e) ** 2, D.cover.edge_vector(j, e) ** 2))
    return out


def bundled(name: str) -> FlatSurface:
    """Load one of the example surfaces shipped with the package."""
    from importlib import resources

    text = resources.files("flatpair.data").joinpath(f"{name}.json").read_text()
    return loads(text)


BUNDLED = (
    "square_torus",
    "square_torus_2marked",
    "torus_2x1",
    "octagon",
    "pillowcase",
    "q1111",
)


def regular_polygon(n: int, side: float = 1.0) -> list[complex]:
    R = side / (2 * math.sin(math.pi / n))
    return [R * complex(math.cos(2 * math.pi * k / n - math.pi / 2 - math.pi / n),
                        math.sin(2 * math.pi * k / n - math.pi / 2 - math.pi / n)) for k in range(n)]


def iter_corners(S: FlatSurface) -> Iterable[Corner]:
    for p, poly in enumerate(S.polygons):
        for i in range(len(poly)):
            yield (p, i)
