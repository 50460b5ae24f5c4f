"""Triangulation of a flat surface and the homology machinery on it.

Every polygon is cut into coarse triangles (a fan from the centroid for
convex polygons, ear clipping otherwise) which are then split uniformly into
``4**k`` congruent pieces.  Vertices on glued edges are identified through the
gluing, so the result is a closed triangulated surface whose faces each carry
a Euclidean chart inherited from their polygon.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import HalfTranslationInput, HTooLarge
from .forms import OneForm
from .surface import FlatSurface, _UnionFind, cone_points, genus_area

# exponent of the radial grading toward points of Sigma (1 = uniform)
DEFAULT_GRADING = 3.0


@dataclass(frozen=True)
class Cycle:
    """Integer edge chain; ``edges`` maps edge id to coefficient."""

    edges: dict
    start: int = -1
    end: int = -1

    def boundary(self, mesh) -> dict:
        out: dict = {}
        for e, c in self.edges.items():
            t, h = mesh.edge_tail[e], mesh.edge_head[e]
            out[h] = out.get(h, 0) + c
            out[t] = out.get(t, 0) - c
        return {v: c for v, c in out.items() if c}


def _is_convex(poly) -> bool:
    n = len(poly)
    for i in range(n):
        a, b, c = poly[i - 1], poly[i], poly[(i + 1) % n]
        if ((b - a).conjugate() * (c - b)).imag < -1e-14:
            return False
    return True


def _ear_clip(poly) -> list[tuple[int, int, int]]:
    idx = list(range(len(poly)))
    tris = []

    def cross(a, b, c):
        return ((b - a).conjugate() * (c - a)).imag

    while len(idx) > 3:
        for k in range(len(idx)):
            i, j, l = idx[k - 1], idx[k], idx[(k + 1) % len(idx)]
            a, b, c = poly[i], poly[j], poly[l]
            if cross(a, b, c) <= 0:
                continue
            if any(
                cross(a, b, poly[m]) > 0 and cross(b, c, poly[m]) > 0 and cross(c, a, poly[m]) > 0
                for m in idx if m not in (i, j, l)
            ):
                continue
            tris.append((i, j, l))
            idx.pop(k)
            break
        else:
            raise HTooLarge("ear clipping failed on a degenerate polygon")
    tris.append(tuple(idx))
    return tris


def coarse_triangles(poly) -> tuple[list[complex], list[tuple[int, int, int]]]:
    """Coarse points (polygon vertices, then an optional centroid) and triangles."""
    n = len(poly)
    pts = list(poly)
    if n == 3:
        return pts, [(0, 1, 2)]
    if _is_convex(poly):
        pts.append(sum(poly) / n)
        return pts, [(n, i, (i + 1) % n) for i in range(n)]
    return pts, _ear_clip(poly)


class Mesh:
    """Triangulated flat surface.

    Faces are counterclockwise triangles in their polygon's chart.  Edge ids
    are global; ``face_edges[f, s]`` with sign ``face_edge_signs[f, s]`` is
    side ``s`` of face ``f`` (sides run v0->v1, v1->v2, v2->v0).
    """

    def __init__(self, surface: FlatSurface, h: float, grading: float = DEFAULT_GRADING):
        if h <= 0:
            raise HTooLarge("target edge length must be positive")
        self.surface = surface
        min_edge = min(abs(surface.edge_vector(p, e)) for p, e in surface.edges())
        self.h_requested = h
        self.h = min(h, min_edge)
        self.grading = grading
        self._build()

    # ------------------------------------------------------------------
    def _build(self):
        S = self.surface
        coarse = [coarse_triangles(poly) for poly in S.polygons]
        longest = max(abs(pts[t[a]] - pts[t[b]]) for pts, tris in coarse for t in tris
                      for a, b in ((0, 1), (1, 2), (2, 0)))
        k = max(0, math.ceil(math.log2(longest / self.h) - 1e-12))
        N = 2 ** k
        self.level = k
        self.subdivisions = N

        local_ids = []  # per polygon: key -> local id
        local_pos = []  # per polygon: list of complex
        faces_local = []  # (p, (l0, l1, l2))
        for p, (pts, tris) in enumerate(coarse):
            ids: dict = {}
            pos: list = []

            def lid(key, z):
                if key not in ids:
                    ids[key] = len(pos)
                    pos.append(z)
                return ids[key]

            for ti, (a, b, c) in enumerate(tris):
                A, B, C = pts[a], pts[b], pts[c]

                def key(i, j, a=a, b=b, c=c, ti=ti):
                    if i == 0 and j == 0:
                        return ("v", a)
                    if i == N:
                        return ("v", b)
                    if j == N:
                        return ("v", c)
                    if j == 0:
                        return ("s", a, b, i) if a < b else ("s", b, a, N - i)
                    if i == 0:
                        return ("s", a, c, j) if a < c else ("s", c, a, N - j)
                    if i + j == N:
                        return ("s", b, c, j) if b < c else ("s", c, b, N - j)
                    return ("t", ti, i, j)

                grid = {}
                for i in range(N + 1):
                    for j in range(N + 1 - i):
                        z = A + (i / N) * (B - A) + (j / N) * (C - A)
                        grid[(i, j)] = lid(key(i, j), z)
                for i in range(N):
                    for j in range(N - i):
                        faces_local.append((p, (grid[(i, j)], grid[(i + 1, j)], grid[(i, j + 1)])))
                        if i + j < N - 1:
                            faces_local.append((p, (grid[(i + 1, j)], grid[(i + 1, j + 1)], grid[(i, j + 1)])))
            local_ids.append(ids)
            local_pos.append(pos)

        def bkey(p, e, s):
            n = len(S.polygons[p])
            a, b = e, (e + 1) % n
            if s == 0:
                return ("v", a)
            if s == N:
                return ("v", b)
            return ("s", a, b, s) if a < b else ("s", b, a, N - s)

        # vertices: identify boundary points through the gluings
        uf = _UnionFind()
        for p, ids in enumerate(local_ids):
            for l in ids.values():
                uf.find((p, l))
        glued_segments = []
        for (p, e), ((p2, e2), _sign) in S.gluings.items():
            if (p, e) > (p2, e2):
                continue
            for s in range(N + 1):
                uf.union((p, local_ids[p][bkey(p, e, s)]), (p2, local_ids[p2][bkey(p2, e2, N - s)]))
            glued_segments.append((p, e, p2, e2))
        gid: dict = {}
        for p, ids in enumerate(local_ids):
            for l in range(len(local_pos[p])):
                r = uf.find((p, l))
                gid.setdefault(r, len(gid))
        vmap = [np.array([gid[uf.find((p, l))] for l in range(len(local_pos[p]))], dtype=np.int64)
                for p in range(len(local_ids))]
        self.n_vertices = len(gid)
        self.local_vertex_map = vmap

        # singular set: which global vertices are points of Sigma
        corner_orbit = S.corner_orbits()
        cps = cone_points(S)
        orbit_to_cp = {c.orbit: i for i, c in enumerate(cps)}
        self.cone_points = cps
        self.cone_vertex = np.full(len(cps), -1, dtype=np.int64)
        for (p, i), o in corner_orbit.items():
            if o in orbit_to_cp:
                self.cone_vertex[orbit_to_cp[o]] = vmap[p][local_ids[p][("v", i)]]
        self.vertex_cone = {int(v): i for i, v in enumerate(self.cone_vertex)}

        if self.grading != 1.0:
            self._grade(local_ids, local_pos)

        # directed local edges -> (global edge, sign)
        directed: dict = {}
        tails, heads, refp, refa, refb = [], [], [], [], []

        def new_edge(p, a, b):
            eid = len(tails)
            tails.append(int(vmap[p][a]))
            heads.append(int(vmap[p][b]))
            refp.append(p)
            refa.append(a)
            refb.append(b)
            return eid

        for p, e, p2, e2 in glued_segments:
            for s in range(N):
                a, b = local_ids[p][bkey(p, e, s)], local_ids[p][bkey(p, e, s + 1)]
                a2, b2 = local_ids[p2][bkey(p2, e2, N - s)], local_ids[p2][bkey(p2, e2, N - s - 1)]
                eid = new_edge(p, a, b)
                directed[(p, a, b)] = (eid, 1)
                directed[(p, b, a)] = (eid, -1)
                directed[(p2, a2, b2)] = (eid, 1)
                directed[(p2, b2, a2)] = (eid, -1)
        F = len(faces_local)
        face_edges = np.empty((F, 3), dtype=np.int64)
        face_signs = np.empty((F, 3), dtype=np.int64)
        face_vertices = np.empty((F, 3), dtype=np.int64)
        face_pos = np.empty((F, 3), dtype=complex)
        face_poly = np.empty(F, dtype=np.int64)
        face_local = np.empty((F, 3), dtype=np.int64)
        for f, (p, tri) in enumerate(faces_local):
            face_poly[f] = p
            face_local[f] = tri
            for s in range(3):
                a, b = tri[s], tri[(s + 1) % 3]
                if (p, a, b) not in directed:
                    eid = new_edge(p, a, b)
                    directed[(p, a, b)] = (eid, 1)
                    directed[(p, b, a)] = (eid, -1)
                face_edges[f, s], face_signs[f, s] = directed[(p, a, b)]
                face_vertices[f, s] = vmap[p][a]
                face_pos[f, s] = local_pos[p][a]
        self._directed = directed
        self.local_ids = local_ids
        self.local_pos = local_pos
        self.edge_tail = np.array(tails, dtype=np.int64)
        self.edge_head = np.array(heads, dtype=np.int64)
        self.edge_ref = (np.array(refp), np.array(refa), np.array(refb))
        self.n_edges = len(tails)
        self.n_faces = F
        self.face_edges = face_edges
        self.face_edge_signs = face_signs
        self.face_vertices = face_vertices
        self.face_pos = face_pos
        self.face_poly = face_poly
        self.face_local = face_local
        self.edge_holonomy = np.array(
            [local_pos[p][b] - local_pos[p][a] for p, a, b in zip(refp, refa, refb)], dtype=complex)
        self._derived()

    def _grade(self, local_ids, local_pos):
        """Pull vertices radially toward points of Sigma: ``d -> R (d/R)**grading``."""
        S = self.surface
        sigma_orbits = {c.orbit for c in self.cone_points}
        orbits = S.corner_orbits()
        R = math.inf
        for p, poly in enumerate(S.polygons):
            for i, v in enumerate(poly):
                if orbits[(p, i)] not in sigma_orbits:
                    continue
                for j, w in enumerate(poly):
                    if j != i:
                        R = min(R, 0.45 * abs(w - v))
        self.grading_radius = R
        for p, poly in enumerate(S.polygons):
            centers = [poly[i] for i in range(len(poly)) if orbits[(p, i)] in sigma_orbits]
            pos = local_pos[p]
            for l, z in enumerate(pos):
                for c in centers:
                    d = abs(z - c)
                    if 0 < d < R:
                        pos[l] = c + (z - c) * (d / R) ** (self.grading - 1.0)
                        break

    def _derived(self):
        P = self.face_pos
        u = P[:, 1] - P[:, 0]
        w = P[:, 2] - P[:, 0]
        self.face_area = 0.5 * (np.conj(u) * w).imag
        if np.any(self.face_area <= 0):
            raise HTooLarge("mesh has degenerate or inverted faces")
        self.face_centroid = P.mean(axis=1)
        self.edge_face_count = np.bincount(self.face_edges.ravel(), minlength=self.n_edges).astype(float)
        # least squares operator for alpha u + beta conj(u) = value, per face
        sides = np.stack([P[:, 1] - P[:, 0], P[:, 2] - P[:, 1], P[:, 0] - P[:, 2]], axis=1)
        A = np.stack([sides, np.conj(sides)], axis=2)  # (F, 3, 2)
        self.covector_pinv = np.linalg.pinv(A)  # (F, 2, 3)
        # cotangent weights
        cot = np.empty((self.n_faces, 3))
        for s in range(3):
            a = P[:, s]
            b = P[:, (s + 1) % 3]
            c = P[:, (s + 2) % 3]
            x, y = a - c, b - c  # angle at c, opposite side s
            cot[:, s] = (np.conj(x) * y).real / (np.conj(x) * y).imag
        w_e = np.zeros(self.n_edges)
        np.add.at(w_e, self.face_edges.ravel(), 0.5 * cot.ravel())
        self.cotan_weight = w_e
        self.d0 = sp.csr_matrix(
            (np.concatenate([-np.ones(self.n_edges), np.ones(self.n_edges)]),
             (np.concatenate([np.arange(self.n_edges)] * 2), np.concatenate([self.edge_tail, self.edge_head]))),
            shape=(self.n_edges, self.n_vertices))
        self.d1 = sp.csr_matrix(
            (self.face_edge_signs.ravel().astype(float),
             (np.repeat(np.arange(self.n_faces), 3), self.face_edges.ravel())),
            shape=(self.n_faces, self.n_edges))
        # edge -> faces
        ef = [[] for _ in range(self.n_edges)]
        for f in range(self.n_faces):
            for s in range(3):
                ef[self.face_edges[f, s]].append((f, s))
        self.edge_faces = ef

    # ------------------------------------------------------------------
    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic) // 2

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def area(self) -> float:
        return float(np.sum(self.face_area))

    @property
    def max_edge_length(self) -> float:
        return float(np.max(np.abs(self.edge_holonomy)))

    @property
    def is_translation(self) -> bool:
        return self.surface.is_translation

    def vertex_angle_sums(self) -> np.ndarray:
        P = self.face_pos
        out = np.zeros(self.n_vertices)
        for s in range(3):
            a = P[:, s]
            x, y = P[:, (s + 1) % 3] - a, P[:, (s + 2) % 3] - a
            ang = np.angle(y / x)
            np.add.at(out, self.face_vertices[:, s], ang)
        return out

    def face_holonomy_sums(self) -> np.ndarray:
        from .forms import side_vectors

        return np.abs(np.sum(side_vectors(self), axis=1))

    def polygon_edge_chain(self, p: int, e: int) -> dict:
        """Edge chain running along side ``e`` of polygon ``p``."""
        N = self.subdivisions
        n = len(self.surface.polygons[p])
        a, b = e, (e + 1) % n

        def key(s):
            if s == 0:
                return ("v", a)
            if s == N:
                return ("v", b)
            return ("s", a, b, s) if a < b else ("s", b, a, N - s)

        chain: dict = {}
        for s in range(N):
            eid, sign = self._directed[(p, self.local_ids[p][key(s)], self.local_ids[p][key(s + 1)])]
            chain[eid] = chain.get(eid, 0) + sign
        return chain

    def locate(self, p: int, key) -> int:
        """Global vertex id of a polygon-local point key."""
        return int(self.local_vertex_map[p][self.local_ids[p][key]])

    def involution_maps(self, poly_perm):
        """Vertex, edge and face permutations induced by a polygon permutation.

        Used for the deck involution of a double cover, whose paired polygons
        are triangulated identically.
        """
        vperm = np.empty(self.n_vertices, dtype=np.int64)
        for p, vm in enumerate(self.local_vertex_map):
            vperm[vm] = self.local_vertex_map[poly_perm[p]]
        refp, refa, refb = self.edge_ref
        eperm = np.empty(self.n_edges, dtype=np.int64)
        esign = np.empty(self.n_edges, dtype=np.int64)
        for e in range(self.n_edges):
            eperm[e], esign[e] = self._directed[(poly_perm[refp[e]], refa[e], refb[e])]
        by_key = {(int(self.face_poly[f]), tuple(self.face_local[f])): f for f in range(self.n_faces)}
        fperm = np.array([by_key[(poly_perm[self.face_poly[f]], tuple(self.face_local[f]))]
                          for f in range(self.n_faces)], dtype=np.int64)
        return vperm, eperm, esign, fperm

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "level": self.level,
            "vertices": self.n_vertices,
            "cone_vertices": [int(v) for v in self.cone_vertex],
            "edges": [{"tail": int(t), "head": int(hd), "holonomy": [z.real, z.imag]}
                      for t, hd, z in zip(self.edge_tail, self.edge_head, self.edge_holonomy)],
            "faces": [{"vertices": [int(v) for v in fv],
                       "edges": [int(e) for e in fe], "signs": [int(s) for s in fs],
                       "chart": [[z.real, z.imag] for z in fp]}
                      for fv, fe, fs, fp in zip(self.face_vertices, self.face_edges,
                                                self.face_edge_signs, self.face_pos)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def faces_csv(self) -> str:
        rows = ["face,v0,v1,v2,x0,y0,x1,y1,x2,y2"]
        for f in range(self.n_faces):
            fv, fp = self.face_vertices[f], self.face_pos[f]
            rows.append(",".join([str(f)] + [str(int(v)) for v in fv]
                                 + [f"{c:.17g}" for z in fp for c in (z.real, z.imag)]))
        return "\n".join(rows) + "\n"

    def __repr__(self):
        return f"Mesh(V={self.n_vertices}, E={self.n_edges}, F={self.n_faces}, h={self.h:g})"


def triangulate(S: FlatSurface, h: float, grading: float = DEFAULT_GRADING) -> Mesh:
    return Mesh(S, h, grading)


# ---------------------------------------------------------------------------
# homology
# ---------------------------------------------------------------------------

def _spanning_tree(M: Mesh, root: int = 0):
    """BFS tree on vertices; returns parent edge per vertex and tree edge set."""
    adj = [[] for _ in range(M.n_vertices)]
    for e in range(M.n_edges):
        t, h = int(M.edge_tail[e]), int(M.edge_head[e])
        if t != h:
            adj[t].append((h, e))
            adj[h].append((t, e))
    parent = {root: (-1, -1)}
    order = [root]
    dq = deque([root])
    while dq:
        v = dq.popleft()
        for w, e in adj[v]:
            if w not in parent:
                parent[w] = (v, e)
                order.append(w)
                dq.append(w)
    tree = {e for v, (u, e) in parent.items() if e >= 0}
    return parent, tree


def tree_path(M: Mesh, parent, a: int, b: int) -> dict:
    """Edge chain along the spanning tree from vertex ``a`` to vertex ``b``."""
    def to_root(v):
        path = []
        while parent[v][0] >= 0:
            u, e = parent[v]
            path.append((v, u, e))
            v = u
        return path

    pa, pb = to_root(a), to_root(b)
    on_a = {v for v, _, _ in pa} | {a}
    # lowest common ancestor
    lca = b
    for v, u, e in pb:
        if lca in on_a:
            break
        lca = u
    chain: dict = {}

    def add(e, c):
        chain[e] = chain.get(e, 0) + c
        if chain[e] == 0:
            del chain[e]

    for v, u, e in pa:
        if v == lca:
            break
        add(e, 1 if M.edge_tail[e] == v else -1)
    for v, u, e in pb:
        if v == lca:
            break
        add(e, 1 if M.edge_tail[e] == u else -1)
    return chain


class TreeCotree:
    """Tree-cotree decomposition: leftover edges index the homology basis."""

    def __init__(self, M: Mesh):
        self.mesh = M
        self.parent, self.tree = _spanning_tree(M)
        # dual tree on faces avoiding primal tree edges
        fparent = {0: (-1, -1)}
        forder = [0]
        dq = deque([0])
        while dq:
            f = dq.popleft()
            for s in range(3):
                e = int(M.face_edges[f, s])
                if e in self.tree:
                    continue
                for g, _ in M.edge_faces[e]:
                    if g not in fparent:
                        fparent[g] = (f, e)
                        forder.append(g)
                        dq.append(g)
        self.face_parent = fparent
        self.face_order = forder
        self.cotree = {e for g, (f, e) in fparent.items() if e >= 0}
        self.leftover = [e for e in range(M.n_edges) if e not in self.tree and e not in self.cotree]

    def cycles(self) -> list[Cycle]:
        M = self.mesh
        out = []
        for e in self.leftover:
            t, h = int(M.edge_tail[e]), int(M.edge_head[e])
            chain = tree_path(M, self.parent, h, t)
            chain[e] = chain.get(e, 0) + 1
            out.append(Cycle(chain))
        return out

    def dual_cochains(self) -> list[np.ndarray]:
        """Closed real cochains ``c_k`` with ``c_k(cycle_j) = delta_kj``."""
        M = self.mesh
        out = []
        for k, ek in enumerate(self.leftover):
            c = np.zeros(M.n_edges)
            c[ek] = 1.0
            for f in reversed(self.face_order[1:]):
                _, pe = self.face_parent[f]
                total = 0.0
                sign_pe = 0
                for s in range(3):
                    e = M.face_edges[f, s]
                    if e == pe:
                        sign_pe += M.face_edge_signs[f, s]
                    else:
                        total += M.face_edge_signs[f, s] * c[e]
                c[pe] = -total / sign_pe
            out.append(c)
        return out


def homology_basis(M: Mesh) -> list[Cycle]:
    return TreeCotree(M).cycles()


def wedge_matrix(M: Mesh, cochains) -> np.ndarray:
    """Integrals of ``c_i ^ c_j`` for closed piecewise-constant cochains."""
    vals = [M.face_edge_signs * np.asarray(c)[M.face_edges] for c in cochains]
    n = len(vals)
    W = np.zeros((n, n), dtype=np.result_type(*[v.dtype for v in vals]) if vals else float)
    for i in range(n):
        for j in range(n):
            W[i, j] = 0.5 * np.sum(vals[i][:, 0] * vals[j][:, 1] - vals[i][:, 1] * vals[j][:, 0])
    return W


def intersection_matrix(M: Mesh, tc: TreeCotree | None = None) -> np.ndarray:
    """Algebraic intersection numbers of the tree-cotree cycles."""
    tc = tc or TreeCotree(M)
    W = wedge_matrix(M, tc.dual_cochains())
    if W.size == 0:
        return W
    return np.rint(np.linalg.inv(W).T).astype(int)


def relative_paths(M: Mesh) -> list[Cycle]:
    """Tree paths from the first point of Sigma to each of the others."""
    if len(M.cone_vertex) < 2:
        return []
    parent, _ = _spanning_tree(M)
    base = int(M.cone_vertex[0])
    return [Cycle(tree_path(M, parent, base, int(v)), base, int(v)) for v in M.cone_vertex[1:]]


def omega_cochain(M: Mesh) -> OneForm:
    """The tautological form: each edge gets its holonomy vector."""
    if not M.is_translation:
        raise HalfTranslationInput("omega is only defined on translation surfaces")
    cov = np.zeros((M.n_faces, 2), dtype=complex)
    cov[:, 0] = 1.0
    return OneForm(M, M.edge_holonomy.copy(), cov)


def period_vector(form: OneForm, cycles) -> np.ndarray:
    return np.array([form.integrate(c.edges) for c in cycles])


def check_genus(M: Mesh) -> bool:
    return M.genus == genus_area(M.surface)[0]
