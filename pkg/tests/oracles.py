"""Independent oracles shared by the unit and acceptance tests."""

import math

import numpy as np

from flatpair.surface import regular_polygon


def primitive_vectors(L, a=1.0, b=1.0):
    """Nonzero primitive vectors (p a, q b) of length at most L."""
    n = int(L / min(a, b)) + 1
    return [(p * a, q * b) for p in range(-n, n + 1) for q in range(-n, n + 1)
            if (p, q) != (0, 0) and math.gcd(p, q) == 1 and math.hypot(p * a, q * b) <= L + 1e-12]


def octagon_ray_oracle(L):
    """Lengths of saddle connections on the regular octagon by tracing rays through translated copies."""
    P = np.array(regular_polygon(8))
    T = [P[i] - P[(i + 5) % 8] for i in range(8)]  # offset of the copy across side i
    # a segment of length L crosses at most L / width + 1 copies, width being the octagon's 1 + sqrt 2
    depth = int(L / (1 + math.sqrt(2))) + 2
    copies, frontier = {0j}, [0j]
    for _ in range(depth):
        frontier = [complex(round((t + v).real, 9), round((t + v).imag, 9)) for t in frontier for v in T]
        frontier = [u for u in set(frontier) if u not in copies]
        copies.update(frontier)
    found = []
    for c in range(8):
        start = P[c]
        e_out, e_in = P[(c + 1) % 8] - start, P[(c - 1) % 8] - start
        targets = {complex(round(z.real, 9), round(z.imag, 9)) for t in copies for z in t + P
                   if 1e-9 < abs(z - start) <= L + 1e-9}
        for Q in targets:
            d = Q - start
            if not ((e_out.conjugate() * d).imag > 1e-8 and (d.conjugate() * e_in).imag > 1e-8):
                continue
            hit = _trace(P, T, start, d, L)
            if hit is not None and abs(hit - Q) < 1e-7:
                found.append(abs(d))
    # oriented interior directions, paired up; the four glued sides are the remaining connections
    assert len(found) % 2 == 0
    return sorted(found)[::2] + [1.0] * 4


def _trace(P, T, start, d, L):
    t = 0j
    x = start
    u = d / abs(d)
    travelled = 0.0
    while travelled <= L + 1e-9:
        best = None
        for i in range(8):
            a, b = t + P[i], t + P[(i + 1) % 8]
            e = b - a
            den = (u.conjugate() * e).imag
            if abs(den) < 1e-14:
                continue
            s = ((a - x).conjugate() * e).imag / den
            w = ((a - x).conjugate() * u).imag / den
            if s > 1e-9 and -1e-9 <= w <= 1 + 1e-9 and (best is None or s < best[0]):
                best = (s, i, w)
        if best is None:
            return None
        s, i, w = best
        x = x + s * u
        travelled += s
        if travelled > L + 1e-9:
            return None
        if w < 1e-7 or w > 1 - 1e-7:
            return x
        t = t + T[i]
    return None
