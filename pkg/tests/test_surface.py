import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatpair.errors import AlreadyTranslation, Disconnected, EdgeMismatch, NonSimplePolygon, ParseError
from flatpair.surface import (BUNDLED, bundled, cone_points, double_cover, gauss_bonnet_defect, genus_area,
                              loads, regular_polygon, stratum_signature, validate)


def square(gl, marked=()):
    return {"polygons": [{"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}],
            "gluings": [{"from": a, "to": b, "sign": s} for a, b, s in gl],
            "marked_points": [{"polygon": 0, "position": list(z)} for z in marked]}


TORUS = [([0, 0], [0, 2], 1), ([0, 1], [0, 3], 1)]


def polygon_surface(n):
    """Regular 2n-gon with opposite sides glued by translation."""
    verts = regular_polygon(2 * n)
    return {"polygons": [{"vertices": [[z.real, z.imag] for z in verts]}],
            "gluings": [{"from": [0, i], "to": [0, i + n], "sign": 1} for i in range(n)]}


def test_octagon_summary():
    S = bundled("octagon")
    g, area = genus_area(S)
    assert g == 2
    assert area == pytest.approx(2 * (1 + math.sqrt(2)), rel=1e-14)
    assert stratum_signature(S) == "H(2)"
    (cp,) = cone_points(S)
    assert cp.total_angle == pytest.approx(6 * math.pi)


def test_pillowcase_cone_angles():
    S = bundled("pillowcase")
    assert not S.is_translation
    cps = cone_points(S)
    assert len(cps) == 4
    assert all(c.total_angle == pytest.approx(math.pi) and c.order == -1 for c in cps)
    assert genus_area(S) == (0, pytest.approx(1.0))


@pytest.mark.parametrize("name", BUNDLED)
def test_gauss_bonnet(name):
    assert abs(gauss_bonnet_defect(bundled(name))) < 1e-9


def test_marked_torus():
    S = validate(square(TORUS, marked=[(0, 0)]))
    assert stratum_signature(S) == "H(0)"
    (cp,) = cone_points(S)
    assert cp.is_marked and cp.order == 0


def test_unmarked_torus_has_empty_sigma():
    assert cone_points(validate(square(TORUS))) == []


@settings(max_examples=8, deadline=None)
@given(st.integers(2, 6))
def test_regular_polygon_genus(n):
    # opposite sides of a regular 2n-gon: genus floor(n/2), one or two cone points
    S = validate(polygon_surface(n))
    g, _ = genus_area(S)
    assert g == n // 2
    assert abs(gauss_bonnet_defect(S)) < 1e-9


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 10.0))
def test_scaling(s):
    S = bundled("octagon")
    assert genus_area(S.scaled(s))[1] == pytest.approx(s * s * genus_area(S)[1], rel=1e-12)


def test_malformed_json_position():
    with pytest.raises(ParseError, match="line 2, column 1"):
        loads('{"polygons": [[0,0],\n')
    assert ParseError.exit_code == 2


def test_unglued_edge():
    with pytest.raises(EdgeMismatch):
        validate(square([([0, 0], [0, 2], 1)]))


def test_incompatible_edges():
    raw = square(TORUS)
    raw["polygons"][0]["vertices"][2] = [1.2, 1]
    with pytest.raises(EdgeMismatch):
        validate(raw)


def test_self_translation_rejected():
    with pytest.raises(EdgeMismatch):
        validate(square([([0, 0], [0, 0], 1), ([0, 1], [0, 3], 1), ([0, 2], [0, 2], -1)]))


def test_non_simple():
    raw = square(TORUS)
    raw["polygons"][0]["vertices"] = [[0, 0], [1, 1], [1, 0], [0, 1]]
    with pytest.raises(NonSimplePolygon):
        validate(raw)


def test_disconnected():
    raw = square(TORUS)
    raw["polygons"].append({"vertices": [[2, 0], [3, 0], [3, 1], [2, 1]]})
    raw["gluings"] += [{"from": [1, 0], "to": [1, 2]}, {"from": [1, 1], "to": [1, 3]}]
    with pytest.raises(Disconnected):
        validate(raw)


def test_roundtrip():
    S = bundled("q1111")
    S2 = loads(json.dumps(S.to_dict()))
    assert genus_area(S2) == genus_area(S)
    assert stratum_signature(S2) == stratum_signature(S) == "Q(1, 1, 1, 1)"


def test_double_cover():
    D = double_cover(bundled("pillowcase"))
    assert D.cover.is_translation
    g, area = genus_area(D.cover)
    assert (g, area) == (1, pytest.approx(2.0))
    assert len(D.ramification_orbits()) == 4
    Dq = double_cover(bundled("q1111"))
    # simple zeros lift to order 2 zeros; genus 2 base with 4 branch points gives genus 5
    assert genus_area(Dq.cover)[0] == 5
    assert stratum_signature(Dq.cover) == "H(2, 2, 2, 2)"
    with pytest.raises(AlreadyTranslation):
        double_cover(bundled("octagon"))
