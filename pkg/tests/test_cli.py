import json

import numpy as np
import pytest

from flatpair import cli
from flatpair.forms import OneForm
from flatpair.hodge import harmonic_basis
from flatpair.mesh import period_vector, triangulate
from flatpair.surface import bundled


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_octagon(capsys):
    code, out, _ = run(capsys, "validate", "octagon")
    assert code == 0
    assert out.startswith("genus 2, H(2), area 4.8284")


def test_validate_pillowcase(capsys):
    code, out, _ = run(capsys, "validate", "pillowcase", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["schema"] == 1
    assert d["surface"]["genus"] == 0 and not d["surface"]["translation"]
    assert [c["angle_over_pi"] for c in d["surface"]["cone_points"]] == pytest.approx([1, 1, 1, 1])


def test_malformed_json(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "polygons": [\n    [0, 0],,\n')
    code, _, err = run(capsys, "validate", str(p))
    assert code == 2
    assert "line 3, column" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "validate", "/nonexistent/surface.json")
    assert code == 2 and "no such surface" in err


def test_pair_torus(capsys):
    code, out, _ = run(capsys, "pair", "square_torus", "--h", "0.1", "--eta", "dzbar:0.3-0.7j")
    d = json.loads(out)
    assert code == 0
    assert d["result"]["value"] == pytest.approx([0.3, -0.7], abs=1e-12)
    assert d["result"]["error_estimate"] < 1e-9
    assert d["method"] == "closed"


def test_pair_exact_form_is_zero(capsys):
    code, out, _ = run(capsys, "pair", "square_torus_2marked", "--h", "0.1", "--eta", "dzbar:0+relative:1,2j",
                       "--method", "closed")
    assert code == 0
    assert json.loads(out)["result"]["value"] == pytest.approx([0, 0], abs=1e-10)


def test_pair_periods_roundtrip(capsys):
    # a form with the periods of dzbar on the torus reproduces dzbar's pairing
    code, out, _ = run(capsys, "pair", "square_torus", "--h", "0.1", "--eta", "dzbar:1")
    v1 = json.loads(out)["result"]["value"]
    M = triangulate(bundled("square_torus"), 0.1)
    p = period_vector(OneForm(M, np.conj(M.edge_holonomy)), harmonic_basis(M).cycles)
    spec = "periods:" + ",".join(repr(complex(z)).strip("()") for z in p)
    code, out, _ = run(capsys, "pair", "square_torus", "--h", "0.1", "--eta", spec)
    assert code == 0
    assert json.loads(out)["result"]["value"] == pytest.approx(v1, abs=1e-10)


def test_pair_halftranslation_default(capsys):
    code, out, _ = run(capsys, "pair", "pillowcase", "--h", "0.2", "--eta", "dzbar:2", "--q", "omega-squared")
    d = json.loads(out)
    assert code == 0 and d["method"] == "halftranslation"
    assert d["result"]["value"] == pytest.approx([2, 0], abs=1e-9)


def test_radius_override_out_of_range(capsys):
    code, _, err = run(capsys, "pair", "octagon", "--h", "0.2", "--radius", "0.7")
    assert code == 2 and "RadiusTooLarge" in err


@pytest.mark.parametrize("argv", [["pair", "octagon", "--eta", "nonsense"], ["pair", "octagon", "--q", "coeffs:1"],
                                  ["pair", "octagon", "--eta", "harmonic-basis:9"], ["pair", "octagon", "--h", "-1"]])
def test_bad_specs(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_unknown_suite(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "octagon", "bogus"])
    assert exc.value.code == 2


def test_verify_deterministic(capsys, tmp_path):
    args = ["verify", "pillowcase", "all", "--h", "0.2", "--trials", "2", "--restarts", "4", "--seed", "9"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    d = json.loads(a.read_text())
    assert d["pass"] and d["schema"] == 1 and d["config"]["seed"] == 9
    assert set(d["suites"]) == set(cli.SUITES)


def test_verify_reports_violation(capsys, monkeypatch):
    monkeypatch.setattr(cli, "STOKES_RTOL", -1.0)
    code, out, _ = run(capsys, "verify", "octagon", "stokes", "--h", "0.2", "--trials", "1")
    assert code == 1
    assert not json.loads(out)["pass"]


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "octagon", "mean-value", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "key,value"
    assert "schema,1" in lines


def test_report_writes_figures(tmp_path, capsys):
    out = tmp_path / "rep"
    code = cli.main(["report", "octagon", "--h", "0.2", "--trials", "1", "--suite", "stokes", "--out", str(out)])
    assert code == 0
    names = {p.name for p in out.iterdir()}
    assert {"report.json", "mesh.png", "stokes.png", "decay.png"} <= names
    assert json.loads((out / "report.json").read_text())["figures"]
