"""Command line interface: ``validate``, ``pair``, ``verify`` and ``report``.

Exit codes are 0 on success, 1 when a verification check fails, 2 for bad
input and 3 for numerical failures.  JSON output is versioned and written
with sorted keys so identical runs give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import norms
from .errors import FlatPairError, InputError
from .forms import OneForm
from .hodge import anti_invariant_basis, harmonic_basis, hodge_norm, holomorphic_basis
from .mesh import DEFAULT_GRADING, omega_cochain, triangulate
from .pairing import (DEFAULT_CONTOUR_SAMPLES, DEFAULT_RADIUS_FACTOR, QDElement, _q_values, default_radii,
                      discarded_contour, pairing_closed, pairing_halftranslation, pairing_harmonic,
                      pairing_principal, relative_deformation)
from .surface import BUNDLED, bundled, cone_points, double_cover, genus_area, load, stratum_signature

SCHEMA = 1
SUITES = ("stokes", "residue-decay", "hodge-teich", "mean-value", "int-beta", "kernel")
# seeded trials per suite unless --trials is given
DEFAULT_TRIALS = {"stokes": 5, "residue-decay": 5, "hodge-teich": 20, "int-beta": 20, "kernel": 10}

# acceptance tolerances
STOKES_RTOL = 1e-3
EXACT_TOL = 1e-3
RESIDUE_RTOL = 2e-3
SLOPE_TARGET, SLOPE_TOL = 2.0, 0.2
PRINCIPAL_RTOL = 1e-2
KERNEL_TOL = 1e-6
SANDWICH_TOL = 1e-2
EQUALITY_TOL = 1e-3
WITNESS_RTOL = 1e-2


@dataclass
class RunConfig:
    h: float = 0.1
    grading: float = DEFAULT_GRADING
    radius_factor: float = DEFAULT_RADIUS_FACTOR
    contour_samples: int = DEFAULT_CONTOUR_SAMPLES
    eps0: float | None = None
    restarts: int = norms.DEFAULT_RESTARTS
    tol: float = norms.DEFAULT_TOL
    seed: int = 0
    trials: int | None = None

    def check(self):
        for name in ("h", "grading", "radius_factor", "contour_samples", "restarts", "tol"):
            if not getattr(self, name) > 0:
                raise InputError(f"--{name.replace('_', '-')} must be positive")
        if self.eps0 is not None and not self.eps0 > 0:
            raise InputError("--eps0 must be positive")
        if self.seed < 0:
            raise InputError("--seed must be non-negative")
        if self.trials is not None and self.trials < 1:
            raise InputError("--trials must be at least 1")
        return self

    def n_trials(self, suite: str) -> int:
        return self.trials if self.trials is not None else DEFAULT_TRIALS[suite]


# ---------------------------------------------------------------------------
# problem setup
# ---------------------------------------------------------------------------

def load_surface(spec: str):
    """A bundled example name or a path to a surface JSON file."""
    if spec in BUNDLED and not os.path.exists(spec):
        return bundled(spec)
    if not os.path.exists(spec):
        raise InputError(f"no such surface file or bundled example: {spec!r} (bundled: {', '.join(BUNDLED)})")
    return load(spec)


class Problem:
    """A surface, its holonomy double cover when it has one, and the mesh the computations run on."""

    def __init__(self, S, cfg: RunConfig):
        self.S = S
        self.cfg = cfg
        self.D = None if S.is_translation else double_cover(S)
        self.X = S if self.D is None else self.D.cover
        self.M = triangulate(self.X, cfg.h, cfg.grading)

    @property
    def radii(self) -> np.ndarray:
        return default_radii(self.M, self.cfg.radius_factor)

    @property
    def eps0(self):
        if self.cfg.eps0 is None:
            return None
        return np.full(len(self.M.cone_vertex), self.cfg.eps0)

    def harmonic(self) -> list:
        return anti_invariant_basis(self.D, self.M).harmonic if self.D else harmonic_basis(self.M).forms

    def holomorphic(self) -> list:
        return anti_invariant_basis(self.D, self.M).holomorphic if self.D else holomorphic_basis(self.M)

    def random_harmonic(self, rng) -> OneForm:
        forms = self.harmonic()
        c = rng.normal(size=len(forms)) + 1j * rng.normal(size=len(forms))
        return OneForm(self.M, sum(ci * f.edge_values for ci, f in zip(c, forms)))

    def random_holomorphic(self, rng) -> OneForm:
        forms = self.holomorphic()
        c = rng.normal(size=len(forms)) + 1j * rng.normal(size=len(forms))
        return OneForm(self.M, sum(ci * f.edge_values for ci, f in zip(c, forms)),
                       sum(ci * f.face_covectors for ci, f in zip(c, forms)))

    def summary(self) -> dict:
        g, area = genus_area(self.S)
        return {"genus": g, "area": area, "stratum": stratum_signature(self.S),
                "translation": self.S.is_translation, "faces": int(self.M.n_faces), "h": float(self.M.h)}


def surface_summary(S) -> dict:
    g, area = genus_area(S)
    cps = cone_points(S)
    return {
        "genus": g,
        "area": area,
        "translation": S.is_translation,
        "stratum": stratum_signature(S),
        "cone_points": [{"angle_over_pi": c.total_angle / math.pi, "order": c.order, "marked": c.is_marked}
                        for c in cps],
    }


def _summary_text(d: dict) -> str:
    kind = d["stratum"] if d["translation"] else f"half-translation, {d['stratum']}"
    lines = [f"genus {d['genus']}, {kind}, area {d['area']:.4f}",
             f"{len(d['cone_points'])} cone point(s)"]
    for i, c in enumerate(d["cone_points"]):
        tag = ", marked" if c["marked"] else ""
        lines.append(f"  {i}: angle {c['angle_over_pi']:.6g} pi, order {c['order']}{tag}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# eta and q specifications
# ---------------------------------------------------------------------------

def _complexes(text: str) -> list[complex]:
    try:
        return [complex(t.strip().replace(" ", "")) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"cannot parse complex numbers from {text!r}") from None


def _index(text: str, n: int, what: str) -> int:
    try:
        i = int(text)
    except ValueError:
        raise InputError(f"bad {what} index {text!r}") from None
    if not 0 <= i < n:
        raise InputError(f"{what} index {i} out of range (0..{n - 1})")
    return i


def parse_eta(P: Problem, spec: str) -> OneForm:
    """``harmonic-basis:i``, ``conj-holomorphic:i``, ``periods:p1,p2,...`` or ``dzbar:b``,
    optionally followed by ``+relative:v1,...`` (one value per point of Sigma)."""
    M = P.M
    head, _, rel = spec.partition("+relative:")
    kind, _, arg = head.partition(":")
    if kind == "harmonic-basis":
        forms = P.harmonic()
        eta = forms[_index(arg, len(forms), "harmonic basis")]
    elif kind == "conj-holomorphic":
        forms = P.holomorphic()
        eta = forms[_index(arg, len(forms), "holomorphic basis")].conj()
    elif kind == "periods":
        hb = harmonic_basis(M)
        p = np.asarray(_complexes(arg))
        if len(p) != len(hb.forms):
            raise InputError(f"need {len(hb.forms)} periods, got {len(p)}")
        v = np.linalg.solve(hb.period_matrix.T, p)
        eta = OneForm(M, sum(vi * f.edge_values for vi, f in zip(v, hb.forms)))
    elif kind == "dzbar":
        b = _complexes(arg or "1")
        if len(b) != 1:
            raise InputError("dzbar takes a single coefficient")
        eta = OneForm(M, b[0] * np.conj(M.edge_holonomy))
    else:
        raise InputError(f"unknown eta spec {spec!r}")
    if rel:
        vals = _complexes(rel)
        if len(vals) != len(M.cone_vertex):
            raise InputError(f"need {len(M.cone_vertex)} relative values, got {len(vals)}")
        eta = eta + relative_deformation(M, vals)
    return eta


def _matrix_entry(x) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2:
        return complex(x[0], x[1])
    if isinstance(x, str):
        return _complexes(x)[0]
    raise InputError(f"bad matrix entry {x!r}")


def parse_q(P: Problem, spec: str):
    """``omega-squared[:c]``, ``coeffs:c1,...`` for ``omega * sum c_k beta_k``, or
    ``matrix:<json>`` for ``sum c_ij beta_i beta_j`` with ``beta_0 = omega``.

    On a half-translation surface the differential is the pullback to the
    double cover, so ``omega-squared`` is the defining differential itself.
    """
    M = P.M
    kind, _, arg = spec.partition(":")
    if kind == "omega-squared":
        c = _complexes(arg) if arg else [1.0]
        return QDElement.omega_squared(M, c[0])
    forms = P.holomorphic()
    if kind == "coeffs":
        c = _complexes(arg)
        if len(c) != len(forms):
            raise InputError(f"need {len(forms)} coefficients, got {len(c)}")
        return QDElement.omega_times(M, forms, c)
    if kind == "matrix":
        try:
            raw = json.loads(arg)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed matrix at column {exc.colno}: {exc.msg}") from None
        C = np.array([[_matrix_entry(x) for x in row] for row in raw], dtype=complex)
        if C.shape != (len(forms) + 1, len(forms) + 1):
            raise InputError(f"matrix must be {len(forms) + 1}x{len(forms) + 1}")
        return QDElement([omega_cochain(M)] + list(forms), C)
    raise InputError(f"unknown q spec {spec!r}")


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------

def _rel(a: complex, b: complex, scale: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), scale, 1e-300)


def _q_l2(M, q) -> float:
    g = _q_values(M, q)
    return float(np.sqrt(np.sum(np.abs(g) ** 2 * M.face_area)))


def _slope(r, d) -> float:
    return float(np.polyfit(np.log(r), np.log(d), 1)[0])


def suite_stokes(P: Problem, rng) -> dict:
    M, cfg = P.M, P.cfg
    r = P.radii
    checks = []
    qn = _q_l2(M, None)
    for t in range(cfg.n_trials("stokes")):
        eta = P.random_harmonic(rng)
        v1 = pairing_closed(M, eta, None, r, cfg.contour_samples).value
        v2 = pairing_closed(M, eta, None, r / 2, cfg.contour_samples).value
        err = _rel(v1, v2, 1e-6 * hodge_norm(M, eta) * qn)
        checks.append({"name": f"radius-halving[{t}]", "value": [v1.real, v1.imag], "rel_diff": err,
                       "pass": err <= STOKES_RTOL})
    if len(M.cone_vertex):
        for k, frac in enumerate((0.5, 0.25)):
            vals = rng.normal(size=len(M.cone_vertex)) + 1j * rng.normal(size=len(M.cone_vertex))
            eta = relative_deformation(M, vals, frac * r)
            v = pairing_closed(M, eta, None, r, cfg.contour_samples).value
            bound = EXACT_TOL * hodge_norm(M, eta) * qn
            checks.append({"name": f"exact-form[{k}]", "abs_value": abs(v), "bound": bound, "pass": abs(v) <= bound})
    return {"checks": checks}


def suite_residue(P: Problem, rng) -> dict:
    M, cfg = P.M, P.cfg
    r = P.radii
    checks = []
    qn = _q_l2(M, None)
    for t in range(cfg.n_trials("residue-decay")):
        eta = P.random_harmonic(rng)
        vc = pairing_closed(M, eta, None, r, cfg.contour_samples).value
        vh = pairing_harmonic(M, eta, None, P.eps0, cfg.contour_samples).value
        err = _rel(vc, vh, 1e-6 * hodge_norm(M, eta) * qn)
        check = {"name": f"harmonic-vs-closed[{t}]", "rel_diff": err, "pass": err <= RESIDUE_RTOL}
        if len(M.cone_vertex):
            radii = [r / 2 ** i for i in range(3)]
            d = [sum(abs(x) for x in discarded_contour(M, eta, None, rr, cfg.contour_samples)) for rr in radii]
            if min(d) > 1e-14 * hodge_norm(M, eta) * qn:
                s = _slope([float(rr[0]) for rr in radii], d)
                check["discarded"] = d
                check["slope"] = s
                check["pass"] = check["pass"] and abs(s - SLOPE_TARGET) <= SLOPE_TOL
        checks.append(check)
    if P.D is not None:
        forms = P.holomorphic()
        for t in range(cfg.n_trials("kernel")):
            eta = P.random_harmonic(rng)
            k = rng.normal(size=len(forms)) + 1j * rng.normal(size=len(forms))
            q = QDElement.omega_times(M, forms, k)
            pp = pairing_principal(P.D, M, eta, q)
            ph = pairing_halftranslation(P.D, M, eta, q, r, cfg.contour_samples).value
            err = _rel(pp, ph, 0.0)
            checks.append({"name": f"principal-vs-halftranslation[{t}]", "rel_diff": err,
                           "pass": err <= PRINCIPAL_RTOL})
    return {"checks": checks}


def suite_hodge_teich(P: Problem, rng) -> dict:
    if P.D is None:
        return {"checks": [], "skipped": "needs a half-translation surface"}
    M, cfg = P.M, P.cfg
    checks = []
    one_dim = len(P.holomorphic()) == 1
    for t in range(cfg.n_trials("hodge-teich")):
        beta = P.random_holomorphic(rng)
        seed = int(rng.integers(2 ** 31))
        rep = norms.hodge_teich_report(P.D, M, beta.conj(), cfg.restarts, cfg.tol, seed, SANDWICH_TOL)
        a1 = rep["cover_area_1"]
        ok = a1["lower_ok"] and a1["upper_ok"]
        c = {"name": f"sandwich[{t}]", "hodge_norm": rep["hodge_norm"], "teich_estimate": a1["teich_estimate"],
             "upper": a1["upper"], "r": a1["r"], "lower_ratio": a1["lower_ratio"], "converged": rep["converged"]}
        if one_dim:
            # the anti-invariant forms are multiples of omega and the witness attains the sup
            c["equality_gap"] = abs(a1["lower_ratio"] - 1)
            ok = ok and c["equality_gap"] <= EQUALITY_TOL
        c["pass"] = bool(ok)
        checks.append(c)
        w = norms.lower_bound_witness(P.D, M, beta)
        err = abs(w.pairing - w.beta_norm ** 2) / w.beta_norm ** 2
        checks.append({"name": f"witness[{t}]", "rel_diff": err, "ratio": w.ratio, "pass": err <= WITNESS_RTOL})
    return {"checks": checks}


def suite_mean_value(P: Problem, rng) -> dict:
    res = norms.mean_value_check(1000, int(rng.integers(2 ** 31)))
    return {"checks": [dict(res, name="mean-value-chain", **{"pass": res["violations"] == 0})]}


def suite_int_beta(P: Problem, rng) -> dict:
    M, cfg = P.M, P.cfg
    if not len(M.cone_vertex) or not P.holomorphic():
        return {"checks": [], "skipped": "no points of Sigma or no holomorphic forms"}
    checks = []
    for t in range(cfg.n_trials("int-beta")):
        beta = P.random_holomorphic(rng)
        pw = norms.pointwise_ratio_check(M, beta)
        checks.append(dict(pw, name=f"pointwise[{t}]", **{"pass": pw["violations"] == 0}))
        for j in range(len(M.cone_vertex)):
            ib = norms.int_beta_bound_check(M, beta, j)
            checks.append(dict(ib, name=f"int-beta[{t},{j}]", **{"pass": ib["violations"] == 0}))
    return {"checks": checks}


def suite_kernel(P: Problem, rng) -> dict:
    if P.D is None:
        return {"checks": [], "skipped": "needs a half-translation surface"}
    M = P.M
    forms = P.holomorphic()
    checks = []
    for i, beta in enumerate(forms):
        for k in range(len(forms)):
            q = QDElement.omega_times(M, forms, np.eye(len(forms))[k])
            v = pairing_principal(P.D, M, beta, q)
            bound = KERNEL_TOL * hodge_norm(M, beta)
            checks.append({"name": f"kernel[{i},{k}]", "abs_value": abs(v), "bound": bound, "pass": abs(v) <= bound})
    return {"checks": checks}


SUITE_FUNCS = {
    "stokes": suite_stokes,
    "residue-decay": suite_residue,
    "hodge-teich": suite_hodge_teich,
    "mean-value": suite_mean_value,
    "int-beta": suite_int_beta,
    "kernel": suite_kernel,
}


def run_suites(P: Problem, names) -> dict:
    """Run the named suites with one generator seeded from the config; suites draw from it in order."""
    rng = np.random.default_rng(P.cfg.seed)
    out = {}
    for name in names:
        res = SUITE_FUNCS[name](P, rng)
        res["pass"] = all(c["pass"] for c in res["checks"])
        res["violations"] = sum(not c["pass"] for c in res["checks"])
        out[name] = res
    return out


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def dumps(doc: dict) -> str:
    return json.dumps(_jsonable(dict(doc, schema=SCHEMA)), sort_keys=True, indent=2) + "\n"


def _flatten(x, prefix=""):
    if isinstance(x, dict):
        for k in sorted(x):
            yield from _flatten(x[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(x, list) and not (len(x) == 2 and all(isinstance(v, float) for v in x)):
        for i, v in enumerate(x):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, x


def to_csv(doc: dict) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in _flatten(_jsonable(dict(doc, schema=SCHEMA))):
        w.writerow([k, v if isinstance(v, str) else json.dumps(v)])
    return buf.getvalue()


def emit(doc: dict, fmt: str, out: str | None):
    text = dumps(doc) if fmt == "json" else to_csv(doc)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _config(args) -> RunConfig:
    return RunConfig(h=args.h, grading=args.grading, radius_factor=args.radius_factor,
                     contour_samples=args.contour_samples, eps0=args.eps0, restarts=args.restarts,
                     tol=args.tol, seed=args.seed, trials=args.trials).check()


def cmd_validate(args) -> int:
    S = load_surface(args.surface)
    d = surface_summary(S)
    if args.format == "json":
        emit({"command": "validate", "surface": d}, "json", args.out)
    elif args.format == "csv":
        emit({"command": "validate", "surface": d}, "csv", args.out)
    else:
        print(_summary_text(d))
    return 0


def cmd_pair(args) -> int:
    cfg = _config(args)
    P = Problem(load_surface(args.surface), cfg)
    eta = parse_eta(P, args.eta)
    q = parse_q(P, args.q)
    M = P.M
    radii = P.radii if args.radius is None else np.full(len(M.cone_vertex), args.radius)
    method = args.method
    if method == "auto":
        method = "closed" if P.D is None else "halftranslation"
    doc = {"command": "pair", "surface": P.summary(), "config": asdict(cfg), "eta": args.eta, "q": args.q,
           "method": method}
    if method == "closed":
        res = pairing_closed(M, eta, q, radii, cfg.contour_samples)
    elif method == "harmonic":
        res = pairing_harmonic(M, eta, q, P.eps0, cfg.contour_samples)
    elif method == "halftranslation":
        if P.D is None:
            raise InputError("halftranslation pairing needs a half-translation surface")
        res = pairing_halftranslation(P.D, M, eta, q, radii, cfg.contour_samples)
    else:
        if P.D is None:
            raise InputError("principal pairing needs a half-translation surface")
        v = pairing_principal(P.D, M, eta, q)
        doc["result"] = {"value": v}
        emit(doc, args.format, args.out)
        return 0
    doc["result"] = res.to_dict()
    emit(doc, args.format, args.out)
    return 0


def _verify_doc(args, suites) -> tuple[dict, Problem]:
    cfg = _config(args)
    P = Problem(load_surface(args.surface), cfg)
    results = run_suites(P, suites)
    doc = {"command": "verify", "surface": P.summary(), "surface_spec": args.surface, "config": asdict(cfg),
           "suites": results, "pass": all(r["pass"] for r in results.values())}
    return doc, P


def _suites(name: str) -> list[str]:
    return list(SUITES) if name == "all" else [name]


def cmd_verify(args) -> int:
    doc, _ = _verify_doc(args, _suites(args.suite))
    emit(doc, args.format, args.out)
    return 0 if doc["pass"] else 1


def cmd_report(args) -> int:
    from . import plots

    os.makedirs(args.out, exist_ok=True)
    doc, P = _verify_doc(args, _suites(args.suite))
    M, cfg = P.M, P.cfg
    figures = []
    rng = np.random.default_rng(cfg.seed)
    holo = P.holomorphic()
    if holo:
        path = os.path.join(args.out, "mesh.png")
        vals = np.log10(np.maximum(np.abs(holo[-1].alpha), 1e-300))
        plots.plot_mesh(M, vals, path, "log10 |beta / omega|, last holomorphic basis form")
        figures.append("mesh.png")
    if len(M.cone_vertex) and P.harmonic():
        eta = P.random_harmonic(rng)
        factors = [cfg.radius_factor / 2 ** i for i in range(4)]
        vals = [pairing_closed(M, eta, None, default_radii(M, f), cfg.contour_samples).value for f in factors]
        plots.plot_stokes(factors, vals, os.path.join(args.out, "stokes.png"))
        figures.append("stokes.png")
        radii = [P.radii / 2 ** i for i in range(4)]
        d = [sum(abs(x) for x in discarded_contour(M, eta, None, rr, cfg.contour_samples)) for rr in radii]
        if min(d) > 0:
            rs = [float(rr[0]) for rr in radii]
            plots.plot_decay(rs, d, os.path.join(args.out, "decay.png"), _slope(rs, d))
            figures.append("decay.png")
    ht = doc["suites"].get("hodge-teich", {}).get("checks", [])
    sw = [c for c in ht if c["name"].startswith("sandwich")]
    if sw:
        plots.plot_sandwich([c["hodge_norm"] for c in sw], [c["teich_estimate"] for c in sw],
                            [c["upper"] for c in sw], os.path.join(args.out, "sandwich.png"))
        figures.append("sandwich.png")
    doc["figures"] = figures
    fmt = args.format
    with open(os.path.join(args.out, f"report.{fmt}"), "w") as fh:
        fh.write(dumps(doc) if fmt == "json" else to_csv(doc))
    print(os.path.join(args.out, f"report.{fmt}"))
    return 0 if doc["pass"] else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("surface", help=f"surface JSON file or bundled name ({', '.join(BUNDLED)})")
    p.add_argument("--h", type=float, default=0.1, help="target mesh edge length")
    p.add_argument("--grading", type=float, default=DEFAULT_GRADING, help="radial grading exponent near Sigma")
    p.add_argument("--radius-factor", type=float, default=DEFAULT_RADIUS_FACTOR,
                   help="contour radius as a fraction of the embedding radius")
    p.add_argument("--contour-samples", type=int, default=DEFAULT_CONTOUR_SAMPLES,
                   help="contour polygon vertices per 2 pi of cone angle")
    p.add_argument("--eps0", type=float, default=None, help="principal value radius (default: half the contour radius)")
    p.add_argument("--restarts", type=int, default=norms.DEFAULT_RESTARTS,
                   help="random starts for the Teichmuller ascent")
    p.add_argument("--tol", type=float, default=norms.DEFAULT_TOL, help="ascent stopping tolerance")
    p.add_argument("--seed", type=int, default=0, help="seed for every random draw")
    p.add_argument("--trials", type=int, default=None, help="seeded trials per suite")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flatpair", description="Pairings and norms on flat surfaces.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a surface file and print a summary")
    p.add_argument("surface")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--out", default=None, help="write output here instead of stdout")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("pair", help="evaluate the pairing of a closed form with a quadratic differential")
    _common(p)
    p.add_argument("--eta", default="harmonic-basis:0",
                   help="harmonic-basis:i | conj-holomorphic:i | periods:p1,... | dzbar:b, optionally +relative:v1,...")
    p.add_argument("--q", default="omega-squared", help="omega-squared[:c] | coeffs:c1,... | matrix:<json>")
    p.add_argument("--method", choices=("auto", "closed", "harmonic", "principal", "halftranslation"),
                   default="auto")
    p.add_argument("--radius", type=float, default=None, help="contour radius override for every point of Sigma")
    p.add_argument("--out", default=None, help="write output here instead of stdout")
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("verify", help="run property suites; exit 1 on any violation")
    _common(p)
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--out", default=None, help="write output here instead of stdout")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="run suites and write the report plus figures to a directory")
    _common(p)
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--out", default="flatpair-report", help="report directory")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FlatPairError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
