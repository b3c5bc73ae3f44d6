"""paralab command line.

Every subcommand accepts ``--config file.json``; explicit flags override the
JSON fields and the resolved configuration is written into the artifact.
Errors are reported as JSON on stderr with the exit code of the error class.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
import mpmath
import numpy as np
from mpmath.ctx_mp_python import _mpc, _mpf

from . import acceptance
from .cohom import Rhs, cocycle, construct_global, f0_cocycle_closed_form, sectorial_solution
from .errors import DomainError, NumericalError, ParalabError, PreconditionError
from .germ import germ_from_json, germ_to_json, get_germ, phi_germ
from .hp import cnum, context, default_digits, is_fp
from .moduli import (DEFAULT_DEGREE, DEFAULT_POINTS, MOMENT_DIGITS, Q_WINDOW, ev_from_two_sided_moments,
                     ev_modulus_direct, m_moment)
from .orbitgeom import (area_function, orbit, orbit_length_for, reconstruct_orbit_from_area,
                        second_derivative_probe, write_area_csv)
from .principal import principal_via_cohom, principal_via_geometry

# -- value handling --------------------------------------------------------------------


def parse_complex(s) -> complex:
    if isinstance(s, (int, float, complex)):
        return complex(s)
    if isinstance(s, (list, tuple)) and len(s) == 2:
        return complex(float(s[0]), float(s[1]))
    try:
        return complex(str(s).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise PreconditionError(f"cannot parse complex number {s!r}") from None


def parse_range(s) -> tuple:
    if isinstance(s, (list, tuple)):
        a, b = s
    else:
        a, _, b = str(s).partition(":")
    try:
        lo, hi = float(a), float(b)
    except ValueError:
        raise PreconditionError(f"range must look like lo:hi, got {s!r}") from None
    if not 0 < lo < hi:
        raise PreconditionError("range needs 0 < lo < hi")
    return lo, hi


class Encoder:
    """JSON conversion at the working precision: doubles stay numbers, higher
    precision values become decimal strings so no digits are dropped."""

    def __init__(self, digits: int):
        self.digits = digits

    def num(self, x):
        if x is None or isinstance(x, (bool, int, str)):
            return x
        if isinstance(x, (complex, _mpc, np.complexfloating)):
            return [self.num(x.real), self.num(x.imag)]
        if isinstance(x, _mpf) and self.digits > 16:
            if mpmath.isnan(x):
                raise NumericalError("NaN in output")
            return mpmath.nstr(x, self.digits, strip_zeros=False)
        v = float(x)
        if math.isnan(v):
            raise NumericalError("NaN in output")
        return v

    def __call__(self, obj):
        if isinstance(obj, dict):
            return {str(k): self(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [self(v) for v in obj]
        return self.num(obj)


def load_germ(source):
    if isinstance(source, dict):
        return germ_from_json(source)
    return get_germ(str(source))


def auto_points(kind: str, n: int, q_range=(1e-10, 1e-6), upper=True):
    """Deterministic sample points: strip points for cocycles, petal points otherwise."""
    if kind == "strip":
        lo, hi = q_range
        out = []
        for i in range(n):
            t = i / max(n - 1, 1)
            y = -math.log(hi) / (2 * math.pi) + t * (math.log(hi / lo) / (2 * math.pi))
            w = complex(-0.4 + 0.8 * t, y)
            out.append(-1 / w if upper else -1 / w.conjugate())
        return out
    return [complex(-0.3 * math.cos(a), 0.3 * math.sin(a)) for a in
            [(-1 + 2 * i / max(n - 1, 1)) * 1.2 for i in range(n)]]


def parse_points(source, n_auto: int, kind: str):
    if source is None or source == "auto":
        if kind == "strip":
            # both intersection components
            return auto_points(kind, n_auto - n_auto // 2) + auto_points(kind, n_auto // 2, upper=False)
        return auto_points(kind, n_auto)
    if isinstance(source, str):
        return [parse_complex(p) for p in source.split(",") if p]
    return [parse_complex(p) for p in source]


# -- subcommands ------------------------------------------------------------------------


def cmd_orbit(cfg, ctx, enc):
    f = load_germ(cfg["germ"])
    o = orbit(f, parse_complex(cfg["z0"]), max_n=int(cfg["n"]), ctx=ctx, backward=bool(cfg["backward"]))
    return {"germ": f.label, "z0": parse_complex(cfg["z0"]), "points": list(o.points),
            "gaps": list(o.gaps), "thresholds": list(o.thresholds), "monotone_from": o.monotone_from}


def cmd_area(cfg, ctx, enc):
    f = load_germ(cfg["germ"])
    lo, hi = parse_range(cfg["eps_range"])
    n = int(cfg["n"])
    if n < 1:
        raise PreconditionError("--n must be positive")
    z0 = parse_complex(cfg["z0"])
    ev = area_function(f, z0, lo, ctx, variant=cfg["variant"])
    lo_m, hi_m = ctx.mpf(lo), ctx.mpf(hi)
    grid = [lo_m * (hi_m / lo_m) ** (ctx.mpf(i) / max(n - 1, 1)) for i in range(n)]
    areas = [ev(e) for e in grid]
    buf = io.StringIO()
    write_area_csv(areas, buf, ctx)
    return buf.getvalue()


def cmd_fit_expansion(cfg, ctx, enc):
    f = load_germ(cfg["germ"])
    z0 = parse_complex(cfg["z0"])
    fit = principal_via_geometry(f, z0, digits=max(cfg["precision"], 32), eps_range=parse_range(cfg["eps_range"]),
                                 n_points=int(cfg["n"]), snap=not cfg["no_snap"])
    out = {"basis": list(fit.basis), "coefficients": list(fit.coefficients),
           "condition_number": fit.condition_number, "residual_norm": fit.residual_norm,
           "eps_grid": list(fit.eps_grid)}
    try:
        ref = principal_via_cohom(f, z0).value
        out["cohomological_H"] = ref
        out["difference_H"] = abs(complex(fit.H) - complex(ref))
    except ParalabError as e:
        out["cohomological_H"] = e.to_json()
    return out


def cmd_solve_cohom(cfg, ctx, enc):
    f = load_germ(cfg["germ"])
    g = Rhs.parse(cfg["rhs"])
    sol = sectorial_solution(f, g, cfg["side"], ctx)
    pts = parse_points(cfg["points"], int(cfg["n_points"]), "petal")
    if cfg["side"] == "-":
        pts = [-p for p in pts]
    rows = []
    for z in pts:
        v, err, N = sol.evaluate(z)
        rows.append({"z": z, "H": v, "error_estimate": err, "steps": N})
    return {"rhs": g.label, "side": cfg["side"], "alpha0": sol.formal.alpha0, "alpha1": sol.formal.alpha1,
            "formal_coefficients": list(sol.formal.z_coefficients[:12]), "values": rows}


def cmd_cocycle(cfg, ctx, enc):
    f = load_germ(cfg["germ"])
    g = Rhs.parse(cfg["rhs"])
    pts = parse_points(cfg["points"], int(cfg["n_points"]), "strip")
    samples = cocycle(f, g, pts, ctx)
    closed = f.label == "f0" and g.label in ("-z", "-1*z")
    rows = []
    for s in samples:
        row = {"z": s.z, "component": s.component, "raw": s.raw, "branch_constant": s.branch_constant,
               "value": s.value, "error_estimate": s.error}
        if closed:
            ref = f0_cocycle_closed_form(s.z, ctx)
            row["closed_form"] = ref
            row["closed_form_rel_error"] = float(abs(s.value - ref) / abs(ref))
        else:
            row["closed_form"] = None
        rows.append(row)
    return {"rhs": g.label, "closed_form": "2 pi i q/(1-q)" if closed else None, "samples": rows}


def cmd_moment(cfg, ctx, enc):
    f = load_germ(cfg["germ"])
    M = m_moment(f, int(cfg["m"]), n_points=int(cfg["n_points"]), degree=int(cfg["degree"]),
                 q_window=parse_range(cfg["q_window"]), ctx=ctx, trivialization=cfg["trivialization"],
                 shift=parse_complex(cfg["shift"]))
    can, a, b = M.canonical()
    return {"m": M.m, "g_inf": list(M.g_inf), "g_0": list(M.g_0), "trivialization": M.trivialization_tag,
            "trivial": M.is_trivial(1e-8), "canonical": {"g_inf": list(can.g_inf), "g_0": list(can.g_0),
                                                         "a": a, "b": b},
            "diagnostics": M.fit_diagnostics}


def cmd_ev_modulus(cfg, ctx, enc):
    f = load_germ(cfg["germ"])
    qw = parse_range(cfg["q_window"])
    if cfg["method"] == "direct":
        E = ev_modulus_direct(f, int(cfg["n_points"]), int(cfg["degree"]), qw, ctx)
    elif cfg["method"] == "two-sided":
        mp = m_moment(f, 1, int(cfg["n_points"]), int(cfg["degree"]), qw, ctx, "+")
        mm = m_moment(f, 1, int(cfg["n_points"]), int(cfg["degree"]), qw, ctx, "-")
        E = ev_from_two_sided_moments(mp, mm, ctx)
    else:
        raise DomainError(f"unknown method {cfg['method']!r}")
    return {"method": E.method, "phi_0": list(E.phi_0), "phi_inf": list(E.phi_inf),
            "identity_deviation": E.identity_deviation(), "diagnostics": E.diagnostics}


def cmd_construct_global(cfg, ctx, enc):
    phi = phi_germ(cfg["phi"])
    g = Rhs.parse(cfg["rhs"])
    G = construct_global(phi, g, ctx, order=int(cfg["order"]))
    return {"phi": cfg["phi"], "rhs": g.label, "l": G.l, "alpha": G.alpha, "residual": G.residual,
            "f": germ_to_json(G.f, ctx, int(cfg["order"]))}


def cmd_probe(cfg, ctx, enc):
    f = load_germ(cfg["germ"])
    z0 = parse_complex(cfg["z0"])
    digits = max(cfg["precision"], 32)
    c = context(digits)
    o = orbit(f, z0, max_n=orbit_length_for(1e-3, z0, c), ctx=c)
    r = second_derivative_probe(o, int(cfg["index"]), digits=digits)
    return {"n": r.n, "eps_n": r.eps_n, "fitted_exponent": r.fitted_exponent,
            "blowup_coefficient": r.blowup_coefficient, "left_limit": r.left_limit,
            "left_stability": r.left_stability, "midpoint_sum": r.midpoint_sum, "offsets": list(r.offsets)}


def cmd_reconstruct(cfg, ctx, enc):
    f = load_germ(cfg["germ"])
    lo, hi = parse_range(cfg["eps_range"])
    ev = area_function(f, parse_complex(cfg["z0"]), lo, ctx)
    rec = reconstruct_orbit_from_area(lambda e: ev(e).value, (lo, hi), ctx=ctx)
    return {"thresholds": list(rec.thresholds), "midpoint_sums": list(rec.midpoint_sums),
            "brackets": [list(b) for b in rec.brackets]}


def cmd_verify(cfg, ctx, enc):
    results = acceptance.run_suite(cfg["suite"], int(cfg["seed"]),
                                   echo=lambda line: print(line, file=sys.stderr, flush=True))
    return {"suite": cfg["suite"], "passed": all(r.passed for r in results),
            "results": [r.to_json() for r in results]}


# -- argument handling ------------------------------------------------------------------

COMMON = {"precision": None, "seed": 0, "output": None}

COMMANDS = {
    "orbit": (cmd_orbit, {"germ": "f0", "z0": "-0.5", "n": 100, "backward": False}),
    "area": (cmd_area, {"germ": "f0", "z0": "-0.5", "eps_range": "1e-4:1e-2", "n": 50, "variant": "outer"}),
    "fit-expansion": (cmd_fit_expansion, {"germ": "f0", "z0": "-0.3", "eps_range": "1e-6:1e-3", "n": 40,
                                          "no_snap": False}),
    "solve-cohom": (cmd_solve_cohom, {"germ": "f0", "rhs": "-pi*z", "side": "+", "points": "auto",
                                      "n_points": 5}),
    "cocycle": (cmd_cocycle, {"germ": "f0", "rhs": "-z", "points": "auto", "n_points": 6}),
    "moment": (cmd_moment, {"germ": "f0", "m": 1, "n_points": DEFAULT_POINTS, "degree": DEFAULT_DEGREE,
                            "q_window": f"{Q_WINDOW[0]}:{Q_WINDOW[1]}", "trivialization": "+", "shift": "0"}),
    "ev-modulus": (cmd_ev_modulus, {"germ": "f0", "method": "direct", "n_points": DEFAULT_POINTS,
                                    "degree": DEFAULT_DEGREE, "q_window": f"{Q_WINDOW[0]}:{Q_WINDOW[1]}"}),
    "construct-global": (cmd_construct_global, {"phi": "oneminusexp", "rhs": "-pi*z", "order": 16}),
    "probe-singularity": (cmd_probe, {"germ": "f0", "z0": "-0.5", "index": 6}),
    "reconstruct-orbit": (cmd_reconstruct, {"germ": "f0", "z0": "-0.5", "eps_range": "1e-3:5e-2"}),
    "verify": (cmd_verify, {"suite": "core"}),
}

# commands whose natural working precision is above double
PRECISION_DEFAULTS = {"cocycle": 40, "moment": MOMENT_DIGITS, "ev-modulus": MOMENT_DIGITS, "fit-expansion": 32,
                      "probe-singularity": 32}

CHOICES = {"side": ("+", "-"), "variant": ("outer", "inner"), "trivialization": ("+", "-"),
           "method": ("direct", "two-sided"), "suite": tuple(acceptance.SUITES)}

HELP = {
    "orbit": "forward (or backward) orbit with gaps and thresholds (JSON)",
    "area": "directed-area sweep over a geometric eps grid (CSV)",
    "fit-expansion": "fit the eps expansion and compare with the cohomological principal part",
    "solve-cohom": "sectorial solution of H(f) - H = g at sample points",
    "cocycle": "differences of the sectorial solutions on the petal intersections",
    "moment": "fitted m-moment (g_inf, g_0) and its canonical form",
    "ev-modulus": "Ecalle-Voronin transition germs, direct or from two-sided 1-moments",
    "construct-global": "germ f with a global solution built from phi and g",
    "probe-singularity": "second-derivative blow-up of the normalised area at eps_n",
    "reconstruct-orbit": "thresholds and midpoint sums recovered from area samples",
    "verify": "run an acceptance suite and report pass/fail",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="paralab", description="Numerical laboratory for parabolic germs.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, defaults) in COMMANDS.items():
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", help="JSON document with parameter values")
        sp.add_argument("--precision", type=int, help="working precision in decimal digits")
        sp.add_argument("--seed", type=int, help="seed for randomized sampling")
        sp.add_argument("--output", "-o", help="write the artifact here instead of stdout")
        for key, val in defaults.items():
            flag = "--" + key.replace("_", "-")
            if isinstance(val, bool):
                sp.add_argument(flag, action="store_const", const=True, default=None)
            else:
                kw = {"choices": CHOICES[key]} if key in CHOICES else {}
                sp.add_argument(flag, type=type(val), default=None, **kw)
    return p


def resolve_config(args) -> dict:
    _, defaults = COMMANDS[args.command]
    cfg = dict(COMMON)
    cfg.update(defaults)
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise PreconditionError(f"cannot read config: {e}") from None
        if not isinstance(doc, dict):
            raise PreconditionError("config must be a JSON object")
        unknown = set(doc) - set(cfg)
        if unknown:
            raise PreconditionError(f"unknown config fields: {sorted(unknown)}")
        cfg.update(doc)
    for key in cfg:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if cfg["precision"] is None:
        cfg["precision"] = max(default_digits(), PRECISION_DEFAULTS.get(args.command, 0))
    cfg["precision"] = int(cfg["precision"])
    if cfg["precision"] < 10:
        raise PreconditionError("precision must be at least 10 digits")
    return cfg


def emit(text: str, path) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _glue_values(argv):
    """Attach the value to its flag so that values such as ``-z`` or ``-0.5`` are not
    mistaken for options."""
    value_flags = {"--config", "--precision", "--seed", "--output", "-o"}
    for _, defaults in COMMANDS.values():
        value_flags |= {"--" + k.replace("_", "-") for k, v in defaults.items() if not isinstance(v, bool)}
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in value_flags and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_values(list(sys.argv[1:] if argv is None else argv)))
    try:
        cfg = resolve_config(args)
        ctx = context(cfg["precision"])
        enc = Encoder(16 if is_fp(ctx) else cfg["precision"])
        fn, _ = COMMANDS[args.command]
        result = fn(cfg, ctx, enc)
        if isinstance(result, str):
            emit(result, cfg["output"])
            if cfg["output"]:
                emit(json.dumps({"command": args.command, "config": cfg}, indent=2) + "\n",
                     cfg["output"] + ".config.json")
        else:
            doc = {"command": args.command, "config": cfg, "result": enc(result)}
            emit(json.dumps(doc, indent=2, allow_nan=False) + "\n", cfg["output"])
        if args.command == "verify" and not result["passed"]:
            return 1
        return 0
    except ParalabError as e:
        print(json.dumps(e.to_json()), file=sys.stderr)
        return e.exit_code
    except (ValueError, ZeroDivisionError) as e:
        err = PreconditionError(str(e)) if isinstance(e, ValueError) else NumericalError(str(e))
        print(json.dumps(err.to_json()), file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
