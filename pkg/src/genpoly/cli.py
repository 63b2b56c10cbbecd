"""Command-line front end.

Exit codes: 0 ok, 2 parse error, 3 undecidable, 4 structure (not GP/SGP),
5 cap exceeded, 6 precondition failure.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction

from . import __version__
from .calculus import build_qij, derivative, normalize_to_sgp, pet_reduce, pet_step
from .coeffs import as_coefficient, named_constant
from .config import FORMATS, load_config
from .dynamics import (Arc, Cylinder, SymbolicSystem, density_coverage, hitting_times,
                       syndetic_check_NcapC)
from .errors import GenPolyError, PreconditionError, WindowTooLarge
from .evaluate import evaluate, frac
from .expr import Bracket, format_expr
from .intervals import CertifiedReal
from .intsets import ConstraintSet, classify
from .parse import parse
from .sgp import as_sgp
from .structure import classes, leading_sum, nondegenerate, weight_vector

EXIT_OK = 0


# --- argument helpers -------------------------------------------------------------

def _window(text):
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like lo:hi, got {text!r}")


def _split(text, sep=","):
    return [t.strip() for t in text.split(sep) if t.strip()]


def _symbols(args):
    return tuple(_split(args.symbols)) if getattr(args, "symbols", None) else ()


def _parse(text, args):
    return parse(text, symbols=_symbols(args))


def _real_json(x):
    """Exact values as strings/ints, enclosures as ``{lower, upper, approx}``."""
    if isinstance(x, CertifiedReal):
        if x.is_exact:
            x = x.lower
        else:
            return {"approx": float(x.mid), "lower": str(x.lower), "upper": str(x.upper),
                    "precision_bits": x.precision_bits}
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    return x


def _parse_fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise PreconditionError(f"not a rational number: {text!r}") from None


# --- commands -----------------------------------------------------------------------

def cmd_eval(args, cfg):
    p = _parse(args.expr, args)
    if args.n is not None:
        ns = [args.n]
    elif args.range is not None:
        lo, hi = args.range
        if hi - lo > cfg.window_cap:
            raise WindowTooLarge(f"range exceeds the cap {cfg.window_cap}")
        ns = range(lo, hi + 1)
    else:
        raise PreconditionError("give --n or --range")
    inner = p.child if isinstance(p, Bracket) else p
    rows = []
    for n in ns:
        v = evaluate(p, n, cfg.policy)
        f = frac(inner, n, cfg.policy)
        rows.append({"n": n, "value": _real_json(v), "frac": _real_json(f),
                     "precision_bits": max(v.precision_bits, f.precision_bits)})
    return {"command": "eval", "expr": format_expr(p),
            "frac_of": format_expr(inner), "results": rows}


def _read_system(args):
    lines = []
    if args.file:
        fh = sys.stdin if args.file == "-" else open(args.file, encoding="utf-8")
        with fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    lines.append(line)
    lines.extend(args.expr or [])
    if not lines:
        raise PreconditionError("no expressions given")
    return lines


def cmd_analyze(args, cfg):
    texts = _read_system(args)
    P = [as_sgp(_parse(t, args)) for t in texts]
    nd = nondegenerate(P, cfg.policy)
    cls = classes(P)
    return {
        "command": "analyze",
        "system": [p.text() for p in P],
        "expressions": [{"expr": p.text(), "degree": p.degree, "A": leading_sum(p).text()}
                        for p in P],
        "degree": max(p.degree for p in P),
        "A": [leading_sum(p).text() for p in P],
        "classes": {str(d): [[i for i in c] for c in cs] for d, cs in sorted(cls.items())},
        "weight_vector": weight_vector(P).to_json(),
        "nondegenerate": nd.ok,
        "witness": list(nd.witness) if nd.witness else None,
    }


def cmd_normalize(args, cfg):
    p = _parse(args.expr, args)
    res = normalize_to_sgp(p)
    if args.window:
        lo, hi = args.window
        return dict(res.to_json(args.window, res.check(lo, hi, cfg.policy)), command="normalize")
    return dict(res.to_json(), command="normalize")


def cmd_derive(args, cfg):
    h = as_sgp(_parse(args.expr, args))
    m = int(args.m) if _is_int(args.m) else _symbol_shift(args.m)
    d = derivative(h, m, eps=cfg.eps, policy=cfg.policy)
    if args.window and isinstance(m, int) and d.certification is not None:
        lo, hi = args.window
        out = d.to_json(args.window, d.check(lo, hi, cfg.policy))
    else:
        out = d.to_json()
    out["command"] = "derive"
    return out


def _is_int(text):
    try:
        int(text)
        return True
    except ValueError:
        return False


def _symbol_shift(text):
    from .coeffs import Coefficient
    if not text.isidentifier():
        raise PreconditionError(f"shift must be an integer or a symbol name, got {text!r}")
    return Coefficient.symbol(text, integer=True)


def cmd_qij(args, cfg):
    P = [as_sgp(_parse(t, args)) for t in _split(args.polys)]
    if args.reduce:
        run = pet_reduce(P, N=cfg.N, eps=cfg.eps, policy=cfg.policy)
        return dict(run.to_json(), command="qij", mode="reduce")
    if args.shifts:
        K = [int(k) for k in _split(args.shifts)]
        res = build_qij(P, K, N=cfg.N, eps=cfg.eps, policy=cfg.policy,
                        check_spacing_rule=not args.no_spacing)
    else:
        res = pet_step(P, N=cfg.N, l=args.count, eps=cfg.eps, policy=cfg.policy)
    return dict(res.to_json(), command="qij", mode="step")


def _constraint(args):
    exprs = _split(args.exprs, ";") if args.exprs else []
    if not exprs:
        return ConstraintSet()
    if args.eps is None:
        raise PreconditionError("--eps is required with --exprs")
    return ConstraintSet.of(_parse_fraction(args.eps), [_parse(e, args) for e in exprs])


def cmd_sets_scan(args, cfg):
    C = _constraint(args)
    lo, hi = args.window
    members = C.enumerate(lo, hi, cap=cfg.window_cap, jobs=cfg.jobs, policy=cfg.policy)
    rep = classify(members, args.window, args.probe)
    if args.members_out:
        with open(args.members_out, "w", encoding="utf-8") as fh:
            fh.writelines(f"{n}\n" for n in members)
    out = rep.to_json(include_members=not args.no_members)
    out.update(command="sets scan", constraint=C.to_json())
    return out


def cmd_sets_classify(args, cfg):
    fh = sys.stdin if args.members == "-" else open(args.members, encoding="utf-8")
    with fh:
        members = [int(line) for line in fh if line.strip()]
    rep = classify(members, args.window, args.probe)
    out = rep.to_json(include_members=not args.no_members)
    out["command"] = "sets classify"
    return out


def _system(args):
    name = args.system
    if name == "chacon":
        return SymbolicSystem.chacon()
    if name.startswith("full-shift"):
        a = int(name.split(":", 1)[1]) if ":" in name else 2
        return SymbolicSystem.full_shift(a, seed=args.seed_point)
    if name == "rotation":
        alpha = _constant(args.alpha)
        return SymbolicSystem.rotation(alpha, _constant(args.x0))
    raise PreconditionError(f"unknown system {name!r}")


def _constant(text):
    try:
        return as_coefficient(_parse_fraction(text))
    except PreconditionError:
        pass
    c = named_constant(text)
    if c is None:
        raise PreconditionError(f"unknown constant {text!r}")
    return c


def _open_set(sysm, text):
    if sysm.is_subshift:
        return Cylinder(text)
    try:
        c, r = text.split(":")
    except ValueError:
        raise PreconditionError(f"arc must look like center:radius, got {text!r}") from None
    return Arc(_parse_fraction(c), _parse_fraction(r))


def cmd_recur_density(args, cfg):
    sysm = _system(args)
    polys = [_parse(t, args) for t in _split(args.polys)]
    res = args.depth if sysm.is_subshift else args.grid
    if res is None:
        raise PreconditionError("give --depth for subshifts or --grid for rotations")
    cps = [int(c) for c in _split(args.checkpoints)] if args.checkpoints else None
    rep = density_coverage(sysm, polys, res, args.window, cps, cap=cfg.window_cap,
                           policy=cfg.policy)
    if cfg.format == "csv":
        return rep.to_csv()
    return dict(rep.to_json(), command="recur density")


def cmd_recur_hits(args, cfg):
    sysm = _system(args)
    U, V = _open_set(sysm, args.U), _open_set(sysm, args.V)
    res = hitting_times(sysm, U, V, _parse(args.poly, args), args.window,
                        horizon=cfg.horizon, cap=cfg.window_cap, policy=cfg.policy)
    out = res.to_json()
    out.update(command="recur hits", system=sysm.describe(), window=list(args.window))
    return out


def cmd_recur_syndetic(args, cfg):
    sysm = _system(args)
    U = _open_set(sysm, args.U)
    Vs = [_open_set(sysm, v) for v in _split(args.V)]
    polys = [_parse(t, args) for t in _split(args.polys)]
    rep = syndetic_check_NcapC(sysm, U, Vs, polys, _constraint(args), args.window,
                               L_probe=args.probe, horizon=cfg.horizon,
                               cap=cfg.window_cap, policy=cfg.policy)
    out = rep.to_json()
    out.update(command="recur syndetic", system=sysm.describe())
    return out


# --- parser ---------------------------------------------------------------------------

def _common(p):
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", default=argparse.SUPPRESS, help="key = value config file")
    g.add_argument("--set", action="append", default=argparse.SUPPRESS, metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    g.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS)
    g.add_argument("--precision-cap", type=int, default=argparse.SUPPRESS)
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    g.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
    g.add_argument("--output", "-o", default=argparse.SUPPRESS, help="write the report here")
    g.add_argument("--symbols", default=argparse.SUPPRESS,
                   help="comma-separated real symbols allowed in expressions")


def build_parser():
    parser = argparse.ArgumentParser(prog="genpoly", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"genpoly {__version__}")
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate an expression at integers")
    _common(p)
    p.add_argument("expr")
    p.add_argument("--n", type=int)
    p.add_argument("--range", type=_window, metavar="LO:HI")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("analyze", help="degree, leading sums, weight vector, non-degeneracy")
    _common(p)
    p.add_argument("file", nargs="?", help="one expression per line ('-' for stdin)")
    p.add_argument("--expr", action="append", help="an expression (repeatable)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("normalize", help="rewrite into normal form with its constraint set")
    _common(p)
    p.add_argument("expr")
    p.add_argument("--window", type=_window, metavar="LO:HI")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("derive", help="derivative D(h, m) with certification set")
    _common(p)
    p.add_argument("expr")
    p.add_argument("--m", required=True)
    p.add_argument("--window", type=_window, default=(-1000, 1000), metavar="LO:HI")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("qij", help="one descent step (or a full reduction)")
    _common(p)
    p.add_argument("--polys", required=True, help="comma-separated system")
    p.add_argument("--shifts", help="comma-separated k_1,...; chosen automatically if absent")
    p.add_argument("--count", type=int, default=0, help="extra shifts beyond the default")
    p.add_argument("--no-spacing", action="store_true", help="skip the spacing rule for --shifts")
    p.add_argument("--reduce", action="store_true", help="iterate down to degree one")
    p.set_defaults(func=cmd_qij)

    sets = sub.add_parser("sets", help="constraint sets of integers")
    ssub = sets.add_subparsers(dest="sets_command", required=True)
    p = ssub.add_parser("scan", help="enumerate and classify C(eps, g_1, ...)")
    _common(p)
    p.add_argument("--eps")
    p.add_argument("--exprs", help="semicolon-separated expressions g_i")
    p.add_argument("--window", type=_window, required=True, metavar="LO:HI")
    p.add_argument("--probe", type=int, default=1)
    p.add_argument("--members-out", help="newline-delimited member file")
    p.add_argument("--no-members", action="store_true")
    p.set_defaults(func=cmd_sets_scan)
    p = ssub.add_parser("classify", help="classify a member file on a window")
    _common(p)
    p.add_argument("--members", required=True, help="newline-delimited integers ('-' for stdin)")
    p.add_argument("--window", type=_window, required=True, metavar="LO:HI")
    p.add_argument("--probe", type=int, default=1)
    p.add_argument("--no-members", action="store_true")
    p.set_defaults(func=cmd_sets_classify)

    recur = sub.add_parser("recur", help="recurrence experiments on concrete systems")
    rsub = recur.add_subparsers(dest="recur_command", required=True)

    def system_args(p):
        p.add_argument("--system", default="chacon", help="chacon, full-shift[:a] or rotation")
        p.add_argument("--alpha", default="sqrt2", help="rotation number")
        p.add_argument("--x0", default="0", help="rotation base point")
        p.add_argument("--seed-point", type=int, default=0, help="full-shift point seed")
        p.add_argument("--window", type=_window, required=True, metavar="LO:HI")

    p = rsub.add_parser("density", help="orbit-tuple box coverage")
    _common(p)
    system_args(p)
    p.add_argument("--polys", required=True)
    p.add_argument("--depth", type=int, help="cylinder depth (subshifts)")
    p.add_argument("--grid", type=int, help="grid size per axis (rotation)")
    p.add_argument("--checkpoints", help="comma-separated radii")
    p.set_defaults(func=cmd_recur_density)

    p = rsub.add_parser("hits", help="N(p, U, V) on a window")
    _common(p)
    system_args(p)
    p.add_argument("--U", required=True, help="cylinder word or arc center:radius")
    p.add_argument("--V", required=True)
    p.add_argument("--poly", required=True)
    p.set_defaults(func=cmd_recur_hits)

    p = rsub.add_parser("syndetic", help="window syndeticity of N ∩ C")
    _common(p)
    system_args(p)
    p.add_argument("--U", required=True)
    p.add_argument("--V", required=True, help="comma-separated, one per polynomial")
    p.add_argument("--polys", required=True)
    p.add_argument("--eps")
    p.add_argument("--exprs", help="semicolon-separated constraint expressions")
    p.add_argument("--probe", type=int, default=1)
    p.set_defaults(func=cmd_recur_syndetic)
    return parser


def _config_from(args):
    overrides = {}
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise PreconditionError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k] = v
    for key, name in (("format", "format"), ("precision_cap", "precision_cap"),
                      ("seed", "seed"), ("jobs", "jobs")):
        if hasattr(args, name):
            overrides[key] = getattr(args, name)
    return load_config(getattr(args, "config", None), overrides)


def _render(report, cfg):
    if isinstance(report, str):
        return report
    if cfg.format == "text":
        lines = []
        for k, v in report.items():
            if k != "config":
                lines.append(f"{k}: {json.dumps(v) if isinstance(v, (dict, list)) else v}")
        return "\n".join(lines) + "\n"
    if cfg.format == "csv":
        raise PreconditionError("csv output is available for recur density only")
    return json.dumps(report, indent=2) + "\n"


def _emit(text, args):
    path = getattr(args, "output", None)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _join_negative_values(argv):
    """``--window -5:5`` -> ``--window=-5:5`` so argparse does not read an option."""
    out = []
    for tok in argv:
        if (out and out[-1].startswith("--") and "=" not in out[-1]
                and re.match(r"^-\d", tok)):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_negative_values(argv))
    if not hasattr(args, "symbols"):
        args.symbols = None
    try:
        cfg = _config_from(args)
        report = args.func(args, cfg)
        if isinstance(report, dict):
            report["config"] = cfg.to_json()
        _emit(_render(report, cfg), args)
        return EXIT_OK
    except GenPolyError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        sys.stderr.write(json.dumps(err) + "\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "OSError", "message": str(exc),
                                     "exit_code": 6}) + "\n")
        return 6


if __name__ == "__main__":
    raise SystemExit(main())
