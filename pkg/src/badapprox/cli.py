"""Command-line experiment runner.

Every subcommand writes one JSON (or CSV) artifact that embeds the fully
resolved configuration, so re-running with ``--config`` on that embedded
block reproduces the artifact byte for byte.

Exit codes: 0 success, 2 invalid input, 3 precision insufficient,
4 internal invariant violated.
"""
from __future__ import annotations

import argparse
import csv
import difflib
import io
import json
import os
import sys
import tempfile
from fractions import Fraction

from . import diophantine, geometry, measure, systems, vitali
from .errors import InvariantViolation, PrecisionError
from .exact import as_fraction, format_rational

DEFAULT_SEED = 20130101

EXIT_OK, EXIT_INVALID, EXIT_PRECISION, EXIT_INTERNAL = 0, 2, 3, 4

CATALOG = [
    ("lemma1", "Lemma 1", "--balls --delta", "exact 1-D ratio and (delta/3)^d certificate"),
    ("vitali", "Vitali covering lemma", "--balls", "greedy disjoint subfamily and enlarged-cover check"),
    ("dirichlet", "Dirichlet's theorem", "--alpha --Q", "pigeonhole search for q < Q^d with max|q alpha_i - p_i| <= 1/Q"),
    ("cf", "Bad_d, 1-D machinery", "--x --depth", "continued fraction expansion and convergents"),
    ("bad-report", "Bad_d", "--x --depth", "bounded partial quotient evidence"),
    ("bridge", "cube/ball inclusions", "--alpha --kappa", "cube-form Bad_d versus ball-form Bad(classical)"),
    ("shrinking", "shrinking locally", "--system --probe-center --probe-radius --epsilon", "large balls meeting a probe"),
    ("hits", "lim-sup set, Bad definition", "--system --alpha --kappa", "hit count and tail survival"),
    ("survivors", "Theorem 1 proof, B(N,M)", "--system --M", "grid survivor fraction per q-prefix"),
    ("coverage", "Corollary", "--system --kappa", "exact 1-D coverage of kappa-scaled truncations"),
    ("density", "Theorem 1 proof", "--system --M --y --r", "per-scale local density inequality"),
    ("list", "catalog", "", "this catalog"),
]
COMMANDS = [c[0] for c in CATALOG]


class ValidationError(ValueError):
    pass


# --- argument helpers -------------------------------------------------------


def _rational(text) -> Fraction:
    try:
        return as_fraction(text)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _point(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(_rational(t) for t in text)
    return tuple(_rational(t) for t in str(text).split(","))


def _window(values, d: int) -> list:
    if not values:
        return [(Fraction(0), Fraction(1))] * d
    out = [_point(v) for v in values]
    if any(len(w) != 2 for w in out):
        raise ValidationError("each --window is 'a,b'")
    if len(out) == 1 and d > 1:
        out = out * d
    return out


def _system(args) -> systems.BallSystem:
    kind = args.system
    if kind == "classical":
        return systems.classical_system(args.dim, _window(args.window, args.dim))
    if kind == "z2":
        return systems.z2_example_system()
    if os.path.exists(kind):
        return systems.load_system(kind)
    raise ValidationError(f"--system must be classical, z2 or a system file, got {kind!r}")


def _bound(args, s) -> int:
    if getattr(args, "qmax", None) is not None:
        if not isinstance(s, systems.ClassicalSystem):
            raise ValidationError("--qmax needs the classical system")
        return s.last_index(args.qmax)
    if args.index_bound is None:
        if s.size is None:
            raise ValidationError("--index-bound (or --qmax) is required")
        return s.size
    return args.index_bound


def _balls(args) -> list:
    if not args.balls:
        raise ValidationError("--balls is required")
    return geometry.load_balls(args.balls)


# --- subcommands -------------------------------------------------------------


def cmd_lemma1(args):
    balls = _balls(args)
    if args.dim is not None and balls[0].dim != args.dim:
        raise ValidationError(f"ball file has dimension {balls[0].dim}, --dim says {args.dim}")
    cert = vitali.lemma1_certificate(balls, args.delta)
    out = {
        "delta": format_rational(cert.delta),
        "dim": cert.dimension,
        "certified_lower_bound": format_rational(cert.certified_lower_bound),
        "picked_indices": list(cert.picked_indices),
    }
    if cert.dimension == 1:
        exact = vitali.lemma1_ratio_1d(balls, args.delta)
        out["exact_ratio"] = format_rational(exact.exact_ratio)
        out["holds"] = exact.exact_ratio >= exact.delta and exact.exact_ratio >= cert.certified_lower_bound
        if not out["holds"]:
            raise InvariantViolation(f"Lemma 1 failed: ratio {exact.exact_ratio} < {exact.delta}")
    else:
        out["exact_ratio"] = None
        out["holds"] = cert.holds
    return out


def cmd_vitali(args):
    balls = _balls(args)
    res = vitali.greedy_disjoint_subfamily(balls)
    factor_ok = vitali.verify_enlarged_cover(balls, res, args.verify_factor)
    if not (res.disjoint_verified and res.cover_verified):
        raise InvariantViolation("greedy output is not a disjoint 3r-cover")
    return {
        "picked_indices": list(res.picked_indices),
        "disjoint_verified": res.disjoint_verified,
        "verify_factor": format_rational(args.verify_factor),
        "cover_verified": factor_ok,
    }


def cmd_dirichlet(args):
    alpha = [diophantine.parse_real(a) for a in args.alpha]
    p, q = diophantine.dirichlet_search(alpha, args.Q)
    return {"alpha": [diophantine.format_real(a) for a in alpha], "Q": args.Q, "p": list(p), "q": q}


def cmd_cf(args):
    x = diophantine.parse_real(args.x)
    cf = diophantine.cf_expand(x, args.depth)
    return {
        "x": diophantine.format_real(x),
        "a0": cf.a0,
        "partials": list(cf.partials),
        "status": cf.status,
        "period": None if cf.period is None else list(cf.period),
        "convergents": [f"{c.p}/{c.q}" for c in diophantine.convergents(cf)],
    }


def cmd_bad_report(args):
    x = diophantine.parse_real(args.x)
    return {"x": diophantine.format_real(x), **diophantine.bad_report(x, args.depth).to_json()}


def cmd_bridge(args):
    alpha = [diophantine.parse_real(a) for a in args.alpha]
    d = len(alpha)
    window = _window(args.window, d)
    bound = args.index_bound
    if args.qmax is not None:
        bound = systems.classical_system(d, window).last_index(args.qmax)
    if bound is None:
        raise ValidationError("--index-bound or --qmax is required")
    rep = diophantine.classical_bad_bridge(alpha, args.kappa, bound, window)
    if not rep.implication_holds:
        raise InvariantViolation(f"ball survival without cube survival at {rep.implication_violations}")
    return rep.to_json()


def cmd_shrinking(args):
    s = _system(args)
    probe = geometry.Ball(_point(args.probe_center), args.probe_radius)
    if args.index_bound is None:
        raise ValidationError("--index-bound is required")
    return systems.shrinking_locally_report(s, probe, args.epsilon, args.index_bound).to_json()


def cmd_hits(args):
    s = _system(args)
    alpha = _point(args.alpha)
    bound = _bound(args, s)
    count = systems.hit_count(s, alpha, bound, args.kappa, start=args.start, error=args.error)
    out = {"hit_count": count, "start": args.start, "index_bound": bound, "kappa": format_rational(args.kappa)}
    w = systems.BadWitness(args.kappa, args.start, max(bound, args.start))
    out["tail_survives"] = systems.tail_survives(s, alpha, w, error=args.error)
    out["semi_decision"] = True
    return out


def cmd_survivors(args):
    s = _system(args)
    region = _window(args.region, s.dim)
    params = systems.BNMParams(args.N, args.M)
    if isinstance(s, systems.ClassicalSystem) and args.qmax is not None:
        qs = list(range(1, args.qmax + 1)) if args.step is None else list(range(args.step, args.qmax + 1, args.step))
        if qs[-1] != args.qmax:
            qs.append(args.qmax)
        bounds = [s.last_index(q) for q in qs]
        labels = [f"q<={q}" for q in qs]
    else:
        top = _bound(args, s)
        step = args.step or top
        bounds = list(range(step, top + 1, step))
        if not bounds or bounds[-1] != top:
            bounds.append(top)
        labels = [f"i<={b}" for b in bounds]
    reports = measure.survivor_sweep(s, params, bounds, args.resolution, region)
    rows = [
        {
            "parameter": label,
            "value": format_rational(r.surviving_fraction),
            "ci": 0,
            "samples": r.total,
            "seed": args.seed,
            "index_bound": r.index_bound,
            "survivors": r.survivors,
        }
        for label, r in zip(labels, reports)
    ]
    return {"N": args.N, "M": args.M, "resolution": args.resolution, "rows": rows}


def cmd_coverage(args):
    s = _system(args)
    region = _point(args.region[0]) if args.region else (Fraction(0), Fraction(1))
    kappas = args.kappa or [Fraction(1)]
    if isinstance(s, systems.ClassicalSystem) and args.qmax:
        bounds = [(f"q<={q}", s.last_index(q)) for q in args.qmax]
    else:
        bounds = [(f"i<={b}", b) for b in (args.index_bound_list or [_bound(args, s)])]
    rows = []
    for k in kappas:
        for label, b in bounds:
            frac = measure.coverage_fraction_1d_exact(s, k, args.start, b, region)
            rows.append(
                {
                    "parameter": f"kappa={format_rational(k)},{label}",
                    "value": format_rational(frac),
                    "ci": 0,
                    "samples": 0,
                    "seed": args.seed,
                }
            )
    return {"rows": rows}


def cmd_density(args):
    s = _system(args)
    params = systems.BNMParams(args.N, args.M)
    if args.tail_qmin is not None or args.tail_qmax is not None:
        if not isinstance(s, systems.ClassicalSystem):
            raise ValidationError("--tail-qmin/--tail-qmax need the classical system")
        start, bound = s.index_range(args.tail_qmin or 1, args.tail_qmax)
    else:
        start, bound = args.tail_start, _bound(args, s)
    rep = measure.local_density_experiment(
        s, params, _point(args.y), args.r, max(start, params.N), bound, args.samples, args.seed
    )
    if rep.exact_holds is False:
        raise InvariantViolation("exact Lemma 1 inequality failed on the tail")
    return rep.to_json()


def cmd_list(args):
    entries = [
        {"command": name, "anchor": anchor, "required": req.split(), "description": desc}
        for name, anchor, req, desc in CATALOG
    ]
    return {"experiments": entries}


HANDLERS = {
    "lemma1": cmd_lemma1,
    "vitali": cmd_vitali,
    "dirichlet": cmd_dirichlet,
    "cf": cmd_cf,
    "bad-report": cmd_bad_report,
    "bridge": cmd_bridge,
    "shrinking": cmd_shrinking,
    "hits": cmd_hits,
    "survivors": cmd_survivors,
    "coverage": cmd_coverage,
    "density": cmd_density,
    "list": cmd_list,
}


# --- parser -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=["json", "csv"], default=None, help="default json ('list' prints text)")
    common.add_argument("--config", default=None, help="JSON config; its values override flags")

    def system_opts(p, many_q=False):
        p.add_argument("--system", default="classical", help="classical, z2, or a system JSON file")
        p.add_argument("--dim", type=int, default=1)
        p.add_argument("--window", action="append", default=None, help="'a,b' per axis")
        p.add_argument("--index-bound", type=int, default=None)
        p.add_argument("--qmax", type=int, action="append" if many_q else "store", default=None)

    parser = _Parser(prog="badapprox", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("lemma1", parents=[common])
    p.add_argument("--balls", required=True)
    p.add_argument("--delta", type=_rational, required=True)
    p.add_argument("--dim", type=int, default=None)

    p = sub.add_parser("vitali", parents=[common])
    p.add_argument("--balls", required=True)
    p.add_argument("--verify-factor", type=_rational, default=Fraction(3))

    p = sub.add_parser("dirichlet", parents=[common])
    p.add_argument("--alpha", action="append", required=True, help="real literal; repeat per coordinate")
    p.add_argument("--Q", type=int, required=True)

    for name in ("cf", "bad-report"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--x", required=True)
        p.add_argument("--depth", type=int, default=20)

    p = sub.add_parser("bridge", parents=[common])
    p.add_argument("--alpha", action="append", required=True)
    p.add_argument("--kappa", type=_rational, required=True)
    p.add_argument("--index-bound", type=int, default=None)
    p.add_argument("--qmax", type=int, default=None)
    p.add_argument("--window", action="append", default=None)

    p = sub.add_parser("shrinking", parents=[common])
    system_opts(p)
    p.add_argument("--probe-center", required=True)
    p.add_argument("--probe-radius", type=_rational, required=True)
    p.add_argument("--epsilon", type=_rational, required=True)

    p = sub.add_parser("hits", parents=[common])
    system_opts(p)
    p.add_argument("--alpha", required=True, help="comma-separated rational coordinates")
    p.add_argument("--kappa", type=_rational, default=Fraction(1))
    p.add_argument("--start", type=int, default=1)
    p.add_argument("--error", type=_rational, default=Fraction(0))

    p = sub.add_parser("survivors", parents=[common])
    system_opts(p)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--resolution", type=int, default=1000)
    p.add_argument("--region", action="append", default=None, help="'a,b' per axis")
    p.add_argument("--step", type=int, default=None)

    p = sub.add_parser("coverage", parents=[common])
    system_opts(p, many_q=True)
    p.add_argument("--kappa", type=_rational, action="append", default=None)
    p.add_argument("--start", type=int, default=1)
    p.add_argument("--region", action="append", default=None)
    p.add_argument("--index-bound-list", type=int, action="append", default=None)

    p = sub.add_parser("density", parents=[common])
    system_opts(p)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--y", required=True)
    p.add_argument("--r", type=_rational, required=True)
    p.add_argument("--tail-start", type=int, default=1)
    p.add_argument("--tail-qmin", type=int, default=None)
    p.add_argument("--tail-qmax", type=int, default=None)
    p.add_argument("--samples", type=int, default=0)

    sub.add_parser("list", parents=[common])
    return parser


_INTERNAL_KEYS = {"command", "config", "out"}


def _jsonable(v):
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _apply_config(args, parser, path):
    with open(path) as fh:
        cfg = json.load(fh)
    if "config" in cfg and isinstance(cfg["config"], dict):
        cfg = cfg["config"]  # accept a whole output artifact
    known = {k for k in vars(args)} - {"config", "out"}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest == "command":
            if value != args.command:
                raise ValidationError(f"config is for {value!r}, not {args.command!r}")
            continue
        if dest not in known:
            raise ValidationError(f"unknown config key {key!r}")
        setattr(args, dest, _coerce_like(parser, args.command, dest, value))


def _coerce_like(parser, command, dest, value):
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for action in sub.choices[command]._actions:
        if action.dest == dest and action.type is not None and value is not None:
            if isinstance(value, list):
                return [action.type(v) for v in value]
            return action.type(value)
    return value


def resolved_config(args) -> dict:
    return {"command": args.command, **{k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in _INTERNAL_KEYS}}


def render(result: dict, config: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({**result, "config": config}, indent=2) + "\n"
    rows = result.get("rows")
    if rows is None:
        raise ValidationError("this experiment has no CSV form; use --format json")
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    fields = list(rows[0].keys()) if rows else ["parameter", "value", "ci", "samples", "seed"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def render_catalog() -> str:
    width = max(len(f"{n} ({a})") for n, a, _, _ in CATALOG)
    lines = []
    for name, anchor, req, desc in CATALOG:
        head = f"{name} ({anchor})"
        lines.append(f"{head:<{width}}  {desc}" + (f"  [requires {req}]" if req else ""))
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".badapprox-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fail(code: int, kind: str, message: str) -> int:
    one_line = " ".join(str(message).split())
    print(f"error={kind} exit={code} message={one_line}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and not argv[0].startswith("-") and argv[0] not in COMMANDS:
        guess = difflib.get_close_matches(argv[0], COMMANDS, n=1)
        hint = f"; did you mean {guess[0]!r}?" if guess else ""
        return _fail(EXIT_INVALID, "unknown-command", f"unknown subcommand {argv[0]!r}{hint}")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise ValidationError("a subcommand is required; try 'badapprox list'")
        if args.config:
            _apply_config(args, parser, args.config)
        if args.command == "list" and args.format is None:
            text = render_catalog()
        else:
            args.format = args.format or "json"
            config = resolved_config(args)
            result = HANDLERS[args.command](args)
            text = render(result, config, args.format)
    except PrecisionError as exc:
        return _fail(EXIT_PRECISION, "precision-insufficient", exc)
    except (ValueError, TypeError, KeyError, OSError, ZeroDivisionError, argparse.ArgumentTypeError) as exc:
        return _fail(EXIT_INVALID, "validation", exc)
    except InvariantViolation as exc:
        return _fail(EXIT_INTERNAL, "invariant-violation", exc)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
