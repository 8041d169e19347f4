"""Command-line entry point.

Exit codes: 0 on success or a passing check, 2 when a verification fails,
1 on usage or runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import harness
from .approximation import STRATEGIES, approximate_hyperbolic, error_budgeted
from .decomposition import BesovParams, SmoothnessVector, besov_norm, block_table
from .extremal import extremal_f1, extremal_f2, extremal_f3
from .reports import _jsonable
from .sampling import dump_field, make_grid, read_field, write_field

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2

VERIFY_CHOICES = ("lemma1", "lemma2", "lemma3", "recon", "nikolsky", "equiv")
RATE_CHOICES = ("theorem1", "theorem2", "theoremV")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _real(text) -> float:
    text = str(text).strip().lower()
    if text in ("inf", "infinity"):
        return math.inf
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if math.isnan(v):
        raise argparse.ArgumentTypeError("nan is not allowed")
    return v


def _budget(text) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational budget: {text!r}")


def _vector(text) -> tuple:
    try:
        return tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--config", help="file of 'key = value' defaults; flags override")
    g.add_argument("--d", type=int, help="dimension (1 to 3)")
    g.add_argument("--L", type=_real, help="box half-width")
    g.add_argument("--N", type=int, help="samples per axis (power of two)")
    g.add_argument("--r", type=_vector, help="smoothness, scalar or comma-separated vector")
    g.add_argument("--theta", type=_real, help="Besov index theta (number or 'inf')")
    g.add_argument("--p", type=_real, help="integrability index of the class norm")
    g.add_argument("--q", type=_real, help="error norm index")
    g.add_argument("--n", type=int, help="level, or first level of a sweep")
    g.add_argument("--n-max", type=int, help="last level of a sweep")
    g.add_argument("--budget", type=_budget, help="spectral measure budget M (rational)")
    g.add_argument("--strategy", choices=STRATEGIES, help="budgeted selection strategy")
    g.add_argument("--out", help="output path (default: standard output)")
    g.add_argument("--format", choices=("csv", "json"), help="report format")
    g.add_argument("--workers", type=int, help="sweep worker threads")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = _Parser(prog="besovcross",
                     description="Dyadic block analysis and hyperbolic-cross approximation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("decompose", parents=[common], help="per-block norms of a field file")
    sp.add_argument("field")
    sp = sub.add_parser("norm", parents=[common], help="Besov norm of a field file")
    sp.add_argument("field")
    sp = sub.add_parser("approx", parents=[common], help="budgeted or hyperbolic approximation")
    sp.add_argument("field")
    sp = sub.add_parser("extremal", parents=[common], help="write a witness field")
    sp.add_argument("kind", choices=("f1", "f2", "f3"))
    sp.add_argument("--raw", action="store_true", help="skip normalization onto the class ball")
    sp = sub.add_parser("verify", parents=[common], help="lemma and inequality checks")
    sp.add_argument("which", choices=VERIFY_CHOICES)
    sp.add_argument("field", nargs="?", help="field file for 'recon' (default: Gaussian)")
    sp = sub.add_parser("rate", parents=[common], help="scaling-law sweeps")
    sp.add_argument("which", choices=RATE_CHOICES)
    return parser


DEFAULTS = {"d": None, "L": None, "N": None, "r": None, "theta": None, "p": None, "q": None,
            "n": None, "n_max": None, "budget": None, "strategy": "best", "out": None,
            "format": None, "workers": None}

_CONFIG_TYPES = {"d": int, "N": int, "n": int, "n_max": int, "workers": int, "L": _real,
                 "theta": _real, "p": _real, "q": _real, "r": _vector, "budget": _budget,
                 "strategy": str, "out": str, "format": str}


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for i, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{i}: expected 'key = value'")
        key, value = (t.strip() for t in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise UsageError(f"{path}:{i}: unknown key {key!r}")
        try:
            out[key] = _CONFIG_TYPES[key](value)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"{path}:{i}: bad value for {key}: {exc}")
    return out


def _merge(args) -> argparse.Namespace:
    conf = read_config(args.config) if args.config else {}
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, conf.get(key, default))
    return args


def validate(args) -> None:
    """Reject out-of-range numeric options before any computation."""
    if args.d is not None and not 1 <= args.d <= 3:
        raise UsageError(f"--d must be 1, 2 or 3, got {args.d}")
    if args.L is not None and not (args.L > 0 and math.isfinite(args.L)):
        raise UsageError(f"--L must be positive and finite, got {args.L}")
    if args.N is not None and (args.N < 16 or args.N & (args.N - 1)):
        raise UsageError(f"--N must be a power of two >= 16, got {args.N}")
    if args.theta is not None and not args.theta >= 1:
        raise UsageError(f"--theta must be >= 1 or 'inf', got {args.theta}")
    for name in ("p", "q"):
        v = getattr(args, name)
        if v is not None and not v >= 1:
            raise UsageError(f"--{name} must be >= 1 or 'inf', got {v}")
    if args.n is not None and args.n < 0:
        raise UsageError(f"--n must be >= 0, got {args.n}")
    if args.n_max is not None and args.n_max < (args.n if args.n is not None else 0):
        raise UsageError(f"--n-max must be >= --n, got {args.n_max}")
    if args.budget is not None and args.budget <= 0:
        raise UsageError(f"--budget must be positive, got {args.budget}")
    if args.workers is not None and args.workers < 1:
        raise UsageError(f"--workers must be >= 1, got {args.workers}")
    if args.r is not None:
        if not args.r:
            raise UsageError("--r is empty")
        if args.d is not None and len(args.r) not in (1, args.d):
            raise UsageError(f"--r has {len(args.r)} entries but --d is {args.d}")
        try:
            SmoothnessVector(args.r)
        except ValueError as exc:
            raise UsageError(f"--r: {exc}")


def _smoothness(args, d, default=None) -> SmoothnessVector:
    r = args.r if args.r is not None else default
    if r is None:
        raise UsageError("--r is required")
    try:
        return SmoothnessVector.of(r, d)
    except ValueError as exc:
        raise UsageError(f"--r: {exc}")


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(args):
    f = read_field(args.field)
    if args.d is not None and args.d != f.grid.d:
        raise UsageError(f"--d is {args.d} but {args.field} holds a {f.grid.d}-dimensional field")
    return f


def cmd_decompose(args) -> int:
    f = _load(args)
    p = 1.0 if args.p is None else args.p
    rows = block_table(f, p)
    if args.format == "json":
        data = [{"s": list(s), "smooth": a, "sharp": b} for s, a, b in rows]
        _emit(args, json.dumps(_jsonable({"p": p, "blocks": data}), indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "smooth", "sharp"])
    for s, a, b in rows:
        w.writerow([" ".join(str(v) for v in s), repr(a), repr(b)])
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_norm(args) -> int:
    f = _load(args)
    r = _smoothness(args, f.grid.d)
    params = BesovParams(1.0 if args.p is None else args.p,
                         1.0 if args.theta is None else args.theta, r)
    _emit(args, f"{besov_norm(f, params)!r}\n")
    return EXIT_OK


def cmd_approx(args) -> int:
    f = _load(args)
    q = math.inf if args.q is None else args.q
    gamma = _smoothness(args, f.grid.d).gamma if args.r is not None else None
    if (args.budget is None) == (args.n is None):
        raise UsageError("give exactly one of --budget and --n")
    if args.n is not None:
        res = approximate_hyperbolic(f, args.n, gamma, q)
    else:
        res = error_budgeted(f, args.budget, q, args.strategy, gamma)
    _emit(args, json.dumps(_jsonable(res.to_dict()), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_extremal(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    d = 1 if args.kind == "f1" and args.d is None else (args.d or 2)
    r = _smoothness(args, d)
    theta = 1.0 if args.theta is None else args.theta
    L = harness.SWEEP_BOX if args.L is None else args.L
    grid = make_grid(d, L, args.N) if args.N else harness.sweep_grid(d, args.n + 1, None, L)
    norm = not args.raw
    if args.kind == "f1":
        f = extremal_f1(args.n, r.r1, grid, theta, norm)
    elif args.kind == "f2":
        f = extremal_f2(args.n, r, theta, grid, norm)
    else:
        f = extremal_f3(args.n, r, grid, norm)
    if args.out:
        write_field(args.out, f)
    else:
        dump_field(sys.stdout, f)
    return EXIT_OK


def _report_out(args, report) -> None:
    if args.format == "json" or not hasattr(report, "to_csv"):
        text = report.to_json() if hasattr(report, "to_json") else \
            json.dumps(_jsonable(report), indent=2, sort_keys=True)
        _emit(args, text + "\n")
    else:
        _emit(args, report.to_csv())


def cmd_verify(args) -> int:
    w = args.which
    if w in ("lemma1", "lemma2"):
        d = args.d or 1
        lo = 2 if args.n is None else args.n
        hi = args.n_max if args.n_max is not None else (12 if d == 1 else 10)
        p = 1.0 if args.p is None else args.p
        rep = harness.verify_lemma(int(w[-1]), d=d, p=p, levels=range(lo, hi + 1), L=args.L)
        _report_out(args, rep)
        print(rep.summary(), file=sys.stderr)
        return EXIT_OK if rep.verdict else EXIT_FAILED
    if w == "lemma3":
        d = args.d or 2
        lo = 3 if args.n is None else args.n
        hi = 9 if args.n_max is None else args.n_max
        rep = harness.verify_lemma(3, d=d, levels=range(lo, hi + 1), N=args.N, L=args.L)
        _report_out(args, rep)
        print(rep.summary(), file=sys.stderr)
        return EXIT_OK if rep.verdict else EXIT_FAILED
    if w == "recon":
        if args.field:
            f = _load(args)
        else:
            grid = make_grid(args.d or 1, args.L or 32.0, args.N or 2**16)
            f = harness.gaussian_field(grid)
        rep = harness.verify_reconstruction(f)
        data = {"levels": rep.levels, "residuals": rep.residuals, "monotone": rep.monotone,
                "final": rep.final, "tolerance": rep.tolerance, "verdict": rep.verdict}
        _emit(args, json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
        print(rep.summary(), file=sys.stderr)
        return EXIT_OK if rep.verdict else EXIT_FAILED
    if w == "nikolsky":
        dims = [args.d] if args.d else [1, 2]
        results = [harness.verify_nikolsky(d, N=args.N) for d in dims]
        _emit(args, json.dumps(_jsonable(results), indent=2, sort_keys=True) + "\n")
        ok = all(r["verdict"] for r in results)
        return EXIT_OK if ok else EXIT_FAILED
    rep = harness.verify_equiv(2.0 if args.p is None else args.p)
    _report_out(args, rep)
    print(rep.summary(), file=sys.stderr)
    return EXIT_OK if rep.verdict else EXIT_FAILED


def cmd_rate(args) -> int:
    theta = 1.0 if args.theta is None else args.theta
    lo = 4 if args.n is None else args.n
    kw = {"N": args.N, "workers": args.workers}
    if args.L is not None:
        kw["L_max"] = args.L
    if args.which == "theorem1":
        if args.d not in (None, 1):
            raise UsageError("theorem1 is one-dimensional")
        r = _smoothness(args, 1, (2.0,))
        rep = harness.rate_theorem1(r.r1, theta, lo, 12 if args.n_max is None else args.n_max, **kw)
    elif args.which == "theorem2":
        d = args.d or 2
        r = _smoothness(args, d, (2.0,))
        rep = harness.rate_theorem2(r, theta, d, lo, 9 if args.n_max is None else args.n_max, **kw)
    else:
        d = args.d or 2
        r = _smoothness(args, d, (2.0,))
        rep = harness.rate_theoremV(r, theta, d, lo, args.n_max, **kw)
    _report_out(args, rep)
    print(rep.summary(), file=sys.stderr)
    return EXIT_OK if rep.verdict else EXIT_FAILED


COMMANDS = {"decompose": cmd_decompose, "norm": cmd_norm, "approx": cmd_approx,
            "extremal": cmd_extremal, "verify": cmd_verify, "rate": cmd_rate}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge(args)
        validate(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"besovcross: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        print(f"besovcross: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())
