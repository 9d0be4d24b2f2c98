"""Command-line front end: ``udfq <command> ...``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import List, Optional

import numpy as np

from . import __version__
from . import dressing as dr
from . import formal_star as fs
from . import hopf
from . import lie
from . import strict_axb as sx
from .suites import SUITES, Check, run_suite
from .symexpr import parse

SCHEMA_VERSION = "1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(payload: dict, args, checks: Optional[List[Check]] = None) -> None:
    if getattr(args, "csv", False) and checks is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "status", "measured", "tolerance", "runtime_ms"])
        for c in checks:
            d = c.to_json(timing=not args.no_timing)
            w.writerow([d["name"], d["status"], json.dumps(d["measured"]), json.dumps(d["tolerance"]),
                        d.get("runtime_ms", "")])
        sys.stdout.write(buf.getvalue())
    elif getattr(args, "json", False):
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(_human(payload) + "\n")


def _human(payload: dict) -> str:
    if "checks" in payload:
        lines = [f"{c['status'].upper():4}  {c['name']}  measured={json.dumps(c['measured'])}"
                 for c in payload["checks"]]
        lines.append(f"{sum(c['status'] == 'pass' for c in payload['checks'])}/{len(payload['checks'])} passed")
        return "\n".join(lines)
    return json.dumps(payload, indent=2, sort_keys=True)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}") from None


def _floats(text: str, n: Optional[int] = None) -> List[float]:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} numbers, got {len(vals)}")
    return vals


def _matrix(text: str) -> List[List[Fraction]]:
    """``"0,1;-1,0"`` -> [[0, 1], [-1, 0]]."""
    return [[_fraction(x) for x in row.split(",")] for row in text.split(";")]


# -- commands --------------------------------------------------------------------------------------------

def cmd_classify(args) -> dict:
    builtins = lie.builtin_algebras()
    if args.algebra in builtins:
        alg = builtins[args.algebra]
    else:
        try:
            with open(args.algebra) as fh:
                alg = lie.algebra_from_json(json.load(fh))
        except OSError as exc:
            raise UsageError(f"cannot read {args.algebra}: {exc}") from None
    bad = lie.validate(alg)
    if bad:
        return {"valid": False, "violations": [str(v) for v in bad]}, 1
    pair = lie.PreSymplecticPair(alg, lie.parse_wedge(alg, args.w))
    res = lie.classify(pair)
    return {"valid": True, "algebra": list(alg.basis_names), "w": args.w, **res.to_json()}, 0


def cmd_star_formal(args) -> dict:
    N = args.order
    if args.group == "axb":
        u, v = parse(args.u, ["a", "l"]), parse(args.v, ["a", "l"])
        series = sx.axb_formal_star(u, v, N)
        names = ["a", "l"]
    else:
        if args.group == "rn":
            frame = fs.InvariantFrame.for_group("rn", args.n)
            names = ["x"] if args.n == 1 else [f"x{i}" for i in range(args.n)]
        else:
            frame = fs.InvariantFrame.for_group("book")
            names = ["a", "v1", "v2"]
        k = len(frame.ops)
        w = _matrix(args.w) if args.w else fs.w_from_wedges([(0, 1)], k)
        series = fs.moyal_invariant_star(parse(args.u, names), parse(args.v, names), frame, w, N)
    out = {"group": args.group, "order": N,
           "coefficients": [{"order": k, "expr": series[k].to_string(names)} for k in range(N + 1)]}
    if args.at:
        x = _floats(args.at, len(names))
        out["evaluation"] = {"point": x, "values": [[complex(series[k].to_complex(x)).real,
                                                      complex(series[k].to_complex(x)).imag]
                                                     for k in range(N + 1)]}
    return out, 0


def cmd_smash(args) -> dict:
    st = hopf.lambda_structure(_fraction(args.lam), args.order, "rn", args.n)
    u, v = hopf.parse_smash(args.u, st), hopf.parse_smash(args.v, st)
    prod = hopf.lr_smash_multiply(u, v, st)
    names = ["x"] if args.n == 1 else [f"x{i}" for i in range(args.n)]
    out = {"lambda": str(_fraction(args.lam)), "order": args.order,
           "product": prod.to_string(st.algebra, names)}
    if args.coproduct:
        out["coproduct"] = hopf.coproduct_star(prod).to_string(st.algebra)
    if args.antipode:
        out["antipode"] = hopf.antipode_star(prod, st).to_string(st.algebra, names)
    return out, 0


def cmd_star_strict(args) -> dict:
    if args.hbar is None:
        raise UsageError("--hbar is required")
    try:
        u, v = sx.TestFunction.parse(args.u), sx.TestFunction.parse(args.v)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    x0 = _floats(args.x0, 2)
    cfg = sx.QuadConfig(rel_tol=args.tol)
    try:
        res = sx.star_strict(u, v, x0, args.hbar, cfg)
    except sx.HbarZero as exc:
        raise UsageError(str(exc)) from None
    except sx.ToleranceNotMet as exc:
        return {"error": "ToleranceNotMet", "estimate": exc.estimate,
                "value_re": exc.value.real, "value_im": exc.value.imag}, 1
    out = res.to_json()
    if args.no_timing:
        out.pop("runtime_ms")
    return out, 0


def _parse_book(text: str) -> np.ndarray:
    """``a=0.3,v=0.1,0.2``."""
    try:
        a_part, v_part = text.split(",v=")
        a = float(a_part.split("=")[1])
        v1, v2 = (float(x) for x in v_part.split(","))
    except (ValueError, IndexError):
        raise UsageError(f"expected a=<a>,v=<v1>,<v2>, got {text!r}") from None
    return dr.book_matrix(a, v1, v2)


def _parse_su2(text: str) -> np.ndarray:
    """``quat=q0,q1,q2,q3`` (normalised)."""
    if not text.startswith("quat="):
        raise UsageError("expected quat=q0,q1,q2,q3")
    q = np.asarray(_floats(text[5:], 4))
    q = q / np.linalg.norm(q)
    p, r = q[0] + 1j * q[1], q[2] + 1j * q[3]
    return np.array([[p, -np.conj(r)], [r, np.conj(p)]])


def _mat_json(m: np.ndarray):
    return [[[float(f"{z.real:.15g}"), float(f"{z.imag:.15g}")] for z in row] for row in m]


def cmd_dress(args):
    if args.action == "verify":
        checks = [dr_check for dr_check in _dress_checks(args.samples, args.seed)]
        return _report(args, checks)
    if not args.g or not args.k:
        raise UsageError("dress needs --g and --k (or the 'verify' action)")
    g, k = _parse_book(args.g), _parse_su2(args.k)
    res = dr.dress(g, k)
    return {"g": _mat_json(g), "k": _mat_json(k), "tau_g_k": _mat_json(res)}, 0


def _dress_checks(samples: int, seed: int) -> List[Check]:
    from .suites import check_iwasawa, check_udf_consistency
    return [check_iwasawa(samples=max(samples, 1) * 20, triples=samples, seed=seed),
            check_udf_consistency(seed=seed + 1)]


def _report(args, checks: List[Check]):
    payload = {"schema_version": SCHEMA_VERSION, "version": __version__,
               "command": args.command_echo, "seed": args.seed,
               "checks": [c.to_json(timing=not args.no_timing) for c in checks],
               "all_passed": all(c.passed for c in checks)}
    return payload, (0 if payload["all_passed"] else 1), checks


def cmd_verify(args):
    checks = run_suite(args.suite, quick=args.quick, seed=args.seed)
    return _report(args, checks)


# -- parser ---------------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable JSON output")
    common.add_argument("--csv", action="store_true", help="CSV output for check reports")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--hbar", type=float, default=None)
    common.add_argument("--order", type=int, default=3)
    common.add_argument("--lambda", dest="lam", default="1/2")
    common.add_argument("--no-timing", action="store_true", help="omit runtime fields")

    p = _Parser(prog="udfq", description="Deformation quantization toolkit for 3D solvable groups.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("classify", parents=[common], help="classify a pre-symplectic Lie algebra")
    c.add_argument("--algebra", required=True, help="built-in name or JSON file")
    c.add_argument("--w", required=True, help='bivector such as "A^X"')
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("star-formal", parents=[common], help="formal star product coefficients")
    c.add_argument("--group", choices=["rn", "axb", "book"], default="rn")
    c.add_argument("--n", type=int, default=2, help="dimension for --group rn")
    c.add_argument("--w", default=None, help='matrix "0,1;-1,0" on the frame directions')
    c.add_argument("--u", required=True)
    c.add_argument("--v", required=True)
    c.add_argument("--at", default=None, help="evaluate coefficients at a point")
    c.set_defaults(func=cmd_star_formal)

    c = sub.add_parser("smash", parents=[common], help="lambda-ordered L-R smash product on R^n")
    c.add_argument("--n", type=int, default=1)
    c.add_argument("--u", required=True, help='e.g. "x@1" or "x^2@X0"')
    c.add_argument("--v", required=True)
    c.add_argument("--coproduct", action="store_true")
    c.add_argument("--antipode", action="store_true")
    c.set_defaults(func=cmd_smash)

    c = sub.add_parser("star-strict", parents=[common], help="strict product on 'ax+b' at a point")
    c.add_argument("--x0", default="0,0")
    c.add_argument("--u", required=True, help="gauss(a;m,s)*gauss(l;m,s)*poly(l;c0,c1,..)")
    c.add_argument("--v", required=True)
    c.set_defaults(func=cmd_star_strict)

    c = sub.add_parser("dress", parents=[common], help="dressing action of the book group on SU(2)")
    c.add_argument("action", nargs="?", choices=["apply", "verify"], default="apply")
    c.add_argument("--g", default=None, help="a=<a>,v=<v1>,<v2>")
    c.add_argument("--k", default=None, help="quat=q0,q1,q2,q3")
    c.add_argument("--samples", type=int, default=500)
    c.set_defaults(func=cmd_dress)

    c = sub.add_parser("verify", parents=[common], help="run a verification suite")
    c.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    c.add_argument("--quick", action="store_true", help="reduced sample sizes")
    c.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError("missing command")
        if args.json and args.csv:
            raise UsageError("--json and --csv are exclusive")
        args.command_echo = " ".join(argv)
        result = args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"udfq: error: {exc}\n")
        return 2
    except (lie.NotSubalgebra, lie.NotSolvable, lie.UnsupportedDimension, fs.NonCommutingFrame,
            hopf.NotCoalgebraClosed, ValueError) as exc:
        sys.stderr.write(f"udfq: error: {type(exc).__name__}: {exc}\n")
        return 2
    payload, code, *rest = result
    _emit(payload, args, rest[0] if rest else None)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
