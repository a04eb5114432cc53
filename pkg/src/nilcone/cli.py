"""Command-line entry point: ``nilcone verify|fan|series|transport|lcsl``."""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .dataset import BUNDLED, load_case, load_dataset
from .errors import IoError, NilconeError
from .report import EXIT_FAIL, EXIT_OK, EXIT_USAGE, plain

LOOPS = ("x0", "y0", "e1", "xp", "square", "apparent", "rel")


def _dataset(args):
    if getattr(args, "data", None):
        return load_dataset(args.data)
    return load_case(args.case)


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def cmd_verify(args) -> int:
    from .suites import run_verification

    report = run_verification(_dataset(args), args.suite, prec=args.prec, tol=args.tol)
    print(report.render_text())
    if args.json:
        _write(args.json, report.to_json() + "\n")
    return report.exit_code


def cmd_fan(args) -> int:
    from .birational import movable_chambers
    from .cones import cone_chain, quotient_fan
    from .figures import emit_fan_svg

    ds = _dataset(args)
    if args.side == "a":
        fan = movable_chambers(ds, args.depth)
        axes = tuple(ds.section("a_side", {}).get("basis", ["H1", "H2"]))
    else:
        fan = quotient_fan(cone_chain(ds, -args.depth, args.depth))
        axes = ("N1", "N2")
    label = f"{ds.name}, {args.side.upper()}-side, depth {args.depth}"
    path = emit_fan_svg(fan, args.out, label, axes)
    print(f"{path}: {len(fan.rays)} rays, closure slopes {', '.join(str(r.slope()) for r in fan.closure)}")
    return EXIT_OK


def cmd_series(args) -> int:
    from .series import picard_fuchs, w0_series

    ds = _dataset(args)
    ops = picard_fuchs(ds)
    if not ops:
        print(f"{ds.name} has no differential operators", file=sys.stderr)
        return EXIT_USAGE
    w0 = w0_series(args.degree)
    ok = True
    payload = {"case": ds.name, "degree": args.degree, "operators": {}}
    for name in sorted(ops):
        r = ops[name].apply(w0)
        zero = r.is_zero_through(r.degree)
        ok = ok and zero
        payload["operators"][name] = {"annihilates_w0": zero, "through_degree": r.degree}
    low = {f"{n},{m}": w0.coefficient(n, m) for n in range(4) for m in range(4 - n)}
    payload["w0_low_coefficients"] = low
    if args.format == "json":
        print(json.dumps(plain(payload), indent=2))
    else:
        for name, rec in payload["operators"].items():
            verdict = "annihilates" if rec["annihilates_w0"] else "does NOT annihilate"
            print(f"{name} {verdict} w0 through degree {rec['through_degree']}")
        print("w0 = " + " + ".join(f"{c}*x^{k.split(',')[0]}*y^{k.split(',')[1]}" for k, c in low.items()) + " + ...")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_transport(args) -> int:
    from . import transport as tr

    ds = _dataset(args)
    spec = ds.section("transport")
    if not spec or not ds.section("picard_fuchs"):
        print(f"{ds.name} carries no transport data; only p3p3 does", file=sys.stderr)
        return EXIT_USAGE
    tol = args.tol
    if args.loop == "rel":
        mats = {n: tr.p3p3_loop(n, args.prec).matrix for n in spec["loops"]}
        rows, ok = [], True
        for rel in spec.get("numeric_relations", []):
            rc = tr.numeric_relation_check(mats, rel["lhs"], rel["rhs"], tol)
            ok = ok and rc.verdict
            rows.append({"id": rel["id"], "lhs": rc.lhs, "rhs": rc.rhs, "deviation": rc.deviation,
                         "verdict": rc.verdict})
        if args.format == "json":
            print(json.dumps({"prec_bits": args.prec, "tolerance": tol, "relations": rows}, indent=2))
        else:
            for r in rows:
                print(f"{'PASS' if r['verdict'] else 'FAIL'} {r['id']}: {r['lhs']} = {r['rhs']}  dev {r['deviation']:.3e}")
        return EXIT_OK if ok else EXIT_FAIL
    res = tr.p3p3_loop(args.loop, args.prec)
    out = res.as_dict()
    out["tolerance"] = tol
    ok = True
    if args.loop in spec["loops"]:
        lspec = spec["loops"][args.loop]
        want = tr.unipotent_target(ds.dimension, {int(k): v for k, v in lspec["charpoly"].items()}, args.prec)
        dev = tr.charpoly_deviation(res.matrix, want)
        out["expected_charpoly_roots"] = lspec["charpoly"]
        out["charpoly_deviation"] = dev
        ok = dev < tol
    else:
        dev = res.matrix.identity_deviation()
        out["identity_deviation"] = dev
        ok = dev < tol
    if args.format == "json":
        print(json.dumps(out, indent=2))
    else:
        print(f"loop {args.loop} at {args.prec} bits: {res.stats.steps} steps, max order {res.stats.max_order}")
        print("charpoly (leading first): " + ", ".join(f"{c.real:+.12g}{c.imag:+.3g}i" for c in res.charpoly))
        print(f"|det| - 1 = {abs(res.det) - 1:.3e}")
        key = "charpoly_deviation" if "charpoly_deviation" in out else "identity_deviation"
        print(f"{'PASS' if ok else 'FAIL'} {key} {out[key]:.3e} (tolerance {tol:g})")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_lcsl(args) -> int:
    from .hodge import lcsl_verify

    ds = _dataset(args)
    if args.point not in ds.points:
        print(f"{ds.name}: unknown point {args.point!r}; choose from {', '.join(ds.points)}", file=sys.stderr)
        return EXIT_USAGE
    rep = lcsl_verify(ds, args.point)
    if args.format == "json":
        print(json.dumps(rep.as_dict(), indent=2))
    else:
        d = rep.as_dict()
        print(f"{ds.name} {args.point}: {'LCSL' if rep.verdict else 'not LCSL'}")
        print(f"  unipotent: {d['unipotent']}")
        print(f"  dim W0, W2: {tuple(d['filtration_dims'])} (expected {tuple(d['expected_dims'])})")
        print(f"  m = {d['m_matrix']}, det m = {d['m_det']}")
        for n in rep.notes:
            print(f"  {n}")
    return EXIT_OK if rep.verdict else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    from .suites import SUITES

    p = argparse.ArgumentParser(prog="nilcone", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def case_args(sp, default=None):
        grp = sp.add_mutually_exclusive_group(required=default is None)
        grp.add_argument("--case", choices=BUNDLED, default=default)
        grp.add_argument("--data", help="dataset JSON file used instead of the bundled case")

    sp = sub.add_parser("verify", help="run a verification suite")
    case_args(sp)
    sp.add_argument("--suite", choices=SUITES, default="all")
    sp.add_argument("--json", metavar="PATH", help="also write the report as JSON")
    sp.add_argument("--prec", type=int, default=256, help="bits for the transport suite")
    sp.add_argument("--tol", type=float, default=1e-10, help="tolerance for numeric relations")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("fan", help="write an SVG picture of a fan")
    case_args(sp)
    sp.add_argument("--side", choices=("a", "b"), default="b")
    sp.add_argument("--depth", type=int, default=3)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_fan)

    sp = sub.add_parser("series", help="check the holomorphic period against the operators")
    case_args(sp, "p3p3")
    sp.add_argument("--degree", type=int, default=12)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_series)

    sp = sub.add_parser("transport", help="numerical monodromy of a named loop")
    case_args(sp, "p3p3")
    sp.add_argument("--loop", choices=LOOPS, default="x0")
    sp.add_argument("--prec", type=int, default=256)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_transport)

    sp = sub.add_parser("lcsl", help="LCSL conditions at a boundary point")
    case_args(sp)
    sp.add_argument("--point", required=True)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_lcsl)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "degree", 1) < 0 or getattr(args, "depth", 0) < 0 or getattr(args, "prec", 64) < 16:
        parser.error("degree and depth must be non-negative; prec at least 16 bits")
    try:
        return args.func(args)
    except NilconeError as exc:
        print(f"nilcone: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
