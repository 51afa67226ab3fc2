"""Command-line interface.

Exit codes: 0 success, 1 invariant or certificate failure, 2 input error.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .chain_core import ChainError, mass
from .chainio import ChainFileError, dumps, export_obj, parse, serialize
from .decomposition import DecompositionError, NoSplitRadius, constants_for, decompose
from .generators import FAMILIES, GeneratorSpec, generate
from .isofill import FillConfig, fill, parse_certificate, verify
from .normed_space import NormSpec
from .slicing import growth_function, slice_chain

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


def rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def point(text: str) -> tuple:
    return tuple(rational(t) for t in text.split(","))


def norm_spec(text: str, n: int) -> NormSpec:
    """euclidean | linf | l1 | lp:P | polytope:x,y;x,y;..."""
    kind, _, arg = text.partition(":")
    if kind == "euclidean":
        return NormSpec.euclidean(n)
    if kind == "linf":
        return NormSpec.linf(n)
    if kind == "l1":
        return NormSpec.l1(n)
    if kind == "lp":
        return NormSpec.lp(n, rational(arg))
    if kind == "polytope":
        return NormSpec(n, "polytope", vertices=tuple(point(v) for v in arg.split(";")))
    raise InputError(f"unknown norm {text!r}")


def _emit(lines, path: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if path:
        Path(path).write_text(text)
    sys.stdout.write(text)


def cmd_gen(args) -> int:
    n = args.ambient or (3 if args.family == "polyhedral_sphere" else 2)
    space = norm_spec(args.norm, n)
    params = {k: v for k, v in vars(args).items() if k in ("n", "radius", "noise", "count", "spacing", "level", "aspect") and v is not None}
    T = generate(GeneratorSpec(args.family, params, space), args.seed)
    if args.output:
        serialize(T, args.output)
    else:
        sys.stdout.write(dumps(T))
    return EXIT_OK


def cmd_fill(args) -> int:
    T = parse(args.input)
    if args.k is not None and args.k != T.dim:
        raise InputError(f"--k {args.k} does not match chain dimension {T.dim}")
    cfg = FillConfig(lam=args.lam, eps_stop=float(args.eps_stop), mode=args.mode, seed=args.seed)
    S, cert = fill(T, cfg)
    if args.output:
        serialize(S, args.output)
    if args.export_obj:
        export_obj(S, args.export_obj)
    _emit(cert.to_lines(), args.report)
    return EXIT_OK if cert.ok else EXIT_FAIL


def cmd_decompose(args) -> int:
    T = parse(args.input)
    consts = constants_for(T.dim, args.lam)[-1]
    filler = None
    if T.dim >= 2:
        cfg = FillConfig(lam=args.lam, mode=args.mode, seed=args.seed)
        filler = lambda c: fill(c, cfg)[0]
    try:
        d = decompose(T, consts, filler, args.mode, args.seed)
    except DecompositionError as exc:
        _emit([f"error={exc}"] + (exc.ledger or []), args.report)
        return EXIT_FAIL
    _emit(d.ledger(), args.report)
    return EXIT_OK


def cmd_slice(args) -> int:
    T = parse(args.input)
    s = slice_chain(T, args.center, args.radius, args.mode)
    lines = [
        f"radius={s.radius}",
        f"slice_mass={mass(s.chain) if s.chain else 0.0!r}",
        f"slice_simplices={len(s.chain)}",
        f"support_deviation={s.deviation!r}",
    ]
    if args.output:
        serialize(s.chain, args.output)
    _emit(lines, None)
    return EXIT_OK


def cmd_growth(args) -> int:
    T = parse(args.input)
    g = growth_function(T, args.center)
    if args.radii:
        radii = [rational(r) for r in args.radii.split(",")]
    else:
        top = g.max_distance * 1.1 or 1.0
        radii = [Fraction(float(r)).limit_denominator(10**6) for r in np.linspace(top / args.samples, top, args.samples)]
    lines = ["r\tbeta\tslice_mass"]
    for r in radii:
        sm = mass(slice_chain(T, args.center, r, args.mode).chain) if r > 0 else 0.0
        lines.append(f"{float(r)!r}\t{g.value(r)!r}\t{sm!r}")
    lines.append(f"total_mass={g.total_mass!r}")
    lines.append(f"breakpoints={len(g.breakpoints)}")
    _emit(lines, None)
    return EXIT_OK


def cmd_constants(args) -> int:
    lines = []
    for c in constants_for(args.k, args.lam):
        lines += [f"constants.{c.k}.{line}" for line in c.lines()]
    _emit(lines, None)
    return EXIT_OK


def cmd_verify(args) -> int:
    T = parse(args.input)
    S = parse(args.filling)
    cert = parse_certificate(Path(args.cert).read_text().splitlines())
    rep = verify(T, S, cert)
    _emit(rep.lines + [f"status={'pass' if rep.ok else 'FAIL'}"], None)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_export(args) -> int:
    export_obj(parse(args.input), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="isochain", description="Exact polyhedral chains and certified isoperimetric fillings.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a test cycle")
    g.add_argument("family", choices=FAMILIES)
    g.add_argument("--norm", default="euclidean")
    g.add_argument("--ambient", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--radius", type=rational)
    g.add_argument("--noise", type=rational)
    g.add_argument("--count", type=int)
    g.add_argument("--spacing", type=rational)
    g.add_argument("--level", type=int)
    g.add_argument("--aspect", type=rational)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output")
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fill", help="fill a cycle and print its certificate")
    f.add_argument("--input", required=True)
    f.add_argument("--k", type=int, choices=(1, 2))
    f.add_argument("--lambda", dest="lam", type=rational, default=Fraction(1, 6))
    f.add_argument("--eps-stop", type=rational, default=Fraction(1, 10**6))
    f.add_argument("--mode", choices=("exact", "snap"))
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--output", help="write the filling chain here")
    f.add_argument("--report")
    f.add_argument("--export-obj")
    f.set_defaults(func=cmd_fill)

    d = sub.add_parser("decompose", help="print the decomposition ledger")
    d.add_argument("--input", required=True)
    d.add_argument("--lambda", dest="lam", type=rational, default=Fraction(1, 6))
    d.add_argument("--mode", choices=("exact", "snap"))
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--report")
    d.set_defaults(func=cmd_decompose)

    s = sub.add_parser("slice", help="slice by a sphere")
    s.add_argument("--input", required=True)
    s.add_argument("--center", type=point, required=True)
    s.add_argument("--radius", type=rational, required=True)
    s.add_argument("--mode", choices=("exact", "snap"))
    s.add_argument("--output")
    s.set_defaults(func=cmd_slice)

    gr = sub.add_parser("growth", help="tabulate the growth function")
    gr.add_argument("--input", required=True)
    gr.add_argument("--center", type=point, required=True)
    gr.add_argument("--radii")
    gr.add_argument("--samples", type=int, default=10)
    gr.add_argument("--mode", choices=("exact", "snap"))
    gr.set_defaults(func=cmd_growth)

    c = sub.add_parser("constants", help="print the constant chain")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--lambda", dest="lam", type=rational, default=Fraction(1, 6))
    c.set_defaults(func=cmd_constants)

    v = sub.add_parser("verify", help="re-check a filling certificate")
    v.add_argument("--input", required=True)
    v.add_argument("--filling", required=True)
    v.add_argument("--cert", required=True)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("export", help="export a chain as OBJ")
    e.add_argument("--input", required=True)
    e.add_argument("--output", required=True)
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ChainFileError, InputError, FileNotFoundError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, ChainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NoSplitRadius, DecompositionError, RuntimeError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
