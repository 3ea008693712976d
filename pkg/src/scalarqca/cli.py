"""Command-line front end.

Exit codes: 0 success or pass, 1 a unitarity violation was found, 2 bad input.
"""
from __future__ import annotations

import argparse
import math
import sys
from typing import IO, Sequence

import numpy as np

from .errors import InputError
from .histories import HistorySetSpec, set_probability, truncation_invariance_gap
from .lattice import parse_stencil_spec
from .nogo import TranslationPhase, Violation, classify, elimination_trace, format_complex, format_vector, random_search_oracle
from .operators import FieldState, build_operator, evolve
from .partitioned import BlockRule, build_partitioned, run, subgroup_invariance_report
from .rulefile import load_rule
from .unitarity import DEFAULT_TOL, aliasing_free, global_check, local_conditions

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


def _g(x: float) -> str:
    return f"{x:.17g}"


def write_csv(states: Sequence[FieldState], out: IO[str]) -> None:
    out.write("t,cell,re,im,prob\n")
    for t, state in enumerate(states):
        for cell, z in enumerate(state.amplitudes):
            re, im = float(z.real), float(z.imag)
            out.write(f"{t},{cell},{_g(re)},{_g(im)},{_g(re * re + im * im)}\n")


def _emit_csv(states, path: str | None, stdout: IO[str]) -> None:
    if path is None or path == "-":
        write_csv(states, stdout)
        return
    try:
        with open(path, "w", newline="\n") as fh:
            write_csv(states, fh)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _parse_initial(text: str, volume: int) -> int:
    kind, _, value = text.partition(":")
    if kind != "delta" or not value:
        raise InputError(f"initial state must be delta:<index>, got {text!r}")
    try:
        index = int(value)
    except ValueError:
        raise InputError(f"bad delta index {value!r}") from None
    if not 0 <= index < volume:
        raise InputError(f"initial index {index} out of range [0, {volume})")
    return index


def _parse_condition(text: str) -> tuple[int, frozenset[int]]:
    t_s, sep, cells_s = text.partition(":")
    if not sep:
        raise InputError(f"condition must be t:cell,cell,..., got {text!r}")
    try:
        cells = frozenset(int(c) for c in cells_s.split(",") if c.strip())
        return int(t_s), cells
    except ValueError:
        raise InputError(f"bad condition {text!r}") from None


def _parse_block(text: str) -> BlockRule:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise InputError(f"bad block {text!r}") from None
    if len(parts) != 8:
        raise InputError("block needs 8 numbers: re,im for entries a,b,c,d (row-major)")
    z = [complex(parts[i], parts[i + 1]) for i in range(0, 8, 2)]
    return BlockRule(np.array(z).reshape(2, 2))


def cmd_check(args, out: IO[str]) -> int:
    shape, rule = load_rule(args.rule)
    report = local_conditions(rule, args.tol)
    out.write("delta residual_re residual_im abs\n")
    for delta, r in report.residuals.items():
        out.write(f"{format_vector(delta)} {_g(r.real)} {_g(r.imag)} {_g(abs(r))}\n")
    verdict = "PASS" if report.passed else "FAIL"
    out.write(f"local conditions: {verdict} max_abs_residual={_g(report.max_abs_residual)} tol={_g(args.tol)}\n")
    passed = report.passed
    if aliasing_free(shape, rule.stencil):
        ok, dev = global_check(build_operator(shape, rule), args.tol)
        out.write(f"global check on {shape}: {'PASS' if ok else 'FAIL'} max_abs_deviation={_g(dev)}\n")
        passed = passed and ok
    else:
        out.write(f"global check on {shape}: skipped (lattice aliases stencil differences)\n")
    return EXIT_OK if passed else EXIT_VIOLATION


def cmd_classify(args, out: IO[str]) -> int:
    _, rule = load_rule(args.rule)
    verdict = classify(rule, args.tol, strict=args.strict)
    out.write(f"{verdict}\n")
    if args.trace and any(abs(w) > args.tol for w in rule.weights):
        for line in elimination_trace(rule, args.tol).lines():
            out.write(f"  {line}\n")
    return EXIT_VIOLATION if isinstance(verdict, Violation) else EXIT_OK


def cmd_simulate(args, out: IO[str]) -> int:
    shape, rule = load_rule(args.rule)
    if args.steps < 0:
        raise InputError("--steps must be non-negative")
    start = FieldState.delta(shape, _parse_initial(args.initial, shape.volume))
    states = evolve(build_operator(shape, rule), start, args.steps)
    _emit_csv(states, args.out, out)
    return EXIT_OK


def cmd_nogo_search(args, out: IO[str]) -> int:
    stencil = parse_stencil_spec(args.stencil)
    results = random_search_oracle(stencil, args.seed, args.restarts)
    out.write("restart residual objective nonzero iterations\n")
    converged = multi = 0
    for i, r in enumerate(results):
        nz = r.nonzero_count(args.threshold)
        out.write(f"{i} {_g(r.residual)} {_g(r.objective)} {nz} {r.iterations}\n")
        if r.residual < args.converged:
            converged += 1
            multi += nz > 1
    out.write(f"converged near-solutions: {converged}\n")
    out.write(f"multi-nonzero near-solutions: {multi}\n")
    return EXIT_VIOLATION if multi else EXIT_OK


def cmd_histories(args, out: IO[str]) -> int:
    shape, rule = load_rule(args.rule)
    sources = tuple(int(s) for chunk in args.source for s in chunk.split(","))
    conditions = tuple(_parse_condition(c) for c in args.condition)
    t2 = args.t2 if args.t2 is not None else args.steps
    if t2 is None:
        raise InputError("give --steps or --t2")
    latest = max((t for t, _ in conditions), default=0)
    t1 = args.t1 if args.t1 is not None else latest + 1
    if t1 > t2:
        raise InputError(f"need t1 <= t2, got t1={t1}, t2={t2}")
    spec = HistorySetSpec(sources, t2, conditions)
    for T in sorted({t1, t2}):
        p = set_probability(shape, rule, HistorySetSpec(sources, T, conditions))
        out.write(f"P(S) at T={T}: {_g(p)}\n")
    gap = truncation_invariance_gap(shape, rule, spec, t1, t2)
    out.write(f"invariance gap T1={t1} T2={t2}: {_g(gap)}\n")
    return EXIT_OK


def cmd_partitioned(args, out: IO[str]) -> int:
    block = _parse_block(args.block) if args.block is not None else BlockRule.rotation(args.theta)
    op = build_partitioned(args.n, block)
    if args.steps < 0:
        raise InputError("--steps must be non-negative")
    states = run(op, FieldState.delta(op.shape, _parse_initial(args.initial, args.n)), args.steps)
    if args.out is not None:
        _emit_csv(states, args.out, out)
    report = subgroup_invariance_report(op)
    ok, dev = global_check(op.composite, 1e-12)
    out.write(f"composite unitary: {str(ok).lower()} max_abs_deviation={_g(dev)}\n")
    out.write(f"commutes_with_shift2: {str(report.commutes_with_shift2).lower()}\n")
    out.write(f"shift2 commutator max: {_g(report.shift2_commutator)}\n")
    out.write(f"shift1 commutator max: {_g(report.shift1_commutator)}\n")
    out.write(f"final norm: {_g(states[-1].norm())}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scalarqca", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="local and global unitarity of a rule file")
    p.add_argument("rule")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("classify", help="no-go classification of a rule file")
    p.add_argument("rule")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--trace", action="store_true", help="print the elimination steps")
    p.add_argument("--strict", action="store_true", help="also require every local condition")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="evolve a delta state and write CSV")
    p.add_argument("rule")
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--initial", default="delta:0")
    p.add_argument("--out", default=None, help="CSV path (default: standard output)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("nogo-search", help="random-restart search for unitary rules")
    p.add_argument("--stencil", required=True, help="box:<d>x<r> or tri")
    p.add_argument("--restarts", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--threshold", type=float, default=1e-4, help="nonzero weight modulus")
    p.add_argument("--converged", type=float, default=1e-8, help="max residual counted as a solution")
    p.set_defaults(func=cmd_nogo_search)

    p = sub.add_parser("histories", help="sum-over-histories probability and truncation gap")
    p.add_argument("rule")
    p.add_argument("--source", action="append", default=None, required=True,
                   help="source cell index; repeat or comma-separate for several")
    p.add_argument("--steps", type=int, default=None, help="default for --t2")
    p.add_argument("--t1", type=int, default=None)
    p.add_argument("--t2", type=int, default=None)
    p.add_argument("--condition", action="append", default=[], help="t:cell,cell,... (repeatable)")
    p.set_defaults(func=cmd_histories)

    p = sub.add_parser("partitioned", help="two-phase block evolution on a ring")
    p.add_argument("--n", type=int, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--theta", type=float, default=math.pi / 4)
    g.add_argument("--block", default=None, help="re,im for a,b,c,d (row-major)")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--initial", default="delta:0")
    p.add_argument("--out", default=None, help="CSV path ('-' for standard output)")
    p.set_defaults(func=cmd_partitioned)
    return parser


def main(argv: Sequence[str] | None = None, stdout: IO[str] | None = None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args, stdout)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
