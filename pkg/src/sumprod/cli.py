"""sumprod command-line front end.

Every command writes JSON lines (header, records, summary) to --out or stdout
and a summary table to stderr.  Exit codes: 0 pass, 1 assertion failure,
2 usage error, 3 cost cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction


from . import density, harness, procedures, sets
from .ring import DEFAULT_CAP, RingError, RingParams, make_ring
from .sets import DEFAULT_OP_CAP, CapExceeded, RingSet

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from exc


def _ring(args):
    if args.ring is None:
        raise UsageError("--ring p,f,e,N is required")
    return make_ring(RingParams.parse(args.ring), args.ring_cap)


def _read_set(path: str, cap: int) -> RingSet:
    if path is None:
        raise UsageError("--set FILE is required")
    try:
        with open(path) as fh:
            record = json.load(fh)
        return harness.load_set(record, cap)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read set file {path}: {exc}") from exc


# -- commands --------------------------------------------------------------------------

def cmd_suite(args, rep):
    if args.name != "all" and args.name not in harness.SUITES:
        raise UsageError(f"unknown suite {args.name!r}")
    out = harness.run_suite(args.name, args.seed, args.trials)
    rep.records, rep.checks = out.records, out.checks


def cmd_generate(args, rep):
    ring = _ring(args)
    rng = harness.trial_rng(args.seed, 0, 0, 0)
    try:
        A = harness.generate_set(ring, rng, args.eps, args.delta, args.valuations, args.extra)
    except harness.Unsatisfiable as exc:
        raise UsageError(str(exc)) from exc
    problems = harness.verify_hypotheses(A, args.eps, args.delta, args.valuations)
    rep.add("generate.verified", 0, not problems, size=len(A), problems=problems)
    if not problems and args.set_out:
        with open(args.set_out, "w") as fh:
            json.dump(A.to_record(), fh)
    rep.records[-1]["set"] = A.to_record()


def cmd_growth(args, rep):
    A = _read_set(args.set, args.ring_cap)
    q = A.ring.q
    prev = None
    for C in range(1, args.C + 1):
        S = sets.gen_set(A, C, args.op_cap)
        rep.add("growth.size", C, True, C=C, size=len(S),
                exponent=math.log(len(S)) / math.log(q) if q > 1 else 0.0)
        if prev is not None and 0 in A and A.ring.one in A:
            rep.add("growth.monotone", C, prev.issubset(S))
        prev = S
        if len(S) == A.ring.size:
            break


def cmd_scalar_sum(args, rep):
    A = _read_set(args.set, args.ring_cap)
    G = sets.gen_set(A, args.C, args.op_cap)
    size, alpha = procedures.empirical_scalar_sum(G, G)
    rep.add("scalar_sum.max", 0, True, C=args.C, size=size, alpha=alpha,
            ratio=Fraction(size, len(A)))
    prof = sets.regularity_profile(A)
    if prof is not None:
        bound = procedures.scalar_sum_bound(prof, prof)
        emp, alpha = procedures.empirical_scalar_sum(A, A)
        rep.add("scalar_sum.regular_bound", 0, emp >= bound, empirical=emp, bound=bound, alpha=alpha)


def cmd_segment(args, rep):
    A = _read_set(args.set, args.ring_cap)
    S = sets.gen_set(A, args.C, args.op_cap)
    w = sets.segment_search(S, 1, args.op_cap)
    rep.add("segment.found", 0, w is not None and sets.segment_holds(S, w), C=args.C,
            size=len(S), witness=w)


def cmd_subfield(args, rep):
    if args.set is not None:
        B = _read_set(args.set, args.ring_cap)
    else:
        if args.elements is None:
            raise UsageError("give --set FILE or --elements i,j,...")
        B = RingSet.from_indices(_ring(args), args.elements)
    if B.ring.N != 1:
        raise UsageError("subfield works on a residue field (N = 1)")
    try:
        G, C = procedures.subfield_closure(B, args.op_cap)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    ok = procedures.is_subfield(G) and G == procedures.field_closure(B)
    rep.add("subfield.closure", 0, ok, field=G.elements().tolist(), order=len(G), C_min=C)


def cmd_density_stats(args, rep):
    A = _read_set(args.set, args.ring_cap)
    R, prof = sets.regularize(A)
    st = density.profile_stats(prof)
    rep.add("density.profile", 0, True, profile=prof.m, B=st.B, T=st.T,
            avg_DT=density.avg_DT(st), report=density.average_D_report(st, args.eps))
    if density.satisfies_hypotheses(prof, args.eps, args.delta):
        ok, wit = density.large_interval_cover(st, args.eps, args.delta)
        rep.add("density.large_interval", 0, ok, cover=wit if ok else None,
                uncovered=None if ok else wit)


def cmd_regularize(args, rep):
    A = _read_set(args.set, args.ring_cap)
    R, prof = sets.regularize(A)
    ok = sets.regularity_profile(R) == prof and len(R) >= sets.regularize_bound(len(A), A.ring.q, A.ring.N)
    rep.add("regularize.guarantee", 0, ok, size_in=len(A), size_out=len(R), profile=prof.m,
            set=R.to_record())
    if args.set_out:
        with open(args.set_out, "w") as fh:
            json.dump(R.to_record(), fh)


COMMANDS = {
    "suite": cmd_suite,
    "generate": cmd_generate,
    "growth": cmd_growth,
    "scalar-sum": cmd_scalar_sum,
    "segment": cmd_segment,
    "subfield": cmd_subfield,
    "density-stats": cmd_density_stats,
    "regularize": cmd_regularize,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sumprod", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("name", nargs="?", default="all",
                   help="suite name: ring, digits, sets, measures, density, procedures, all")
    p.add_argument("--ring", help="p,f,e,N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--set", help="input set file")
    p.add_argument("--set-out", help="write the produced set here")
    p.add_argument("--eps", type=_fraction, default=Fraction(0))
    p.add_argument("--delta", type=_fraction, default=Fraction(0))
    p.add_argument("--C", type=int, default=None)
    p.add_argument("--cap", type=int, default=None,
                   help="bound on ring size and on per-operation work (default: library caps)")
    p.add_argument("--out", help="report file (default stdout)")
    p.add_argument("--valuations", type=_ints, default=(), help="required difference valuations")
    p.add_argument("--extra", type=int, default=0, help="random elements to seed generation with")
    p.add_argument("--elements", type=_ints, help="indices for subfield")
    return p


DEFAULT_C = {"growth": 8, "scalar-sum": 6, "segment": 1}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    if args.C is None:
        args.C = DEFAULT_C.get(args.command, 1)
    args.ring_cap = DEFAULT_CAP if args.cap is None else args.cap
    args.op_cap = DEFAULT_OP_CAP if args.cap is None else args.cap
    echo = {k: harness.jsonable(v) for k, v in vars(args).items()
            if k not in ("out", "ring_cap", "op_cap")}
    rep = harness.Report(echo)
    code = EXIT_OK
    try:
        COMMANDS[args.command](args, rep)
    except UsageError as exc:
        print(f"sumprod: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        rep.add(f"{args.command}.cap", 0, None, reason=str(exc))
        code = EXIT_CAP
    except RingError as exc:
        if "cap" in str(exc):
            rep.add(f"{args.command}.cap", 0, None, reason=str(exc))
            code = EXIT_CAP
        else:
            print(f"sumprod: {exc}", file=sys.stderr)
            return EXIT_USAGE
    if code == EXIT_OK:
        code = EXIT_FAIL if rep.failures else EXIT_CAP if rep.capped else EXIT_OK
    text = "\n".join(rep.lines()) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(rep.table(), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
