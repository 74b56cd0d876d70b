"""Command-line interface.

Exit codes: 0 success (or valid certificate), 1 invalid certificate,
2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .exceptions import ConstructionError, InputError, SolverError
from .extension import (
    monotone_limit_nondecreasing,
    monotone_limit_nonincreasing,
    precise_reach_probability,
    precise_safety_probability,
    reach_sequence,
    safety_sequence,
    upper_nmeasurable,
    williams_nmeasurable,
)
from .fileformat import check_certificate, parse_certificate, parse_gamble, parse_model, write_certificate
from .sampling import precise_family
from .witness import lp_witness_search, williams_gap_search

EXIT_OK, EXIT_INVALID, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _num(x):
    return f"{x:.17g}"


def _state_set(model, text):
    names = [s for s in text.split(",") if s] if text else []
    return [model.state_index(s) for s in names]


def _emit(args, payload, lines):
    if args.format == "json":
        print(json.dumps(payload, indent=1))
    else:
        print("\n".join(lines))


def cmd_nmeas(args):
    m = parse_model(_read(args.model))
    f = parse_gamble(_read(args.gamble), m)
    lo, up = williams_nmeasurable(m, f), upper_nmeasurable(m, f)
    _emit(args, {"lower": lo, "upper": up}, [f"lower {_num(lo)}", f"upper {_num(up)}"])
    return EXIT_OK


def _limit(args, kind):
    m = parse_model(_read(args.model))
    subset = _state_set(m, args.set)
    if kind == "reach":
        res = monotone_limit_nondecreasing(m, reach_sequence(m, subset, args.max_horizon), args.tol, args.max_horizon)
    else:
        res = monotone_limit_nonincreasing(m, safety_sequence(m, subset, args.max_horizon), args.tol, args.max_horizon)
    payload = {
        "value": res.value,
        "horizon": res.horizon,
        "depth_reached": res.depth_reached,
        "converged": res.converged,
        "direction": res.direction,
        "vvs_only": res.vvs_only,
        "trace": list(res.trace),
    }
    lines = [f"{'horizon':>7}  {'value':>24}  {'delta':>24}"]
    for i, (v, d) in enumerate(zip(res.trace, res.deltas)):
        lines.append(f"{res.start + i:>7}  {_num(v):>24}  {'' if i == 0 else _num(d):>24}")
    lines += [
        f"value {_num(res.value)}",
        f"horizon {res.horizon}",
        f"converged {str(res.converged).lower()}",
        f"direction {res.direction}",
        f"vvs_only {str(res.vvs_only).lower()}",
    ]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_reach(args):
    return _limit(args, "reach")


def cmd_safety(args):
    return _limit(args, "safety")


def cmd_witness_search(args):
    m = parse_model(_read(args.model))
    f = parse_gamble(_read(args.gamble), m)
    horizon = f.n if args.horizon is None else args.horizon
    cert = lp_witness_search(m, f, horizon, solver=args.solver)
    text = write_certificate(cert)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"alpha {_num(cert.alpha)}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_witness_verify(args):
    m = parse_model(_read(args.model))
    f = parse_gamble(_read(args.gamble), m)
    cert = parse_certificate(_read(args.certificate), m.n_states)
    bad_des, bad_dom = check_certificate(m, f, cert)
    names = lambda s: ".".join(m.states[x] for x in s)  # noqa: E731
    for s, v in bad_des:
        print(f"not almost-desirable at situation '{names(s)}': lower expectation {_num(v)}")
    for w, slack in bad_dom:
        print(f"domination violated on path '{names(w)}': slack {_num(slack)}")
    if bad_des or bad_dom:
        print("invalid")
        return EXIT_INVALID
    print(f"valid alpha {_num(cert.alpha)}")
    return EXIT_OK


def cmd_oracle(args):
    m = parse_model(_read(args.model))
    init, P = m.precise_matrix()
    subset = _state_set(m, args.set)
    if args.mode == "reach":
        value = precise_reach_probability(P, init, subset)
    else:
        value = precise_safety_probability(P, init, subset)
    _emit(args, {"mode": args.mode, "value": value}, [f"{args.mode} {_num(value)}"])
    return EXIT_OK


def cmd_gap_search(args):
    template = parse_model(_read(args.model))
    subset = _state_set(template, args.set)
    horizons = [int(h) for h in args.horizons.split(",") if h]
    report = williams_gap_search(precise_family(template), subset, horizons, args.trials, seed=args.seed)
    rows = [
        {
            "trial": r.trial,
            "vvs_limit": r.vvs_limit,
            "converged": r.converged,
            "williams": list(r.williams),
            "gap": r.gap,
            "flagged": r.flagged,
        }
        for r in report.rows
    ]
    lines = [f"{'trial':>5}  {'vvs_limit':>24}  {'williams':>24}  {'gap':>24}  flagged"]
    for r in report.rows:
        lines.append(
            f"{r.trial:>5}  {_num(r.vvs_limit):>24}  {_num(max(r.williams)):>24}  {_num(r.gap):>24}  {str(r.flagged).lower()}"
        )
    lines.append(f"gaps {len(report.gaps)} of {len(report.rows)}")
    _emit(args, {"horizons": horizons, "rows": rows, "gaps": len(report.gaps)}, lines)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="icek", description="Natural extensions for imprecise Markov chains.")
    sub = parser.add_subparsers(dest="command", required=True)

    def fmt(p):
        p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("nmeas", help="lower and upper extension of an n-measurable gamble")
    p.add_argument("model")
    p.add_argument("gamble")
    fmt(p)
    p.set_defaults(func=cmd_nmeas)

    for name, func, what in (("reach", cmd_reach, "reaching"), ("safety", cmd_safety, "staying in")):
        p = sub.add_parser(name, help=f"lower probability of {what} a set of states")
        p.add_argument("model")
        p.add_argument("--set", required=True, help="comma-separated state names")
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--max-horizon", type=int, default=64)
        fmt(p)
        p.set_defaults(func=func)

    w = sub.add_parser("witness", help="certificate search and verification")
    wsub = w.add_subparsers(dest="witness_command", required=True)
    p = wsub.add_parser("search")
    p.add_argument("model")
    p.add_argument("gamble")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--solver", choices=["auto", "simplex", "highs"], default="auto")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_witness_search)
    p = wsub.add_parser("verify")
    p.add_argument("model")
    p.add_argument("gamble")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_witness_verify)

    o = sub.add_parser("oracle", help="classical oracles for precise chains")
    osub = o.add_subparsers(dest="oracle_command", required=True)
    p = osub.add_parser("precise")
    p.add_argument("model")
    p.add_argument("--set", required=True)
    p.add_argument("--mode", choices=["reach", "safety"], required=True)
    fmt(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gap-search", help="look for Williams/VVS gaps on safety events")
    p.add_argument("model", help="template model; trials after the first use random precise members")
    p.add_argument("--set", required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--horizons", default="1,2,4,8,16,32")
    p.add_argument("--seed", type=int, default=0)
    fmt(p)
    p.set_defaults(func=cmd_gap_search)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, ConstructionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
