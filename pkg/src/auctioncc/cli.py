"""Command-line entry point.

Exit codes: 0 success / all checks pass, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .competition import competition_constant, competition_constant_bounds
from .distributions import EqualRevenue, Exponential, ProductPrior
from .figures import ExperimentSpec, _row, evaluate, figure1_spec, run_figure, write_rows
from .quantile_game import case_probabilities, dominance_report, mixture_weights_m3
from .sampling import SampleConfig
from .suites import SUITES, run_suite


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def _cmd_figure1(args) -> int:
    cfg = SampleConfig(seed=args.seed, samples=args.samples)
    spec = figure1_spec(args.panel, cfg, m_max=args.m_max, shift=args.shift)
    run_figure(spec, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_cc_const(args) -> int:
    rows = []
    for n in args.n:
        for a in args.alpha:
            r = competition_constant(n, a)
            lb, ub = competition_constant_bounds(n, a)
            rows.append([n, a, r.c, repr(lb), repr(ub), repr(r.f1n), repr(r.f1nc), repr(r.f2nc)])
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "alpha", "c", "lb", "ub", "F1n", "F1nc", "F2nc"])
    w.writerows(rows)
    return 0


def _cmd_verify(args) -> int:
    report = run_suite(args.suite, seed=args.seed, samples=args.samples)
    for rec in report.records:
        print(rec.line())
    print(f"suite {report.name}: {report.status.upper()}")
    if args.json:
        Path(args.json).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return 0 if report.status == "pass" else 1


def _cmd_mech_eval(args) -> int:
    cfg_data = json.loads(Path(args.config).read_text())
    if "m" in cfg_data and "prior" in cfg_data:
        spec = ExperimentSpec.from_dict(cfg_data)
        result = run_figure(spec, args.out or spec.out)
        if isinstance(result, str):
            sys.stdout.write(result)
        return 0
    try:
        prior = ProductPrior.from_spec(cfg_data["prior"])
        cfg = SampleConfig(**cfg_data.get("sampling", {}))
        mechs = [(x["kind"], int(x["bidders"])) for x in cfg_data["mechanisms"]]
    except KeyError as e:
        raise ValueError(f"config: missing field {e.args[0]!r}") from None
    iid = cfg_data.get("name", "instance")
    rows = [_row(iid, k.upper(), b, prior.m, evaluate(k, prior, b, cfg.derive(iid, k.upper(), b))) for k, b in mechs]
    text = write_rows(rows, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def _cmd_qgame(args) -> int:
    probs = case_probabilities(args.m)
    report = {"m": args.m, "trials": args.trials, "seed": args.seed,
              "case_probabilities": [f"{p.numerator}/{p.denominator}" for p in probs]}
    if args.m == 3:
        mw = mixture_weights_m3()
        report["mixture_weights"] = [f"{w.numerator}/{w.denominator}" for w in mw.weights]
        report["mixture_dominates_cdw"] = mw.dominates_cdw
    ok = True
    report["dominance"] = {}
    for mg in (Exponential(1.0), EqualRevenue()):
        r = dominance_report(ProductPrior.iid(mg, args.m), args.trials, args.seed)
        ok = ok and r.ok
        entry = {"min_gap": r.min_gap, "violations": r.violations}
        if r.violating_matrix is not None:
            entry["violating_matrix"] = r.violating_matrix.tolist()
        report["dominance"][mg.family] = entry
    print(json.dumps(report, indent=2))
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="auctioncc", description="Extra-bidder revenue experiments for additive multi-item auctions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("figure1", help="emit revenue-vs-m curves for panel a or b")
    f.add_argument("--panel", choices=("a", "b"), required=True)
    f.add_argument("--out", required=True)
    f.add_argument("--seed", type=int, default=1)
    f.add_argument("--samples", type=int, default=100_000)
    f.add_argument("--m-max", type=int, default=40)
    f.add_argument("--shift", type=float, default=0.0, help="panel a: shift of the exponential support")
    f.set_defaults(func=_cmd_figure1)

    c = sub.add_parser("cc-const", help="competition constant C(n, alpha) with its certificate")
    c.add_argument("--n", type=int, nargs="+", required=True)
    c.add_argument("--alpha", type=float, nargs="+", required=True)
    c.set_defaults(func=_cmd_cc_const)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", choices=sorted(SUITES), required=True)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--samples", type=int, default=None)
    v.add_argument("--json", default=None, help="also write the report as JSON")
    v.set_defaults(func=_cmd_verify)

    e = sub.add_parser("mech-eval", help="evaluate mechanisms from a JSON config")
    e.add_argument("--config", required=True)
    e.add_argument("--out", default=None)
    e.set_defaults(func=_cmd_mech_eval)

    q = sub.add_parser("qgame-verify", help="quantile-game constants and dominance")
    q.add_argument("--m", type=int, choices=(2, 3), required=True)
    q.add_argument("--trials", type=int, default=200)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=_cmd_qgame)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
