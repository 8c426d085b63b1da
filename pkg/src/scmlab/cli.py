"""``lab`` command line.

Exit codes: 0 success, 2 parse error, 3 validation error, 4 numeric error,
5 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import LabError, NumericError, ParseError
from .regression import RegressionSpec
from .report import explain, run
from .scenario import PRESETS, preset
from .scenario_io import load_scenario

EXIT_PARSE, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 2, 3, 4, 5


def _add_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--scenario", metavar="FILE")
    p.add_argument("--regressors", help="comma-separated regressor list overriding the scenario's")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="analytic estimand plus Monte Carlo; writes a result bundle")
    _add_source(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--out", default="lab-output")
    p.add_argument("--threads", type=int)
    p.add_argument("--no-timestamp", action="store_true")

    p = sub.add_parser("explain", help="DAG paths, backdoor admissibility and bias decomposition")
    _add_source(p)

    sub.add_parser("presets", help="list built-in scenarios")
    return parser


def _scenario(args):
    s = preset(args.preset) if args.preset else load_scenario(args.scenario)
    if args.regressors:
        regs = tuple(r.strip() for r in args.regressors.split(",") if r.strip())
        spec = s.regression
        s = s.with_overrides(regression=RegressionSpec(
            spec.method, spec.outcome, regs, spec.instrument, spec.panel_pairs,
            spec.treatment if spec.treatment in regs else None,
        ))
    return s


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    return max(1, int(os.environ.get("LAB_THREADS", "1")))


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "presets":
            for p in PRESETS.values():
                print(f"{p.name:<11} {p.provenance}")
                print(f"{'':<11} {p.description}")
            return 0
        scenario = _scenario(args)
        if args.command == "explain":
            print(explain(scenario))
            return 0
        scenario = scenario.with_overrides(master_seed=args.seed, n=args.n, replications=args.reps)
        bundle = run(
            scenario,
            args.out,
            source=f"preset:{args.preset}" if args.preset else f"file:{args.scenario}",
            workers=_threads(args),
            timestamp=not args.no_timestamp,
        )
        a = bundle["analytic"]
        mc = bundle["mc"].get(f"coef:{a['treatment']}") if a else None
        if a:
            print(f"analytic slope {a['slope']:.10g}; mc mean {mc['mean']:.10g} (sd {mc['sd']:.4g})")
        print(f"wrote {args.out}/summary.json")
        return 0
    except ParseError as exc:
        print(f"lab: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericError as exc:
        print(f"lab: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except LabError as exc:
        print(f"lab: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"lab: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
