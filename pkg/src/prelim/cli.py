"""Command line: ``prelim run``, ``prelim share`` and ``prelim synth``."""
import argparse
import logging
import sys

from .core import write_csv
from .errors import PrelimError
from .harness import ExperimentMatrix, emit_reports, private_sharing_run, run_matrix
from .synthetic import SPECS, make_synthetic


def _matrix(args):
    return ExperimentMatrix.from_file(args.config, seed=args.seed)


def cmd_run(args):
    m = _matrix(args)
    rows, cells = run_matrix(m, args.jobs)
    for name in emit_reports(rows, cells, m, args.out):
        print(f"{args.out}/{name}")
    failed = sum(r["status"] != "ok" for r in rows)
    if failed:
        print(f"{failed} experiment(s) failed; see experiments.csv", file=sys.stderr)


def cmd_share(args):
    m = _matrix(args)
    rows, cells = private_sharing_run(m, args.jobs)
    for name in emit_reports(rows, cells, m, args.out):
        print(f"{args.out}/{name}")


def cmd_synth(args):
    d = make_synthetic(args.spec, args.size, args.noise, args.seed)
    write_csv(args.out, d)
    print(args.out)


def build_parser():
    p = argparse.ArgumentParser(prog="prelim", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (("run", cmd_run, "run an experiment matrix"),
                            ("share", cmd_share, "private-sharing mode (trees trained on D^new)")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, help="JSON experiment matrix")
        s.add_argument("--out", required=True, help="report directory")
        s.add_argument("--jobs", type=int, default=1)
        s.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        s.set_defaults(func=fn)
    s = sub.add_parser("synth", help="write a synthetic dataset as CSV")
    s.add_argument("--spec", required=True, choices=SPECS)
    s.add_argument("--size", type=int, default=2000)
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (PrelimError, OSError) as err:
        print(f"prelim: error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
