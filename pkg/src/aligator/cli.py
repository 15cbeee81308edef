"""``aligator`` command line.

Exit codes: 0 ok, 1 syntax error, 2 unsupported input, 3 timeout,
4 fixed point not reached, 5 numeric verification failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys

from .pipeline import DEFAULT_TIMEOUT, VERIFY_FAILED, bench, run


def _read_source(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def cmd_analyze(args) -> int:
    try:
        source = _read_source(args.file)
    except OSError as exc:
        print(f"aligator: cannot read {args.file}: {exc.strerror}", file=sys.stderr)
        return 2
    report = run(source, timeout=args.timeout, verify=args.verify, trials=args.trials,
                 steps=args.steps, seed=args.seed)
    if args.format == "json":
        sys.stdout.write(report.to_json(timings=not args.no_timings) + "\n")
    else:
        sys.stdout.write(report.to_text())
    return report.exit_code


def _table(rows) -> str:
    head = ("instance", "status", "seconds", "basis", "nonempty", "verified")
    body = [(r.name, r.status, f"{r.seconds:.3f}", str(r.basis_size), str(r.nonempty),
             "-" if r.verified is None else str(r.verified)) for r in rows]
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    return "\n".join(fmt.format(*line) for line in [head, *body]) + "\n"


def cmd_bench(args) -> int:
    rows = bench(args.dir, timeout=args.timeout, verify=not args.no_verify, trials=args.trials,
                 steps=args.steps, seed=args.seed)
    if args.format == "json":
        sys.stdout.write(json.dumps([r.as_dict() for r in rows], indent=2) + "\n")
    elif args.format == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].as_dict()) if rows else
                                ["name", "status", "seconds", "basis_size", "nonempty",
                                 "verified", "exit_code"], lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow(r.as_dict())
        sys.stdout.write(buf.getvalue())
    else:
        sys.stdout.write(_table(rows))
    bad = [r for r in rows if r.status != "ok" or not r.nonempty or r.verified is False]
    return VERIFY_FAILED if bad else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aligator", description="Polynomial loop invariants via Groebner bases.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="compute the invariant ideal of one loop")
    a.add_argument("file", help="loop source file, or - for stdin")
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.add_argument("--verify", action="store_true",
                   help="check the basis on random concrete executions")
    a.add_argument("--trials", type=int, default=100)
    a.add_argument("--steps", type=int, default=30)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, metavar="SECS")
    a.add_argument("--no-timings", action="store_true",
                   help="zero the timings in JSON output (for byte-stable reports)")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("bench", help="analyze every .loop file in a directory")
    b.add_argument("dir")
    b.add_argument("--format", choices=("text", "json", "csv"), default="text")
    b.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, metavar="SECS")
    b.add_argument("--no-verify", action="store_true")
    b.add_argument("--trials", type=int, default=100)
    b.add_argument("--steps", type=int, default=30)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
