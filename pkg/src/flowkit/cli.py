"""Command line entry point: ``flowkit {songflow,buildflow,bench,props}``.

Exit codes: 0 success, 2 composition error, 3 job error, 4 config error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .circuit import render
from .datastore import DEFAULT_WORKDIR, StoreRegistry
from .laws import check_laws
from .runtime import JobFailed
from .signature import CompositionError
from .workloads import bench, buildflow, songflow

EXIT_OK, EXIT_COMPOSITION, EXIT_JOB, EXIT_CONFIG = 0, 2, 3, 4


def _explain(circuit) -> None:
    print(f"signature: {circuit.sig}")
    print(render(circuit))


def cmd_songflow(args) -> int:
    if args.explain:
        _explain(songflow.song_circuit())
        return EXIT_OK
    topology = [] if args.dump_topology else None
    paths = songflow.run_songflow(
        args.inputs, args.workdir, seed=args.seed, serial=args.serial,
        registry=StoreRegistry(args.workdir), topology=topology,
    )
    if topology:
        print(topology[0])
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_buildflow(args) -> int:
    config = buildflow.load_config(args.config)
    if args.explain:
        _explain(buildflow.build_circuit(config, args.workdir))
        return EXIT_OK
    topology = [] if args.dump_topology else None
    out = buildflow.run_buildflow(config, args.workdir, StoreRegistry(args.workdir), topology)
    if topology:
        print(topology[0])
    print(out)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.suite == "speedup":
        rows = bench.speedup(jobs=args.inputs or 20, repeats=args.repeats)
        summary = f"speedup (median serial / median parallel): {bench.speedup_ratio(rows):.2f}x"
    else:
        sizes = [int(s) for s in args.sizes.split(",")]
        rows = bench.scaling(sizes, repeats=args.repeats, serial=args.serial)
        fit = bench.linear_fit(rows)
        summary = f"linear fit: wall_ms = {fit.slope:.4f} * n + {fit.intercept:.1f}  (R^2 = {fit.r2:.4f})"
    print(bench.table(rows))
    print(summary)
    if args.csv:
        Path(args.csv).write_text(bench.to_csv(rows), encoding="utf-8")
    return EXIT_OK


def cmd_props(args) -> int:
    report = check_laws(args.seed, args.cases)
    print(report)
    return EXIT_OK if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flowkit", description="Typed dataflow circuits on a Kahn process network.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--workdir", default=DEFAULT_WORKDIR)
        p.add_argument("--dump-topology", action="store_true", help="print the worker/pipe graph")
        p.add_argument("--explain", action="store_true", help="print the circuit and exit")

    p = sub.add_parser("songflow", help="top-10 songs and artists over three synthetic months")
    common(p)
    p.add_argument("--inputs", type=int, default=100, help="plays per month file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--serial", action="store_true", help="use the sequential interpreter")
    p.set_defaults(func=cmd_songflow)

    p = sub.add_parser("buildflow", help="run a command pipeline from a YAML config")
    common(p)
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_buildflow)

    p = sub.add_parser("bench", help="benchmarks")
    p.add_argument("suite", choices=["speedup", "scaling"])
    p.add_argument("--inputs", type=int, default=None, help="jobs for the speedup suite")
    p.add_argument("--sizes", default=",".join(str(n) for n in bench.DEFAULT_SIZES))
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--serial", action="store_true")
    p.add_argument("--csv", help="also write samples to this CSV file")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("props", help="check the circuit laws")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=500)
    p.set_defaults(func=cmd_props)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if getattr(args, "repeats", 3) < 3:
        print("flowkit: --repeats must be at least 3", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except CompositionError as e:
        print(f"flowkit: composition error: {e}", file=sys.stderr)
        return EXIT_COMPOSITION
    except JobFailed as e:
        print(f"flowkit: job failed: {e}", file=sys.stderr)
        return EXIT_JOB
    except buildflow.ConfigError as e:
        print(f"flowkit: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
