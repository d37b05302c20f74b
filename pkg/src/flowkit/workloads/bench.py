"""Parallel-vs-serial and input-scaling benchmarks."""
from __future__ import annotations

import csv
import io
import os
import statistics
import tempfile
import time
from dataclasses import dataclass

from ..circuit import Circuit, beside, function_task, replicate, then_
from ..runtime import start_network
from ..serial import run_serial
from ..signature import INT, Port
from .songflow import run_songflow

VINT = Port("Var", INT)

DEFAULT_SIZES = (100, 200, 400, 800)
CSV_COLUMNS = ("suite", "mode", "n", "run", "wall_ms")


@dataclass
class BenchResult:
    suite: str
    mode: str
    n: int
    run: int
    wall_ms: float


def sleeper(seconds: float, name: str) -> Circuit:
    def body(x):
        time.sleep(seconds)
        return x

    return function_task(body, VINT, VINT, name=name)


def two_branch_circuit(task_seconds: float = 0.05) -> Circuit:
    return then_(replicate(VINT), beside(sleeper(task_seconds, "left"), sleeper(task_seconds, "right")))


def _time(fn) -> float:
    t0 = time.perf_counter()
    fn()
    return (time.perf_counter() - t0) * 1000.0


def speedup(jobs: int = 20, repeats: int = 5, task_seconds: float = 0.05) -> list[BenchResult]:
    circuit = two_branch_circuit(task_seconds)
    inputs = [[i] for i in range(jobs)]

    def parallel():
        with start_network(circuit) as net:
            net.run(inputs)

    def serial():
        for x in inputs:
            run_serial(circuit, x)

    rows = []
    for r in range(repeats):
        rows.append(BenchResult("speedup", "parallel", jobs, r, _time(parallel)))
        rows.append(BenchResult("speedup", "serial", jobs, r, _time(serial)))
    return rows


def scaling(sizes=DEFAULT_SIZES, repeats: int = 3, row_cost: float = 0.001,
            serial: bool = False, workdir=None) -> list[BenchResult]:
    mode = "serial" if serial else "parallel"
    rows = []
    with tempfile.TemporaryDirectory() as tmp:
        workdir = workdir or tmp
        for n in sizes:
            for r in range(repeats):
                ms = _time(lambda: run_songflow(n, os.path.join(workdir, f"n{n}"), seed=r,
                                                serial=serial, row_cost=row_cost))
                rows.append(BenchResult("scaling", mode, n, r, ms))
    return rows


def medians(rows: list[BenchResult]) -> dict[tuple[str, int], float]:
    groups: dict[tuple[str, int], list[float]] = {}
    for row in rows:
        groups.setdefault((row.mode, row.n), []).append(row.wall_ms)
    return {k: statistics.median(v) for k, v in groups.items()}


def speedup_ratio(rows: list[BenchResult]) -> float:
    """Median serial time over median parallel time."""
    m = medians(rows)
    (n,) = {row.n for row in rows}
    return m[("serial", n)] / m[("parallel", n)]


@dataclass
class LinearFit:
    slope: float
    intercept: float
    r2: float


def linear_fit(rows: list[BenchResult]) -> LinearFit:
    """Least-squares fit of wall time against n over every sample."""
    xs = [float(r.n) for r in rows]
    ys = [r.wall_ms for r in rows]
    slope, intercept = statistics.linear_regression(xs, ys)
    r = statistics.correlation(xs, ys)
    return LinearFit(slope, intercept, r * r)


def to_csv(rows: list[BenchResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow((r.suite, r.mode, r.n, r.run, f"{r.wall_ms:.3f}"))
    return buf.getvalue()


def table(rows: list[BenchResult]) -> str:
    lines = [f"{'mode':<9} {'n':>6} {'samples':>7} {'median_ms':>10}"]
    counts: dict[tuple[str, int], int] = {}
    for r in rows:
        counts[(r.mode, r.n)] = counts.get((r.mode, r.n), 0) + 1
    for (mode, n), ms in sorted(medians(rows).items()):
        lines.append(f"{mode:<9} {n:>6} {counts[(mode, n)]:>7} {ms:>10.1f}")
    return "\n".join(lines)
