"""Listening-history preprocessing: top ten songs and artists over three months.

Three monthly CSV files (rows ``song,artist``) are fanned out to two
aggregation tasks, each followed by a take-ten task::

    month1 -+-> aggSongs   -> top10 -> t10s.csv
    month2 -+
    month3 -+-> aggArtists -> top10 -> t10a.csv

Month files are synthetic: rows are drawn from fixed song/artist pools with a
Zipf-like weighting from a seeded generator.
"""
from __future__ import annotations

import random
import time
import uuid
from collections import Counter
from pathlib import Path

from ..circuit import Circuit, TaskSpec, beside, function_task, id_, parallel, replicate, swap, task, then_
from ..datastore import DataStoreRef, StoreRegistry
from ..runtime import JobError, JobFailed, start_network
from ..serial import run_serial
from ..signature import INT, STR, List, Port, Tuple

MONTH = Port("CSVStore", List(Tuple(STR, STR)))
COUNTS = Port("CSVStore", List(Tuple(STR, INT)))

N_ARTISTS = 40
SONGS_PER_ARTIST = 5
MONTHS = 3


def song_pool() -> list[tuple[str, str]]:
    return [
        (f"song{a * SONGS_PER_ARTIST + s:03d}", f"artist{a:02d}")
        for a in range(N_ARTISTS)
        for s in range(SONGS_PER_ARTIST)
    ]


def generate_months(workdir, n_rows: int, seed: int = 0) -> list[Path]:
    """Write three month files of `n_rows` plays each; returns their paths."""
    rng = random.Random(seed)
    pool = song_pool()
    rng.shuffle(pool)
    weights = [1.0 / (rank + 1) for rank in range(len(pool))]
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for m in range(1, MONTHS + 1):
        rows = rng.choices(pool, weights, k=n_rows)
        path = workdir / f"month{m}.csv"
        path.write_bytes("".join(f"{s},{a}\n" for s, a in rows).encode("utf-8"))
        paths.append(path)
    return paths


def aggregate(months: list, key: int, row_cost: float = 0.0) -> list[tuple[str, int]]:
    """Play counts per key, most played first, ties in ascending key order."""
    counts = Counter()
    n = 0
    for rows in months:
        for row in rows:
            counts[row[key]] += 1
            n += 1
    if row_cost:
        time.sleep(row_cost * n)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def take10(rows):
    return rows[:10]


def organise_ins(p: Port) -> Circuit:
    """[a, b, c] -> [a, b, c, a, b, c] from replicates and swaps."""
    i = id_(p)
    dup = parallel(replicate(p), replicate(p), replicate(p))  # a a b b c c
    s1 = parallel(i, swap(p, p), i, i, i)  # a b a b c c
    s2 = parallel(i, i, i, swap(p, p), i)  # a b a c b c
    s3 = parallel(i, i, swap(p, p), i, i)  # a b c a b c
    return then_(then_(then_(dup, s1), s2), s3)


def song_circuit(row_cost: float = 0.0) -> Circuit:
    ins = (MONTH,) * MONTHS
    agg_songs = task(TaskSpec("aggSongs", ins, COUNTS, lambda v: aggregate(v, 0, row_cost)))
    agg_artists = task(TaskSpec("aggArtists", ins, COUNTS, lambda v: aggregate(v, 1, row_cost)))
    top_songs = function_task(take10, COUNTS, COUNTS, name="top10")
    top_artists = function_task(take10, COUNTS, COUNTS, name="top10")
    return then_(
        organise_ins(MONTH),
        beside(then_(agg_songs, top_songs), then_(agg_artists, top_artists)),
    )


def run_songflow(n_inputs: int, workdir, seed: int = 0, serial: bool = False,
                 row_cost: float = 0.0, registry: StoreRegistry | None = None,
                 topology: list | None = None) -> tuple[Path, Path]:
    """Generate inputs, run the circuit once and write ``t10s.csv``/``t10a.csv``.

    Raises :class:`JobFailed` if the job fails.
    """
    workdir = Path(workdir)
    registry = registry or StoreRegistry(workdir)
    months = generate_months(workdir, n_inputs, seed)
    refs = [DataStoreRef.at(MONTH.store, MONTH.value, p) for p in months]
    circuit = song_circuit(row_cost)
    if serial:
        out = run_serial(circuit, registry.fetch_combined(refs), registry)
    else:
        with start_network(circuit, registry) as net:
            if topology is not None:
                topology.append(net.topology())
            net.write(uuid.uuid4(), refs)
            _, out = net.read()
            if not isinstance(out, JobError):
                out = registry.fetch_combined(out)
    if isinstance(out, JobError):
        raise JobFailed(out)
    paths = (workdir / "t10s.csv", workdir / "t10a.csv")
    for path, rows in zip(paths, out):
        registry.save(DataStoreRef.at(COUNTS.store, COUNTS.value, path), rows)
    return paths
