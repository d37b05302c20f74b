import threading

import pytest
from hypothesis import given
from hypothesis import strategies as st

from flowkit.circuit import beside, drop_l, drop_r, fold, function_task, id_, map_c, parallel, replicate, swap, then_
from flowkit.datastore import StoreRegistry
from flowkit.runtime import Context, JobError, start_network
from flowkit.signature import INT, List, Port
from flowkit.translator import (
    BuildNetworkAlgebra,
    OutOfRange,
    TranslationError,
    append_pipes,
    drop_pipes,
    initial_network,
    take_pipes,
)
from flowkit.workloads.songflow import song_circuit

from conftest import VINT, VLIST, VSTR

pipe_lists = st.lists(st.integers(), max_size=8).map(tuple)


@given(pipe_lists, st.data())
def test_take_drop_append(pl, data):
    n = data.draw(st.integers(0, len(pl)))
    assert append_pipes(take_pipes(n, pl), drop_pipes(n, pl)) == pl
    assert len(take_pipes(n, pl)) == n
    assert take_pipes(len(pl), pl) == pl and drop_pipes(0, pl) == pl


@given(pipe_lists)
def test_out_of_range(pl):
    with pytest.raises(OutOfRange):
        take_pipes(len(pl) + 1, pl)
    with pytest.raises(OutOfRange):
        drop_pipes(-1, pl)


def inc(name="inc"):
    return function_task(lambda x: x + 1, VINT, VINT, name=name)


def recip(name="recip"):
    return function_task(lambda x: 100 // x, VINT, VINT, name=name)


def test_swap_spawns_nothing():
    with start_network(swap(VINT, VSTR)) as net:
        assert net.workers == {}
        assert net.outs == (net.ins[1], net.ins[0])
        assert net.run([[1, "a"]]) == [["a", 1]]
    with start_network(then_(swap(VINT, VINT), swap(VINT, VINT))) as net:
        assert net.outs == net.ins


def test_replicate_copies_values_and_errors():
    c = then_(recip(), replicate(VINT))
    with start_network(c) as net:
        ok, bad = net.run([[5], [0]])
    assert ok == [20, 20]
    assert isinstance(bad, JobError) and bad.task_name == "recip"


def test_drop_error_dominance():
    c = then_(beside(recip("left"), recip("right")), drop_l(VINT, VINT))
    with start_network(c) as net:
        outs = net.run([[1, 2], [0, 2], [1, 0]])
    assert outs[0] == [50]
    # the dropped side's failure still fails the job
    assert outs[1].task_name == "left"
    assert outs[2].task_name == "right"
    with start_network(then_(beside(inc(), recip()), drop_r(VINT, VINT))) as net:
        assert net.run([[1, 4]]) == [[2]]


def test_then_and_beside_worker_counts():
    c = parallel(inc("a"), inc("b"), inc("c"))
    with start_network(c) as net:
        assert sorted(w.name for w in net.workers.values()) == ["a", "b", "c"]
        assert len(set(net.workers)) == 3
        assert net.run([[1, 2, 3]]) == [[2, 3, 4]]


def test_beside_associativity_same_topology():
    a, b, c = inc("a"), inc("b"), inc("c")
    with start_network(beside(beside(a, b), c)) as n1, start_network(beside(a, beside(b, c))) as n2:
        assert n1.topology() == n2.topology()
        assert n1.run([[1, 2, 3]]) == n2.run([[1, 2, 3]])


def test_song_topology():
    with start_network(song_circuit(), StoreRegistry()) as net:
        lines = net.topology().splitlines()
    month, counts = "CSVStore<List<Tuple<Str,Str>>>", "CSVStore<List<Tuple<Str,Int>>>"
    assert lines == [
        f"ins: p0 p1 p2  [{month}, {month}, {month}]",
        f"outs: p10 p12  [{counts}, {counts}]",
        "w0 replicate replicate: p0 -> p3 p4",
        "w1 replicate replicate: p1 -> p5 p6",
        "w2 replicate replicate: p2 -> p7 p8",
        "w3 task aggSongs: p3 p5 p7 -> p9",
        "w4 task top10: p9 -> p10",
        "w5 task aggArtists: p4 p6 p8 -> p11",
        "w6 task top10: p11 -> p12",
    ]


def test_map_builds_inner_network():
    m = map_c(then_(inc(), recip()), VLIST, VLIST)
    with start_network(m) as net:
        assert sorted(w.kind for w in net.workers.values()) == ["map", "task", "task"]
        ok, empty, bad = net.run([[[1, 3]], [[]], [[4, -1, 9]]])
    assert ok == [[50, 25]] and empty == [[]]
    assert isinstance(bad, JobError) and bad.task_name == "recip"


def test_nested_map():
    lists = Port("Var", List(List(INT)))
    m = map_c(map_c(inc(), VLIST, VLIST), lists, lists)
    with start_network(m) as net:
        assert net.run([[[[1, 2], [], [3]]]]) == [[[[2, 3], [], [4]]]]


def test_ten_thousand_jobs_with_bounded_queues():
    c = then_(replicate(VINT), beside(inc("a"), inc("b")))
    with start_network(c, max_queue=8) as net:
        n = 10_000
        results = []
        reader = threading.Thread(target=lambda: results.extend(net.read_values(wait=True)[1] for _ in range(n)))
        reader.start()
        for i in range(n):
            net.write_values([i])
        reader.join(60)
        assert len(results) == n
        assert results[-1] == [n, n] and results[0] == [1, 1]
        assert all(p.qsize() <= 8 for p in net._ctx.pipes)


class BrokenSwap(BuildNetworkAlgebra):
    def swap(self, node):
        return self._checked(node, lambda n: n)


def test_frontier_check_catches_bad_builder():
    ctx = Context(StoreRegistry())
    try:
        c = swap(VINT, VSTR)
        builder = fold(c, BrokenSwap(ctx))
        with pytest.raises(TranslationError):
            builder(initial_network(ctx, c))
    finally:
        ctx.shutdown()


def test_ids_are_transparent():
    c = then_(parallel(id_(VINT), id_(VINT)), beside(inc(), id_(VINT)))
    with start_network(c) as net:
        assert len(net.workers) == 1
        assert net.outs[1] is net.ins[1]
