import threading
import time
import uuid

import pytest

from flowkit.circuit import TaskSpec, beside, function_task, id_, replicate, task, then_
from flowkit.datastore import DataStoreRef, StoreRegistryError, live_var_count
from flowkit.runtime import (
    DuplicateJob,
    JobError,
    JobStatus,
    NetworkError,
    NetworkStopped,
    read,
    start_network,
    stop_network,
    write,
)
from flowkit.signature import INT, ArityMismatch, List, Port, PortMismatch

from conftest import VINT, VSTR, WORDS_FILE


def double():
    return function_task(lambda x: x * 2, VINT, VINT, name="double")


def test_id_network_is_a_wire():
    net = start_network(id_(VINT))
    try:
        assert net.ins[0] is net.outs[0]
        assert net.workers == {}
        ref = net.registry.empty("Var", INT, "client", "j")
        net.registry.save(ref, 5)
        job = uuid.uuid4()
        write(job, [ref], net)
        assert read(net) == (job, [ref])
    finally:
        stop_network(net)


def test_one_worker_per_task():
    c = then_(double(), double())
    with start_network(c) as net:
        assert [w.kind for w in net.workers.values()] == ["task", "task"]
        first, second = sorted(net.workers.values(), key=lambda w: w.label)
        assert first.outputs == second.inputs
        assert net.run([[3]]) == [[12]]


def test_fifo_order_over_2000_jobs():
    with start_network(then_(double(), function_task(lambda x: x + 1, VINT, VINT, name="inc"))) as net:
        jobs = [net.write_values([i]) for i in range(2000)]
        for i, job in enumerate(jobs):
            got_job, out = net.read_values()
            assert got_job == job and out == [2 * i + 1]
        assert all(s is JobStatus.DONE for s in net.jobs.values())


def test_failure_is_contained_to_its_job():
    recip = function_task(lambda x: 100 // x, VINT, VINT, name="recip")
    with start_network(then_(recip, double())) as net:
        before = net.live_workers()
        a = net.write_values([0])
        b = net.write_values([4])
        ja, out_a = net.read_values()
        jb, out_b = net.read_values()
        assert (ja, jb) == (a, b)
        assert isinstance(out_a, JobError) and out_a.task_name == "recip"
        assert "ZeroDivisionError" in out_a.cause
        assert out_b == [50]
        assert net.live_workers() == before == 2
        assert net.jobs[a] is JobStatus.FAILED and net.jobs[b] is JobStatus.DONE


def test_downstream_body_skipped_on_error():
    calls = []

    def body(values):
        calls.append(values)
        return values[0]

    failing = function_task(lambda x: 1 // 0, VINT, VINT, name="boom")
    c = then_(failing, task(TaskSpec("after", (VINT,), VINT, body)))
    with start_network(c) as net:
        (out,) = net.run([[1]])
    assert out == JobError("boom", "ZeroDivisionError: integer division or modulo by zero")
    assert calls == []


def test_wrong_result_type_fails_the_job():
    bad = function_task(lambda x: "not an int", VINT, VINT, name="bad")
    with start_network(bad) as net:
        (out,) = net.run([[1]])
    assert isinstance(out, JobError) and "TypeMismatch" in out.cause


def test_write_validation():
    with start_network(double()) as net:
        ref = net.registry.empty("Var", INT, "c", "j")
        net.registry.save(ref, 1)
        with pytest.raises(ArityMismatch):
            net.write(uuid.uuid4(), [ref, ref])
        with pytest.raises(PortMismatch):
            net.write(uuid.uuid4(), [DataStoreRef("Var", List(INT), 0)])
        job = uuid.uuid4()
        net.write(job, [ref])
        with pytest.raises(DuplicateJob):
            net.write(job, [ref])
        assert net.read_values() == (job, [2])
        with pytest.raises(NetworkError):
            net.read()


def test_stop_is_idempotent_and_final():
    net = start_network(then_(replicate(VINT), beside(double(), double())))
    assert net.live_workers() == 3
    net.stop()
    net.stop()
    assert net.live_workers() == 0
    with pytest.raises(NetworkStopped):
        net.read()
    with pytest.raises(NetworkStopped):
        net.write(uuid.uuid4(), [])


def test_stop_with_job_in_flight():
    slow = function_task(lambda x: time.sleep(0.2) or x, VINT, VINT, name="slow")
    net = start_network(then_(slow, double()))
    net.write_values([1])
    time.sleep(0.05)
    t0 = time.perf_counter()
    net.stop()
    assert time.perf_counter() - t0 < 1.5
    assert net.live_workers() == 0


def test_stop_clears_var_cells():
    base = live_var_count()
    net = start_network(then_(double(), double()))
    net.run([[i] for i in range(50)])
    assert live_var_count() >= base + 150
    net.stop()
    assert live_var_count() == base


def test_unregistered_store_kind():
    weird = Port("Redis", INT)
    before = threading.active_count()
    with pytest.raises(StoreRegistryError):
        start_network(id_(weird))
    assert threading.active_count() == before


def test_file_backed_task(registry):
    words = function_task(lambda n: [f"w{i}" for i in range(n)], VINT, WORDS_FILE, name="words")
    with start_network(words, registry) as net:
        net.write_values([3])
        job, (ref,) = net.read()
        with open(ref.locator, "rb") as f:
            assert f.read() == b"w0\nw1\nw2\n"
        assert ref.locator.endswith(f"_{job}.txt")


def test_read_blocks_until_ready():
    gate = threading.Event()
    waiter = function_task(lambda x: gate.wait(5) and x, VINT, VINT, name="wait")
    with start_network(waiter) as net:
        net.write_values([9])
        result = []
        reader = threading.Thread(target=lambda: result.append(net.read_values()))
        reader.start()
        time.sleep(0.05)
        assert result == []
        gate.set()
        reader.join(2)
        assert result[0][1] == [9]


def test_multi_input_task_aligns_jobs():
    concat = task(TaskSpec("cat", (VSTR, VINT), VSTR, lambda v: v[0] * v[1]))
    with start_network(concat) as net:
        assert net.run([["ab", 2], ["c", 3], ["", 1]]) == [["abab"], ["ccc"], [""]]


def test_doubling_var_cells():
    with start_network(double()) as net:
        ref = net.registry.empty("Var", INT, net.client_id, "j")
        net.registry.save(ref, 21)
        net.write(uuid.uuid4(), [ref])
        _, (out,) = net.read()
        assert out.kind == "Var" and net.registry.fetch(out) == 42


def test_beside_outputs_in_order():
    a = function_task(lambda x: x * 10, VINT, VINT, name="a")
    b = function_task(lambda s: s + "!", VSTR, VSTR, name="b")
    with start_network(beside(a, b)) as net:
        assert [p.port for p in net.outs] == [VINT, VSTR]
        assert net.run([[1, "x"]]) == [[10, "x!"]]
