"""Kahn process network runtime.

Every task, fan-out, drop and map node runs on its own thread. Threads talk
only through pipes: unbounded FIFO queues with exactly one producer and one
consumer. A worker blocks until it has one message from each input pipe,
so messages stay aligned by job across the whole network and outputs come
back in write order.

A failing task does not stop its worker. The failure travels downstream as a
:class:`JobError` message for that job, and later jobs are unaffected.
"""
from __future__ import annotations

import enum
import itertools
import logging
import queue
import threading
import uuid
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence, Union

from .datastore import DataStoreRef, StoreRegistry, clear_vars, default_registry
from .signature import ArityMismatch, FlowError, Port, PortMismatch, render_ports

log = logging.getLogger(__name__)


class JobStatus(enum.Enum):
    PENDING = "Pending"
    DONE = "Done"
    FAILED = "Failed"


@dataclass(frozen=True)
class JobError:
    """Failure of one job, as carried through pipes and returned by read."""

    task_name: str
    cause: str

    def __str__(self):
        return f"task {self.task_name} failed: {self.cause}"


@dataclass(frozen=True)
class Message:
    job: uuid.UUID
    payload: Union[DataStoreRef, JobError]

    @property
    def failed(self) -> bool:
        return isinstance(self.payload, JobError)


class NetworkError(FlowError):
    pass


class NetworkStopped(NetworkError):
    pass


class WriteError(NetworkError):
    pass


class DuplicateJob(WriteError):
    pass


class JobFailed(FlowError):
    """Raised by workload helpers that need a job to succeed."""

    def __init__(self, error: JobError):
        self.error = error
        super().__init__(str(error))


_STOP = object()


class Pipe:
    def __init__(self, port: Port, label: str, maxsize: int = 0):
        self.port = port
        self.label = label
        self._q = queue.Queue(maxsize) if maxsize else queue.SimpleQueue()

    def send(self, msg: Message) -> None:
        self._q.put(msg)

    def recv(self):
        return self._q.get()

    def poison(self) -> None:
        try:
            self._q.put_nowait(_STOP)
        except queue.Full:
            pass

    def qsize(self) -> int:
        return self._q.qsize()

    def __repr__(self):
        return f"Pipe({self.label}, {self.port})"


PipeList = tuple  # tuple[Pipe, ...]; each pipe carries its slot's Port


def describe(exc: BaseException) -> str:
    return f"{type(exc).__name__}: {exc}"


def first_error(payloads: Sequence) -> JobError | None:
    for p in payloads:
        if isinstance(p, JobError):
            return p
    return None


@dataclass
class WorkerHandle:
    uuid: uuid.UUID
    kind: str
    name: str
    label: str
    inputs: tuple[Pipe, ...]
    outputs: tuple[Pipe, ...]
    thread: threading.Thread = field(repr=False)


class _Stopping(Exception):
    pass


class Context:
    """Shared state of one network under construction and at run time."""

    def __init__(self, registry: StoreRegistry, max_queue: int = 0):
        self.registry = registry
        self.max_queue = max_queue
        self.stop_event = threading.Event()
        self.pipes: list[Pipe] = []
        self.spawned: list[WorkerHandle] = []
        self._pipe_ids = itertools.count()
        self._worker_ids = itertools.count()

    def new_pipe(self, port: Port) -> Pipe:
        p = Pipe(port, f"p{next(self._pipe_ids)}", self.max_queue)
        self.pipes.append(p)
        return p

    def recv(self, pipe: Pipe) -> Message:
        m = pipe.recv()
        if m is _STOP or self.stop_event.is_set():
            raise _Stopping
        return m

    def recv_all(self, pipes: Sequence[Pipe]) -> list[Message]:
        msgs = [self.recv(p) for p in pipes]
        job = msgs[0].job
        if any(m.job != job for m in msgs):
            raise RuntimeError(f"job misalignment: {[m.job for m in msgs]}")
        return msgs

    def spawn(self, workers: dict, kind: str, name: str, target: Callable, args: tuple,
              inputs: Sequence[Pipe], outputs: Sequence[Pipe]) -> WorkerHandle:
        wid = uuid.uuid4()
        while wid in workers:  # pragma: no cover - uuid4 collision
            wid = uuid.uuid4()
        label = f"w{next(self._worker_ids)}"

        def run():
            try:
                target(self, wid, *args)
            except _Stopping:
                pass
            except Exception:  # pragma: no cover - internal invariant breach
                log.exception("worker %s (%s %s) crashed", label, kind, name)

        t = threading.Thread(target=run, name=f"flowkit-{label}-{name}", daemon=True)
        handle = WorkerHandle(wid, kind, name, label, tuple(inputs), tuple(outputs), t)
        self.spawned.append(handle)
        t.start()
        return handle

    def shutdown(self, timeout: float = 2.0) -> None:
        self.stop_event.set()
        for p in self.pipes:
            p.poison()
        for w in self.spawned:
            w.thread.join(timeout)


# -- worker loops -----------------------------------------------------------


def execute_task(spec, task_uuid, job, payloads, registry: StoreRegistry):
    """One fetch-run-save step. Returns the output ref or a JobError."""
    err = first_error(payloads)
    if err is not None:
        return err
    try:
        values = registry.fetch_combined(payloads)
        result = spec.body(values)
        ref = registry.empty(spec.out.store, spec.out.value, task_uuid, job)
        registry.save(ref, result)
        return ref
    except Exception as e:
        return JobError(spec.name, describe(e))


def task_executor(ctx: Context, task_uuid, spec, in_pipes, out_pipe):
    while True:
        msgs = ctx.recv_all(in_pipes)
        job = msgs[0].job
        out_pipe.send(Message(job, execute_task(spec, task_uuid, job, [m.payload for m in msgs], ctx.registry)))


def replicate_worker(ctx: Context, _uuid, in_pipe, out_a, out_b):
    while True:
        m = ctx.recv(in_pipe)
        out_a.send(m)
        out_b.send(m)


def drop_worker(ctx: Context, _uuid, keep: int, in_pipes, out_pipe):
    while True:
        msgs = ctx.recv_all(in_pipes)
        # a failure on the dropped side still fails the job
        err = first_error([m.payload for m in msgs])
        out_pipe.send(Message(msgs[0].job, err) if err is not None else msgs[keep])


MAP_TASK_NAME = "map_c"


def map_worker(ctx: Context, map_uuid, node, in_pipe, out_pipe, inner_in, inner_out):
    registry = ctx.registry
    item_type = node.inner.sig.ins[0].value
    while True:
        m = ctx.recv(in_pipe)
        if m.failed:
            out_pipe.send(m)
            continue
        job = m.job
        try:
            items = registry.fetch(m.payload)
            subjobs = []
            for item in items:
                cell = registry.empty("Var", item_type, map_uuid, job)
                registry.save(cell, item)
                sub = uuid.uuid4()
                subjobs.append(sub)
                inner_in.send(Message(sub, cell))
            payloads = []
            for sub in subjobs:
                r = ctx.recv(inner_out)
                if r.job != sub:
                    raise RuntimeError("map_c inner network returned jobs out of order")
                payloads.append(r.payload)
            err = first_error(payloads)
            if err is not None:
                out_pipe.send(Message(job, err))
                continue
            results = [registry.fetch(p) for p in payloads]
            ref = registry.empty(node.out_port.store, node.out_port.value, map_uuid, job)
            registry.save(ref, results)
            out_pipe.send(Message(job, ref))
        except _Stopping:
            raise
        except Exception as e:
            out_pipe.send(Message(job, JobError(MAP_TASK_NAME, describe(e))))


# -- the network handle -----------------------------------------------------


class Network:
    """A running circuit. Create with :func:`start_network`.

    ``write`` and ``read`` may each be called from one thread; several
    concurrent writers must serialize externally.
    """

    def __init__(self, circuit, ins: PipeList, outs: PipeList, workers: dict, ctx: Context):
        self.circuit = circuit
        self.ins = ins
        self.outs = outs
        self.workers = workers
        self.jobs: dict[uuid.UUID, JobStatus] = {}
        self.client_id = uuid.uuid4()
        self._ctx = ctx
        self._lock = threading.Lock()
        self._unread = 0
        self._stopped = False

    @property
    def registry(self) -> StoreRegistry:
        return self._ctx.registry

    @property
    def stopped(self) -> bool:
        return self._stopped

    def write(self, job: uuid.UUID, inputs: Sequence[DataStoreRef]) -> None:
        if self._stopped:
            raise NetworkStopped("network has been stopped")
        if len(inputs) != len(self.ins):
            raise ArityMismatch(len(self.ins), len(inputs))
        for i, (pipe, ref) in enumerate(zip(self.ins, inputs)):
            if ref.port != pipe.port:
                raise PortMismatch(i, pipe.port, ref.port)
        with self._lock:
            if job in self.jobs:
                raise DuplicateJob(f"job {job} was already written")
            self.jobs[job] = JobStatus.PENDING
            self._unread += 1
        for pipe, ref in zip(self.ins, inputs):
            pipe.send(Message(job, ref))

    def read(self, wait: bool = False) -> tuple[uuid.UUID, Union[list[DataStoreRef], JobError]]:
        """Block until the next job (in write order) has left every output pipe.

        By default reading with nothing written is an error, since it could
        never return. A reader running alongside a writer passes ``wait=True``
        to block for jobs that have not been written yet.
        """
        if self._stopped:
            raise NetworkStopped("network has been stopped")
        with self._lock:
            if self._unread <= 0 and not wait:
                raise NetworkError("read called with no unread job")
            self._unread -= 1
        try:
            msgs = self._ctx.recv_all(self.outs)
        except _Stopping:
            raise NetworkStopped("network stopped while reading") from None
        job = msgs[0].job
        err = first_error([m.payload for m in msgs])
        with self._lock:
            self.jobs[job] = JobStatus.FAILED if err else JobStatus.DONE
        if err is not None:
            return job, err
        return job, [m.payload for m in msgs]

    def write_values(self, values: Sequence[Any], job: uuid.UUID | None = None) -> uuid.UUID:
        """Save `values` into fresh stores matching the input ports and write them."""
        job = job or uuid.uuid4()
        if len(values) != len(self.ins):
            raise ArityMismatch(len(self.ins), len(values))
        refs = []
        for pipe, v in zip(self.ins, values):
            ref = self.registry.empty(pipe.port.store, pipe.port.value, self.client_id, job)
            self.registry.save(ref, v)
            refs.append(ref)
        self.write(job, refs)
        return job

    def read_values(self, wait: bool = False) -> tuple[uuid.UUID, Union[list, JobError]]:
        job, out = self.read(wait)
        if isinstance(out, JobError):
            return job, out
        return job, self.registry.fetch_combined(out)

    def run(self, batches: Sequence[Sequence[Any]]) -> list:
        """Write every input vector, then read them all back as values."""
        for values in batches:
            self.write_values(values)
        return [self.read_values()[1] for _ in batches]

    def live_workers(self) -> int:
        return sum(1 for w in self.workers.values() if w.thread.is_alive())

    def stop(self) -> None:
        if self._stopped:
            return
        self._stopped = True
        self._ctx.shutdown()
        clear_vars(list(self.workers) + [self.client_id])

    def topology(self) -> str:
        """Deterministic adjacency list of workers and pipes."""
        lines = [
            "ins: " + " ".join(p.label for p in self.ins) + "  " + render_ports([p.port for p in self.ins]),
            "outs: " + " ".join(p.label for p in self.outs) + "  " + render_ports([p.port for p in self.outs]),
        ]
        for w in sorted(self.workers.values(), key=lambda w: int(w.label[1:])):
            src = " ".join(p.label for p in w.inputs)
            dst = " ".join(p.label for p in w.outputs)
            lines.append(f"{w.label} {w.kind} {w.name}: {src} -> {dst}")
        return "\n".join(lines)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.stop()


def start_network(circuit, registry: StoreRegistry | None = None, max_queue: int = 0) -> Network:
    from .translator import build_basic_network

    return build_basic_network(circuit, registry or default_registry(), max_queue=max_queue)


def stop_network(net: Network) -> None:
    net.stop()


def write(job, inputs, net: Network) -> None:
    net.write(job, inputs)


def read(net: Network):
    return net.read()
