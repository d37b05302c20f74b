"""Translate a circuit into a running network.

The fold produces, for every node, a *builder*: a function from the network
accumulated so far to the network including that node. Builders only touch
the frontier (the current output pipes); the network's input pipes are
fixed when the initial network is created. Applying the root builder to the
initial network spawns every worker.
"""
from __future__ import annotations

import uuid
from dataclasses import dataclass, replace
from typing import Callable

from .circuit import Algebra, Circuit, fold, ports_of
from .datastore import StoreRegistry, StoreRegistryError, default_registry
from .runtime import (
    Context,
    Network,
    Pipe,
    drop_worker,
    map_worker,
    replicate_worker,
    task_executor,
)
from .signature import FlowError


class OutOfRange(FlowError):
    pass


class TranslationError(FlowError):
    """A builder produced a frontier that disagrees with the node's signature."""


@dataclass(frozen=True)
class PartialNetwork:
    workers: dict
    ins: tuple[Pipe, ...]
    frontier: tuple[Pipe, ...]


NetworkBuilder = Callable[[PartialNetwork], PartialNetwork]


def take_pipes(n: int, pl: tuple) -> tuple:
    if not 0 <= n <= len(pl):
        raise OutOfRange(f"cannot take {n} of {len(pl)} pipes")
    return tuple(pl[:n])


def drop_pipes(n: int, pl: tuple) -> tuple:
    if not 0 <= n <= len(pl):
        raise OutOfRange(f"cannot drop {n} of {len(pl)} pipes")
    return tuple(pl[n:])


def append_pipes(pl1: tuple, pl2: tuple) -> tuple:
    return tuple(pl1) + tuple(pl2)


def alg_swap(frontier: tuple) -> tuple:
    if len(frontier) != 2:
        raise TranslationError(f"swap needs 2 pipes, frontier has {len(frontier)}")
    return (frontier[1], frontier[0])


def alg_then(fl: NetworkBuilder, fr: NetworkBuilder) -> NetworkBuilder:
    return lambda n: fr(fl(n))


def alg_beside(fl: NetworkBuilder, fr: NetworkBuilder, n_left: int) -> NetworkBuilder:
    def build(n: PartialNetwork) -> PartialNetwork:
        # both halves share the inputs and start from the same worker set
        left = fl(replace(n, frontier=take_pipes(n_left, n.frontier)))
        right = fr(replace(n, workers=left.workers, frontier=drop_pipes(n_left, n.frontier)))
        if left.ins is not n.ins or right.ins is not n.ins:
            raise TranslationError("beside halves must share the network inputs")
        return PartialNetwork(
            {**left.workers, **right.workers},
            n.ins,
            append_pipes(left.frontier, right.frontier),
        )

    return build


class BuildNetworkAlgebra(Algebra):
    def __init__(self, ctx: Context, check: bool = True):
        self.ctx = ctx
        self.check = check

    def _checked(self, node: Circuit, build: NetworkBuilder) -> NetworkBuilder:
        if not self.check:
            return build
        expected = node.sig.outs

        def checked(n):
            out = build(n)
            found = tuple(p.port for p in out.frontier)
            if found != expected:
                raise TranslationError(f"{type(node).__name__}: frontier {found} != signature outs {expected}")
            return out

        return checked

    def _spawn(self, n: PartialNetwork, kind, name, target, args, inputs, outputs) -> dict:
        handle = self.ctx.spawn(n.workers, kind, name, target, args, inputs, outputs)
        return {**n.workers, handle.uuid: handle}

    def id_(self, node):
        return self._checked(node, lambda n: n)

    def swap(self, node):
        return self._checked(node, lambda n: replace(n, frontier=alg_swap(n.frontier)))

    def replicate(self, node):
        def build(n):
            (src,) = n.frontier
            a, b = self.ctx.new_pipe(node.port), self.ctx.new_pipe(node.port)
            workers = self._spawn(n, "replicate", "replicate", replicate_worker, (src, a, b), (src,), (a, b))
            return PartialNetwork(workers, n.ins, (a, b))

        return self._checked(node, build)

    def _drop(self, node, keep: int, name: str):
        def build(n):
            pair = tuple(n.frontier)
            if len(pair) != 2:
                raise TranslationError(f"{name} needs 2 pipes, frontier has {len(pair)}")
            out = self.ctx.new_pipe(pair[keep].port)
            workers = self._spawn(n, "drop", name, drop_worker, (keep, pair, out), pair, (out,))
            return PartialNetwork(workers, n.ins, (out,))

        return self._checked(node, build)

    def drop_l(self, node):
        return self._drop(node, 1, "drop_l")

    def drop_r(self, node):
        return self._drop(node, 0, "drop_r")

    def task(self, node):
        spec = node.spec

        def build(n):
            ins = tuple(n.frontier)
            if tuple(p.port for p in ins) != spec.ins:
                raise TranslationError(f"task {spec.name} inputs do not match its frontier")
            out = self.ctx.new_pipe(spec.out)
            workers = self._spawn(n, "task", spec.name, task_executor, (spec, ins, out), ins, (out,))
            return PartialNetwork(workers, n.ins, (out,))

        return self._checked(node, build)

    def then(self, node, fl, fr):
        return self._checked(node, alg_then(fl, fr))

    def beside(self, node, fl, fr):
        return self._checked(node, alg_beside(fl, fr, node.left.sig.n_ins))

    def map(self, node, inner_build):
        def build(n):
            (src,) = n.frontier
            inner_in = self.ctx.new_pipe(node.inner.sig.ins[0])
            inner = inner_build(PartialNetwork(n.workers, (inner_in,), (inner_in,)))
            (inner_out,) = inner.frontier
            out = self.ctx.new_pipe(node.out_port)
            base = replace(n, workers=inner.workers)
            workers = self._spawn(
                base, "map", "map_c", map_worker, (node, src, out, inner_in, inner_out), (src,), (out,)
            )
            return PartialNetwork(workers, n.ins, (out,))

        return self._checked(node, build)


def initial_network(ctx: Context, circuit: Circuit) -> PartialNetwork:
    ins = tuple(ctx.new_pipe(p) for p in circuit.sig.ins)
    return PartialNetwork({}, ins, ins)


def build_basic_network(circuit: Circuit, registry: StoreRegistry | None = None,
                        max_queue: int = 0, check: bool = True) -> Network:
    registry = registry or default_registry()
    for port in sorted(ports_of(circuit), key=str):
        if port.store not in registry:
            raise StoreRegistryError(f"store kind {port.store!r} used by {port} is not registered")
    ctx = Context(registry, max_queue)
    builder = fold(circuit, BuildNetworkAlgebra(ctx, check))
    try:
        net = builder(initial_network(ctx, circuit))
    except BaseException:
        ctx.shutdown()
        raise
    return Network(circuit, net.ins, net.frontier, net.workers, ctx)


def new_job_id() -> uuid.UUID:
    return uuid.uuid4()
