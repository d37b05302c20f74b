"""Circuit AST, smart constructors and a bottom-up fold.

Circuits are immutable trees. Build them only through the functions in
this module (``id_``, ``replicate``, ``swap``, ``drop_l``, ``drop_r``,
``then_``, ``beside``, ``task``, ``function_task``, ``map_c``); each one
validates its ports and computes the node's signature.

    >>> from flowkit.signature import Port, INT
    >>> p = Port("Var", INT)
    >>> c = then_(replicate(p), swap(p, p))
    >>> str(c.sig)
    '[Var<Int>] -> [Var<Int>, Var<Int>]'
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .datastore import default_registry
from .signature import (
    ArityMismatch,
    InnerShapeError,
    InvalidPort,
    Port,
    PortMismatch,
    Signature,
    ValueType,
    compose_beside,
    compose_then,
)


@dataclass(frozen=True, eq=False)
class TaskSpec:
    """A named unit of work.

    ``body`` receives the fetched input values as a list, in port order, and
    returns the output value. Raising an exception fails the current job only.
    """

    name: str
    ins: tuple[Port, ...]
    out: Port
    body: Callable[[list], Any]

    def __post_init__(self):
        object.__setattr__(self, "ins", tuple(self.ins))


class Circuit:
    sig: Signature
    handler: str = ""

    def children(self) -> tuple[Circuit, ...]:
        return ()

    def __rshift__(self, other: Circuit) -> Circuit:
        return then_(self, other)

    def __or__(self, other: Circuit) -> Circuit:
        return beside(self, other)


@dataclass(frozen=True)
class Id(Circuit):
    port: Port
    sig: Signature = field(compare=False, repr=False)
    handler = "id_"


@dataclass(frozen=True)
class Replicate(Circuit):
    port: Port
    sig: Signature = field(compare=False, repr=False)
    handler = "replicate"


@dataclass(frozen=True)
class Swap(Circuit):
    left: Port
    right: Port
    sig: Signature = field(compare=False, repr=False)
    handler = "swap"


@dataclass(frozen=True)
class DropL(Circuit):
    left: Port
    right: Port
    sig: Signature = field(compare=False, repr=False)
    handler = "drop_l"


@dataclass(frozen=True)
class DropR(Circuit):
    left: Port
    right: Port
    sig: Signature = field(compare=False, repr=False)
    handler = "drop_r"


@dataclass(frozen=True)
class Then(Circuit):
    first: Circuit
    second: Circuit
    sig: Signature = field(compare=False, repr=False)
    handler = "then"

    def children(self):
        return (self.first, self.second)


@dataclass(frozen=True)
class Beside(Circuit):
    left: Circuit
    right: Circuit
    sig: Signature = field(compare=False, repr=False)
    handler = "beside"

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Task(Circuit):
    spec: TaskSpec
    sig: Signature = field(compare=False, repr=False)
    handler = "task"


@dataclass(frozen=True)
class Map(Circuit):
    inner: Circuit
    in_port: Port
    out_port: Port
    sig: Signature = field(compare=False, repr=False)
    handler = "map"

    def children(self):
        return (self.inner,)


def check_port(p: Port) -> Port:
    if not isinstance(p, Port) or not isinstance(p.value, ValueType):
        raise InvalidPort(f"{p!r} is not a Port")
    registry = default_registry()
    # unregistered kinds are caught at network start
    if p.store in registry and not registry.supports(p):
        raise InvalidPort(f"store {p.store} cannot carry {p.value}")
    return p


def id_(p: Port) -> Id:
    check_port(p)
    return Id(p, Signature((p,), (p,)))


def replicate(p: Port) -> Replicate:
    check_port(p)
    return Replicate(p, Signature((p,), (p, p)))


def swap(p: Port, q: Port) -> Swap:
    check_port(p), check_port(q)
    return Swap(p, q, Signature((p, q), (q, p)))


def drop_l(p: Port, q: Port) -> DropL:
    check_port(p), check_port(q)
    return DropL(p, q, Signature((p, q), (q,)))


def drop_r(p: Port, q: Port) -> DropR:
    check_port(p), check_port(q)
    return DropR(p, q, Signature((p, q), (p,)))


def then_(c1: Circuit, c2: Circuit) -> Then:
    return Then(c1, c2, compose_then(c1.sig, c2.sig))


def beside(c1: Circuit, c2: Circuit) -> Beside:
    return Beside(c1, c2, compose_beside(c1.sig, c2.sig))


def chain(*circuits: Circuit) -> Circuit:
    """Left-nested ``then_`` over one or more circuits."""
    return functools.reduce(then_, circuits)


def parallel(*circuits: Circuit) -> Circuit:
    """Left-nested ``beside`` over one or more circuits."""
    return functools.reduce(beside, circuits)


def task(spec: TaskSpec) -> Task:
    if not spec.ins:
        raise InvalidPort(f"task {spec.name} needs at least one input")
    for p in spec.ins:
        check_port(p)
    check_port(spec.out)
    return Task(spec, Signature(spec.ins, (spec.out,)))


def function_task(f: Callable[[Any], Any], in_port: Port, out_port: Port, name: str | None = None) -> Task:
    """Promote a one-argument function to a single-input task."""
    name = name or getattr(f, "__name__", "function")

    def body(values):
        return f(values[0])

    return task(TaskSpec(name, (in_port,), out_port, body))


def _map_sig(inner: Circuit, in_port: Port, out_port: Port) -> Signature:
    s = inner.sig
    if len(s.ins) != 1 or len(s.outs) != 1:
        raise InnerShapeError(f"map_c needs a one-in one-out inner circuit, got {s}")
    a, b = s.ins[0], s.outs[0]
    if a.store != "Var" or b.store != "Var":
        raise InnerShapeError(f"map_c inner circuit must read and write Var stores, got {s}")
    expected_in = Port(in_port.store, ValueType("List", (a.value,)))
    if in_port != expected_in:
        raise PortMismatch(0, expected_in, in_port)
    expected_out = Port(out_port.store, ValueType("List", (b.value,)))
    if out_port != expected_out:
        raise PortMismatch(0, expected_out, out_port)
    return Signature((in_port,), (out_port,))


def map_c(inner: Circuit, in_port: Port, out_port: Port) -> Map:
    """Run `inner` once per list element, collecting results in order."""
    check_port(in_port), check_port(out_port)
    if in_port.value.tag != "List" or out_port.value.tag != "List":
        raise InnerShapeError("map_c ports must carry List values")
    return Map(inner, in_port, out_port, _map_sig(inner, in_port, out_port))


def signature_of(node: Circuit) -> Signature:
    """Recompute a node's signature from its structure, ignoring the cache."""
    if isinstance(node, Id):
        return Signature((node.port,), (node.port,))
    if isinstance(node, Replicate):
        return Signature((node.port,), (node.port, node.port))
    if isinstance(node, Swap):
        return Signature((node.left, node.right), (node.right, node.left))
    if isinstance(node, DropL):
        return Signature((node.left, node.right), (node.right,))
    if isinstance(node, DropR):
        return Signature((node.left, node.right), (node.left,))
    if isinstance(node, Task):
        return Signature(node.spec.ins, (node.spec.out,))
    if isinstance(node, Then):
        return compose_then(signature_of(node.first), signature_of(node.second))
    if isinstance(node, Beside):
        return compose_beside(signature_of(node.left), signature_of(node.right))
    if isinstance(node, Map):
        signature_of(node.inner)
        return _map_sig(node.inner, node.in_port, node.out_port)
    raise TypeError(f"not a circuit node: {node!r}")


class Algebra:
    """One handler per node kind, used by :func:`fold`.

    Leaf handlers (``id_``, ``replicate``, ``swap``, ``drop_l``, ``drop_r``,
    ``task``) receive the node. ``then`` and ``beside`` receive the node plus
    the two child results; ``map`` receives the node plus the inner result.
    """

    def _missing(self, node, *_):
        raise NotImplementedError(f"{type(self).__name__} has no handler for {type(node).__name__}")

    id_ = replicate = swap = drop_l = drop_r = task = then = beside = map = _missing


def fold(c: Circuit, alg: Algebra):
    """Bottom-up fold; children are folded left to right before their parent."""
    results = [fold(child, alg) for child in c.children()]
    return getattr(alg, c.handler)(c, *results)


def render(c: Circuit) -> str:
    """Indented text tree of a circuit, one node per line."""
    lines: list[str] = []

    def label(node):
        if isinstance(node, Task):
            return f"Task {node.spec.name}"
        return type(node).__name__

    def walk(node, prefix, last, top):
        branch = "" if top else ("`- " if last else "|- ")
        lines.append(f"{prefix}{branch}{label(node)}  {node.sig}")
        kids = node.children()
        ext = "" if top else ("   " if last else "|  ")
        for i, kid in enumerate(kids):
            walk(kid, prefix + ext, i == len(kids) - 1, False)

    walk(c, "", True, True)
    return "\n".join(lines)


def ports_of(c: Circuit) -> set[Port]:
    """Every port mentioned anywhere in the circuit."""
    out = set(c.sig.ins) | set(c.sig.outs)
    for kid in c.children():
        out |= ports_of(kid)
    if isinstance(c, Task):
        out |= set(c.spec.ins)
    return out


__all__ = [
    "Algebra", "ArityMismatch", "Beside", "Circuit", "DropL", "DropR", "Id", "Map",
    "Replicate", "Swap", "Task", "TaskSpec", "Then", "beside", "chain", "drop_l",
    "drop_r", "fold", "function_task", "id_", "map_c", "parallel", "ports_of",
    "render", "replicate", "signature_of", "swap", "task", "then_",
]
