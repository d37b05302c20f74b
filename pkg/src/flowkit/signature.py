"""Value types, ports and circuit signatures.

A signature is the typed contract of a circuit: an ordered list of input
ports and an ordered list of output ports. Composition of circuits is
checked here, at construction time.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

SCALAR_TAGS = ("Unit", "Bool", "Int", "Float", "Str")


@dataclass(frozen=True)
class ValueType:
    tag: str
    args: tuple[ValueType, ...] = ()

    def __post_init__(self):
        if self.tag in SCALAR_TAGS:
            if self.args:
                raise ValueError(f"{self.tag} takes no type arguments")
        elif self.tag == "List":
            if len(self.args) != 1:
                raise ValueError("List takes exactly one type argument")
        elif self.tag != "Tuple":
            raise ValueError(f"unknown value type tag {self.tag!r}")

    @property
    def is_scalar(self) -> bool:
        return self.tag in SCALAR_TAGS

    @property
    def item(self) -> ValueType:
        if self.tag != "List":
            raise TypeError(f"{self} is not a List type")
        return self.args[0]

    def __str__(self) -> str:
        if not self.args and self.tag != "Tuple":
            return self.tag
        return f"{self.tag}<{','.join(str(a) for a in self.args)}>"


UNIT = ValueType("Unit")
BOOL = ValueType("Bool")
INT = ValueType("Int")
FLOAT = ValueType("Float")
STR = ValueType("Str")


def List(item: ValueType) -> ValueType:  # noqa: N802 - reads like a type constructor
    return ValueType("List", (item,))


def Tuple(*fields: ValueType) -> ValueType:  # noqa: N802
    return ValueType("Tuple", tuple(fields))


def value_matches(vt: ValueType, value: Any) -> bool:
    """Structural check of a Python value against a value type."""
    tag = vt.tag
    if tag == "Unit":
        return value is None
    if tag == "Bool":
        return isinstance(value, bool)
    if tag == "Int":
        return isinstance(value, int) and not isinstance(value, bool)
    if tag == "Float":
        return isinstance(value, float)
    if tag == "Str":
        return isinstance(value, str)
    if tag == "List":
        return isinstance(value, list) and all(value_matches(vt.args[0], v) for v in value)
    # Tuple
    return (
        isinstance(value, tuple)
        and len(value) == len(vt.args)
        and all(value_matches(t, v) for t, v in zip(vt.args, value))
    )


@dataclass(frozen=True)
class Port:
    """One signature slot: a store kind paired with the type it carries."""

    store: str
    value: ValueType

    def __str__(self) -> str:
        return f"{self.store}<{self.value}>"


def render_ports(ports: Sequence[Port]) -> str:
    return "[" + ", ".join(str(p) for p in ports) + "]"


class FlowError(Exception):
    """Base class for every error raised by flowkit."""


class CompositionError(FlowError):
    pass


class ArityMismatch(CompositionError):
    def __init__(self, expected: int, found: int):
        self.expected = expected
        self.found = found
        super().__init__(f"arity mismatch: {expected} outputs cannot feed {found} inputs")


class PortMismatch(CompositionError):
    def __init__(self, position: int, expected: Port, found: Port):
        self.position = position
        self.expected = expected
        self.found = found
        super().__init__(
            f"Couldn't match `{found}' with `{expected}' at port {position}: "
            f"store {found.store} vs {expected.store}, value {found.value} vs {expected.value}"
        )


class InnerShapeError(CompositionError):
    pass


class InvalidPort(CompositionError):
    pass


class InvalidSignature(CompositionError):
    pass


@dataclass(frozen=True)
class Signature:
    ins: tuple[Port, ...]
    outs: tuple[Port, ...]

    def __post_init__(self):
        object.__setattr__(self, "ins", tuple(self.ins))
        object.__setattr__(self, "outs", tuple(self.outs))
        if not self.ins or not self.outs:
            raise InvalidSignature("a signature needs at least one input and one output")

    @property
    def n_ins(self) -> int:
        return len(self.ins)

    def __str__(self) -> str:
        return f"{render_ports(self.ins)} -> {render_ports(self.outs)}"


def identity_sig(ports: Sequence[Port]) -> Signature:
    return Signature(tuple(ports), tuple(ports))


def check_ports_equal(expected: Sequence[Port], found: Sequence[Port]) -> None:
    if len(expected) != len(found):
        raise ArityMismatch(len(expected), len(found))
    for i, (e, f) in enumerate(zip(expected, found)):
        if e != f:
            raise PortMismatch(i, e, f)


def compose_then(s1: Signature, s2: Signature) -> Signature:
    check_ports_equal(s1.outs, s2.ins)
    return Signature(s1.ins, s2.outs)


def compose_beside(s1: Signature, s2: Signature) -> Signature:
    return Signature(s1.ins + s2.ins, s1.outs + s2.outs)
