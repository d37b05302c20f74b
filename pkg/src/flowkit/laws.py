"""Random well-typed circuits and the symmetric monoidal law suite.

Generated circuits use Var stores only and draw task bodies from a fixed
pool of pure functions over Int, Str and List<Int>. Some bodies fail on
part of their domain so that error verdicts get exercised too.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .circuit import (
    Circuit,
    TaskSpec,
    beside,
    drop_l,
    drop_r,
    id_,
    map_c,
    parallel,
    replicate,
    swap,
    task,
    then_,
)
from .serial import run_slots
from .signature import INT, STR, CompositionError, List, Port, Signature, compose_beside, compose_then

VINT = Port("Var", INT)
VSTR = Port("Var", STR)
VLIST = Port("Var", List(INT))
GEN_PORTS = (VINT, VSTR, VLIST)


def _recip(x):
    return 420 // (x % 7)


def _shout(s):
    if "x" in s:
        raise ValueError(f"refusing {s!r}")
    return s.upper()


def _head(xs):
    return xs[0]


# name, input ports, output port, body over the value list
POOL: list[tuple[str, tuple[Port, ...], Port, Callable]] = [
    ("double", (VINT,), VINT, lambda v: v[0] * 2),
    ("inc", (VINT,), VINT, lambda v: v[0] + 1),
    ("recip", (VINT,), VINT, lambda v: _recip(v[0])),
    ("show", (VINT,), VSTR, lambda v: str(v[0])),
    ("upto", (VINT,), VLIST, lambda v: list(range(abs(v[0]) % 5))),
    ("rev", (VSTR,), VSTR, lambda v: v[0][::-1]),
    ("shout", (VSTR,), VSTR, lambda v: _shout(v[0])),
    ("len", (VSTR,), VINT, lambda v: len(v[0])),
    ("sum", (VLIST,), VINT, lambda v: sum(v[0])),
    ("head", (VLIST,), VINT, lambda v: _head(v[0])),
    ("sorted", (VLIST,), VLIST, lambda v: sorted(v[0])),
    ("twice", (VLIST,), VLIST, lambda v: [x * 2 for x in v[0]]),
    ("add", (VINT, VINT), VINT, lambda v: v[0] + v[1]),
    ("repeat", (VSTR, VINT), VSTR, lambda v: v[0] * (abs(v[1]) % 3)),
    ("push", (VLIST, VINT), VLIST, lambda v: v[0] + [v[1]]),
]

_SPECS: dict = {}


def _pool_task(name, ins, out, body) -> Circuit:
    # reuse one TaskSpec per pool entry so equal circuits compare equal
    key = (name, ins)
    spec = _SPECS.get(key)
    if spec is None:
        spec = _SPECS[key] = TaskSpec(name, ins, out, body)
    return task(spec)


def _join_task(ins: tuple[Port, ...]) -> Circuit:
    return _pool_task("join", ins, VSTR, lambda v: "|".join(repr(x) for x in v))


def random_task(rng: random.Random, ins: tuple[Port, ...]) -> Circuit:
    options = [e for e in POOL if e[1] == ins]
    if not options or rng.random() < 0.15:
        return _join_task(ins)
    return _pool_task(*rng.choice(options))


def random_ports(rng: random.Random, max_arity: int = 3) -> tuple[Port, ...]:
    return tuple(rng.choice(GEN_PORTS) for _ in range(rng.randint(1, max_arity)))


def random_circuit(rng: random.Random, ins: tuple[Port, ...] | None = None,
                   depth: int = 4, max_out: int = 3) -> Circuit:
    """A random circuit over `ins` with at most `max_out` outputs.

    With ``max_out=1`` the result always has exactly one output.
    """
    if ins is None:
        ins = random_ports(rng)
    n = len(ins)
    choices = ["task"]
    if n == 1:
        choices.append("id")
        if max_out >= 2:
            choices.append("replicate")
        if ins[0].value.tag == "List" and depth > 0:
            choices.append("map")
    if n == 2:
        choices += ["drop_l", "drop_r"]
        if max_out >= 2:
            choices.append("swap")
    if depth > 0:
        choices += ["then", "then"]
        if n >= 2 and max_out >= 2:
            choices += ["beside", "beside"]
    kind = rng.choice(choices)

    if kind == "task":
        return random_task(rng, ins)
    if kind == "id":
        return id_(ins[0])
    if kind == "replicate":
        return replicate(ins[0])
    if kind == "swap":
        return swap(*ins)
    if kind == "drop_l":
        return drop_l(*ins)
    if kind == "drop_r":
        return drop_r(*ins)
    if kind == "map":
        inner = random_circuit(rng, (Port("Var", ins[0].value.item),), depth - 1, 1)
        out = inner.sig.outs[0]
        return map_c(inner, ins[0], Port("Var", List(out.value)))
    if kind == "then":
        first = random_circuit(rng, ins, depth - 1, 3)
        return then_(first, random_circuit(rng, first.sig.outs, depth - 1, max_out))
    k = rng.randint(1, n - 1)
    left = random_circuit(rng, ins[:k], depth - 1, max_out - 1)
    right = random_circuit(rng, ins[k:], depth - 1, max_out - len(left.sig.outs))
    return beside(left, right)


def random_value(rng: random.Random, port: Port):
    vt = port.value
    if vt == INT:
        return rng.randint(-20, 20)
    if vt == STR:
        return "".join(rng.choice("abcx") for _ in range(rng.randint(0, 4)))
    return [rng.randint(-9, 9) for _ in range(rng.randint(0, 4))]


def random_inputs(rng: random.Random, ports) -> list:
    return [random_value(rng, p) for p in ports]


def ids(ports) -> Circuit:
    return parallel(*[id_(p) for p in ports])


# -- law suite ----------------------------------------------------------------


@dataclass
class LawResult:
    name: str
    cases: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


@dataclass
class LawReport:
    results: list[LawResult]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def lines(self) -> list[str]:
        out = []
        for r in self.results:
            status = "PASS" if r.ok else "FAIL"
            out.append(f"{status} {r.name}: {r.cases - len(r.failures)}/{r.cases}")
            out += [f"    {f}" for f in r.failures[:5]]
        return out

    def __str__(self):
        return "\n".join(self.lines())


def _same(c1: Circuit, c2: Circuit, inputs) -> bool:
    return c1.sig == c2.sig and run_slots(c1, inputs) == run_slots(c2, inputs)


def _reflexivity(rng):
    c = random_circuit(rng)
    x = random_inputs(rng, c.sig.ins)
    return _same(then_(ids(c.sig.ins), c), c, x) and _same(then_(c, ids(c.sig.outs)), c, x)


def _transitivity(rng):
    a = random_circuit(rng, depth=2)
    b = random_circuit(rng, a.sig.outs, depth=2)
    x = random_inputs(rng, a.sig.ins)
    ab = then_(a, b)
    return ab.sig == compose_then(a.sig, b.sig) and run_slots(ab, x) == run_slots(b, run_slots(a, x))


def _monotonicity(rng):
    a, b = random_circuit(rng, depth=2), random_circuit(rng, depth=2)
    c = random_circuit(rng, a.sig.outs, depth=2)
    d = random_circuit(rng, b.sig.outs, depth=2)
    x = random_inputs(rng, a.sig.ins + b.sig.ins)
    lhs = then_(beside(a, b), beside(c, d))
    rhs = beside(then_(a, c), then_(b, d))
    return _same(lhs, rhs, x)


def _unitality(rng):
    # the unit (no ports) is not a valid signature, so the law is checked on port lists
    s = random_circuit(rng, depth=2).sig
    try:
        Signature((), s.outs)
    except CompositionError:
        unit_rejected = True
    else:
        unit_rejected = False
    return unit_rejected and () + s.ins == s.ins and s.ins + () == s.ins and () + s.outs == s.outs


def _associativity(rng):
    a = random_circuit(rng, depth=2)
    b = random_circuit(rng, a.sig.outs, depth=2)
    c = random_circuit(rng, b.sig.outs, depth=2)
    x = random_inputs(rng, a.sig.ins)
    if not _same(then_(then_(a, b), c), then_(a, then_(b, c)), x):
        return False
    p, q, r = (random_circuit(rng, depth=2) for _ in range(3))
    y = random_inputs(rng, p.sig.ins + q.sig.ins + r.sig.ins)
    if compose_beside(compose_beside(p.sig, q.sig), r.sig) != compose_beside(p.sig, compose_beside(q.sig, r.sig)):
        return False
    return _same(beside(beside(p, q), r), beside(p, beside(q, r)), y)


def _symmetry(rng):
    p, q = rng.choice(GEN_PORTS), rng.choice(GEN_PORTS)
    x = random_inputs(rng, (p, q))
    if not _same(then_(swap(p, q), swap(q, p)), beside(id_(p), id_(q)), x):
        return False
    a = random_circuit(rng, (p,), depth=2, max_out=1)
    b = random_circuit(rng, (q,), depth=2, max_out=1)
    lhs = then_(beside(a, b), swap(a.sig.outs[0], b.sig.outs[0]))
    rhs = then_(swap(p, q), beside(b, a))
    return _same(lhs, rhs, x)


def _copy(rng):
    p = rng.choice(GEN_PORTS)
    x = random_inputs(rng, (p,))
    if run_slots(replicate(p), x) != [x[0], x[0]]:
        return False
    a = random_circuit(rng, (p,), depth=2, max_out=1)
    lhs = then_(replicate(p), beside(a, a))
    rhs = then_(a, replicate(a.sig.outs[0]))
    return _same(lhs, rhs, x)


def _delete(rng):
    p, q = rng.choice(GEN_PORTS), rng.choice(GEN_PORTS)
    x = random_inputs(rng, (p, q))
    if run_slots(drop_l(p, q), x) != [x[1]] or run_slots(drop_r(p, q), x) != [x[0]]:
        return False
    y = x[:1]
    return _same(then_(replicate(p), drop_l(p, p)), id_(p), y) and _same(
        then_(replicate(p), drop_r(p, p)), id_(p), y
    )


LAWS = [
    ("reflexivity", _reflexivity),
    ("transitivity", _transitivity),
    ("monotonicity", _monotonicity),
    ("unitality", _unitality),
    ("associativity", _associativity),
    ("symmetry", _symmetry),
    ("copy", _copy),
    ("delete", _delete),
]


def check_laws(seed: int = 0, n_cases: int = 500) -> LawReport:
    results = []
    for name, law in LAWS:
        rng = random.Random(f"{seed}:{name}")
        res = LawResult(name)
        for i in range(n_cases):
            res.cases += 1
            try:
                if not law(rng):
                    res.failures.append(f"case {i}: equality failed")
            except Exception as e:  # a law that crashes is a failed law
                res.failures.append(f"case {i}: {type(e).__name__}: {e}")
        results.append(res)
    return LawReport(results)
