from collections import Counter

import pytest

from flowkit.circuit import (
    Algebra,
    Beside,
    Id,
    Map,
    TaskSpec,
    Then,
    beside,
    chain,
    drop_l,
    drop_r,
    fold,
    function_task,
    id_,
    map_c,
    parallel,
    render,
    replicate,
    signature_of,
    swap,
    task,
    then_,
)
from flowkit.serial import run_serial
from flowkit.signature import (
    INT,
    STR,
    ArityMismatch,
    InnerShapeError,
    InvalidPort,
    List,
    Port,
    PortMismatch,
    Signature,
    compose_beside,
    compose_then,
)
from flowkit.workloads.songflow import COUNTS, MONTH, song_circuit, take10

from conftest import VINT, VLIST, VSTR, WORDS_CSL, WORDS_FILE


def test_leaf_signatures():
    assert replicate(VINT).sig == Signature((VINT,), (VINT, VINT))
    assert swap(VINT, VSTR).sig == Signature((VINT, VSTR), (VSTR, VINT))
    assert drop_l(VINT, VSTR).sig == Signature((VINT, VSTR), (VSTR,))
    assert drop_r(VINT, WORDS_FILE).sig == Signature((VINT, WORDS_FILE), (VINT,))
    assert id_(VSTR).sig == Signature((VSTR,), (VSTR,))


def test_invalid_ports():
    with pytest.raises(InvalidPort):
        id_(Port("CommaSepFile", INT))
    with pytest.raises(InvalidPort):
        id_("Var<Int>")
    with pytest.raises(InvalidPort):
        task(TaskSpec("t", (), VINT, lambda v: 0))


def test_then_port_mismatch():
    gen = function_task(lambda _: ["apple"], VINT, WORDS_FILE, name="gen")
    count = function_task(lambda xs: xs, WORDS_CSL, WORDS_FILE, name="count")
    with pytest.raises(PortMismatch):
        then_(gen, count)
    with pytest.raises(ArityMismatch):
        then_(replicate(VINT), id_(VINT))


def test_operators():
    inc = function_task(lambda x: x + 1, VINT, VINT, name="inc")
    assert (inc >> inc) == then_(inc, inc)
    assert (inc | inc).sig == Signature((VINT, VINT), (VINT, VINT))


def test_chain_and_parallel_nest_left():
    a = id_(VINT)
    c = chain(a, a, a)
    assert isinstance(c, Then) and isinstance(c.first, Then)
    p = parallel(a, a, a)
    assert isinstance(p, Beside) and isinstance(p.left, Beside)


def test_structural_equality():
    assert then_(id_(VINT), id_(VINT)) == then_(id_(VINT), id_(VINT))
    assert id_(VINT) != id_(VSTR)


def test_map_doubling():
    double = function_task(lambda x: x * 2, VINT, VINT, name="double")
    m = map_c(double, VLIST, VLIST)
    assert m.sig == Signature((VLIST,), (VLIST,))
    assert run_serial(m, [[1, 2, 3]]) == [[2, 4, 6]]
    assert run_serial(m, [[]]) == [[]]


def test_map_rejects_bad_shapes():
    with pytest.raises(InnerShapeError):
        map_c(replicate(VINT), VLIST, Port("Var", List(INT)))
    with pytest.raises(InnerShapeError):
        map_c(id_(WORDS_FILE), Port("Var", List(List(STR))), Port("Var", List(List(STR))))
    with pytest.raises(PortMismatch):
        map_c(id_(VINT), Port("Var", List(STR)), VLIST)
    with pytest.raises(InnerShapeError):
        map_c(id_(VINT), VINT, VINT)


def test_count_letters_on_commasep_input():
    count = function_task(lambda ws: [f"{w}:{len(w)}" for w in ws], WORDS_CSL, WORDS_FILE, name="countLetters")
    assert run_serial(count, [["apple"]]) == [["apple:5"]]


def test_take10():
    rows = [(f"s{i}", 20 - i) for i in range(20)]
    assert take10(rows) == rows[:10]
    assert take10(rows[:3]) == rows[:3]


class CountNodes(Algebra):
    def _leaf(self, node):
        return Counter([type(node).__name__])

    id_ = replicate = swap = drop_l = drop_r = task = _leaf

    def then(self, node, a, b):
        return a + b + Counter(["Then"])

    def beside(self, node, a, b):
        return a + b + Counter(["Beside"])

    def map(self, node, inner):
        return inner + Counter(["Map"])


def test_song_circuit_node_census():
    # counted by hand from organise_ins and song_circuit:
    # dup = 3 replicate + 2 beside; each swap layer = 4 id + 1 swap + 4 beside;
    # 3 thens link the layers; the aggregation half is 4 tasks, 2 thens, 1 beside;
    # one root then
    census = fold(song_circuit(), CountNodes())
    assert census == Counter(Replicate=3, Swap=3, Id=12, Task=4, Beside=15, Then=6)
    assert sum(census.values()) == 43


def test_song_circuit_signature():
    s = song_circuit().sig
    assert s == Signature((MONTH,) * 3, (COUNTS, COUNTS))
    halves = song_circuit().second
    assert halves.sig.n_ins == 6 and len(halves.sig.outs) == 2


class SigAlgebra(Algebra):
    def _leaf(self, node):
        return node.sig

    id_ = replicate = swap = drop_l = drop_r = task = _leaf

    def then(self, node, a, b):
        return compose_then(a, b)

    def beside(self, node, a, b):
        return compose_beside(a, b)

    def map(self, node, inner):
        return Signature((node.in_port,), (node.out_port,))


class Rebuild(Algebra):
    def _leaf(self, node):
        return node

    id_ = replicate = swap = drop_l = drop_r = task = _leaf

    def then(self, node, a, b):
        return then_(a, b)

    def beside(self, node, a, b):
        return beside(a, b)

    def map(self, node, inner):
        return map_c(inner, node.in_port, node.out_port)


def _sample_circuits():
    double = function_task(lambda x: x * 2, VINT, VINT, name="double")
    return [song_circuit(), map_c(double, VLIST, VLIST) >> id_(VLIST), replicate(VINT) >> swap(VINT, VINT)]


@pytest.mark.parametrize("c", _sample_circuits())
def test_signature_algebra_agrees(c):
    assert fold(c, SigAlgebra()) == c.sig == signature_of(c)


@pytest.mark.parametrize("c", _sample_circuits())
def test_rebuild_is_identity(c):
    assert fold(c, Rebuild()) == c


def test_fold_order_is_left_to_right():
    seen = []

    class Trace(Algebra):
        def id_(self, node):
            seen.append(node.port)

        def then(self, node, a, b):
            seen.append(type(node).__name__)

        beside = then

    pair = beside(id_(VINT), id_(VSTR))
    fold(then_(pair, pair), Trace())
    assert seen == [VINT, VSTR, "Beside", VINT, VSTR, "Beside", "Then"]


def test_missing_handler_raises():
    with pytest.raises(NotImplementedError):
        fold(id_(VINT), Algebra())


def test_render():
    double = function_task(lambda x: x * 2, VINT, VINT, name="double")
    text = render(then_(replicate(VINT), beside(double, id_(VINT))))
    assert text.splitlines() == [
        "Then  [Var<Int>] -> [Var<Int>, Var<Int>]",
        "|- Replicate  [Var<Int>] -> [Var<Int>, Var<Int>]",
        "`- Beside  [Var<Int>, Var<Int>] -> [Var<Int>, Var<Int>]",
        "   |- Task double  [Var<Int>] -> [Var<Int>]",
        "   `- Id  [Var<Int>] -> [Var<Int>]",
    ]


def test_node_types():
    assert isinstance(id_(VINT), Id)
    assert isinstance(map_c(id_(VINT), VLIST, VLIST), Map)


def test_identity_like_circuits_behave_as_id():
    ident = function_task(lambda x: x, VINT, VINT, name="ident")
    for c in (then_(id_(VINT), id_(VINT)), ident):
        assert c.sig == id_(VINT).sig
        assert all(run_serial(c, [x]) == run_serial(id_(VINT), [x]) == [x] for x in (-3, 0, 7))


def test_take10_over_strings():
    top10 = function_task(take10, Port("Var", List(STR)), Port("Var", List(STR)), name="top10")
    words = [f"w{i:02d}" for i in range(15)]
    assert run_serial(top10, [words]) == [words[:10]]


def test_constant_algebra():
    class Const(Algebra):
        def id_(self, node):
            return "leaf"

    assert fold(id_(VINT), Const()) == "leaf"
