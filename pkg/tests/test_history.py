from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rflock.harness.history import (ANY, BankOracle, History, HistoryTooLarge, QueueOracle,
                                    check_durable_linearizability)

EMPTY = "EMPTY"


def _hist(events):
    """events: ('inv', tid, name, arg) | ('res', tid, result) | ('crash',)."""
    h = History()
    open_ = {}
    for ev in events:
        if ev[0] == "inv":
            open_[ev[1]] = h.invoke(ev[1], ev[2], ev[3])
        elif ev[0] == "res":
            h.respond(open_.pop(ev[1]), ev[2])
        else:
            h.crash()
            open_.clear()
    return h


def check(h, final):
    return check_durable_linearizability(h, final, QueueOracle(EMPTY))[0]


def test_completed_enqueue_must_survive():
    h = _hist([("inv", 0, "enq", 1), ("res", 0, None), ("crash",)])
    assert check(h, (1,))
    assert not check(h, ())


def test_pending_enqueue_may_or_may_not_survive():
    h = _hist([("inv", 0, "enq", 1), ("res", 0, None), ("inv", 0, "enq", 2), ("crash",)])
    assert check(h, (1,))
    assert check(h, (1, 2))
    assert not check(h, (2,))
    assert not check(h, (1, 2, 2))


def test_real_time_order_is_respected():
    h = _hist([("inv", 0, "enq", 1), ("res", 0, None), ("inv", 1, "enq", 2), ("res", 1, None)])
    assert check(h, (1, 2))
    assert not check(h, (2, 1))


def test_overlapping_operations_commute():
    h = _hist([("inv", 0, "enq", 1), ("inv", 1, "enq", 2), ("res", 0, None), ("res", 1, None)])
    assert check(h, (1, 2)) and check(h, (2, 1))


def test_responses_must_match():
    h = _hist([("inv", 0, "enq", 1), ("res", 0, None), ("inv", 1, "deq", None), ("res", 1, EMPTY)])
    assert not check(h, ())
    h2 = _hist([("inv", 0, "enq", 1), ("inv", 1, "deq", None), ("res", 1, EMPTY), ("res", 0, None)])
    assert check(h2, (1,))


def test_any_result_is_unconstrained():
    h = _hist([("inv", 0, "enq", 1), ("res", 0, None), ("inv", 1, "deq", None), ("res", 1, ANY)])
    assert check(h, ())


def test_witness_order_is_returned():
    h = _hist([("inv", 0, "enq", 1), ("res", 0, None), ("inv", 0, "deq", None), ("res", 0, 1)])
    ok, order = check_durable_linearizability(h, (), QueueOracle(EMPTY))
    assert ok and [o.name for o in order] == ["enq", "deq"]


def test_predicate_final_state():
    h = _hist([("inv", 0, "enq", 1), ("res", 0, None)])
    assert check_durable_linearizability(h, lambda s: len(s) == 1, QueueOracle(EMPTY))[0]


def test_bank_oracle():
    h = _hist([("inv", 0, "transfer", (0, 1, 10)), ("res", 0, True)])
    assert check_durable_linearizability(h, (90, 110), BankOracle((100, 100)))[0]
    assert not check_durable_linearizability(h, (100, 100), BankOracle((100, 100)))[0]


def test_too_many_operations():
    h = History()
    for i in range(9):
        h.respond(h.invoke(0, "enq", i))
    with pytest.raises(HistoryTooLarge):
        check(h, tuple(range(9)))


def test_well_formed():
    h = _hist([("inv", 0, "enq", 1), ("res", 0, None), ("inv", 0, "enq", 2), ("crash",),
               ("inv", 0, "enq", 3)])
    assert h.well_formed()
    bad = History()
    bad.invoke(0, "enq", 1)
    bad.invoke(0, "enq", 2)
    assert not bad.well_formed()


# ---------------------------------------------------------------- oracle check


def brute_force(h: History, final) -> bool:
    """Try every ordered subset of operations that contains all completed ones."""
    ops = h.ops
    pending = [o for o in ops if not o.complete]
    done = [o for o in ops if o.complete]
    for k in range(len(pending) + 1):
        for extra in itertools.combinations(pending, k):
            for order in itertools.permutations(done + list(extra)):
                if _valid(order, final):
                    return True
    return False


def _precedes(a, b) -> bool:
    return (a.complete and a.responded < b.invoked) or a.segment < b.segment


def _valid(order, final) -> bool:
    for i, b in enumerate(order):
        for a in order[i + 1:]:
            if _precedes(a, b):
                return False
    q: list = []
    for o in order:
        if o.name == "enq":
            q.append(o.arg)
            resp = None
        else:
            resp = q.pop(0) if q else EMPTY
        if o.complete and resp != o.result:
            return False
    return tuple(q) == final


@st.composite
def histories(draw):
    h = History()
    open_: dict[int, object] = {}
    n_ops = 0
    key = 0
    for _ in range(draw(st.integers(1, 12))):
        choice = draw(st.sampled_from(["inv", "inv", "res", "res", "crash"]))
        tid = draw(st.integers(0, 2))
        if choice == "inv" and tid not in open_ and n_ops < 6:
            if draw(st.booleans()):
                key += 1
                open_[tid] = h.invoke(tid, "enq", key)
            else:
                open_[tid] = h.invoke(tid, "deq")
            n_ops += 1
        elif choice == "res" and tid in open_:
            op = open_.pop(tid)
            res = None if op.name == "enq" else draw(st.sampled_from([EMPTY, 1, 2, 3]))
            h.respond(op, res)
        elif choice == "crash":
            h.crash()
            open_.clear()
    final = tuple(draw(st.lists(st.integers(1, 4), max_size=3, unique=True)))
    return h, final


@settings(max_examples=300, deadline=None)
@given(histories())
def test_checker_agrees_with_brute_force(case):
    h, final = case
    assert check(h, final) == brute_force(h, final)
