from __future__ import annotations

from rflock.apps.queue import RQueue
from rflock.harness.discipline import validate_thunk_discipline
from rflock.lock import Lock, try_lock
from rflock.mutable import Mutable


def test_queue_operations_are_clean(rt):
    q = RQueue(rt)
    q.enqueue(1)
    q.enqueue(2)
    q.dequeue()
    assert any(ev[0] == "store" for ev in rt.events)
    assert validate_thunk_discipline(rt.events) == []


def test_load_of_other_lock_after_store_is_flagged(rt):
    la, lb = Lock(rt), Lock(rt)
    a = Mutable(rt, 0, guard=la.addr)
    b = Mutable(rt, 0, guard=lb.addr)

    def inner():
        b.load()
        return True

    def outer():
        a.store(1)
        return try_lock(rt, lb, inner)

    assert try_lock(rt, la, outer)
    (v,) = validate_thunk_discipline(rt.events)
    assert (v.store_addr, v.load_addr) == (a.addr, b.addr)
    assert "after store" in str(v)


def test_same_cell_and_same_lock_are_clean(rt):
    lk = Lock(rt)
    a = Mutable(rt, 0, guard=lk.addr)
    b = Mutable(rt, 0, guard=lk.addr)

    def thunk():
        a.store(1)
        assert a.load() == 1
        b.load()
        return True

    assert try_lock(rt, lk, thunk)
    assert validate_thunk_discipline(rt.events) == []


def test_synthetic_events():
    evs = [("store", 0, 10, "A", 1), ("load", 0, 20, "B", 1), ("load", 0, 20, "B", 1),
           ("load", 1, 20, "B", 1), ("load", 0, 20, "B", 2), ("load", 0, 30, None, 1),
           ("trylock", 0, 5, None)]
    assert len(validate_thunk_discipline(evs)) == 1
