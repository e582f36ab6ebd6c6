from __future__ import annotations

from rflock.apps.bank import NestedBank
from rflock.apps.queue import EMPTYQUEUE, RQueue
from rflock.harness.scenarios import QueueConfig, QueueWorld
from rflock.harness.sched import CoopScheduler
from rflock.lock import recover
from rflock.pmem import BOT, Memory


def test_queue_is_fifo(rt):
    q = RQueue(rt)
    for k in (1, 2, 3):
        q.enqueue(k)
    assert q.contents() == [1, 2, 3]
    assert [q.dequeue() for _ in range(4)] == [1, 2, 3, EMPTYQUEUE]
    assert q.check_structure() == []


def test_empty_dequeue(rt):
    q = RQueue(rt)
    assert q.dequeue() is EMPTYQUEUE
    q.enqueue(5)
    assert q.dequeue() == 5
    assert q.dequeue() is EMPTYQUEUE


def test_dequeued_dummy_is_reclaimed(rt):
    q = RQueue(rt)
    q.enqueue(7)
    old = rt.memory.peek(q.head.addr)
    q.dequeue()
    assert old.id in rt.heap.freed
    assert rt.heap.balanced()


def test_empty_queue_pickles_and_copies_as_singleton():
    import copy
    import pickle
    assert copy.deepcopy(EMPTYQUEUE) is EMPTYQUEUE
    assert pickle.loads(pickle.dumps(EMPTYQUEUE)) is EMPTYQUEUE


class _Stop(Exception):
    pass


def _crash_around_rd(persisted: bool):
    """Enqueue 1 and crash just before (or just after) RD is made durable.

    Points fire before their operation, so the first point at which RD holds
    the log persistently comes after the psync and before any update is
    applied.
    """
    mem = Memory(CoopScheduler())
    world = QueueWorld(mem, QueueConfig([[("enq", 1)]]))
    rd = world.rt.RD[0]

    def hook(op, addr):
        if persisted and mem.persisted(rd) is not BOT:
            raise _Stop
        if not persisted and op == "psync" and mem.peek(rd) is not BOT:
            raise _Stop

    mem.scheduler.point = hook
    world.history.invoke(0, "enq", 1)
    try:
        world.queue.enqueue(1)
    except _Stop:
        pass
    else:
        raise AssertionError("the enqueue never reached the apply window")
    del mem.scheduler.point
    world.crash()
    for body in world.recovery_threads().values():
        body()
    return world


def test_crash_after_rd_persisted_recovers_the_enqueue():
    world = _crash_around_rd(persisted=True)
    assert world.queue.contents(world.memory.read) == [1]
    assert world.after_recovery() == []


def test_crash_before_rd_persisted_drops_the_enqueue():
    world = _crash_around_rd(persisted=False)
    assert world.queue.contents(world.memory.read) == []
    assert world.after_recovery() == []


def test_bank_transfer_moves_money(rt):
    bank = NestedBank(rt, (100, 100))
    assert bank.transfer(0, 1, 10)
    assert bank.balances() == [90, 110]
    assert bank.transfer(1, 0, 30)
    assert bank.balances() == [120, 80]
    assert all(not lk.held() for lk in bank.locks)


def test_bank_rejects_self_transfer(rt):
    import pytest
    bank = NestedBank(rt, (1, 1))
    with pytest.raises(ValueError):
        bank.transfer_thunk(0, 0, 1)


def test_bank_recover_after_clean_run_is_a_no_op(rt):
    bank = NestedBank(rt, (100, 100))
    bank.transfer(0, 1, 10)
    rt.crash()
    for tid in range(rt.n):
        rt.memory.scheduler.tid = tid
        recover(rt)
    assert bank.balances(rt.memory.read) == [90, 110]
