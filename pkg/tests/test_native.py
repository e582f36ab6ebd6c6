from __future__ import annotations

from rflock.apps.bank import NestedBank
from rflock.apps.queue import EMPTYQUEUE, RQueue
from rflock.harness.sched import NativeScheduler, run_native
from rflock.pmem import Memory
from rflock.runtime import Runtime


def test_queue_under_real_threads():
    sched = NativeScheduler()
    rt = Runtime(3, Memory(sched, native=True))
    q = RQueue(rt)

    def producer(t):
        def run():
            for i in range(30):
                q.enqueue((t, i))
        return run

    run_native(sched, {0: producer(0), 1: producer(1)})
    got = []
    while (v := q.dequeue()) is not EMPTYQUEUE:
        got.append(v)
    assert sorted(got) == [(t, i) for t in range(2) for i in range(30)]
    for t in range(2):
        assert [i for tt, i in got if tt == t] == list(range(30))
    assert rt.heap.balanced()


def test_bank_under_real_threads():
    sched = NativeScheduler()
    rt = Runtime(3, Memory(sched, native=True))
    bank = NestedBank(rt, (100, 100, 100))

    def mover(src, dst):
        def run():
            for _ in range(20):
                bank.transfer(src, dst, 1)
        return run

    run_native(sched, {0: mover(0, 1), 1: mover(1, 2), 2: mover(2, 0)})
    assert bank.balances() == [100, 100, 100]
