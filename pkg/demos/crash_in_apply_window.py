"""Crash a queue enqueue halfway through applying its updates, then recover.

The enqueue's update log is already durable and registered in RD when the
crash hits, so recovery finishes the section: the element is in the queue
afterwards even though the enqueuing thread never returned.
"""

from __future__ import annotations

from rflock.apps.queue import RQueue
from rflock.harness.sched import CoopScheduler
from rflock.lock import recover
from rflock.pmem import BOT, Memory
from rflock.runtime import Runtime


class Crash(Exception):
    pass


def main() -> None:
    sched = CoopScheduler()
    mem = Memory(sched)
    rt = Runtime(2, mem)
    q = RQueue(rt)
    q.enqueue("a")

    applied = []
    # Resetting RD after "a" was flushed but not synced, so the persisted RD
    # may still name a's finished log; recovery would replay it harmlessly.
    stale = mem.persisted(rt.RD[0])

    def point(op: str, addr: int | None) -> None:
        # Let exactly one update land after b's log became durable in RD, then pull the plug.
        if mem.persisted(rt.RD[0]) not in (BOT, stale) and op == "cas":
            if applied:
                raise Crash
            applied.append(addr)

    sched.point = point
    try:
        q.enqueue("b")
    except Crash:
        print(f"crashed after applying the update to cell {applied[0]}")
    del sched.point

    print("volatile view before the crash:", q.contents())
    rt.crash()
    print("RD[0] after the crash holds", mem.read(rt.RD[0]))
    print("queue as persisted:", q.contents(mem.read))
    for tid in range(rt.n):
        sched.tid = tid
        recover(rt)
    sched.tid = 0
    print("queue after recovery:", q.contents(mem.read))
    print("RD[0] after recovery:", mem.read(rt.RD[0]))
    print("dequeued:", q.dequeue(), q.dequeue(), q.dequeue())


if __name__ == "__main__":
    main()
