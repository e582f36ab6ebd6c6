"""Watch a blocked thread finish the lock holder's section instead of waiting.

Thread 0 takes the lock and is frozen before its thunk runs.  Thread 1 then
calls try_lock on the same lock: it runs thread 0's thunk, applies its
updates, releases the lock for it and returns false for its own attempt.
"""

from __future__ import annotations

from rflock.descriptor import create_descr
from rflock.harness.sched import CoopScheduler
from rflock.lock import Lock, LockWord, try_lock
from rflock.mutable import Mutable
from rflock.pmem import Memory
from rflock.runtime import Runtime


def main() -> None:
    sched = CoopScheduler()
    rt = Runtime(2, Memory(sched))
    rt.events = []
    lock = Lock(rt)
    cell = Mutable(rt, [], guard=lock.addr)

    def owner() -> bool:
        cell.store(cell.load() + ["written by thread 0's section"])
        return True

    # Thread 0 installs its section in the lock and then stops for good.
    descr = create_descr(rt, owner, lock.addr, rt.ctx(0))
    lock.direct_write(LockWord(descr, True))
    print("lock held by", lock.peek())

    sched.tid = 1
    mine = try_lock(rt, lock, lambda: cell.store(cell.load() + ["thread 1"]) or True)
    print("thread 1's own try_lock returned", mine)
    print("cell now holds", cell.peek())
    print("lock afterwards", lock.peek())
    print("events seen by thread 1:")
    for ev in rt.events:
        if ev[1] == 1 and ev[0] in ("trylock", "run-thunk", "reclaim"):
            print("  ", ev)

    print("retrying thread 1:", try_lock(rt, lock, lambda: cell.store(cell.load() + ["thread 1"]) or True))
    print("cell now holds", cell.peek())


if __name__ == "__main__":
    main()
