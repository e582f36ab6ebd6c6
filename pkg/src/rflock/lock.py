"""Lock-free try-locks with helping, nested release, and crash recovery."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any, NamedTuple

from .descriptor import Descriptor, Thunk, ThreadContext, create_descr, retire_descr, run_descr
from .logs import LOCK, LockRec, commit_value, entries
from .mutable import Mutable
from .pmem import BOT, STATIC

if TYPE_CHECKING:
    from .runtime import Runtime


class LockWord(NamedTuple):
    """The single CAS-able word a lock holds: who holds or last held it, and whether it is held."""

    descr: Any
    locked: bool


UNLOCKED = LockWord(BOT, False)


class Lock(Mutable):
    """A mutable word holding a :class:`LockWord`.

    Locks live in volatile memory: a crash releases every lock, which is what
    recovery expects since no thread survives to hold one.
    """

    __slots__ = ()

    def __init__(self, rt: Runtime, *, addr: int | None = None) -> None:
        super().__init__(rt, UNLOCKED, addr=addr, kind=STATIC)

    def held(self) -> bool:
        return self.peek().locked


def _done(rt: Runtime, d: Descriptor, ctx: ThreadContext) -> bool:
    return Mutable.at(rt, d.done).load(ctx) is True


def try_lock(rt: Runtime, lock: Lock, thunk: Thunk, ctx: ThreadContext | None = None) -> bool:
    """Acquire ``lock`` and run ``thunk`` under it, or help the holder and fail.

    Returns the thunk's result when our own section ran, False when the lock
    was held by someone else (whose section we completed instead).
    """
    ctx = ctx or rt.ctx()
    heap = rt.heap
    cl: LockWord = lock.load(ctx)
    rt.observe("trylock", lock.addr, cl)
    if not cl.locked or heap.deref(cl.descr).owner == ctx.wth:
        ref = create_descr(rt, thunk, lock.addr, ctx)
        descr: Descriptor = heap.deref(ref)
        mine = LockWord(ref, True)
        rt.observe("cam-attempt", lock.addr, ref.id)
        lock.cam(cl, mine, ctx)
        cl = lock.load(ctx)
        if _done(rt, descr, ctx) or cl == mine:
            result = run_descr(rt, ref, ctx)
            unlock(rt, lock, mine, ctx)
            retire_descr(rt, ref, ctx)
            return result
        if descr.outermost and ctx.wth == ctx.tid:
            # The section never started; the next one must not nest inside it.
            rt.memory.write(rt.topD[ctx.tid], BOT)
            rt.memory.write(rt.topL[ctx.tid], BOT)
        retire_descr(rt, ref, ctx)
    if cl.descr is BOT:
        return False
    run_descr(rt, cl.descr, ctx)
    unlock(rt, lock, cl, ctx)
    return False


def unlock(rt: Runtime, lock: Lock, lw: LockWord, ctx: ThreadContext | None = None) -> None:
    """Release ``lock`` as installed with ``lw``.

    Once the outermost section is done, every lock recorded in its lock log
    is released together with the outer lock.  While it is still running, a
    nested release only records the lock for that final mass release.
    """
    ctx = ctx or rt.ctx()
    heap = rt.heap
    d: Descriptor = heap.deref(lw.descr)
    top_ref = lw.descr if d.outermost else d.topdescr
    top: Descriptor = heap.deref(top_ref)
    if not _done(rt, top, ctx):
        commit_value(ctx, LockRec(lock.addr, lw.descr), LOCK)
        return
    for rec in entries(rt, top.logs[LOCK]):
        Mutable.at(rt, rec.lock).cam(LockWord(rec.descr, True), LockWord(rec.descr, False), ctx)
    if d.outermost:
        lock.cam(lw, LockWord(lw.descr, False), ctx)
        if top.owner == ctx.tid:
            rt.memory.write(rt.topD[ctx.tid], BOT)
            rt.memory.write(rt.topL[ctx.tid], BOT)
    elif d.toplock is not BOT:
        Mutable.at(rt, d.toplock).cam(LockWord(top_ref, True), LockWord(top_ref, False), ctx)


def recover(rt: Runtime, ctx: ThreadContext | None = None) -> None:
    """Re-apply every update log published in ``RD``, then clear our own slot.

    Safe to run by several threads at once and any number of times: each
    replayed CAS succeeds at most once because cells are never reused.
    """
    ctx = ctx or rt.ctx()
    mem, heap = rt.memory, rt.heap
    skip = "skip-recover-step" in rt.faults
    for p in range(rt.n):
        h = mem.read(rt.RD[p])
        if h is BOT:
            continue
        log = heap.deref(h)
        for i, e in enumerate(entries(rt, log)):
            if skip and i == 0:
                continue
            mem.cas(e.target, e.old, e.new)
            mem.pwb(e.target)
        mem.psync()
    rd = rt.RD[ctx.tid]
    mem.write(rd, BOT)
    mem.pwb(rd)
    mem.psync()


__all__ = ["LockWord", "UNLOCKED", "Lock", "try_lock", "unlock", "recover"]
