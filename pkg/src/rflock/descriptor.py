"""Critical-section descriptors: creation, execution with deferred updates, retirement."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable

from .logs import LOCK, READ, UPDATE, Log
from .mutable import create, retire
from .pmem import BOT, VOLATILE, Block, PersistCounters, Ref

if TYPE_CHECKING:
    from .runtime import Runtime

Thunk = Callable[[], bool]


@dataclass
class PersistCost:
    """Persistence instructions one thread spent finishing one outermost section."""

    tid: int
    descr: int
    updates: int
    counters: PersistCounters


class ThreadContext:
    """Volatile per-thread state: current logs, cursors, retire set, ``wth``."""

    def __init__(self, rt: Runtime, tid: int) -> None:
        self.rt = rt
        self.tid = tid
        self.log: list[Log | None] = [None, None, None]
        self.pos = [0, 0, 0]
        # Winning values observed at positions 0..pos-1, per log kind.
        self.seen: list[list[Any]] = [[], [], []]
        self.retset: dict[Ref, None] = {}
        self.wth = tid
        # Outermost descriptor whose thunk is executing, if any.
        self.running: int | None = None
        self.top_ref: Ref | None = None

    @property
    def in_critical_section(self) -> bool:
        return self.log[READ] is not None


@dataclass
class Snapshot:
    log: list[Log | None]
    pos: list[int]
    seen: list[list[Any]]
    retset: dict[Ref, None]
    running: int | None
    top_ref: Ref | None


def save_logs(ctx: ThreadContext) -> Snapshot:
    """Park the current logs, cursors and retire set; start with a fresh set."""
    snap = Snapshot(list(ctx.log), list(ctx.pos), ctx.seen, ctx.retset, ctx.running, ctx.top_ref)
    ctx.retset = {}
    return snap


def restore_logs(ctx: ThreadContext, snap: Snapshot) -> None:
    ctx.log = list(snap.log)
    ctx.pos = list(snap.pos)
    ctx.seen = snap.seen
    ctx.retset = snap.retset
    ctx.running = snap.running
    ctx.top_ref = snap.top_ref


@dataclass(eq=False)
class Descriptor(Block):
    logs: tuple[Log, Log, Log] = field(default=None)  # type: ignore[assignment]
    thunk: Thunk | None = None
    done: int = 0
    owner: int = 0
    topdescr: Any = BOT
    toplock: Any = BOT

    @classmethod
    def build(cls, alloc, logs, thunk, owner, topdescr, toplock) -> Descriptor:
        return cls(logs=logs, thunk=thunk, done=alloc(False), owner=owner,
                   topdescr=topdescr, toplock=toplock)

    @property
    def outermost(self) -> bool:
        return self.topdescr is BOT


def create_descr(rt: Runtime, thunk: Thunk, lock: int, ctx: ThreadContext | None = None) -> Ref:
    """New descriptor for ``thunk`` guarded by the lock at address ``lock``.

    An outermost section gets fresh logs; a nested one shares the logs of the
    outermost section it runs under.
    """
    ctx = ctx or rt.ctx()
    mem, heap = rt.memory, rt.heap
    q = ctx.tid
    top = mem.read(rt.topD[q]) if ctx.wth == q else None
    outermost = top is BOT
    if outermost:
        logs = (
            heap.deref(create(rt, Log.build, READ, rt.log_size, kind=VOLATILE, ctx=ctx)),
            heap.deref(create(rt, Log.build, UPDATE, rt.log_size, ctx=ctx)),
            heap.deref(create(rt, Log.build, LOCK, rt.log_size, ctx=ctx)),
        )
        topdescr = toplock = BOT
    else:
        if top is None:
            top = mem.read(rt.topD[ctx.wth])
        toplock = mem.read(rt.topL[ctx.wth])
        if top is BOT:
            # The helped section already finished; whatever we build here loses
            # the read-log slot to the descriptor its owner committed.
            logs, topdescr, toplock = tuple(ctx.log), ctx.top_ref, BOT
        else:
            logs, topdescr = heap.deref(top).logs, top
    ref = create(rt, Descriptor.build, logs, thunk, ctx.wth, topdescr, toplock, ctx=ctx)
    if outermost:
        mem.write(rt.topD[q], ref)
        mem.write(rt.topL[q], lock)
    return ref


def run_descr(rt: Runtime, ref: Ref, ctx: ThreadContext | None = None) -> bool:
    """Run a descriptor's thunk, then persist and apply its deferred updates.

    A thread reaching a section owned by someone else switches ``wth`` to the
    owner and runs the outermost section of that owner from the start of its
    logs; its own logs are parked and restored afterwards.
    """
    ctx = ctx or rt.ctx()
    mem, heap = rt.memory, rt.heap
    descr: Descriptor = heap.deref(ref)
    prevwth = None
    snap = None
    if descr.owner != ctx.wth or descr.outermost:
        if descr.owner != ctx.wth:
            prevwth = ctx.wth
            ctx.wth = descr.owner
        snap = save_logs(ctx)
        if not descr.outermost:
            rt.observe("redirect", descr.id, descr.topdescr.id)
            ref = descr.topdescr
            descr = heap.deref(ref)
        ctx.log = list(descr.logs)
        ctx.pos = [0, 0, 0]
        ctx.seen = [[], [], []]
        ctx.running = descr.id
        ctx.top_ref = ref
    rt.observe("run-thunk", descr.id, ctx.wth)

    result = bool(descr.thunk())

    if descr.outermost:
        before = mem.counters.get(ctx.tid)
        before = before.copy() if before is not None else None
        installed, full = None, False
        if result:
            installed, full = _persist_and_apply(rt, descr, ctx)
        mem.cas(descr.done, False, True)
        for obj in list(ctx.retset):
            heap.free(obj)
            rt.observe("reclaim", obj, mem.peek(descr.done))
        ctx.retset.clear()
        if installed is not None:
            rd = rt.RD[ctx.wth]
            if "plain-rd-write" in rt.faults:
                mem.write(rd, BOT)
            else:
                mem.cas(rd, installed, BOT)
            mem.pwb(rd)
            mem.pfence()
            if full:
                after = mem.counters[ctx.tid]
                delta = after - before if before is not None else after.copy()
                rt.persist_costs.append(_cost(rt, ctx, descr, delta))

    if snap is not None:
        restore_logs(ctx, snap)
    if prevwth is not None:
        ctx.wth = prevwth
    return result


def _cost(rt, ctx, descr, delta) -> PersistCost:
    return PersistCost(ctx.tid, descr.id, len(ctx.seen[UPDATE]), delta)


def _persist_and_apply(rt: Runtime, descr: Descriptor, ctx: ThreadContext) -> tuple[Ref | None, bool]:
    """Persist the update log and RD entry, then apply the updates in order.

    Returns the installed log handle (None when the section turned out to be
    finished by another thread before we could publish it) and whether every
    update was applied by us rather than cut short by a finished section.
    """
    mem = rt.memory
    upd = ctx.log[UPDATE]
    updates = ctx.seen[UPDATE]
    faults = rt.faults
    full = True
    if "apply-before-persist" in faults:
        full = _apply(mem, descr, updates)
    for i in range(len(updates)):
        mem.pwb(upd.slots[i])
    mem.pfence()
    rd = rt.RD[ctx.wth]
    mine = upd.ref()
    if "plain-rd-write" in faults:
        mem.write(rd, mine)
    else:
        # A late helper must not overwrite the entry of a newer section of
        # the same owner; once ours is done the slot is no longer ours to set.
        while True:
            cur = mem.read(rd)
            if cur == mine:
                break
            if mem.read(descr.done) is True:
                return None, False
            if mem.cas(rd, cur, mine):
                break
    if "skip-rd-pwb" not in faults:
        mem.pwb(rd)
    mem.psync()
    if "apply-before-persist" not in faults:
        full = _apply(mem, descr, updates)
    return mine, full


def _apply(mem, descr: Descriptor, updates) -> bool:
    full = True
    for e in updates:
        if mem.read(descr.done) is True:
            full = False
            break
        mem.cas(e.target, e.old, e.new)
        mem.pwb(e.target)
    mem.psync()
    return full


def retire_descr(rt: Runtime, ref: Ref, ctx: ThreadContext | None = None) -> None:
    """Retire a descriptor and, if it owns them, its three logs."""
    ctx = ctx or rt.ctx()
    descr: Descriptor = rt.heap.deref(ref)
    if descr.outermost:
        for lg in descr.logs:
            retire(rt, lg.ref(), ctx)
    retire(rt, ref, ctx)
