"""Mutable shared words (Load/Store/CAM) and idempotent Create/Retire."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any, Callable

from .logs import READ, RETIRE_MARK, UPDATE, Update, commit_value, fetch_value
from .pmem import BOT, PERSISTENT, Ref

if TYPE_CHECKING:
    from .descriptor import ThreadContext
    from .runtime import Runtime


class Mutable:
    """A shared word accessed through the current thread's logs.

    ``guard`` names the lock (by address) that protects the word in the
    original program; only the thunk-discipline validator looks at it.
    """

    __slots__ = ("rt", "addr", "guard")

    def __init__(self, rt: Runtime, init: Any = BOT, *, addr: int | None = None,
                 guard: int | None = None, kind: str = PERSISTENT) -> None:
        self.rt = rt
        self.addr = rt.memory.alloc(init, kind) if addr is None else addr
        self.guard = guard

    @classmethod
    def at(cls, rt: Runtime, addr: int, guard: int | None = None) -> Mutable:
        return cls(rt, addr=addr, guard=guard)

    def rebind(self, rt: Runtime) -> Mutable:
        """The same word seen through another runtime (a forked copy)."""
        m = object.__new__(type(self))
        m.rt, m.addr, m.guard = rt, self.addr, self.guard
        return m

    def load(self, ctx: ThreadContext | None = None) -> Any:
        ctx = ctx or self.rt.ctx()
        v = fetch_value(ctx, self.addr)
        ret, _ = commit_value(ctx, v, READ)
        if self.rt.events is not None:
            self.rt.observe("load", self.addr, self.guard, ctx.running)
        return ret

    def store(self, new: Any, ctx: ThreadContext | None = None) -> None:
        ctx = ctx or self.rt.ctx()
        old = fetch_value(ctx, self.addr)
        commit_value(ctx, Update(self.addr, old, new), UPDATE)
        if self.rt.events is not None:
            self.rt.observe("store", self.addr, self.guard, ctx.running)

    def cam(self, old: Any, new: Any, ctx: ThreadContext | None = None) -> None:
        ctx = ctx or self.rt.ctx()
        if self.load(ctx) != old:
            return
        ok = self.rt.memory.cas(self.addr, old, new)
        if ok and self.rt.events is not None:
            self.rt.observe("cam", self.addr, old, new)

    def direct_write(self, v: Any) -> None:
        """Initialisation backdoor: write and persist without any logging."""
        self.rt.memory.poke(self.addr, v)

    def peek(self) -> Any:
        return self.rt.memory.peek(self.addr)

    def __repr__(self) -> str:
        return f"Mutable(@{self.addr})"


def create(rt: Runtime, factory: Callable[..., Any], *args: Any, kind: str = PERSISTENT,
           ctx: ThreadContext | None = None, **kwargs: Any) -> Ref:
    """Allocate a block so that every helper of a thunk ends up with the same one."""
    ctx = ctx or rt.ctx()
    block = rt.heap.allocate(factory, *args, kind=kind, **kwargs)
    obj, first = commit_value(ctx, block.ref(), READ)
    if not first:
        rt.heap.free(block.ref())
    return obj


def retire(rt: Runtime, obj: Ref, ctx: ThreadContext | None = None) -> None:
    """Hand ``obj`` to exactly one thread's retire set.

    Inside a critical section the set is drained after the section is done.
    Outside one there is nobody to replay the call and nothing to wait for, so
    the block is reclaimed at once.
    """
    ctx = ctx or rt.ctx()
    _, first = commit_value(ctx, RETIRE_MARK, READ)
    if not first:
        return
    if ctx.log[READ] is None:
        rt.heap.free(obj)
        rt.observe("reclaim", obj, None)
    else:
        ctx.retset[obj] = None
