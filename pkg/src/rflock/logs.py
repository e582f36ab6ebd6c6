"""Read, update and lock logs, and the two routines that drive them.

A log is a fixed array of write-once slots.  Every thread executing the same
critical section walks the same log with its own cursor and tries to commit
its value at the cursor with a CAS from ``BOT``; whichever CAS lands first
decides the value everybody continues with.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, NamedTuple

from .pmem import BOT, Block, Ref

if TYPE_CHECKING:
    from .descriptor import ThreadContext
    from .runtime import Runtime

READ, UPDATE, LOCK = 0, 1, 2
KIND_NAMES = ("READ", "UPDATE", "LOCK")

DEFAULT_LOG_SIZE = 64
RETIRE_MARK = 1


class Update(NamedTuple):
    target: int
    old: Any
    new: Any


class LockRec(NamedTuple):
    lock: int
    descr: Ref


class _LoggedBottom:
    """Stands in for a logged ``BOT`` value so it cannot be mistaken for an empty slot."""

    def __repr__(self) -> str:
        return "<logged ⊥>"

    def __reduce__(self):
        return "LOGGED_BOT"

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self


LOGGED_BOT = _LoggedBottom()


class LogOverflow(Exception):
    """A thunk committed more entries than the log has slots."""


@dataclass(eq=False)
class Log(Block):
    slots: range = range(0)
    kind: int = READ

    @classmethod
    def build(cls, alloc, kind: int, size: int = DEFAULT_LOG_SIZE) -> Log:
        return cls(slots=alloc.range(size, BOT), kind=kind)

    @property
    def size(self) -> int:
        return len(self.slots)


def commit_value(ctx: ThreadContext, val: Any, kind: int) -> tuple[Any, bool]:
    """Commit ``val`` at the context's cursor in its ``kind`` log.

    Returns the value that won the slot and whether it was ours.  Outside a
    critical section there is no log: reads pass their value through and the
    other kinds report ``BOT``.
    """
    log = ctx.log[kind]
    if log is None:
        return (val if kind == READ else BOT), True
    pos = ctx.pos[kind]
    if pos >= log.size:
        raise LogOverflow(f"{KIND_NAMES[kind]} log of {log.size} slots exhausted")
    mem = ctx.rt.memory
    addr = log.slots[pos]
    first = mem.cas(addr, BOT, LOGGED_BOT if val is BOT else val)
    # A winning CAS already tells us the slot's content.
    winner = val if first else mem.read(addr)
    if winner is LOGGED_BOT:
        winner = BOT
    ctx.pos[kind] = pos + 1
    ctx.seen[kind].append(winner)
    return winner, first


def fetch_value(ctx: ThreadContext, target: int) -> Any:
    """Current value of ``target`` as seen from inside the running thunk.

    A store made earlier by the same thunk is still only in the update log,
    so the last such entry below the cursor wins over shared memory.
    """
    if ctx.log[UPDATE] is not None:
        entries = ctx.seen[UPDATE]
        for i in range(len(entries) - 1, -1, -1):
            e = entries[i]
            if e.target == target:
                return e.new
    return ctx.rt.memory.read(target)


def entries(rt: Runtime, log: Log, read=None) -> list[Any]:
    """Committed prefix of a log, read slot by slot until the first ``BOT``."""
    read = read or rt.memory.read
    out = []
    for addr in log.slots:
        v = read(addr)
        if v is BOT:
            break
        out.append(BOT if v is LOGGED_BOT else v)
    return out


def dump(rt: Runtime, log: Log) -> list[str]:
    """Debug rendering, one ``log kind=... pos=... entry=...`` line per slot."""
    return [f"log kind={KIND_NAMES[log.kind]} pos={i} entry={e!r}"
            for i, e in enumerate(entries(rt, log, rt.memory.peek))]
