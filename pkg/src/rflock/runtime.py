"""Shared state of one RFlock instance: memory, per-thread directories, contexts."""

from __future__ import annotations

from typing import Any, Iterable

from .descriptor import PersistCost, ThreadContext
from .logs import DEFAULT_LOG_SIZE
from .pmem import BOT, PERSISTENT, STATIC, Memory, Scheduler

FAULTS = frozenset({"skip-recover-step", "skip-rd-pwb", "apply-before-persist", "plain-rd-write"})


class Runtime:
    """Everything a thread needs to run critical sections on one memory.

    ``RD`` lives in persistent memory; ``topD``/``topL`` are volatile and
    reset by a crash, as are all thread contexts.
    """

    def __init__(self, n_threads: int, memory: Memory | None = None,
                 log_size: int = DEFAULT_LOG_SIZE, faults: Iterable[str] = ()) -> None:
        self.memory = memory if memory is not None else Memory()
        self.n = n_threads
        self.log_size = log_size
        self.faults = frozenset(faults)
        unknown = self.faults - FAULTS
        if unknown:
            raise ValueError(f"unknown fault(s): {sorted(unknown)}")
        mem = self.memory
        self.RD = [mem.alloc(BOT, PERSISTENT) for _ in range(n_threads)]
        self.topD = [mem.alloc(BOT, STATIC) for _ in range(n_threads)]
        self.topL = [mem.alloc(BOT, STATIC) for _ in range(n_threads)]
        self.contexts: dict[int, ThreadContext] = {}
        # Optional instrumentation: (kind, tid, *data) tuples.
        self.events: list[tuple[Any, ...]] | None = None
        self.persist_costs: list[PersistCost] = []

    @property
    def heap(self):
        return self.memory.heap

    def ctx(self, tid: int | None = None) -> ThreadContext:
        if tid is None:
            tid = self.memory.scheduler.current_tid()
        c = self.contexts.get(tid)
        if c is None:
            c = self.contexts[tid] = ThreadContext(self, tid)
        return c

    def observe(self, kind: str, *data: Any) -> None:
        if self.events is not None:
            self.events.append((kind, self.memory.scheduler.current_tid(), *data))

    def fork(self, scheduler: Scheduler | None = None, chooser: Any = None) -> Runtime:
        """A runtime over a forked memory, with no thread contexts or events."""
        rt = Runtime.__new__(Runtime)
        rt.__dict__.update(self.__dict__)
        rt.memory = self.memory.fork(scheduler, chooser)
        rt.contexts = {}
        rt.events = None
        rt.persist_costs = []
        return rt

    def crash(self) -> None:
        self.memory.crash()
        self.contexts.clear()

    def roots(self) -> list[int]:
        return list(self.RD)
