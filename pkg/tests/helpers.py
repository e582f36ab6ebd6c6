"""Run small library-level programs under every interleaving."""

from __future__ import annotations

from typing import Any, Callable

from rflock.harness.explore import Bounds, explore
from rflock.pmem import Memory
from rflock.runtime import Runtime


class ProgramWorld:
    """``setup(rt)`` returns state; ``bodies(rt, state)`` the thread bodies; ``check`` the verdict."""

    def __init__(self, mem: Memory, n: int, setup, bodies, check) -> None:
        self.memory = mem
        self.rt = Runtime(n, mem)
        self.rt.events = []
        self.state = setup(self.rt)
        self._bodies = bodies
        self._check = check
        self.results: dict[int, Any] = {}
        self.paused_tids = ()

    def threads(self) -> dict[int, Callable[[], Any]]:
        def wrap(tid, fn):
            def run():
                self.results[tid] = fn()
            return run
        return {t: wrap(t, f) for t, f in self._bodies(self.rt, self.state).items()}

    def pausable(self, tid: int) -> bool:
        return False

    def finish(self) -> list[str]:
        self.memory.scheduler.tid = 0
        return list(self._check(self.rt, self.state, self.results) or [])

    def crash(self) -> None:
        raise AssertionError("no crashes here")


def every_interleaving(n: int, setup, bodies, check, preemptions: int | None = None):
    """Explore all schedules; returns the exploration."""
    return explore(lambda mem: ProgramWorld(mem, n, setup, bodies, check),
                   Bounds(preemptions=preemptions, crashes=0), max_schedules=50_000)
