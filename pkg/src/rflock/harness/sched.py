"""Virtual threads on greenlets, and a real-thread backend for smoke runs."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any, Callable

from greenlet import GreenletExit, greenlet

from ..pmem import Scheduler


class StepLimit(Exception):
    """A run exceeded its step bound."""


@dataclass
class VThread:
    tid: int
    body: Callable[[], Any]
    glet: greenlet | None = None
    started: bool = False
    finished: bool = False
    paused: bool = False
    result: Any = None
    error: BaseException | None = None
    steps: int = 0
    # Operation the thread is about to perform, reported at its last point.
    next_op: tuple[str, int | None] = ("start", None)


@dataclass
class CoopScheduler(Scheduler):
    """Runs one virtual thread at a time; every memory primitive yields first.

    Code executed by the controller itself (setup, recovery, checks) runs
    with ``tid`` set explicitly and never yields.
    """

    tid: int = 0
    threads: dict[int, VThread] = field(default_factory=dict)
    _main: greenlet | None = None
    _inside: bool = False

    def current_tid(self) -> int:
        return self.tid

    def point(self, op: str, addr: int | None) -> None:
        if not self._inside:
            return
        t = self.threads[self.tid]
        t.steps += 1
        t.next_op = (op, addr)
        self._main.switch()

    def spawn(self, tid: int, body: Callable[[], Any]) -> VThread:
        t = self.threads[tid] = VThread(tid, body)
        return t

    def runnable(self) -> list[int]:
        return [t.tid for t in self.threads.values() if not t.finished and not t.paused]

    def step(self, tid: int) -> VThread:
        """Let ``tid`` run up to (not including) its next memory primitive."""
        t = self.threads[tid]
        if t.glet is None:
            t.glet = greenlet(self._wrap(t))
        self._main = greenlet.getcurrent()
        self.tid = tid
        self._inside = True
        try:
            t.glet.switch()
        finally:
            self._inside = False
        if t.glet.dead:
            t.finished = True
        return t

    def _wrap(self, t: VThread) -> Callable[[], None]:
        def run() -> None:
            try:
                t.result = t.body()
            except GreenletExit:
                raise
            except BaseException as exc:  # reported by the controller
                t.error = exc
        return run

    def kill_all(self) -> None:
        for t in self.threads.values():
            if t.glet is not None and not t.glet.dead:
                self._inside = False
                t.glet.throw(GreenletExit)
        self.threads.clear()


class NativeScheduler(Scheduler):
    """Thread ids for real OS threads; yields nothing."""

    def __init__(self) -> None:
        self._local = threading.local()

    def current_tid(self) -> int:
        return getattr(self._local, "tid", 0)

    def bind(self, tid: int) -> None:
        self._local.tid = tid

    def point(self, op: str, addr: int | None) -> None:
        pass


def run_native(sched: NativeScheduler, bodies: dict[int, Callable[[], Any]],
               timeout: float = 60.0) -> dict[int, Any]:
    """Run each body on its own OS thread; re-raise the first error."""
    results: dict[int, Any] = {}
    errors: list[BaseException] = []

    def target(tid: int, body: Callable[[], Any]) -> None:
        sched.bind(tid)
        try:
            results[tid] = body()
        except BaseException as exc:
            errors.append(exc)

    threads = [threading.Thread(target=target, args=(tid, b), daemon=True) for tid, b in bodies.items()]
    for th in threads:
        th.start()
    for th in threads:
        th.join(timeout)
        if th.is_alive():
            raise TimeoutError("native run did not finish")
    if errors:
        raise errors[0]
    return results
