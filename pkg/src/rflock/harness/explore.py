"""Schedule exploration: depth-first over all choices within bounds, or seeded sampling.

Every nondeterministic decision of a run (which thread steps next, whether
to crash, how far each thread's write-backs got, which surviving value a
cell ends up with) goes through one ``choose(options, kind)`` call.  A run
is therefore fully described by the list of indices it picked, and the
depth-first explorer enumerates runs by replaying a prefix of that list and
trying the next untried index at its last position.
"""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Protocol

from ..pmem import Memory, PersistCounters
from .sched import CoopScheduler

log = logging.getLogger(__name__)

RUN, CRASH, PAUSE, END = "run", "crash", "pause", "end"


@dataclass
class Bounds:
    steps: int = 5000
    # None lifts the bound.  Switching away from a thread that could keep
    # running costs one preemption; picking the next thread after one
    # finishes or pauses is free.
    preemptions: int | None = 2
    crashes: int = 0
    pauses: int = 0
    # Preemptions allowed among recovering threads.  With 0 they recover one
    # after another in id order.
    recovery_preemptions: int = 0
    crash_at_end: bool = True


class Chooser(Protocol):
    def choose(self, options: list[Any], kind: str = "") -> Any: ...


class Nondeterminism(Exception):
    """A replayed prefix met a choice with fewer options than recorded."""


class DFSChooser:
    def __init__(self) -> None:
        self.prefix: list[int] = []
        self.trail: list[tuple[int, int]] = []

    def begin(self) -> None:
        self.trail = []

    def choose(self, options: list[Any], kind: str = "") -> Any:
        n = len(options)
        pos = len(self.trail)
        idx = self.prefix[pos] if pos < len(self.prefix) else 0
        if idx >= n:
            raise Nondeterminism(f"choice {pos} ({kind}) has {n} options, replay wants {idx}")
        self.trail.append((idx, n))
        return options[idx]

    def advance(self) -> bool:
        t = list(self.trail)
        while t and t[-1][0] + 1 >= t[-1][1]:
            t.pop()
        if not t:
            return False
        self.prefix = [i for i, _ in t[:-1]] + [t[-1][0] + 1]
        return True

    def path(self) -> list[int]:
        return [i for i, _ in self.trail]


class ReplayChooser(DFSChooser):
    def __init__(self, path: list[int]) -> None:
        super().__init__()
        self.prefix = list(path)


class RandomChooser:
    """Uniform over threads; crashes and pauses with small fixed probabilities.

    Crashes are offered at each step that changed memory.  Queue runs take a
    few hundred steps, so at the default rate crash points spread over the
    whole run and a little under half of the runs finish without a crash.
    """

    def __init__(self, rng: random.Random, crash_prob: float = 0.005, pause_prob: float = 0.01) -> None:
        self.rng = rng
        self.crash_prob = crash_prob
        self.pause_prob = pause_prob
        self.trail: list[tuple[int, int]] = []

    def begin(self) -> None:
        self.trail = []

    def choose(self, options: list[Any], kind: str = "") -> Any:
        idx = self._pick(options, kind)
        self.trail.append((idx, len(options)))
        return options[idx]

    def _pick(self, options: list[Any], kind: str) -> int:
        rng = self.rng
        if kind != "step":
            return rng.randrange(len(options))
        tags = [o[0] for o in options]
        if CRASH in tags and rng.random() < self.crash_prob:
            return tags.index(CRASH)
        if PAUSE in tags and rng.random() < self.pause_prob:
            return rng.choice([i for i, t in enumerate(tags) if t == PAUSE])
        plain = [i for i, t in enumerate(tags) if t in (RUN, END)]
        return rng.choice(plain) if plain else rng.randrange(len(options))

    def path(self) -> list[int]:
        return [i for i, _ in self.trail]


class World(Protocol):
    """One freshly built instance of a scenario, driven through a single run."""

    memory: Memory

    def threads(self) -> dict[int, Callable[[], Any]]: ...
    def pausable(self, tid: int) -> bool: ...
    def finish(self) -> list[str]: ...
    def fork(self, chooser: Any) -> World: ...
    def crash(self) -> None: ...
    def recovery_threads(self) -> dict[int, Callable[[], Any]]: ...
    def after_recovery(self) -> list[str]: ...


@dataclass
class RunResult:
    path: list[int]
    failures: list[str]
    crashes: int = 0
    stuck: bool = False
    paused: tuple[int, ...] = ()
    steps: int = 0
    counters: PersistCounters = field(default_factory=PersistCounters)
    world: Any = None


def execute(build: Callable[[Memory], World], chooser: Any, bounds: Bounds,
            branches: Callable[[RunResult], None] | None = None) -> RunResult:
    """Drive one run of a scenario under ``chooser``.

    With ``branches`` set, a crash is never chosen in this run.  Instead,
    wherever one could happen the world is forked and every crash outcome
    (write-back cuts, surviving values, recovery and its checks) is explored
    on the copy, each finished branch going to ``branches``; then the run
    carries on as if no crash happened.  Threads need not be replayed to
    reach each crash point, and every branch still reports the path that
    reproduces it under plain ``execute``.
    """
    mem = Memory(CoopScheduler(), chooser)
    world = build(mem)
    return _run(world, world.threads(), chooser, bounds, bounds.crashes, False, [], 0, branches)


def _run(world: World, bodies: dict[int, Callable[[], Any]], chooser: Any, bounds: Bounds,
         crashes_left: int, recovering: bool, base: list[int], crashes: int,
         branches: Callable[[RunResult], None] | None) -> RunResult:
    sched: CoopScheduler = world.memory.scheduler
    failures: list[str] = []
    paused: list[int] = []
    total = 0
    stuck = False
    while True:
        hook = None
        if branches is not None and crashes_left > 0:
            def hook(crash_idx: int, left: int = crashes_left) -> None:
                _crash_branches(world, chooser, crash_idx, bounds, left, base, crashes, branches)
        if recovering and crashes_left == 0 and bounds.recovery_preemptions == 0:
            # Nothing left to choose: each thread recovers to completion in id order.
            outcome, steps, errors = _run_in_order(world, bodies, bounds)
        else:
            for tid, body in bodies.items():
                sched.spawn(tid, body)
            outcome, steps = _drive(sched, world, chooser, bounds, crashes_left, recovering, paused, hook)
            errors = [f"thread {t.tid} raised {type(t.error).__name__}: {t.error}"
                      for t in sched.threads.values() if t.error is not None]
        total += steps
        failures += errors
        if outcome == CRASH:
            sched.kill_all()
            sched.tid = 0
            world.crash()
            crashes += 1
            crashes_left -= 1
            bodies = world.recovery_threads()
            recovering = True
            paused = []
            continue
        sched.kill_all()
        world.paused_tids = tuple(paused)
        # Counted before the checks: probes in the checks may be memoised.
        counters = world.memory.total_counters()
        if outcome == "stuck":
            stuck = True
            failures.append(f"no progress within {bounds.steps} steps")
        elif not errors:
            sched.tid = 0
            failures += world.after_recovery() if recovering else world.finish()
        break
    return RunResult(base + chooser.path(), failures, crashes, stuck, tuple(paused), total,
                     counters, world)


def _run_in_order(world: World, bodies: dict[int, Callable[[], Any]],
                  bounds: Bounds) -> tuple[str, int, list[str]]:
    mem = world.memory
    sched = mem.scheduler
    start = mem.step
    for tid in sorted(bodies):
        sched.tid = tid
        try:
            bodies[tid]()
        except Exception as exc:  # reported like a failing thread
            return END, mem.step - start, [f"thread {tid} raised {type(exc).__name__}: {exc}"]
        if mem.step - start > bounds.steps:
            return "stuck", mem.step - start, []
    return END, mem.step - start, []


def _crash_branches(world: World, outer: Any, crash_idx: int, bounds: Bounds, crashes_left: int,
                    base: list[int], crashes: int,
                    branches: Callable[[RunResult], None]) -> None:
    prefix = base + outer.path() + [crash_idx]
    sub = DFSChooser()
    while True:
        sub.begin()
        w = world.fork(sub)
        w.memory.scheduler.tid = 0
        w.crash()
        branches(_run(w, w.recovery_threads(), sub, bounds, crashes_left - 1, True,
                      prefix, crashes + 1, branches))
        if not sub.advance():
            return


def _drive(sched: CoopScheduler, world: World, chooser: Any, bounds: Bounds,
           crashes_left: int, recovering: bool, paused: list[int],
           hook: Callable[[int], None] | None = None) -> tuple[str, int]:
    mem = world.memory
    budget = bounds.recovery_preemptions if recovering else bounds.preemptions
    pauses = 0 if recovering else bounds.pauses - len(paused)
    fixed_order = recovering and budget == 0
    cur: int | None = None
    steps = 0
    seen_mutations = -1
    while True:
        runnable = sched.runnable()
        if not runnable:
            if crashes_left > 0 and bounds.crash_at_end and not recovering and mem.mutations != seen_mutations:
                if hook is not None:
                    hook(1)
                    chooser.choose([(END,)], "step")
                elif chooser.choose([(END,), (CRASH,)], "step")[0] == CRASH:
                    return CRASH, steps
            return END, steps
        if any(t.error is not None for t in sched.threads.values()):
            return END, steps
        if steps >= bounds.steps:
            return "stuck", steps
        if fixed_order:
            options: list[tuple] = [(RUN, cur if cur in runnable else min(runnable))]
        elif cur in runnable:
            options = [(RUN, cur)]
            if budget is None or budget > 0:
                options += [(RUN, t) for t in runnable if t != cur]
        else:
            options = [(RUN, t) for t in runnable]
        if pauses > 0:
            options += [(PAUSE, t) for t in runnable if world.pausable(t)]
        # A crash is always the last option, so dropping it keeps the other
        # indices, and paths recorded with inline branches replay unchanged.
        crash_here = crashes_left > 0 and steps > 0 and mem.mutations != seen_mutations
        if crash_here:
            seen_mutations = mem.mutations
            if hook is not None:
                hook(len(options))
                choice = chooser.choose(options, "step")
            else:
                options.append((CRASH,))
                choice = chooser.choose(options, "step")
        else:
            choice = options[0] if len(options) == 1 else chooser.choose(options, "step")
        tag = choice[0]
        if tag == CRASH:
            return CRASH, steps
        if tag == PAUSE:
            sched.threads[choice[1]].paused = True
            paused.append(choice[1])
            pauses -= 1
            continue
        tid = choice[1]
        if cur in runnable and tid != cur and budget is not None and not fixed_order:
            budget -= 1
        cur = tid
        sched.step(tid)
        steps += 1


@dataclass
class Exploration:
    schedules: int = 0
    failures: int = 0
    stuck: int = 0
    crashed: int = 0
    exhausted: bool = True
    sampled: bool = False
    seed: int | None = None
    elapsed: float = 0.0
    counters: PersistCounters = field(default_factory=PersistCounters)
    # Sections whose persistence cost was recorded, over crash-free runs.
    sections: int = 0
    failed: list[RunResult] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def add(self, r: RunResult, keep: int) -> None:
        self.schedules += 1
        self.crashed += r.crashes > 0
        self.stuck += r.stuck
        c = self.counters
        c.pwb += r.counters.pwb
        c.pfence += r.counters.pfence
        c.psync += r.counters.psync
        if r.failures:
            self.failures += 1
            if len(self.failed) < keep:
                self.failed.append(r)


def explore(build: Callable[[Memory], World], bounds: Bounds, *, mode: str = "exhaustive",
            seed: int = 0, runs: int = 1000, max_schedules: int = 200_000, keep: int = 5,
            on_run: Callable[[RunResult], None] | None = None) -> Exploration:
    """Explore runs of ``build``'s scenario.

    ``exhaustive`` enumerates every choice sequence within ``bounds``; if that
    exceeds ``max_schedules`` the remainder is covered by ``runs`` seeded
    random runs and a warning is recorded.  ``random`` goes straight to
    sampling.
    """
    ex = Exploration(seed=seed)
    t0 = time.perf_counter()
    if mode not in ("exhaustive", "random"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exhaustive":
        dfs = DFSChooser()

        def record(r: RunResult) -> None:
            ex.add(r, keep)
            if on_run is not None:
                on_run(r)

        while True:
            dfs.begin()
            record(execute(build, dfs, bounds, record if bounds.crashes else None))
            if not dfs.advance():
                break
            if ex.schedules >= max_schedules:
                msg = f"state space exceeds {max_schedules} schedules; sampling {runs} random runs instead"
                log.warning(msg)
                ex.warnings.append(msg)
                ex.exhausted = False
                mode = "random"
                break
    if mode == "random":
        ex.sampled = True
        ex.exhausted = False
        for i in range(runs):
            rng = random.Random((seed << 32) ^ i)
            ch = RandomChooser(rng)
            ch.begin()
            r = execute(build, ch, bounds)
            ex.add(r, keep)
            if on_run is not None:
                on_run(r)
    ex.elapsed = time.perf_counter() - t0
    return ex


def replay(build: Callable[[Memory], World], path: list[int], bounds: Bounds) -> RunResult:
    """Re-run one recorded choice sequence."""
    ch = ReplayChooser(path)
    ch.begin()
    return execute(build, ch, bounds)
