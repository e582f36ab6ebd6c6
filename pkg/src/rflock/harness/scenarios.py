"""Built-in scenarios: the programs the explorer runs and the checks applied to each run."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

from ..apps.bank import NestedBank
from ..apps.queue import EMPTYQUEUE, Node, RQueue
from ..descriptor import Descriptor, create_descr, run_descr
from ..lock import Lock, LockWord, recover, try_lock, unlock
from ..logs import LOCK, entries
from ..mutable import Mutable
from ..pmem import BOT, PERSISTENT, Memory
from ..runtime import Runtime
from .discipline import validate_thunk_discipline
from .explore import Bounds, Exploration, RunResult, explore
from .history import ANY, BankOracle, History, QueueOracle, check_durable_linearizability
from .sched import CoopScheduler

SENTINEL = "probe"


# --------------------------------------------------------------------- common


class BaseWorld:
    """State shared by all scenario worlds: runtime, history, common checks."""

    n_threads = 2
    # Extra thread slots for work the controller does after the threads stop.
    spare_threads = 0

    def __init__(self, mem: Memory, faults: Sequence[str] = (), log_size: int = 64) -> None:
        self.memory = mem
        self.rt = Runtime(self.n_threads + self.spare_threads, mem, log_size=log_size, faults=faults)
        self.rt.events = []
        self.history = History()
        # Threads the explorer stopped for good; set before the final checks.
        self.paused_tids: tuple[int, ...] = ()

    # hooks the explorer calls -------------------------------------------

    def fork(self, chooser: Any) -> BaseWorld:
        """A copy of this world on its own scheduler, for trying a crash here.

        Only post-crash work runs in the copy, so no thread context carries
        over; events, costs and the history are copied so checks see them.
        """
        w = copy.copy(self)
        rt = self.rt.fork(CoopScheduler(), chooser)
        rt.events = list(self.rt.events) if self.rt.events is not None else None
        rt.persist_costs = list(self.rt.persist_costs)
        w.rt, w.memory = rt, rt.memory
        w.history = self.history.copy()
        w.paused_tids = ()
        w._rebind(rt)
        return w

    def _rebind(self, rt: Runtime) -> None:
        """Point app objects held by the world at ``rt``."""

    def threads(self) -> dict[int, Callable[[], Any]]:
        raise NotImplementedError

    def pausable(self, tid: int) -> bool:
        return False

    def crash(self) -> None:
        self.history.crash()
        self.rt.crash()

    def recovery_threads(self) -> dict[int, Callable[[], Any]]:
        rt = self.rt
        return {tid: (lambda: recover(rt)) for tid in range(rt.n)}

    def finish(self) -> list[str]:
        return []

    def after_recovery(self) -> list[str]:
        return []

    # shared checks --------------------------------------------------------

    def app_roots(self) -> list[int]:
        return []

    def roots(self) -> list[int]:
        return self.app_roots() + self.rt.roots()

    def hygiene(self, quiescent: bool = True) -> list[str]:
        """Allocator bookkeeping: balance, no double free, nothing freed early, no leak."""
        heap = self.rt.heap
        errs = list(heap.violations)
        for ev in self.rt.events:
            if ev[0] == "reclaim" and ev[3] is False:
                errs.append(f"block {ev[2]!r} reclaimed before its section was done")
        if not heap.balanced():
            errs.append(f"allocation balance off: {heap.allocs} allocs, {heap.frees} frees, "
                        f"{heap.swept} swept, {heap.dropped} dropped, {len(heap.live)} live")
        reach = heap.reachable(self.roots())
        dangling = sorted(b for b in reach if b in heap.freed)
        if dangling:
            errs.append(f"reachable blocks already reclaimed: {dangling}")
        if quiescent:
            leaked = sorted(heap.live - reach)
            if leaked:
                errs.append(f"unreachable blocks never reclaimed: {leaked}")
        return errs

    def quiescent_state(self) -> list[str]:
        """Directories empty and every lock released once all threads finished."""
        mem, rt = self.memory, self.rt
        errs = []
        for p in range(rt.n):
            if mem.peek(rt.RD[p]) is not BOT:
                errs.append(f"RD[{p}] still set")
            if mem.peek(rt.topD[p]) is not BOT or mem.peek(rt.topL[p]) is not BOT:
                errs.append(f"topD/topL[{p}] still set")
        for lk in self.locks():
            if lk.peek().locked:
                errs.append(f"lock {lk.addr} still held")
        return errs

    def locks(self) -> list[Lock]:
        return []

    def cost_errors(self) -> list[str]:
        errs = []
        for c in self.rt.persist_costs:
            want = (2 * c.updates + 2, 2, 2)
            if c.counters.as_tuple() != want:
                errs.append(f"section {c.descr}: {c.updates} updates cost "
                            f"pwb/pfence/psync={c.counters.as_tuple()}, expected {want}")
        return errs

    def discipline_errors(self) -> list[str]:
        return [str(v) for v in validate_thunk_discipline(self.rt.events)]

    def persistent_snapshot(self) -> dict[int, Any]:
        """Value and persisted value of every materialised persistent cell."""
        mem = self.memory
        out = {}
        for a, c in mem.cells.items():
            if c.kind != PERSISTENT:
                continue
            if c.candidates is not None:
                out[a] = ("unresolved", mem.resolutions.get(a, tuple(map(repr, c.candidates))))
            else:
                out[a] = (c.value, c.persisted_value)
        return out


def _run_ops(world: BaseWorld, tid: int, ops: list[tuple], do: Callable[[tuple], Any]) -> Callable[[], None]:
    def body() -> None:
        for op in ops:
            h = world.history.invoke(tid, op[0], op[1] if len(op) > 1 else None)
            res = do(op)
            world.history.respond(h, res)
    return body


# ---------------------------------------------------------------------- queue


@dataclass
class QueueConfig:
    ops: list[list[tuple]]
    prefill: list[Any] = field(default_factory=list)
    faults: tuple[str, ...] = ()
    recovery_modes: bool = False
    log_size: int = 64
    # Memory steps a probe operation may take to get past a paused thread.
    probe_steps: int = 1000
    # Post-recovery probe outcomes by queue shape, shared by every run built
    # from this config.  After recovery no lock is held and no directory is
    # set, so the node chain and Tail decide everything the probe does.
    probe_memo: dict = field(default_factory=dict, compare=False, repr=False)


class QueueWorld(BaseWorld):
    """Threads run enqueue/dequeue sequences; after a crash all recover, then probe.

    When the explorer paused a thread for good, a probe thread must get
    through both locks anyway, finishing whatever the paused thread left.
    """

    spare_threads = 1

    def __init__(self, mem: Memory, cfg: QueueConfig) -> None:
        self.n_threads = len(cfg.ops)
        super().__init__(mem, cfg.faults, cfg.log_size)
        self.cfg = cfg
        self.queue = RQueue(self.rt)
        for k in cfg.prefill:
            self.queue.enqueue(k)
        self.rt.persist_costs.clear()
        self.oracle = QueueOracle(EMPTYQUEUE)
        self._prefix_state = tuple(cfg.prefill)
        self.copies: dict[str, Runtime] = {}
        self.mode_diffs: list[str] = []

    def _rebind(self, rt: Runtime) -> None:
        self.queue = self.queue.rebind(rt)
        self.copies = {}
        self.mode_diffs = []

    def locks(self) -> list[Lock]:
        return [self.queue.head_lock, self.queue.tail_lock]

    def app_roots(self) -> list[int]:
        return self.queue.roots()

    def _do(self, op: tuple) -> Any:
        if op[0] == "enq":
            self.queue.enqueue(op[1])
            return None
        return self.queue.dequeue()

    def threads(self) -> dict[int, Callable[[], Any]]:
        return {t: _run_ops(self, t, ops, self._do) for t, ops in enumerate(self.cfg.ops)}

    def pausable(self, tid: int) -> bool:
        heap = self.rt.heap
        for lk in self.locks():
            w = lk.peek()
            if w.locked and heap.deref(w.descr).owner == tid:
                return True
        return False

    def _oracle_state(self, contents: list[Any]):
        # Prefilled elements sit in front of anything the threads enqueued.
        return tuple(contents)

    def _linearizable(self, contents: list[Any]) -> list[str]:
        oracle = _Prefilled(self.oracle, self._prefix_state)
        ok, _ = check_durable_linearizability(self.history, tuple(contents), oracle)
        if ok:
            return []
        return [f"no valid order for {self.history.ops} ending in queue {contents}"]

    def finish(self) -> list[str]:
        if self.paused():
            return self._finish_paused()
        errs = self.queue.check_structure()
        if errs:
            return errs
        errs += self._linearizable(self.queue.contents())
        errs += self.quiescent_state()
        errs += self.hygiene()
        errs += self.cost_errors()
        errs += self.discipline_errors()
        return errs

    def _probe_drain(self, read) -> tuple[list[Any], list[str]]:
        """Enqueue the sentinel and dequeue everything, within the step bound."""
        mem = self.memory
        errs: list[str] = []
        drained: list[Any] = []
        start = mem.step
        self.queue.enqueue(SENTINEL)
        if mem.step - start > self.cfg.probe_steps:
            errs.append(f"probe enqueue needed {mem.step - start} steps")
        while len(drained) <= len(self.history.ops) + len(self.cfg.prefill) + 1:
            start = mem.step
            v = self.queue.dequeue()
            if mem.step - start > self.cfg.probe_steps:
                errs.append(f"probe dequeue needed {mem.step - start} steps")
            if v is EMPTYQUEUE:
                break
            drained.append(v)
        return drained, errs

    def _finish_paused(self) -> list[str]:
        sched = self.memory.scheduler
        sched.tid = self.n_threads
        drained, errs = self._probe_drain(self.memory.peek)
        sched.tid = 0
        if not drained or drained[-1] != SENTINEL:
            return errs + [f"probe drained {drained}, sentinel missing at the end"]
        errs += self._linearizable(drained[:-1])
        errs += self.queue.check_structure()
        # The paused thread's own section is finished, but it still holds no
        # lock and its context; only locks and allocation are checked.
        for lk in self.locks():
            if lk.peek().locked:
                errs.append(f"lock {lk.addr} still held after the probe")
        errs += self.hygiene(quiescent=False)
        return errs

    def paused(self) -> bool:
        return bool(self.paused_tids)

    def crash(self) -> None:
        super().crash()
        if self.cfg.recovery_modes and not self.copies:
            for name in ("twice", "alternate-0", "alternate-1"):
                self.copies[name] = self.rt.fork()

    def after_recovery(self) -> list[str]:
        errs: list[str] = []
        if self.copies:
            errs += self._compare_recovery_modes()
        errs += self.queue.check_structure(self.memory.read)
        if errs:
            return errs
        report = self.rt.heap.sweep(self.roots())
        if report.dangling:
            errs.append(f"post-crash sweep found reclaimed blocks still reachable: {report.dangling}")
        contents = self.queue.contents(self.memory.read)
        errs += self._linearizable(contents)
        # The structure must still work: push a sentinel through it and drain.
        shape = (tuple(n.id for n in self.queue.chain()), self.memory.peek(self.queue.tail.addr).id,
                 tuple(contents))
        memo = self.cfg.probe_memo
        if shape not in memo:
            self.queue.enqueue(SENTINEL)
            drained = []
            while True:
                v = self.queue.dequeue()
                if v is EMPTYQUEUE:
                    break
                drained.append(v)
                if len(drained) > len(contents) + 1:
                    break
            memo[shape] = [] if drained == contents + [SENTINEL] else [
                f"probe drained {drained}, expected {contents + [SENTINEL]}"]
        errs += memo[shape]
        errs += self.quiescent_state()
        errs += self.hygiene()
        return errs

    def _compare_recovery_modes(self) -> list[str]:
        base = self.persistent_snapshot()
        diffs = []
        sched: CoopScheduler = self.memory.scheduler
        for name, rt in self.copies.items():
            if name == "twice":
                for _ in range(2):
                    for tid in range(rt.n):
                        sched.tid = tid
                        recover(rt)
            else:
                first = int(name[-1])
                order = [first, 1 - first] if rt.n >= 2 else [0]
                for tid in range(rt.n):
                    sched.spawn(tid, lambda rt=rt: recover(rt))
                while sched.runnable():
                    for tid in order + [t for t in range(rt.n) if t not in order]:
                        if tid in sched.runnable():
                            sched.step(tid)
                sched.kill_all()
                sched.tid = 0
            shadow = _Shadow(rt.memory)
            snap = BaseWorld.persistent_snapshot(shadow)  # type: ignore[arg-type]
            if snap != base:
                keys = sorted(a for a in set(base) | set(snap) if base.get(a) != snap.get(a))
                diffs.append(f"recovery '{name}' differs from a single recovery at cells {keys[:8]}")
        self.mode_diffs = diffs
        return diffs


@dataclass
class _Shadow:
    memory: Memory


class _Prefilled:
    """Oracle whose initial state is a prefilled queue."""

    def __init__(self, inner: QueueOracle, start: tuple) -> None:
        self.inner = inner
        self.start = start

    def initial(self):
        return self.start

    def apply(self, state, op):
        return self.inner.apply(state, op)


# ----------------------------------------------------------------------- bank


@dataclass
class BankConfig:
    transfers: list[list[tuple[int, int, int]]]
    balances: tuple[int, ...] = (100, 100, 100)
    faults: tuple[str, ...] = ()


class BankWorld(BaseWorld):
    def __init__(self, mem: Memory, cfg: BankConfig) -> None:
        self.n_threads = len(cfg.transfers)
        super().__init__(mem, cfg.faults)
        self.cfg = cfg
        self.bank = NestedBank(self.rt, cfg.balances)

    def _rebind(self, rt: Runtime) -> None:
        self.bank = self.bank.rebind(rt)

    def locks(self) -> list[Lock]:
        return self.bank.locks

    def app_roots(self) -> list[int]:
        return self.bank.roots()

    def threads(self) -> dict[int, Callable[[], Any]]:
        return {t: _run_ops(self, t, [("transfer", x) for x in xs],
                            lambda op: self.bank.transfer(*op[1]))
                for t, xs in enumerate(self.cfg.transfers)}

    def _checks(self, read) -> list[str]:
        errs = []
        bal = self.bank.balances(read)
        if sum(bal) != sum(self.cfg.balances):
            errs.append(f"balances {bal} do not sum to {sum(self.cfg.balances)}")
        ok, _ = check_durable_linearizability(self.history, tuple(bal), BankOracle(self.cfg.balances))
        if not ok:
            errs.append(f"no valid order of {self.history.ops} ends in balances {bal}")
        return errs

    def nested_release_errors(self) -> list[str]:
        """Every lock recorded in a finished outermost section's lock log is free."""
        heap, mem = self.rt.heap, self.memory
        errs = []
        for b in heap.blocks.values():
            if not isinstance(b, Descriptor) or not b.outermost or mem.peek(b.done) is not True:
                continue
            for rec in entries(self.rt, b.logs[LOCK], mem.peek):
                if mem.peek(rec.lock) == LockWord(rec.descr, True):
                    errs.append(f"lock {rec.lock} still held by nested section {rec.descr!r}")
        return errs

    def redirect_errors(self) -> list[str]:
        """A redirected helper must go on to run exactly the outermost section."""
        errs = []
        evs = self.rt.events
        for i, ev in enumerate(evs):
            if ev[0] != "redirect":
                continue
            nxt = next((e for e in evs[i + 1:] if e[0] == "run-thunk" and e[1] == ev[1]), None)
            if nxt is None or nxt[2] != ev[3]:
                errs.append(f"helper {ev[1]} redirected from section {ev[2]} did not run section {ev[3]}")
        return errs

    def redirects(self) -> int:
        return sum(1 for ev in self.rt.events if ev[0] == "redirect")

    def finish(self) -> list[str]:
        errs = self._checks(self.memory.peek)
        errs += self.nested_release_errors()
        errs += self.redirect_errors()
        errs += self.quiescent_state()
        errs += self.hygiene()
        errs += self.cost_errors()
        errs += self.discipline_errors()
        return errs

    def after_recovery(self) -> list[str]:
        errs = self._checks(self.memory.read)
        report = self.rt.heap.sweep(self.roots())
        if report.dangling:
            errs.append(f"post-crash sweep found reclaimed blocks still reachable: {report.dangling}")
        self.bank.transfer(0, 1, 1)
        self.bank.transfer(1, 0, 1)
        bal = self.bank.balances()
        if sum(bal) != sum(self.cfg.balances):
            errs.append(f"probe transfers broke conservation: {bal}")
        errs += self.quiescent_state()
        errs += self.hygiene()
        return errs


# ----------------------------------------------------------------- contention


@dataclass
class ContentionConfig:
    calls: int = 2  # single try_lock attempts per thread
    threads: int = 2


class ContentionWorld(BaseWorld):
    """Threads make single try_lock attempts on one lock; each thunk appends its call id."""

    def __init__(self, mem: Memory, cfg: ContentionConfig) -> None:
        self.n_threads = cfg.threads
        super().__init__(mem)
        self.cfg = cfg
        self.lock = Lock(self.rt)
        self.cell = Mutable(self.rt, (), guard=self.lock.addr)
        self.calls: list[tuple[str, LockWord | None, bool]] = []

    def locks(self) -> list[Lock]:
        return [self.lock]

    def threads(self) -> dict[int, Callable[[], Any]]:
        def body(tid: int) -> Callable[[], None]:
            def run() -> None:
                for i in range(self.cfg.calls):
                    cid = f"{tid}.{i}"

                    def thunk(cid=cid) -> bool:
                        self.cell.store(self.cell.load() + (cid,))
                        return True

                    start = len(self.rt.events)
                    ok = try_lock(self.rt, self.lock, thunk)
                    seen = next(e[3] for e in self.rt.events[start:]
                                if e[0] == "trylock" and e[1] == tid and e[2] == self.lock.addr)
                    self.calls.append((cid, seen, ok))
            return run
        return {t: body(t) for t in range(self.n_threads)}

    def finish(self) -> list[str]:
        errs = []
        applied = self.cell.peek()
        winners = [cid for cid, _, ok in self.calls if ok]
        if sorted(applied) != sorted(winners) or len(set(applied)) != len(applied):
            errs.append(f"applied sections {applied} differ from successful calls {winners}")
        rounds: dict[Any, list[tuple[str, bool]]] = {}
        for cid, seen, ok in self.calls:
            if seen.locked:
                if ok:
                    errs.append(f"call {cid} found the lock held yet returned true")
                continue
            rounds.setdefault(seen, []).append((cid, ok))
        for word, members in rounds.items():
            n = sum(ok for _, ok in members)
            if n != 1:
                errs.append(f"{n} winners among {members} competing for {word}")
        errs += self.quiescent_state()
        errs += self.hygiene()
        errs += self.cost_errors()
        return errs


# ---------------------------------------------------------------- idempotence


@dataclass
class IdempotenceConfig:
    op: str = "enq"  # or "deq"
    helpers: int = 2
    prefill: tuple = (5,)


class IdempotenceWorld(BaseWorld):
    """One installed section run concurrently by ``helpers`` threads.

    Thread 0 owns the section; the rest help it.  The section is built and
    installed in the lock before any thread starts.
    """

    def __init__(self, mem: Memory, cfg: IdempotenceConfig) -> None:
        self.n_threads = cfg.helpers
        super().__init__(mem)
        self.cfg = cfg
        q = self.queue = RQueue(self.rt)
        for k in cfg.prefill:
            q.enqueue(k)
        self.rt.persist_costs.clear()
        self.result = q.new_result()
        if cfg.op == "enq":
            thunk, self.lock = q.enqueue_thunk(99), q.tail_lock
        else:
            thunk, self.lock = q.dequeue_thunk(self.result), q.head_lock
        self.old_head = mem.peek(q.head.addr)
        self.descr = create_descr(self.rt, thunk, self.lock.addr, self.rt.ctx(0))
        self.word = LockWord(self.descr, True)
        self.lock.direct_write(self.word)
        self.rt.events.clear()

    def threads(self) -> dict[int, Callable[[], Any]]:
        def body() -> None:
            run_descr(self.rt, self.descr)
            unlock(self.rt, self.lock, self.word)
        return {t: body for t in range(self.n_threads)}

    def state(self) -> tuple:
        """Lock-protected state with node identities replaced by chain positions."""
        q, mem = self.queue, self.memory
        chain = q.chain()
        pos = {n: i for i, n in enumerate(chain)}
        return (tuple(q.contents()), pos.get(mem.peek(q.tail.addr)), mem.peek(self.result.addr),
                mem.peek(self.lock.addr).locked)

    def finish(self) -> list[str]:
        errs = self.queue.check_structure()
        reclaims = [ev[2] for ev in self.rt.events if ev[0] == "reclaim" and isinstance(
            self.rt.heap.blocks.get(ev[2].id), Node)]
        expect = [self.old_head] if self.cfg.op == "deq" and self.cfg.prefill else []
        if reclaims != expect:
            errs.append(f"nodes reclaimed {reclaims}, expected {expect}")
        errs += self.cost_errors()
        errs += self.discipline_errors()
        return errs


# ------------------------------------------------------------------- registry


@dataclass
class Scenario:
    name: str
    description: str
    build: Callable[[Memory], BaseWorld]
    bounds: Bounds
    # Checks across all runs, given the exploration and every run's result.
    summary: Callable[[Exploration, list[RunResult]], list[str]] | None = None
    keep_runs: bool = False

    def run(self, mode: str = "exhaustive", seed: int = 0, runs: int = 1000,
            bounds: Bounds | None = None, max_schedules: int = 200_000) -> tuple[Exploration, list[str]]:
        """Explore the scenario and return the exploration plus cross-run failures."""
        kept: list[RunResult] = []
        sections = 0

        def on_run(r: RunResult) -> None:
            nonlocal sections
            if not r.crashes:
                sections += len(r.world.rt.persist_costs)
            if self.keep_runs:
                kept.append(_strip(r))

        ex = explore(self.build, bounds or self.bounds, mode=mode, seed=seed, runs=runs,
                     max_schedules=max_schedules, on_run=on_run)
        ex.sections = sections
        extra = self.summary(ex, kept) if self.summary else []
        return ex, extra


def _strip(r: RunResult) -> RunResult:
    w = r.world
    r.world = _Digest(
        state=w.state() if isinstance(w, IdempotenceWorld) and not r.failures else None,
        redirects=w.redirects() if isinstance(w, BankWorld) else 0,
    )
    return r


@dataclass
class _Digest:
    state: Any
    redirects: int


def queue_workload(threads: int, ops_per_thread: int = 2) -> list[list[tuple]]:
    """Thread t enqueues its own keys, alternating with dequeues."""
    out = []
    for t in range(threads):
        ops: list[tuple] = []
        for i in range(ops_per_thread):
            ops.append(("enq", 10 * (t + 1) + i) if (t + i) % 2 == 0 else ("deq",))
        out.append(ops)
    return out


def make_queue_scenario(name: str, description: str, cfg: QueueConfig, bounds: Bounds) -> Scenario:
    return Scenario(name, description, lambda mem: QueueWorld(mem, cfg), bounds)


def idempotence_scenario(op: str, helpers: int, bounds: Bounds) -> Scenario:
    cfg = IdempotenceConfig(op=op, helpers=helpers)
    solo = _solo_state(cfg)

    def summary(ex: Exploration, runs: list[RunResult]) -> list[str]:
        errs = []
        for r in runs:
            st = r.world.state
            if st is not None and st != solo:
                errs.append(f"schedule {r.path}: state {st} differs from solo run {solo}")
                if len(errs) >= 5:
                    break
        return errs

    return Scenario(f"{op}-idempotence-{helpers}", f"{helpers} threads replay one {op} section",
                    lambda mem: IdempotenceWorld(mem, cfg), bounds, summary, keep_runs=True)


def _solo_state(cfg: IdempotenceConfig) -> tuple:
    mem = Memory(CoopScheduler())
    w = IdempotenceWorld(mem, replace(cfg, helpers=1))
    for body in w.threads().values():
        body()
    return w.state()


def contention_scenario(bounds: Bounds, calls: int = 2, threads: int = 2) -> Scenario:
    cfg = ContentionConfig(calls=calls, threads=threads)
    return Scenario("lock-contention", f"{threads} threads make {calls} single try_lock calls each",
                    lambda mem: ContentionWorld(mem, cfg), bounds)


def bank_scenario(bounds: Bounds, transfers=None, faults: tuple[str, ...] = ()) -> Scenario:
    cfg = BankConfig(transfers or [[(0, 1, 10)], [(1, 2, 5)]], faults=faults)

    def summary(ex: Exploration, runs: list[RunResult]) -> list[str]:
        if not any(r.world.redirects for r in runs):
            return ["no run redirected a helper from a nested section to its outermost section"]
        return []

    return Scenario("bank-nested", "two transfers sharing an account, nested locks",
                    lambda mem: BankWorld(mem, cfg), bounds, summary, keep_runs=True)


def registry(threads: int | None = None, faults: tuple[str, ...] = (),
             crashes: int | None = None) -> dict[str, Scenario]:
    """The named scenarios, optionally resized to ``threads`` threads."""
    n = threads or 2
    crash_n = 1 if crashes is None else crashes
    smoke = QueueConfig(queue_workload(n), faults=faults)
    sweep = QueueConfig([[("enq", 1), ("enq", 2)], [("deq",), ("deq",)]] if n == 2 else queue_workload(n),
                        faults=faults, recovery_modes=True)
    livelock = QueueConfig([[("enq", 10 * (t + 1))] for t in range(n)], faults=faults)
    return {
        "queue-smoke": make_queue_scenario(
            "queue-smoke", "concurrent enqueues and dequeues, no crash", smoke,
            Bounds(preemptions=1, crashes=0 if crashes is None else crashes)),
        "queue-crash-sweep": make_queue_scenario(
            "queue-crash-sweep", "queue operations with a crash at every point", sweep,
            Bounds(preemptions=1, crashes=crash_n)),
        "queue-idempotence": idempotence_scenario("enq", n, Bounds(preemptions=2)),
        "bank-nested": bank_scenario(Bounds(preemptions=2, crashes=0 if crashes is None else crashes),
                                     faults=faults),
        "livelock-bound": make_queue_scenario(
            "livelock-bound", "one thread paused for good while holding a lock", livelock,
            Bounds(preemptions=1, pauses=1, steps=400)),
    }
