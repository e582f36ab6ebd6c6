"""Simulated explicit-epoch persistent memory.

Every shared word is a :class:`Cell` with a volatile value (what loads and
CASes see) and a persisted value (what survives a crash).  Write-backs are
issued with :meth:`Memory.pwb`, ordered with :meth:`Memory.pfence` and
completed with :meth:`Memory.psync`.  Cache eviction may persist any cell at
any time, so the persisted state at a crash is not a single value but a set
of admissible outcomes.  :meth:`Memory.crash` narrows that set as far as the
flush queues allow and leaves the rest to be resolved lazily, one cell at a
time, through the attached chooser the first time a cell is touched after the
crash.  Cells that nobody looks at never become a branching point.
"""

from __future__ import annotations

import bisect
import logging
import os
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

log = logging.getLogger(__name__)

PERSISTENT = "persistent"
VOLATILE = "volatile"  # heap allocation, dropped at crash
STATIC = "static"  # volatile variable with an initial value, reset at crash

_INF = float("inf")


class _Bottom:
    __slots__ = ()
    _instance: _Bottom | None = None

    def __new__(cls) -> _Bottom:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "⊥"

    def __reduce__(self):
        return (_Bottom, ())

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self


BOT = _Bottom()
"""Distinguished empty value; unequal to every other word, 0 and False included."""


class Ref:
    """Handle to an allocated block.  Compared and hashed by block id."""

    __slots__ = ("id",)

    def __init__(self, id: int) -> None:
        self.id = id

    def __eq__(self, other: object) -> bool:
        return type(other) is Ref and other.id == self.id

    def __hash__(self) -> int:
        return hash(self.id)

    def __repr__(self) -> str:
        return f"#{self.id}"


class MemoryFault(Exception):
    """Access to an address that was never allocated (or dropped by a crash)."""


class Cell:
    __slots__ = ("addr", "kind", "init", "value", "history", "persisted", "candidates")

    def __init__(self, addr: int, kind: str, init: Any) -> None:
        self.addr = addr
        self.kind = kind
        self.init = init
        self.value = init
        # (value, writer tid, writer epoch); index 0 is the value at allocation
        # or at the last crash and is persisted by construction.
        self.history: list[tuple[Any, int | None, float]] = [(init, None, -1)]
        self.persisted = 0
        # Admissible post-crash values still to be decided, or None.
        self.candidates: list[Any] | None = None

    @property
    def persisted_value(self) -> Any:
        return self.history[self.persisted][0]

    def clone(self) -> Cell:
        c = Cell.__new__(Cell)
        c.addr, c.kind, c.init, c.value = self.addr, self.kind, self.init, self.value
        c.history = list(self.history)
        c.persisted = self.persisted
        c.candidates = None if self.candidates is None else list(self.candidates)
        return c


@dataclass
class PersistCounters:
    pwb: int = 0
    pfence: int = 0
    psync: int = 0

    def copy(self) -> PersistCounters:
        return PersistCounters(self.pwb, self.pfence, self.psync)

    def __sub__(self, other: PersistCounters) -> PersistCounters:
        return PersistCounters(self.pwb - other.pwb, self.pfence - other.pfence, self.psync - other.psync)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.pwb, self.pfence, self.psync)


class Scheduler:
    """Single-threaded default: no scheduling points, one implicit thread."""

    def current_tid(self) -> int:
        return 0

    def point(self, op: str, addr: int | None) -> None:
        pass


class FirstChoice:
    """Chooser that always takes the first (least persisted) option."""

    def choose(self, options: list[Any], kind: str = "") -> Any:
        return options[0]


@dataclass(eq=False)
class Block:
    """Base for allocated objects.  ``cells`` lists the addresses the block owns."""

    cells: Sequence[int] = field(default=(), kw_only=True)
    id: int = field(default=-1, kw_only=True)

    def ref(self) -> Ref:
        return Ref(self.id)


class Memory:
    """Word-addressed shared memory with a per-thread flush model.

    All accessors route through ``scheduler.point`` first, which is where the
    deterministic harness interleaves virtual threads.  ``peek``/``poke`` are
    unscheduled and exist for setup code and checkers.
    """

    def __init__(self, scheduler: Scheduler | None = None, chooser: Any = None,
                 native: bool = False) -> None:
        self.scheduler = scheduler or Scheduler()
        self.chooser = chooser or FirstChoice()
        self.cells: dict[int, Cell] = {}
        self._next_addr = 1
        # Lazily materialised ranges: parallel sorted bases and (end, kind, init).
        self._range_bases: list[int] = []
        self._ranges: list[tuple[int, str, Any]] = []
        self._queues: dict[int, list[tuple[int, int, int]]] = {}
        self._epoch: dict[int, int] = {}
        self.counters: dict[int, PersistCounters] = {}
        self.crashes = 0
        self.step = 0
        # Bumped by every operation that can change what a crash leaves behind.
        self.mutations = 0
        self.trace: list[str] | None = [] if os.environ.get("RFLOCK_TRACE") == "1" else None
        self.trace_sink: Callable[[str], None] | None = None
        self.heap = Heap(self)
        # Post-crash resolutions keyed by address.  Shared between copies of a
        # memory so that alternative recoveries see the same persisted state.
        self.resolutions: dict[int, Any] = {}
        self._atomic = threading.RLock() if native else None

    def fork(self, scheduler: Scheduler | None = None, chooser: Any = None) -> Memory:
        """Independent copy of the memory state for trying alternatives.

        Blocks are shared (their fields are addresses, never mutated).  With
        no ``scheduler`` and ``chooser`` the copy also shares those and the
        post-crash resolutions, so it resolves cells exactly as this memory
        does; with them it is a separate world that resolves on its own.
        """
        m = Memory.__new__(Memory)
        m.__dict__.update(self.__dict__)
        m.cells = {a: c.clone() for a, c in self.cells.items()}
        m._range_bases = list(self._range_bases)
        m._ranges = list(self._ranges)
        m._queues = {t: list(q) for t, q in self._queues.items()}
        m._epoch = dict(self._epoch)
        m.counters = {t: c.copy() for t, c in self.counters.items()}
        m.trace = None
        m.trace_sink = None
        m.heap = self.heap.fork(m)
        if scheduler is not None:
            m.scheduler = scheduler
            m.chooser = chooser
            m.resolutions = dict(self.resolutions)
        return m

    # ------------------------------------------------------------------ alloc

    def alloc(self, init: Any = BOT, kind: str = PERSISTENT) -> int:
        addr = self._next_addr
        self._next_addr += 1
        self.cells[addr] = Cell(addr, kind, init)
        return addr

    def alloc_range(self, n: int, init: Any = BOT, kind: str = PERSISTENT) -> range:
        """Reserve ``n`` consecutive cells; each is created on first access."""
        base = self._next_addr
        self._next_addr += n
        self._range_bases.append(base)
        self._ranges.append((base + n, kind, init))
        return range(base, base + n)

    def _lazy(self, addr: int) -> tuple[str, Any] | None:
        i = bisect.bisect_right(self._range_bases, addr) - 1
        if i >= 0:
            end, kind, init = self._ranges[i]
            if addr < end:
                return kind, init
        return None

    def _cell(self, addr: int) -> Cell:
        try:
            cell = self.cells[addr]
        except KeyError:
            spec = self._lazy(addr)
            if spec is None:
                raise MemoryFault(f"unknown address {addr}") from None
            cell = self.cells[addr] = Cell(addr, spec[0], spec[1])
        if cell.candidates is not None:
            self._resolve(cell)
        return cell

    # ------------------------------------------------------------- primitives

    def read(self, addr: int) -> Any:
        self.scheduler.point("read", addr)
        if self._atomic is not None:
            with self._atomic:
                v = self._cell(addr).value
        else:
            v = self._cell(addr).value
        self._emit("read", addr, v)
        return v

    def write(self, addr: int, v: Any) -> None:
        self.scheduler.point("write", addr)
        if self._atomic is not None:
            with self._atomic:
                self._store(self._cell(addr), v)
        else:
            self._store(self._cell(addr), v)
        self._emit("write", addr, v)

    def cas(self, addr: int, old: Any, new: Any) -> bool:
        self.scheduler.point("cas", addr)
        if self._atomic is not None:
            with self._atomic:
                ok = self._cas(addr, old, new)
        else:
            ok = self._cas(addr, old, new)
        self._emit("cas", addr, new if ok else "fail")
        return ok

    def _cas(self, addr: int, old: Any, new: Any) -> bool:
        cell = self._cell(addr)
        if cell.value == old:
            self._store(cell, new)
            return True
        return False

    def _store(self, cell: Cell, v: Any) -> None:
        tid = self.scheduler.current_tid()
        self.mutations += 1
        cell.value = v
        cell.history.append((v, tid, self._epoch.get(tid, 0)))

    def pwb(self, addr: int) -> None:
        self.scheduler.point("pwb", addr)
        tid = self.scheduler.current_tid()
        if self._atomic is not None:
            with self._atomic:
                self._pwb(tid, addr)
        else:
            self._pwb(tid, addr)
        self._emit("pwb", addr, None)

    def _pwb(self, tid: int, addr: int) -> None:
        cell = self._cell(addr)
        self._queues.setdefault(tid, []).append((addr, len(cell.history) - 1, self._epoch.get(tid, 0)))
        self.mutations += 1
        self._count(tid).pwb += 1

    def pfence(self) -> None:
        self.scheduler.point("pfence", None)
        tid = self.scheduler.current_tid()
        self._epoch[tid] = self._epoch.get(tid, 0) + 1
        self.mutations += 1
        self._count(tid).pfence += 1
        self._emit("pfence", None, None)

    def psync(self) -> None:
        self.scheduler.point("psync", None)
        tid = self.scheduler.current_tid()
        if self._atomic is not None:
            with self._atomic:
                self._psync(tid)
        else:
            self._psync(tid)
        self._emit("psync", None, None)

    def _psync(self, tid: int) -> None:
        self.drain(tid)
        self._epoch[tid] = self._epoch.get(tid, 0) + 1
        self.mutations += 1
        self._count(tid).psync += 1

    def _count(self, tid: int) -> PersistCounters:
        c = self.counters.get(tid)
        if c is None:
            c = self.counters[tid] = PersistCounters()
        return c

    def total_counters(self) -> PersistCounters:
        total = PersistCounters()
        for c in self.counters.values():
            total.pwb += c.pwb
            total.pfence += c.pfence
            total.psync += c.psync
        return total

    # ------------------------------------------------- asynchronous write-back

    def drain(self, tid: int, k: int | None = None) -> None:
        """Complete the first ``k`` queued write-backs of ``tid`` (all if None)."""
        q = self._queues.get(tid)
        if not q:
            return
        k = len(q) if k is None else k
        for addr, idx, _ in q[:k]:
            cell = self.cells.get(addr)
            if cell is not None and cell.candidates is None and idx > cell.persisted:
                cell.persisted = idx
        del q[:k]

    def evict(self, addr: int) -> None:
        cell = self._cell(addr)
        if cell.kind == PERSISTENT:
            cell.persisted = len(cell.history) - 1

    def pending(self, tid: int) -> list[tuple[int, int, int]]:
        return list(self._queues.get(tid, ()))

    # ------------------------------------------------------------------ crash

    def crash(self) -> None:
        """Whole-system crash.

        Each thread's pending write-backs are cut at some epoch: everything
        queued before the cut completed, everything after did not, and no store
        the thread issued after the cut reached memory.  Cells whose outcome
        is still open get a candidate list, resolved on first access.
        """
        cuts: dict[int, float] = {}
        for tid in sorted(self._queues):
            q = self._queues[tid]
            if not q:
                continue
            epochs = sorted({e for _, _, e in q})
            options: list[float] = [*epochs, _INF]
            cuts[tid] = self.chooser.choose(options, "cut")

        forced: dict[int, int] = {}
        for tid, cut in cuts.items():
            for addr, idx, epoch in self._queues[tid]:
                if epoch < cut and idx > forced.get(addr, -1):
                    forced[addr] = idx

        for addr in list(self.cells):
            cell = self.cells[addr]
            if cell.kind == VOLATILE:
                del self.cells[addr]
                continue
            if cell.kind == STATIC:
                cell.value = cell.init
                cell.history = [(cell.init, None, -1)]
                cell.persisted = 0
                cell.candidates = None
                continue
            if cell.candidates is not None:
                # Never touched since the previous crash; its options stand.
                continue
            lower = max(cell.persisted, forced.get(addr, -1))
            options_v = [cell.history[lower][0]]
            for value, tid, epoch in cell.history[lower + 1:]:
                if tid is None or epoch <= cuts.get(tid, _INF):
                    if value not in options_v:
                        options_v.append(value)
            if len(options_v) == 1:
                self._settle(cell, options_v[0])
            else:
                cell.candidates = options_v
                cell.value = None

        keep = [(b, r) for b, r in zip(self._range_bases, self._ranges) if r[1] != VOLATILE]
        self._range_bases = [b for b, _ in keep]
        self._ranges = [r for _, r in keep]
        self._queues.clear()
        self._epoch.clear()
        # Clear in place: copies forked to replay this crash share the dict.
        self.resolutions.clear()
        self.heap.on_crash()
        self.crashes += 1
        self._emit("crash", None, None)

    def _settle(self, cell: Cell, value: Any) -> None:
        cell.value = value
        cell.history = [(value, None, -1)]
        cell.persisted = 0
        cell.candidates = None

    def _resolve(self, cell: Cell) -> None:
        if cell.addr in self.resolutions:
            value = self.resolutions[cell.addr]
        else:
            value = self.chooser.choose(cell.candidates, "resolve")
            self.resolutions[cell.addr] = value
        self._settle(cell, value)

    def resolve_all(self) -> None:
        for cell in list(self.cells.values()):
            if cell.candidates is not None:
                self._resolve(cell)

    # ------------------------------------------------------- unscheduled access

    def peek(self, addr: int) -> Any:
        if addr not in self.cells:
            spec = self._lazy(addr)
            if spec is not None:
                return spec[1]
        return self._cell(addr).value

    def exists(self, addr: int) -> bool:
        return addr in self.cells or self._lazy(addr) is not None

    def poke(self, addr: int, v: Any) -> None:
        """Initialise a cell outside any thread: volatile and persisted at once."""
        cell = self._cell(addr)
        cell.value = v
        cell.history.append((v, None, -1))
        cell.persisted = len(cell.history) - 1

    def persisted(self, addr: int) -> Any:
        return self._cell(addr).persisted_value

    def unresolved(self) -> list[int]:
        return [a for a, c in self.cells.items() if c.candidates is not None]

    # ------------------------------------------------------------------ trace

    def _emit(self, op: str, addr: int | None, v: Any) -> None:
        self.step += 1
        if self.trace is None and self.trace_sink is None:
            return
        line = f"step={self.step} t={self.scheduler.current_tid()} op={op} addr={addr if addr is not None else '-'} val={v!r}"
        if self.trace is not None:
            self.trace.append(line)
        if self.trace_sink is not None:
            self.trace_sink(line)


class AllocationError(Exception):
    pass


@dataclass
class SweepReport:
    reachable: int
    reclaimed: int
    dangling: list[int]


class Heap:
    """Bump allocator for blocks with leak and double-free bookkeeping.

    Freed blocks stay readable (tombstones) for the rest of a scenario; ids
    and addresses are never reused, so stale CASes cannot succeed by ABA.
    """

    def __init__(self, memory: Memory) -> None:
        self.memory = memory
        self.blocks: dict[int, Block] = {}
        self.kinds: dict[int, str] = {}
        self.live: set[int] = set()
        self.freed: set[int] = set()
        self.owner: dict[int, int] = {}  # cell address -> block id
        self.allocs = 0
        self.frees = 0
        self.dropped = 0  # volatile blocks lost in crashes
        self.swept = 0  # persistent blocks reclaimed by post-crash sweeps
        self.double_frees: list[int] = []
        self.reclaim_guard: Callable[[Block], str | None] | None = None
        self.violations: list[str] = []
        self._next_id = 1

    def allocate(self, factory: Callable[..., Block], *args: Any, kind: str = PERSISTENT, **kwargs: Any) -> Block:
        """Build a block whose fields are freshly allocated, initialised cells.

        ``factory`` receives an ``alloc(init)`` callable as its first argument.
        Initial contents are persisted with the allocation, as a persistent
        allocator does for constructor writes.
        """
        mem = self.memory
        cells: list[int] = []

        def alloc(init: Any = BOT) -> int:
            a = mem.alloc(init, kind)
            cells.append(a)
            return a

        def alloc_range(n: int, init: Any = BOT) -> range:
            r = mem.alloc_range(n, init, kind)
            cells.extend(r)
            return r

        alloc.range = alloc_range  # type: ignore[attr-defined]

        block = factory(alloc, *args, **kwargs)
        block.id = self._next_id
        self._next_id += 1
        block.cells = tuple(cells)
        self.blocks[block.id] = block
        self.kinds[block.id] = kind
        self.live.add(block.id)
        for a in cells:
            self.owner[a] = block.id
        self.allocs += 1
        return block

    def fork(self, memory: Memory) -> Heap:
        h = Heap.__new__(Heap)
        h.__dict__.update(self.__dict__)
        h.memory = memory
        h.blocks = dict(self.blocks)
        h.kinds = dict(self.kinds)
        h.live = set(self.live)
        h.freed = set(self.freed)
        h.owner = dict(self.owner)
        h.double_frees = list(self.double_frees)
        h.violations = list(self.violations)
        return h

    def deref(self, ref: Ref) -> Any:
        return self.blocks[ref.id]

    def free(self, ref: Ref) -> None:
        bid = ref.id
        if bid not in self.live:
            self.double_frees.append(bid)
            self.violations.append(f"double free of block {bid}")
            return
        if self.reclaim_guard is not None:
            msg = self.reclaim_guard(self.blocks[bid])
            if msg:
                self.violations.append(msg)
        self.live.discard(bid)
        self.freed.add(bid)
        self.frees += 1

    def balanced(self) -> bool:
        """Every allocation is live, freed, swept, or lost with volatile memory."""
        return self.allocs == len(self.live) + self.frees + self.swept + self.dropped

    def live_persistent(self) -> set[int]:
        return {b for b in self.live if self.kinds[b] == PERSISTENT}

    def on_crash(self) -> None:
        for bid in list(self.live):
            if self.kinds[bid] != PERSISTENT:
                self.live.discard(bid)
                self.blocks.pop(bid, None)
                self.dropped += 1

    def reachable(self, roots: Iterable[int], read: Callable[[int], Any] | None = None) -> set[int]:
        """Block ids reachable from the root cell addresses."""
        read = read or self.memory.peek
        seen: set[int] = set()
        roots = list(roots)
        stack: list[Any] = [read(a) for a in roots if self.memory.exists(a)]
        stack += [("addr", a) for a in roots]
        while stack:
            v = stack.pop()
            for bid in self._pointees(v):
                if bid in seen or bid not in self.blocks:
                    continue
                seen.add(bid)
                for a in self.blocks[bid].cells:
                    if self.memory.exists(a):
                        stack.append(read(a))
        return seen

    def _pointees(self, v: Any) -> Iterable[int]:
        if type(v) is Ref:
            yield v.id
        elif isinstance(v, tuple):
            if len(v) == 2 and v[0] == "addr":
                bid = self.owner.get(v[1])
                if bid is not None:
                    yield bid
                return
            for x in v:
                yield from self._pointees(x)
            target = getattr(v, "target", None)
            if isinstance(target, int) and target in self.owner:
                yield self.owner[target]

    def sweep(self, roots: Iterable[int]) -> SweepReport:
        """Post-recovery collection: reclaim persistent blocks no root reaches.

        Reports reachable blocks that were already freed as dangling.
        """
        reach = self.reachable(roots)
        dangling = sorted(b for b in reach if b in self.freed)
        garbage = self.live_persistent() - reach
        for bid in garbage:
            self.live.discard(bid)
            self.freed.add(bid)
        self.swept += len(garbage)
        return SweepReport(reachable=len(reach), reclaimed=len(garbage), dangling=dangling)
