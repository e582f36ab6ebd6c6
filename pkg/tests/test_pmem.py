from __future__ import annotations

import itertools
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rflock.harness.explore import DFSChooser
from rflock.harness.sched import CoopScheduler
from rflock.pmem import BOT, PERSISTENT, STATIC, VOLATILE, Memory, MemoryFault


def crash_outcomes(program, addrs_of) -> set[tuple]:
    """Every post-crash value tuple the memory can produce for ``program``."""
    dfs = DFSChooser()
    out = set()
    while True:
        dfs.begin()
        sched = CoopScheduler()
        mem = Memory(sched, dfs)
        addrs = addrs_of(mem)
        program(mem, sched, addrs)
        mem.crash()
        out.add(tuple(mem.read(a) for a in addrs))
        if not dfs.advance():
            return out


# -------------------------------------------------------------- primitives


def test_read_own_write(mem):
    a = mem.alloc(0)
    mem.write(a, 5)
    assert mem.read(a) == 5


def test_fresh_cell_reads_bottom(mem):
    assert mem.read(mem.alloc()) is BOT


def test_bottom_differs_from_falsy_words():
    assert BOT != 0 and BOT != False and BOT is not None  # noqa: E712


def test_synced_write_survives_crash(mem):
    a = mem.alloc(0)
    mem.write(a, 7)
    mem.pwb(a)
    mem.psync()
    mem.crash()
    assert mem.read(a) == 7


def test_unpersisted_write_is_lost_without_eviction(mem):
    # The default chooser takes the least persisted outcome: nothing evicted.
    a = mem.alloc(0)
    mem.write(a, 1)
    mem.crash()
    assert mem.read(a) == 0


def test_unflushed_write_survives_only_by_eviction():
    assert crash_outcomes(lambda m, s, a: m.write(a[0], 1), lambda m: [m.alloc(0)]) == {(0,), (1,)}


def test_evicted_write_survives(mem):
    a = mem.alloc(0)
    mem.write(a, 2)
    mem.evict(a)
    mem.crash()
    assert mem.read(a) == 2


def test_evict_unwritten_cell_keeps_value(mem):
    a = mem.alloc(4)
    mem.evict(a)
    mem.crash()
    assert mem.read(a) == 4


def test_cas_success_and_failure(mem):
    a = mem.alloc()
    assert mem.cas(a, BOT, 9) is True
    assert mem.read(a) == 9
    assert mem.cas(a, BOT, 7) is False
    assert mem.read(a) == 9


def test_unknown_address_faults(mem):
    with pytest.raises(MemoryFault):
        mem.read(12345)


def test_pwb_then_crash_may_or_may_not_persist():
    def prog(m, s, a):
        m.write(a[0], 3)
        m.pwb(a[0])
    assert crash_outcomes(prog, lambda m: [m.alloc(0)]) == {(0,), (3,)}


def test_pwb_snapshots_the_value_at_issue_time(mem):
    a = mem.alloc(0)
    mem.write(a, 3)
    mem.pwb(a)
    mem.write(a, 4)
    mem.psync()
    assert mem.persisted(a) == 3
    assert mem.read(a) == 4


def test_fence_orders_write_backs():
    def prog(m, s, a):
        m.write(a[0], 1)
        m.pwb(a[0])
        m.pfence()
        m.write(a[1], 1)
        m.pwb(a[1])
    outs = crash_outcomes(prog, lambda m: [m.alloc(0), m.alloc(0)])
    # b never persisted while a is not
    assert (0, 1) not in outs
    assert outs == {(0, 0), (1, 0), (1, 1)}


def test_fence_alone_does_not_complete():
    def prog(m, s, a):
        m.write(a[0], 1)
        m.pwb(a[0])
        m.pfence()
    assert crash_outcomes(prog, lambda m: [m.alloc(0)]) == {(0,), (1,)}


def test_psync_completes_everything():
    def prog(m, s, a):
        m.write(a[0], 1)
        m.write(a[1], 2)
        m.pwb(a[0])
        m.pwb(a[1])
        m.psync()
    assert crash_outcomes(prog, lambda m: [m.alloc(0), m.alloc(0)]) == {(1, 2)}


def test_empty_fence_and_sync_only_count(mem):
    mem.pfence()
    mem.psync()
    assert mem.total_counters().as_tuple() == (0, 1, 1)


def test_crash_without_activity_keeps_initial_state(mem):
    a, b = mem.alloc(1), mem.alloc(BOT)
    mem.crash()
    assert (mem.read(a), mem.read(b)) == (1, BOT)


def test_crash_drops_volatile_and_resets_static(mem):
    v = mem.alloc(5, VOLATILE)
    s = mem.alloc(0, STATIC)
    mem.write(s, 8)
    mem.pwb(s)
    mem.psync()
    mem.crash()
    assert mem.read(s) == 0
    with pytest.raises(MemoryFault):
        mem.read(v)


def test_lazy_ranges_survive_by_kind(mem):
    p = mem.alloc_range(4, BOT, PERSISTENT)
    v = mem.alloc_range(4, BOT, VOLATILE)
    mem.write(p[2], 1)
    mem.pwb(p[2])
    mem.psync()
    mem.crash()
    assert mem.read(p[2]) == 1 and mem.read(p[3]) is BOT
    assert not mem.exists(v[0])


def test_counters_per_thread(mem, sched):
    a = mem.alloc(0)
    sched.tid = 1
    mem.pwb(a)
    mem.pfence()
    sched.tid = 2
    mem.psync()
    assert mem.counters[1].as_tuple() == (1, 1, 0)
    assert mem.counters[2].as_tuple() == (0, 0, 1)


def test_trace_line_format(mem):
    lines: list[str] = []
    mem.trace_sink = lines.append
    a = mem.alloc(0)
    mem.write(a, 3)
    mem.pfence()
    assert re.fullmatch(rf"step=\d+ t=0 op=write addr={a} val=3", lines[0])
    assert re.fullmatch(r"step=\d+ t=0 op=pfence addr=- val=None", lines[1])


def test_trace_env_switch(monkeypatch):
    monkeypatch.setenv("RFLOCK_TRACE", "1")
    m = Memory()
    m.write(m.alloc(0), 1)
    assert m.trace and m.trace[0].endswith("op=write addr=1 val=1")


def test_fork_is_independent(mem):
    a = mem.alloc(0)
    mem.write(a, 1)
    f = mem.fork()
    f.write(a, 2)
    assert mem.read(a) == 1 and f.read(a) == 2


def test_unresolved_cells_resolve_once(mem):
    a = mem.alloc(0)
    mem.write(a, 1)
    mem.pwb(a)
    mem.crash()
    first = mem.read(a)
    assert mem.read(a) == first and mem.unresolved() == []


# ------------------------------------------------- heap bookkeeping


def test_heap_balance_and_double_free(mem):
    from rflock.logs import Log
    heap = mem.heap
    b = heap.allocate(Log.build, 0, 2)
    assert heap.balanced() and heap.live == {b.id}
    heap.free(b.ref())
    heap.free(b.ref())
    assert heap.double_frees == [b.id] and heap.balanced()


def test_sweep_reclaims_unreachable_and_reports_dangling(mem):
    from rflock.logs import Log
    heap = mem.heap
    root = mem.alloc(BOT)
    kept = heap.allocate(Log.build, 0, 1)
    lost = heap.allocate(Log.build, 0, 1)
    mem.poke(root, kept.ref())
    rep = heap.sweep([root])
    assert rep.reclaimed == 1 and lost.id in heap.freed and rep.dangling == []
    heap.free(kept.ref())
    assert heap.sweep([root]).dangling == [kept.id]


# ------------------------------------ crash outcomes against a declarative model

# A program is a list of (tid, op, cell) with op in write/pwb/pfence/psync;
# writes store a fresh value so every history entry is distinct.
op_st = st.tuples(st.integers(0, 1), st.sampled_from(["write", "write", "pwb", "pfence", "psync"]),
                  st.integers(0, 1))


def _run(mem: Memory, sched: CoopScheduler, addrs, prog) -> None:
    for n, (tid, op, c) in enumerate(prog):
        sched.tid = tid
        if op == "write":
            mem.write(addrs[c], n + 1)
        elif op == "pwb":
            mem.pwb(addrs[c])
        elif op == "pfence":
            mem.pfence()
        else:
            mem.psync()


def declarative_outcomes(prog, ncells: int = 2) -> set[tuple]:
    """Post-crash states, from the definition rather than from the simulator.

    Each cell ends with one write of its history (or its initial value).  A
    choice is admissible when, for the write chosen on every cell, all pwbs
    its thread issued in strictly earlier fence epochs have completed (the
    cell they flushed holds their snapshot or something newer), and when
    every pwb followed by a psync of its thread has completed.
    """
    history: list[list[tuple[int, int, int]]] = [[(0, -1, -1)] for _ in range(ncells)]  # (value, tid, epoch)
    pwbs: list[tuple[int, int, int, int]] = []  # (tid, epoch, cell, snapshot index)
    epoch = {0: 0, 1: 0}
    synced: list[tuple[int, int]] = []  # (cell, snapshot index) forced by a later psync
    pending: dict[int, list[tuple[int, int]]] = {0: [], 1: []}
    for n, (tid, op, c) in enumerate(prog):
        if op == "write":
            history[c].append((n + 1, tid, epoch[tid]))
        elif op == "pwb":
            pwbs.append((tid, epoch[tid], c, len(history[c]) - 1))
            pending[tid].append((c, len(history[c]) - 1))
        elif op == "pfence":
            epoch[tid] += 1
        else:
            synced += pending[tid]
            pending[tid] = []
            epoch[tid] += 1
    # Everything before a psync is persisted; the floor per cell.
    floor = [0] * ncells
    for c, j in synced:
        floor[c] = max(floor[c], j)
    out = set()
    for idx in itertools.product(*(range(len(h)) for h in history)):
        if any(idx[c] < floor[c] for c in range(ncells)):
            continue
        ok = True
        for c in range(ncells):
            _, wt, we = history[c][idx[c]]
            if wt < 0:
                continue
            for pt, pe, pc, pj in pwbs:
                if pt == wt and pe < we and idx[pc] < pj:
                    ok = False
        if ok:
            out.add(tuple(history[c][idx[c]][0] for c in range(ncells)))
    return out


@settings(max_examples=150, deadline=None)
@given(st.lists(op_st, max_size=8))
def test_crash_outcomes_match_declarative_model(prog):
    got = crash_outcomes(lambda m, s, a: _run(m, s, a, prog), lambda m: [m.alloc(0), m.alloc(0)])
    assert got == declarative_outcomes(prog)


@settings(max_examples=100, deadline=None)
@given(st.lists(op_st, max_size=8))
def test_persisted_values_come_from_the_write_history(prog):
    written = {0} | {n + 1 for n, (_, op, _) in enumerate(prog) if op == "write"}
    got = crash_outcomes(lambda m, s, a: _run(m, s, a, prog), lambda m: [m.alloc(0), m.alloc(0)])
    assert all(v in written for out in got for v in out)
