from __future__ import annotations

import pytest

from rflock.harness.sched import CoopScheduler
from rflock.pmem import Memory
from rflock.runtime import Runtime


@pytest.fixture
def sched() -> CoopScheduler:
    return CoopScheduler()


@pytest.fixture
def mem(sched: CoopScheduler) -> Memory:
    return Memory(sched)


@pytest.fixture
def rt(mem: Memory) -> Runtime:
    r = Runtime(3, mem)
    r.events = []
    return r


def pytest_terminal_summary(terminalreporter) -> None:
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
