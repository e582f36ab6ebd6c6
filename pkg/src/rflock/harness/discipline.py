"""Check that thunks never read one lock's data after writing another lock's data.

Updates are deferred to the end of the outermost section, so a thunk that
stores to a cell guarded by one lock and later loads a cell guarded by a
different lock may see a value that is inconsistent with its own pending
store.  Loads after stores on the same cell are served from the update log,
and cells under the same lock cannot be updated concurrently, so both are
fine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable


@dataclass(frozen=True)
class Violation:
    section: int
    store_addr: int
    store_guard: Any
    load_addr: int
    load_guard: Any

    def __str__(self) -> str:
        return (f"section {self.section}: load of {self.load_addr} (lock {self.load_guard}) "
                f"after store to {self.store_addr} (lock {self.store_guard})")


def validate_thunk_discipline(events: Iterable[tuple[Any, ...]]) -> list[Violation]:
    """Scan ``('load'|'store', tid, addr, guard, section)`` events.

    Events are grouped per executing thread and outermost section.  Cells
    without a guard (lock words, done flags) belong to the lock machinery
    and are skipped, as are other event kinds.
    """
    stores: dict[tuple[int, int], list[tuple[int, Any]]] = {}
    found: list[Violation] = []
    seen: set[Violation] = set()
    for ev in events:
        kind = ev[0]
        if kind not in ("load", "store"):
            continue
        _, tid, addr, guard, section = ev
        if section is None or guard is None:
            continue
        key = (tid, section)
        if kind == "store":
            stores.setdefault(key, []).append((addr, guard))
            continue
        for s_addr, s_guard in stores.get(key, ()):
            if s_addr != addr and s_guard != guard:
                v = Violation(section, s_addr, s_guard, addr, guard)
                if v not in seen:
                    seen.add(v)
                    found.append(v)
    return found
