"""Seed each built-in fault into the queue crash sweep and replay one failure.

Without a fault every crash point recovers to a durably linearizable queue;
with one, some crash points do not, and the recorded choice path replays
the exact failing run.
"""

from __future__ import annotations

from rflock.harness.explore import Bounds, replay
from rflock.harness.scenarios import registry
from rflock.runtime import FAULTS


def main() -> None:
    bounds = Bounds(preemptions=0, crashes=1)
    ex, _ = registry()["queue-crash-sweep"].run(bounds=bounds)
    print(f"no fault: {ex.failures} of {ex.schedules} schedules fail")
    for fault in sorted(FAULTS):
        sc = registry(faults=(fault,))["queue-crash-sweep"]
        ex, _ = sc.run(bounds=bounds)
        print(f"{fault}: {ex.failures} of {ex.schedules} schedules fail")
        if ex.failed:
            first = ex.failed[0]
            again = replay(sc.build, first.path, bounds)
            print(f"  replaying {first.path}")
            print(f"  -> {again.failures[0] if again.failures else 'passes'}")


if __name__ == "__main__":
    main()
