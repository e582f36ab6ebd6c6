"""Render exploration outcomes as a text summary or JSON lines.

Both formats start with the result block
``scenarios=<n> failures=<m> pwb=<..> pfence=<..> psync=<..>`` so scripts
can grep one line whatever the format.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any

from ..pmem import PersistCounters
from .explore import Bounds, Exploration


@dataclass
class ScenarioReport:
    name: str
    mode: str
    seed: int | None
    bounds: Bounds
    schedules: int
    failures: int
    stuck: int
    crashed: int
    exhausted: bool
    elapsed: float
    counters: PersistCounters
    # Costed sections seen in crash-free runs; each matched the formula unless it failed its run.
    sections: int = 0
    # (choice path, messages) of the first failing runs, then cross-run failures.
    failed: list[tuple[list[int], list[str]]] = field(default_factory=list)
    summary_failures: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failures == 0 and self.stuck == 0 and not self.summary_failures


def from_exploration(name: str, mode: str, bounds: Bounds, ex: Exploration,
                     summary_failures: list[str] | None = None) -> ScenarioReport:
    return ScenarioReport(
        name=name, mode=mode, seed=ex.seed if mode == "random" or ex.sampled else None,
        bounds=bounds, schedules=ex.schedules, failures=ex.failures, stuck=ex.stuck,
        crashed=ex.crashed, exhausted=ex.exhausted, elapsed=ex.elapsed, counters=ex.counters,
        sections=ex.sections, failed=[(r.path, r.failures) for r in ex.failed],
        summary_failures=list(summary_failures or []), warnings=list(ex.warnings))


def result_block(reports: list[ScenarioReport]) -> str:
    failures = sum(r.failures + r.stuck + bool(r.summary_failures) for r in reports)
    pwb = sum(r.counters.pwb for r in reports)
    pfence = sum(r.counters.pfence for r in reports)
    psync = sum(r.counters.psync for r in reports)
    return f"scenarios={len(reports)} failures={failures} pwb={pwb} pfence={pfence} psync={psync}"


def render_text(reports: list[ScenarioReport]) -> str:
    lines = [result_block(reports)]
    for r in reports:
        verdict = "PASS" if r.ok else "FAIL"
        b = r.bounds
        seed = f" seed={r.seed}" if r.seed is not None else ""
        lines.append(f"{verdict} {r.name}: mode={r.mode}{seed} schedules={r.schedules} "
                     f"failures={r.failures} stuck={r.stuck} crashed={r.crashed} "
                     f"exhausted={'yes' if r.exhausted else 'no'} time={r.elapsed:.1f}s")
        lines.append(f"  bounds: steps={b.steps} preemptions={b.preemptions} crashes={b.crashes} "
                     f"pauses={b.pauses}")
        lines.append(f"  persist: pwb={r.counters.pwb} pfence={r.counters.pfence} "
                     f"psync={r.counters.psync} sections={r.sections}")
        for w in r.warnings:
            lines.append(f"  warning: {w}")
        for path, msgs in r.failed:
            lines.append(f"  failing schedule {path}")
            lines += [f"    {m}" for m in msgs[:5]]
        lines += [f"  {m}" for m in r.summary_failures]
    return "\n".join(lines) + "\n"


def _jsonable(r: ScenarioReport) -> dict[str, Any]:
    d = asdict(r)
    d["ok"] = r.ok
    d["failed"] = [{"path": p, "messages": m} for p, m in r.failed]
    d["elapsed"] = round(r.elapsed, 3)
    return d


def render_json_lines(reports: list[ScenarioReport]) -> str:
    head = {"result": result_block(reports)}
    lines = [json.dumps(head)] + [json.dumps(_jsonable(r), default=repr) for r in reports]
    return "\n".join(lines) + "\n"


def render(reports: list[ScenarioReport], fmt: str = "text") -> str:
    if fmt == "text":
        return render_text(reports)
    if fmt == "json-lines":
        return render_json_lines(reports)
    raise ValueError(f"unknown report format {fmt!r}")
