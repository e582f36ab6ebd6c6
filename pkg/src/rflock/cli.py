"""Command-line front end: run built-in scenarios and report the verdicts.

Exit status is 0 when every check passed, 1 when some check failed and 2
when the command line or config file could not be parsed.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .harness.explore import replay
from .harness.report import ScenarioReport, from_exploration, render
from .harness.scenarios import registry
from .runtime import FAULTS

SCENARIOS = ("queue-smoke", "queue-crash-sweep", "queue-idempotence", "bank-nested", "livelock-bound")
PROGRAMS = {"queue-smoke": "queue", "queue-crash-sweep": "queue", "queue-idempotence": "queue",
            "bank-nested": "bank", "livelock-bound": "queue"}
MODES = ("exhaustive", "random")
FORMATS = ("text", "json-lines")


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioSpec:
    """What to run; built from a config file and overridden by flags."""

    scenario: str = "queue-crash-sweep"
    program: str | None = None
    threads: int | None = None
    steps: int | None = None
    crashes: int | None = None
    preemptions: int | None = None
    mode: str = "exhaustive"
    seed: int = 0
    runs: int = 1000
    max_schedules: int = 200_000
    format: str = "text"
    faults: tuple[str, ...] = ()
    output: str | None = None
    replay: list[int] | None = field(default=None)

    def validate(self) -> None:
        names = SCENARIOS + ("all",)
        if self.scenario not in names:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {', '.join(names)}")
        if self.program is not None and self.scenario != "all" and PROGRAMS[self.scenario] != self.program:
            raise ConfigError(f"scenario {self.scenario} runs the {PROGRAMS[self.scenario]} program, "
                              f"not {self.program}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}")
        for f in self.faults:
            if f not in FAULTS:
                raise ConfigError(f"unknown fault {f!r}; choose from {', '.join(sorted(FAULTS))}")
        for name in ("threads", "steps", "crashes", "preemptions"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ConfigError(f"{name} must not be negative")
        if self.threads is not None and not 1 <= self.threads <= 3:
            raise ConfigError("threads must be between 1 and 3")
        if self.replay is not None and self.scenario == "all":
            raise ConfigError("--replay needs one scenario")


_INT_KEYS = {"threads", "steps", "crashes", "preemptions", "seed", "runs", "max_schedules"}
_STR_KEYS = {"scenario", "program", "mode", "format", "output"}


def parse_config(text: str) -> dict[str, object]:
    """Parse ``key = value`` lines; ``#`` starts a comment.  Unknown keys are errors."""
    out: dict[str, object] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key in _INT_KEYS:
            try:
                out[key] = int(value)
            except ValueError:
                raise ConfigError(f"line {n}: {key} needs an integer, got {value!r}") from None
        elif key in _STR_KEYS:
            out[key] = value
        elif key in ("fault_inject", "faults"):
            out["faults"] = tuple(v.strip() for v in value.split(",") if v.strip())
        else:
            raise ConfigError(f"line {n}: unknown key {key!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rflock", description="Explore RFlock scenarios under crashes.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario (or all) and report")
    run.add_argument("--config", help="key=value file; flags override it")
    run.add_argument("--scenario", help=f"one of {', '.join(SCENARIOS)}, or all")
    run.add_argument("--threads", type=int)
    run.add_argument("--steps", type=int, help="step bound per run")
    run.add_argument("--crashes", type=int, help="crash budget per run")
    run.add_argument("--preemptions", type=int, help="preemption bound for exhaustive mode")
    run.add_argument("--mode", choices=MODES)
    run.add_argument("--seed", type=int)
    run.add_argument("--runs", type=int, help="random runs to sample")
    run.add_argument("--max-schedules", type=int, dest="max_schedules")
    run.add_argument("--format", choices=FORMATS)
    run.add_argument("--fault-inject", action="append", dest="faults", metavar="FAULT",
                     help=f"seed a bug: {', '.join(sorted(FAULTS))}")
    run.add_argument("--output", help="also write the report here")
    run.add_argument("--replay", help="comma-separated choice path of one run to re-execute")
    sub.add_parser("list", help="list the built-in scenarios")
    return p


def spec_from_args(args: argparse.Namespace) -> ScenarioSpec:
    values: dict[str, object] = {}
    if args.config:
        try:
            values.update(parse_config(Path(args.config).read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    for name in ("scenario", "threads", "steps", "crashes", "preemptions", "mode", "seed", "runs",
                 "max_schedules", "format", "output"):
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    if args.faults:
        values["faults"] = tuple(args.faults)
    if args.replay is not None:
        try:
            values["replay"] = [int(x) for x in args.replay.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"bad --replay path {args.replay!r}") from None
    spec = ScenarioSpec(**values)  # type: ignore[arg-type]
    spec.validate()
    return spec


def execute_spec(spec: ScenarioSpec) -> list[ScenarioReport]:
    reg = registry(spec.threads, spec.faults, spec.crashes)
    names = SCENARIOS if spec.scenario == "all" else (spec.scenario,)
    reports = []
    for name in names:
        sc = reg[name]
        bounds = sc.bounds
        if spec.steps is not None:
            bounds = dataclasses.replace(bounds, steps=spec.steps)
        if spec.preemptions is not None:
            bounds = dataclasses.replace(bounds, preemptions=spec.preemptions)
        ex, extra = sc.run(spec.mode, spec.seed, spec.runs, bounds, spec.max_schedules)
        reports.append(from_exploration(name, spec.mode, bounds, ex, extra))
    return reports


def _replay(spec: ScenarioSpec) -> int:
    sc = registry(spec.threads, spec.faults, spec.crashes)[spec.scenario]
    bounds = sc.bounds if spec.steps is None else dataclasses.replace(sc.bounds, steps=spec.steps)
    if spec.preemptions is not None:
        bounds = dataclasses.replace(bounds, preemptions=spec.preemptions)
    r = replay(sc.build, spec.replay or [], bounds)
    for line in r.world.memory.trace or ():
        print(line, file=sys.stderr)
    print(f"replay {spec.scenario} {r.path}: crashes={r.crashes} steps={r.steps} "
          f"{'FAIL' if r.failures else 'PASS'}")
    for m in r.failures:
        print(f"  {m}")
    return 1 if r.failures else 0


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "list":
        reg = registry()
        for name in SCENARIOS:
            print(f"{name}: {reg[name].description}")
        return 0
    try:
        spec = spec_from_args(args)
    except (ConfigError, TypeError) as exc:
        print(f"rflock: error: {exc}", file=sys.stderr)
        return 2
    if spec.replay is not None:
        return _replay(spec)
    reports = execute_spec(spec)
    text = render(reports, spec.format)
    sys.stdout.write(text)
    if spec.output:
        Path(spec.output).write_text(text)
    return 0 if all(r.ok for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
