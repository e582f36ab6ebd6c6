"""Deterministic exploration of RFlock programs under interleavings and crashes."""

from .discipline import Violation, validate_thunk_discipline
from .explore import Bounds, DFSChooser, Exploration, RandomChooser, RunResult, execute, explore, replay
from .history import (ANY, BankOracle, History, HistoryTooLarge, Op, QueueOracle,
                      check_durable_linearizability)
from .sched import CoopScheduler, NativeScheduler, run_native

__all__ = [
    "ANY", "BankOracle", "Bounds", "CoopScheduler", "DFSChooser", "Exploration", "History",
    "HistoryTooLarge", "NativeScheduler", "Op", "QueueOracle", "RandomChooser", "RunResult",
    "Violation", "check_durable_linearizability", "execute", "explore", "replay", "run_native",
    "validate_thunk_discipline",
]
