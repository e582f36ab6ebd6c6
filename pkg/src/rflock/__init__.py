"""Recoverable lock-free try-locks on a simulated persistent memory."""

from __future__ import annotations

from .descriptor import ThreadContext, create_descr, retire_descr, run_descr
from .lock import UNLOCKED, Lock, LockWord, recover, try_lock, unlock
from .logs import LOCK, READ, UPDATE, LockRec, LogOverflow, Update, commit_value, fetch_value
from .mutable import Mutable, create, retire
from .pmem import BOT, PERSISTENT, STATIC, VOLATILE, Memory, MemoryFault, PersistCounters, Ref
from .runtime import FAULTS, Runtime

__all__ = [
    "BOT", "FAULTS", "LOCK", "PERSISTENT", "READ", "STATIC", "UNLOCKED", "UPDATE", "VOLATILE",
    "Lock", "LockRec", "LockWord", "LogOverflow", "Memory", "MemoryFault", "Mutable",
    "PersistCounters", "Ref", "Runtime", "ThreadContext", "Update",
    "commit_value", "create", "create_descr", "fetch_value", "recover", "retire",
    "retire_descr", "run_descr", "try_lock", "unlock",
]
