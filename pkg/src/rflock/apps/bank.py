"""Accounts with one lock each; a transfer nests the second lock inside the first."""

from __future__ import annotations

from typing import Sequence

from ..lock import Lock, try_lock
from ..mutable import Mutable
from ..runtime import Runtime


class NestedBank:
    """Balances are stored as ``(amount, version)`` so no word ever repeats a value."""

    def __init__(self, rt: Runtime, balances: Sequence[int]) -> None:
        self.rt = rt
        self.locks = [Lock(rt) for _ in balances]
        self.accounts = [Mutable(rt, (b, 0), guard=lk.addr) for b, lk in zip(balances, self.locks)]

    def rebind(self, rt: Runtime) -> NestedBank:
        """The same accounts over a forked runtime."""
        b = object.__new__(NestedBank)
        b.rt = rt
        b.locks = [lk.rebind(rt) for lk in self.locks]
        b.accounts = [acc.rebind(rt) for acc in self.accounts]
        return b

    def transfer_thunk(self, src: int, dst: int, amount: int):
        if src == dst:
            raise ValueError("transfer needs two distinct accounts")
        rt = self.rt
        lo, hi = sorted((src, dst))
        a, b = self.accounts[src], self.accounts[dst]

        def inner() -> bool:
            sa, va = a.load()
            sb, vb = b.load()
            a.store((sa - amount, va + 1))
            b.store((sb + amount, vb + 1))
            return True

        def outer() -> bool:
            return try_lock(rt, self.locks[hi], inner)

        return lo, outer

    def transfer(self, src: int, dst: int, amount: int) -> bool:
        """Move ``amount``; retries until both locks were ours in one section."""
        lo, outer = self.transfer_thunk(src, dst, amount)
        while not try_lock(self.rt, self.locks[lo], outer):
            pass
        return True

    def balances(self, read=None) -> list[int]:
        read = read or self.rt.memory.peek
        return [read(acc.addr)[0] for acc in self.accounts]

    def roots(self) -> list[int]:
        return [acc.addr for acc in self.accounts]
