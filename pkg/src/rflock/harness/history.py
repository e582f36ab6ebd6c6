"""Operation histories and a brute-force durable-linearizability checker."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Hashable, Protocol, Sequence

PENDING = object()
ANY = object()  # a response the checker must not constrain


@dataclass
class Op:
    tid: int
    name: str
    arg: Any
    invoked: int
    responded: int | None = None
    result: Any = PENDING
    # Crash-free segment the operation was invoked in.
    segment: int = 0

    @property
    def complete(self) -> bool:
        return self.responded is not None

    def __repr__(self) -> str:
        res = "…" if not self.complete else repr(self.result)
        return f"t{self.tid}:{self.name}({'' if self.arg is None else self.arg!r})->{res}"


@dataclass
class History:
    """Invocations and responses stamped with a shared logical clock."""

    ops: list[Op] = field(default_factory=list)
    clock: int = 0
    segment: int = 0

    def invoke(self, tid: int, name: str, arg: Any = None) -> Op:
        self.clock += 1
        op = Op(tid, name, arg, self.clock, segment=self.segment)
        self.ops.append(op)
        return op

    def respond(self, op: Op, result: Any = None) -> None:
        self.clock += 1
        op.responded = self.clock
        op.result = result

    def crash(self) -> None:
        self.clock += 1
        self.segment += 1

    def copy(self) -> History:
        return History([replace(o) for o in self.ops], self.clock, self.segment)

    def well_formed(self) -> bool:
        open_: dict[int, Op] = {}
        for op in sorted(self.ops, key=lambda o: o.invoked):
            prev = open_.get(op.tid)
            if prev is not None and prev.segment == op.segment and (
                    not prev.complete or prev.responded > op.invoked):
                return False
            open_[op.tid] = op
        return True


class Oracle(Protocol):
    """Sequential model of the object: ``apply`` returns (new state, response)."""

    def initial(self) -> Hashable: ...
    def apply(self, state: Hashable, op: Op) -> tuple[Hashable, Any]: ...


class QueueOracle:
    EMPTY: Any = None

    def __init__(self, empty: Any) -> None:
        self.EMPTY = empty

    def initial(self) -> tuple:
        return ()

    def apply(self, state: tuple, op: Op) -> tuple[tuple, Any]:
        if op.name == "enq":
            return state + (op.arg,), None
        if op.name == "deq":
            if not state:
                return state, self.EMPTY
            return state[1:], state[0]
        raise ValueError(op.name)


class BankOracle:
    def __init__(self, balances: Sequence[int]) -> None:
        self.start = tuple(balances)

    def initial(self) -> tuple:
        return self.start

    def apply(self, state: tuple, op: Op) -> tuple[tuple, Any]:
        src, dst, amount = op.arg
        s = list(state)
        s[src] -= amount
        s[dst] += amount
        return tuple(s), True


MAX_OPS = 8


class HistoryTooLarge(ValueError):
    pass


def check_durable_linearizability(history: History, final_state: Hashable | Callable[[Hashable], bool],
                                  oracle: Oracle) -> tuple[bool, list[Op] | None]:
    """Search for a witness order of the history.

    The order must contain every completed operation and any subset of the
    operations cut off by a crash, respect real-time order (an operation that
    responded before another was invoked comes first; crashes separate
    segments), reproduce every recorded response, and end in
    ``final_state`` (or a state the predicate accepts).
    Returns the verdict and a witness order when one exists.
    """
    ops = sorted(history.ops, key=lambda o: o.invoked)
    if len(ops) > MAX_OPS:
        raise HistoryTooLarge(f"{len(ops)} operations; the checker handles at most {MAX_OPS}")
    accept = final_state if callable(final_state) else (lambda s: s == final_state)
    n = len(ops)
    # before[j]: operations that must be placed (or dropped) ahead of j.
    before = [0] * n
    for j, b in enumerate(ops):
        for i, a in enumerate(ops):
            if i == j:
                continue
            if (a.complete and a.responded < b.invoked) or a.segment < b.segment:
                before[j] |= 1 << i
    required = 0
    for i, o in enumerate(ops):
        if o.complete:
            required |= 1 << i
    full = (1 << n) - 1
    failed: set[tuple[int, Hashable]] = set()
    order: list[Op] = []

    def dfs(decided: int, state: Hashable) -> bool:
        # ``decided`` holds placed and dropped operations alike.
        if decided == full:
            return accept(state)
        key = (decided, state)
        if key in failed:
            return False
        for i in range(n):
            bit = 1 << i
            if decided & bit or (before[i] & ~decided):
                continue
            o = ops[i]
            nstate, resp = oracle.apply(state, o)
            if not o.complete or o.result is ANY or resp == o.result:
                order.append(o)
                if dfs(decided | bit, nstate):
                    return True
                order.pop()
            if not (required & bit) and dfs(decided | bit, state):
                return True
        failed.add(key)
        return False

    ok = dfs(0, oracle.initial())
    return ok, (list(order) if ok else None)
