"""Two-lock FIFO queue whose critical sections run as recoverable thunks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..lock import Lock, try_lock
from ..mutable import Mutable, create, retire
from ..pmem import BOT, Block, Ref
from ..runtime import Runtime


class _Empty:
    def __repr__(self) -> str:
        return "EMPTYQUEUE"

    def __reduce__(self):
        return "EMPTYQUEUE"

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self


EMPTYQUEUE = _Empty()


@dataclass(eq=False)
class Node(Block):
    key: Any = None
    next: int = 0

    @classmethod
    def build(cls, alloc, key: Any) -> Node:
        return cls(key=key, next=alloc(BOT))


class RQueue:
    """Head and Tail words, each protected by its own lock.

    ``Head`` always points at a dummy node; the first real element is the
    dummy's successor.  Node handles are never reused, so every cell here is
    free of ABA.
    """

    def __init__(self, rt: Runtime) -> None:
        self.rt = rt
        self.head_lock = Lock(rt)
        self.tail_lock = Lock(rt)
        dummy = rt.heap.allocate(Node.build, None)
        self.head = Mutable(rt, dummy.ref(), guard=self.head_lock.addr)
        self.tail = Mutable(rt, dummy.ref(), guard=self.tail_lock.addr)

    def rebind(self, rt: Runtime) -> RQueue:
        """The same queue over a forked runtime."""
        q = object.__new__(RQueue)
        q.rt = rt
        for name in ("head_lock", "tail_lock", "head", "tail"):
            setattr(q, name, getattr(self, name).rebind(rt))
        return q

    def _next(self, node: Ref, guard: int) -> Mutable:
        return Mutable.at(self.rt, self.rt.heap.deref(node).next, guard)

    def enqueue_thunk(self, key: Any):
        rt = self.rt
        g = self.tail_lock.addr

        def thunk() -> bool:
            nd = create(rt, Node.build, key)
            tail = self.tail.load()
            self._next(tail, g).store(nd)
            self.tail.store(nd)
            return True

        return thunk

    def dequeue_thunk(self, result: Mutable):
        rt = self.rt
        g = self.head_lock.addr

        def thunk() -> bool:
            head = self.head.load()
            head_next = self._next(head, g).load()
            if head_next is BOT:
                result.store(EMPTYQUEUE)
            else:
                result.store(rt.heap.deref(head_next).key)
                self.head.store(head_next)
                retire(rt, head)
            return True

        return thunk

    def new_result(self) -> Mutable:
        """A fresh persistent word the dequeue thunk writes its answer into."""
        return Mutable(self.rt, BOT, guard=self.head_lock.addr)

    def enqueue(self, key: Any) -> None:
        thunk = self.enqueue_thunk(key)
        while not try_lock(self.rt, self.tail_lock, thunk):
            pass

    def dequeue(self) -> Any:
        result = self.new_result()
        thunk = self.dequeue_thunk(result)
        while not try_lock(self.rt, self.head_lock, thunk):
            pass
        return self.rt.memory.read(result.addr)

    # ---------------------------------------------------------- inspection

    def roots(self) -> list[int]:
        return [self.head.addr, self.tail.addr]

    def chain(self, read=None) -> list[Ref]:
        """Nodes from Head along ``next`` links, dummy first."""
        read = read or self.rt.memory.peek
        heap = self.rt.heap
        out = [read(self.head.addr)]
        seen = {out[0]}
        while True:
            nxt = read(heap.deref(out[-1]).next)
            if nxt is BOT:
                return out
            if nxt in seen:
                raise ValueError("cycle in queue chain")
            seen.add(nxt)
            out.append(nxt)

    def contents(self, read=None) -> list[Any]:
        heap = self.rt.heap
        return [heap.deref(n).key for n in self.chain(read)[1:]]

    def check_structure(self, read=None) -> list[str]:
        """Structural problems: broken chain, Tail not at the last node, freed nodes."""
        read = read or self.rt.memory.peek
        heap = self.rt.heap
        try:
            chain = self.chain(read)
        except (ValueError, KeyError) as exc:
            return [f"queue chain unreadable: {exc}"]
        errs = []
        tail = read(self.tail.addr)
        if tail != chain[-1]:
            errs.append(f"Tail {tail!r} is not the last node {chain[-1]!r}")
        for n in chain:
            if n.id in heap.freed:
                errs.append(f"node {n!r} in the chain was reclaimed")
        return errs
