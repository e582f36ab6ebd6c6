from .bank import NestedBank
from .queue import EMPTYQUEUE, Node, RQueue

__all__ = ["EMPTYQUEUE", "NestedBank", "Node", "RQueue"]
