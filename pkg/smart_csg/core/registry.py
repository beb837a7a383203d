"""Shared search state: the incumbent cell and the subspace registry.

Both objects are safe to share between workers. The incumbent only moves up
and a subspace state only moves forward; the first terminal state wins.
"""

import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from smart_csg.core.coalition import (
    CharacteristicFunction, CoalitionStructure, SizeMaxTable, SolverResult, grand_coalition, size_max_table,
    structure_value
)
from smart_csg.core.ipg import IntegerPartition, Subspace, SubspaceState, integer_partitions, subspace_upper_bound
from smart_csg.core.monitoring import Deadline, MonitoringSystem

logger = logging.getLogger(__name__)

_TERMINAL_STAT = {
    SubspaceState.SEARCHED: "subspaces_searched",
    SubspaceState.PRUNED_UB: "subspaces_pruned_ub",
    SubspaceState.PRUNED_CONNECTIVITY: "subspaces_pruned_connectivity",
}


class IncumbentCell:
    """Best structure seen so far; replaced only by a strictly greater value."""

    def __init__(self):
        self._lock = threading.Lock()
        self.value = -math.inf
        self.structure: Optional[CoalitionStructure] = None
        self.source: Optional[str] = None

    def offer(self, value: float, structure: CoalitionStructure, source: str = "") -> bool:
        with self._lock:
            if value > self.value:
                self.value = value
                self.structure = structure
                self.source = source
                logger.debug(f"Incumbent improved to {value} by {source}")
                return True
        return False

    def snapshot(self) -> Tuple[float, Optional[CoalitionStructure], Optional[str]]:
        with self._lock:
            return self.value, self.structure, self.source


class SubspaceRegistry:
    """State per integer partition, with atomic claims and forward-only moves."""

    def __init__(self, partitions: Sequence[IntegerPartition], maxes: SizeMaxTable):
        self.partitions: List[IntegerPartition] = list(partitions)
        self.index: Dict[IntegerPartition, int] = {p: i for i, p in enumerate(self.partitions)}
        self.upper_bounds: List[float] = [subspace_upper_bound(p, maxes) for p in self.partitions]
        self._states = [SubspaceState.UNSEARCHED] * len(self.partitions)
        self._lock = threading.Lock()
        self._counts = {stat: 0 for stat in _TERMINAL_STAT.values()}
        self._terminal = 0

    def __len__(self) -> int:
        return len(self.partitions)

    def state(self, i: int) -> SubspaceState:
        return self._states[i]

    def subspace(self, i: int) -> Subspace:
        return Subspace(self.partitions[i], self.upper_bounds[i], self._states[i])

    def claim(self, i: int) -> bool:
        with self._lock:
            if self._states[i] is SubspaceState.UNSEARCHED:
                self._states[i] = SubspaceState.CLAIMED
                return True
        return False

    def _finish(self, i: int, state: SubspaceState) -> bool:
        if self._states[i].terminal:
            return False
        self._states[i] = state
        self._counts[_TERMINAL_STAT[state]] += 1
        self._terminal += 1
        return True

    def mark_searched(self, i: int) -> bool:
        with self._lock:
            return self._finish(i, SubspaceState.SEARCHED)

    def prune(self, i: int, state: SubspaceState) -> bool:
        with self._lock:
            return self._finish(i, state)

    def prune_partitions(self, partitions: Iterable[IntegerPartition], state: SubspaceState) -> int:
        pruned = 0
        with self._lock:
            for p in partitions:
                if self._finish(self.index[p], state):
                    pruned += 1
        return pruned

    def prune_upper_bound(self, incumbent: float) -> int:
        """Prune every open subspace whose bound does not beat ``incumbent``."""
        pruned = 0
        with self._lock:
            for i, bound in enumerate(self.upper_bounds):
                if bound <= incumbent and self._finish(i, SubspaceState.PRUNED_UB):
                    pruned += 1
        return pruned

    def all_terminal(self) -> bool:
        return self._terminal == len(self.partitions)

    def remaining(self) -> int:
        return len(self.partitions) - self._terminal

    def counts(self) -> Dict[str, int]:
        with self._lock:
            return dict(self._counts)


@dataclass
class SearchState:
    """Everything engines share during one solve."""

    v: CharacteristicFunction
    maxes: SizeMaxTable
    registry: SubspaceRegistry
    incumbent: IncumbentCell = field(default_factory=IncumbentCell)
    monitoring: MonitoringSystem = field(default_factory=MonitoringSystem)
    deadline: Deadline = field(default_factory=Deadline)
    stop_event: threading.Event = field(default_factory=threading.Event)

    @classmethod
    def create(cls, v: CharacteristicFunction, deadline: Optional[Deadline] = None,
               monitoring: Optional[MonitoringSystem] = None, **extra) -> "SearchState":
        """Fresh state over every subspace of ``v.n``; starts the solve timer."""
        maxes = size_max_table(v)
        state = cls(v, maxes, SubspaceRegistry(integer_partitions(v.n), maxes),
                    monitoring=monitoring or MonitoringSystem(), deadline=deadline or Deadline(), **extra)
        state.monitoring.start_timing()
        return state

    def should_stop(self) -> bool:
        return self.stop_event.is_set() or self.registry.all_terminal() or self.deadline.expired()

    def interrupted(self) -> bool:
        """True when the solve ends before every subspace is accounted for."""
        return self.stop_event.is_set() or self.deadline.expired()

    def snapshot(self) -> Dict[str, object]:
        return {
            "incumbent": self.incumbent.value,
            "subspaces_remaining": self.registry.remaining(),
            "splits_evaluated": self.monitoring.count("splits_evaluated"),
        }

    def to_result(self, algorithm: str) -> SolverResult:
        """Package the incumbent; the value is recomputed from the input function."""
        self.monitoring.stop_timing()
        _, structure, source = self.incumbent.snapshot()
        if structure is None:
            structure = CoalitionStructure((grand_coalition(self.v.n),))
        optimal = self.registry.all_terminal()
        if not optimal:
            logger.warning(f"{algorithm} stopped with {self.registry.remaining()} subspaces open; result may be suboptimal")
        return SolverResult(structure, structure_value(structure, self.v), self.monitoring.stats(self.registry),
                            optimal, algorithm)
