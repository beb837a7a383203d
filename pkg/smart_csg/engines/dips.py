"""Distributed integer-partition search.

Subspaces are visited best upper bound first. Each one is searched by a
single worker with a depth-first branch-and-bound over coalitions whose
sizes follow the subspace's integer partition, smallest parts first.
"""

import logging
import math
import threading
from itertools import combinations
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

from smart_csg.core.coalition import CharacteristicFunction, CoalitionStructure, SizeMaxTable, SolverResult
from smart_csg.core.ipg import IntegerPartition, Subspace, SubspaceState, canonical
from smart_csg.core.monitoring import Deadline, MonitoringSystem, ProgressReporter
from smart_csg.core.registry import IncumbentCell, SearchState, SubspaceRegistry
from smart_csg.core.scheduler import Task, WorkerPool

logger = logging.getLogger(__name__)

# Branch-and-bound nodes between abort checks.
ABORT_CHECK_INTERVAL = 1024


class SearchInterrupted(Exception):
    """Raised inside a subspace search when its abort hook fires."""


class SubspaceQueue:
    """Registry indices in search order with a shared claim cursor.

    The cursor only moves forward, and a claim succeeds only on an
    UNSEARCHED subspace, so no entry is handed out twice.
    """

    def __init__(self, registry: SubspaceRegistry, order: Sequence[int]):
        self.registry = registry
        self.order: List[int] = list(order)
        self._cursor = 0
        self._lock = threading.Lock()

    @property
    def entries(self) -> List[Subspace]:
        return [self.registry.subspace(i) for i in self.order]

    def claim_next(self) -> Optional[int]:
        """Claim the next unclaimed open subspace; None once the queue is exhausted."""
        with self._lock:
            while self._cursor < len(self.order):
                i = self.order[self._cursor]
                self._cursor += 1
                if self.registry.claim(i):
                    return i
        return None

    @property
    def exhausted(self) -> bool:
        return self._cursor >= len(self.order)

    def has_unclaimed(self) -> bool:
        with self._lock:
            return any(self.registry.state(i) is SubspaceState.UNSEARCHED for i in self.order[self._cursor:])


def order_subspaces(partitions: Sequence[IntegerPartition], maxes: SizeMaxTable,
                    registry: Optional[SubspaceRegistry] = None) -> SubspaceQueue:
    """Queue subspaces by descending upper bound, ties in lexicographic partition order.

    Args:
        partitions: Integer partitions to search
        maxes: Best value per coalition size
        registry: Shared registry; a private one is built when omitted

    Returns:
        SubspaceQueue over ``registry``
    """
    if registry is None:
        registry = SubspaceRegistry([canonical(p) for p in partitions], maxes)
    indices = [registry.index[canonical(p)] for p in partitions]
    order = sorted(indices, key=lambda i: (-registry.upper_bounds[i], registry.partitions[i]))
    return SubspaceQueue(registry, order)


def search_subspace(parts: IntegerPartition, v: CharacteristicFunction, maxes: SizeMaxTable,
                    incumbent: float = -math.inf, monitoring: Optional[MonitoringSystem] = None,
                    live_bound: Optional[Callable[[], float]] = None,
                    abort: Optional[Callable[[], bool]] = None) -> Tuple[Optional[float], Optional[CoalitionStructure]]:
    """Branch-and-bound over the structures of one subspace.

    A branch is cut when its partial value plus the best values of the
    remaining part sizes falls strictly below the current threshold, the
    larger of the incumbent and the best leaf found so far.

    Args:
        parts: Integer partition of ``v.n``
        v: Characteristic function
        maxes: Best value per coalition size
        incumbent: Value a structure must beat
        monitoring: Receives node and leaf counts
        live_bound: Returns the shared incumbent, polled at every node
        abort: Polled every ABORT_CHECK_INTERVAL nodes

    Returns:
        ``(value, structure)`` of the best structure strictly above the
        incumbent, or ``(None, None)``
    """
    parts = canonical(parts)
    values = v.as_list()
    depth_count = len(parts)
    tail = [0.0] * (depth_count + 1)
    for depth in range(depth_count - 1, -1, -1):
        tail[depth] = tail[depth + 1] + maxes[parts[depth]]

    best = {"value": -math.inf, "masks": None}
    counters = {"nodes": 0, "leaves": 0}
    chosen: List[int] = []

    def threshold() -> float:
        bound = max(incumbent, best["value"])
        if live_bound is not None:
            bound = max(bound, live_bound())
        return bound

    def descend(depth: int, available: int, partial: float, previous_low: int):
        size = parts[depth]
        same_run = depth > 0 and parts[depth - 1] == size
        rest = tail[depth + 1]
        last = depth == depth_count - 1
        members = [a for a in range(v.n) if available >> a & 1]
        for combo in combinations(members, size):
            # equal-size coalitions are taken in increasing order of their lowest agent
            if same_run and combo[0] <= previous_low:
                continue
            mask = 0
            for agent in combo:
                mask |= 1 << agent
            value = partial + values[mask]
            if value + rest < threshold():
                continue
            counters["nodes"] += 1
            if abort is not None and counters["nodes"] % ABORT_CHECK_INTERVAL == 0 and abort():
                raise SearchInterrupted(f"search of {list(parts)} aborted")
            chosen.append(mask)
            if last:
                counters["leaves"] += 1
                if value > threshold():
                    best["value"] = value
                    best["masks"] = list(chosen)
            else:
                descend(depth + 1, available ^ mask, value, combo[0])
            chosen.pop()

    try:
        descend(0, v.grand, 0.0, -1)
    finally:
        if monitoring is not None:
            monitoring.increment("bnb_nodes_expanded", counters["nodes"])
            monitoring.increment("bnb_leaves", counters["leaves"])

    if best["masks"] is None:
        return None, None
    return best["value"], CoalitionStructure.from_masks(best["masks"])


def dips_worker(queue: SubspaceQueue, state: SearchState, name: str = "dips") -> Iterator[Optional[int]]:
    """Worker loop as a generator; yields once per claimed subspace.

    Args:
        queue: Shared subspace queue
        state: Shared incumbent, registry and monitoring
        name: Label used for provenance and logs
    """
    registry = queue.registry
    while True:
        if state.should_stop():
            return
        i = queue.claim_next()
        if i is None:
            return
        parts = registry.partitions[i]
        if registry.upper_bounds[i] <= state.incumbent.value:
            registry.prune(i, SubspaceState.PRUNED_UB)
            yield i
            continue
        try:
            value, structure = search_subspace(
                parts, state.v, state.maxes, state.incumbent.value, state.monitoring,
                live_bound=lambda: state.incumbent.value,
                abort=lambda: state.interrupted() or registry.state(i).terminal,
            )
        except SearchInterrupted:
            if registry.state(i).terminal:
                # settled elsewhere mid-search; move on
                yield i
                continue
            logger.debug(f"{name}: left {list(parts)} unsearched")
            return
        if structure is not None:
            state.incumbent.offer(value, structure, name)
        registry.mark_searched(i)
        yield i


def dips_run(queue: SubspaceQueue, v: CharacteristicFunction, maxes: SizeMaxTable,
             incumbent: Optional[IncumbentCell] = None, workers: int = 1,
             deadline: Optional[Deadline] = None, monitoring: Optional[MonitoringSystem] = None,
             progress_interval: Optional[float] = None) -> SolverResult:
    """Search every queued subspace with ``workers`` DIPS workers.

    Args:
        queue: Subspace queue (see :func:`order_subspaces`)
        v: Characteristic function
        maxes: Best value per coalition size
        incumbent: Shared incumbent, possibly preloaded by another engine
        workers: Worker count
        deadline: Optional time limit
        monitoring: Optional monitoring system
        progress_interval: Seconds between progress log lines

    Returns:
        The incumbent; optimal once every subspace is settled
    """
    state = SearchState(v, maxes, queue.registry, incumbent or IncumbentCell(),
                        monitoring or MonitoringSystem(), deadline or Deadline())
    state.monitoring.start_timing()
    progress = ProgressReporter(progress_interval, state.snapshot) if progress_interval else None
    pool = WorkerPool(workers, progress=progress)
    for k in range(max(1, workers)):
        pool.submit(Task(f"dips-{k + 1}", dips_worker(queue, state, f"dips-{k + 1}"), kind="dips"))
    pool.run(state.should_stop)
    return state.to_result("dips")
