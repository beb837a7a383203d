"""Gradual search.

One DP process per tuned size set, all sharing an incumbent, a subspace
registry and a partition graph whose edges appear as sizes finish. After
each size a process offers its best structure so far, then prunes the
subspaces it has fully searched (those connected to the bottom node through
its own evaluated sizes) and every subspace whose upper bound does not beat
the incumbent.
"""

import logging
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set

from smart_csg.core.coalition import CharacteristicFunction, CoalitionStructure, SolverResult, structure_value
from smart_csg.core.errors import PreconditionException
from smart_csg.core.ipg import Edge, IntegerPartition, SubspaceState, integer_partitions, reachable_subspaces, split_edges
from smart_csg.core.monitoring import Deadline, MonitoringSystem, ProgressReporter
from smart_csg.core.registry import SearchState
from smart_csg.core.scheduler import Task, WorkerPool
from smart_csg.engines.cdp import DPTables, iter_sizes
from smart_csg.offline.sizes import SizeSet

logger = logging.getLogger(__name__)


class EdgeSet:
    """Append-only set of partition-graph edges, each tagged with the process that added it."""

    def __init__(self):
        self._lock = threading.Lock()
        self._edges: Dict[Edge, str] = {}

    def add_split(self, n: int, size: int, source: str) -> int:
        added = 0
        with self._lock:
            for edge in split_edges(n, size):
                if edge not in self._edges:
                    self._edges[edge] = source
                    added += 1
        return added

    def provenance(self, edge: Edge) -> Optional[str]:
        return self._edges.get(edge)

    def __len__(self) -> int:
        return len(self._edges)

    def connected(self, n: int, sizes: Iterable[int]) -> FrozenSet[IntegerPartition]:
        """Partitions reachable from ``[n]`` over edges whose split size is in ``sizes``."""
        usable = set(sizes)
        with self._lock:
            edges = [edge for edge in self._edges if edge.split in usable]
        upward: Dict[IntegerPartition, List[IntegerPartition]] = {}
        for edge in edges:
            upward.setdefault(edge.lower, []).append(edge.upper)
        start = (n,)
        seen: Set[IntegerPartition] = {start}
        frontier = deque([start])
        while frontier:
            node = frontier.popleft()
            for nxt in upward.get(node, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return frozenset(seen)


@dataclass
class GradState(SearchState):
    edges: EdgeSet = field(default_factory=EdgeSet)
    active_sets: List[SizeSet] = field(default_factory=list)


def _offer_blocks(state: SearchState, tables: DPTables, blocks: Sequence[int], source: str):
    masks: List[int] = []
    for block in blocks:
        masks.extend(tables.extract(block).coalitions)
    structure = CoalitionStructure.from_masks(masks)
    state.incumbent.offer(structure_value(structure, state.v), structure, source)


def search_steps(state: SearchState, edges: EdgeSet, sizes: SizeSet, tables: DPTables,
                 name: str, early_exit: bool = True) -> Iterator[int]:
    """Generator form of a search process; yields each finished size.

    Args:
        state: Shared incumbent, registry and monitoring
        edges: Shared partition-graph edges
        sizes: Sizes this process evaluates (``n`` last)
        tables: DP tables (private or shared)
        name: Label used for provenance and logs
        early_exit: Stop once every subspace is terminal
    """
    v = state.v
    n = v.n
    grand = v.grand
    registry = state.registry
    # [n] holds only the grand coalition, which the incumbent now covers
    _offer_blocks(state, tables, [grand], name)
    registry.prune_partitions([(n,)], SubspaceState.PRUNED_CONNECTIVITY)

    done: List[int] = []
    for size, completed in iter_sizes(tables, sizes, state.monitoring, state.should_stop):
        if not completed:
            return
        done.append(size)
        edges.add_split(n, size, name)
        if size == n:
            _offer_blocks(state, tables, [grand], name)
            connected = edges.connected(n, done)
            pruned = registry.prune_partitions(connected, SubspaceState.PRUNED_CONNECTIVITY)
            logger.debug(f"{name}: {pruned} subspaces searched by connectivity")
        else:
            _offer_blocks(state, tables, tables.best_two_block(size), name)
        registry.prune_upper_bound(state.incumbent.value)
        yield size
        if early_exit and registry.all_terminal():
            logger.debug(f"{name}: every subspace settled after size {size}")
            return


def search_process(v: CharacteristicFunction, sizes: SizeSet, state: GradState,
                   tables: Optional[DPTables] = None) -> SolverResult:
    """Run one search process to completion or early exit.

    Args:
        v: Characteristic function (must be ``state.v``)
        sizes: Size set from SOFT
        state: Shared GRAD state
        tables: DP tables; private ones are created when omitted

    Returns:
        The process's own best structure when it finished every size,
        otherwise the shared incumbent
    """
    tables = tables or DPTables.initialized(v)
    finished = []
    for size in search_steps(state, state.edges, sizes, tables, f"grad{sizes}"):
        finished.append(size)
    if finished and finished[-1] == v.n:
        structure = tables.extract(v.grand)
        stats = state.monitoring.stats(state.registry)
        return SolverResult(structure, structure_value(structure, v), stats, state.registry.all_terminal(), "grad")
    return state.to_result("grad")


def full_coverage(n: int, sizes: SizeSet) -> bool:
    return len(reachable_subspaces(n, sizes)) == len(integer_partitions(n))


def grad_solve(v: CharacteristicFunction, sets: Sequence[SizeSet], workers: int = 1,
               deadline: Optional[Deadline] = None, monitoring: Optional[MonitoringSystem] = None,
               progress_interval: Optional[float] = None) -> SolverResult:
    """Run one search process per distinct size set against a shared GradState.

    Args:
        v: Characteristic function
        sets: SOFT size sets; at least one must reach every subspace
        workers: Worker threads (1 steps processes round-robin)
        deadline: Optional time limit
        monitoring: Optional monitoring system
        progress_interval: Seconds between progress log lines

    Returns:
        The incumbent once every subspace is settled
    """
    unique: List[SizeSet] = []
    for sizes in sets:
        if sizes not in unique:
            unique.append(sizes)
    if not any(full_coverage(v.n, sizes) for sizes in unique):
        raise PreconditionException("GRAD needs a size set reaching every subspace when run without DIPS", "grad")

    state = GradState.create(v, deadline, monitoring, active_sets=unique)
    progress = ProgressReporter(progress_interval, state.snapshot) if progress_interval else None
    pool = WorkerPool(workers, progress=progress)
    for i, sizes in enumerate(unique, start=1):
        name = f"grad-{i}{sizes}"
        pool.submit(Task(name, search_steps(state, state.edges, sizes, DPTables.initialized(v), name)))
    pool.run(state.should_stop)
    return state.to_result("grad")
