"""Complementary dynamic programming.

Two DP passes, one per SSD size set, each split-evaluating the coalitions
of its sizes in ascending order and the grand coalition last. Between them
the passes reach every subspace, so the better of the two is optimal.
"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np

from smart_csg.core.coalition import (
    CharacteristicFunction, CoalitionStructure, SolverResult, grand_coalition, masks_of_size, size_max_table,
    structure_value
)
from smart_csg.core.errors import InternalCorruptionException, PreconditionException, StateException
from smart_csg.core.ipg import SubspaceState, integer_partitions, reachable_subspaces
from smart_csg.core.monitoring import Deadline, MonitoringSystem
from smart_csg.core.registry import SubspaceRegistry
from smart_csg.offline.sizes import SizeSet

logger = logging.getLogger(__name__)

# Upper bound on the elements of one vectorized split block.
BLOCK_ELEMENTS = 1 << 20


def _split_patterns(size: int) -> np.ndarray:
    # column k selects which of the non-lowest members join the lowest one
    k = np.arange((1 << (size - 1)) - 1, dtype=np.int64)
    shifts = np.arange(size - 1, dtype=np.int64)
    return (k[None, :] >> shifts[:, None]) & 1


class DPTables:
    """Value table ``v_t`` and split table ``p_t`` over all coalitions.

    ``p_t[C]`` stores the part of the best split holding C's lowest agent,
    or 0 when C is best kept whole. Writes of a (value, split) pair happen
    under one lock, so readers holding the lock never see a mixed pair.
    """

    def __init__(self, n: int):
        self.n = n
        self.v_t: Optional[np.ndarray] = None
        self.p_t: Optional[np.ndarray] = None
        self.completed = False
        self._lock = threading.Lock()

    @classmethod
    def initialized(cls, v: CharacteristicFunction) -> "DPTables":
        tables = cls(v.n)
        tables.initialize(v)
        return tables

    def initialize(self, v: CharacteristicFunction):
        self.v_t = np.array(v.values, dtype=np.float64)
        self.p_t = np.zeros(1 << v.n, dtype=np.int64)

    @property
    def ready(self) -> bool:
        return self.v_t is not None

    def commit(self, masks: np.ndarray, values: np.ndarray, splits: np.ndarray) -> int:
        """Store strictly better splits; returns how many entries changed."""
        with self._lock:
            better = values > self.v_t[masks]
            targets = masks[better]
            self.v_t[targets] = values[better]
            self.p_t[targets] = splits[better]
        return int(better.sum())

    def extract(self, coalition: int) -> CoalitionStructure:
        with self._lock:
            return CoalitionStructure.from_masks(_expand(coalition, self.p_t))

    def best_two_block(self, size: int) -> Optional[Tuple[int, int]]:
        """Best ``{C, A minus C}`` split with ``|C| = size`` under current values."""
        if not 1 <= size < self.n:
            return None
        grand = grand_coalition(self.n)
        masks = masks_of_size(self.n, size)
        values = self.v_t[masks] + self.v_t[grand ^ masks]
        chosen = int(masks[int(np.argmax(values))])
        return chosen, grand ^ chosen

    def best_so_far(self) -> CoalitionStructure:
        """Best structure the current tables hold: the grand coalition or its best two-block split."""
        grand = grand_coalition(self.n)
        best_value = float(self.v_t[grand])
        best = None
        for size in range(1, self.n // 2 + 1):
            first, second = self.best_two_block(size)
            value = float(self.v_t[first] + self.v_t[second])
            if value > best_value:
                best_value, best = value, (first, second)
        if best is None:
            return self.extract(grand)
        return CoalitionStructure.from_masks(self.extract(best[0]).coalitions + self.extract(best[1]).coalitions)


def _expand(coalition: int, p_t) -> List[int]:
    leaves = []
    stack = [coalition]
    expansions = 0
    limit = bin(coalition).count("1")
    while stack:
        c = stack.pop()
        c1 = int(p_t.get(c, 0)) if isinstance(p_t, dict) else int(p_t[c])
        if c1 == 0:
            leaves.append(c)
            continue
        if c1 & ~c or c1 == c:
            raise InternalCorruptionException(f"Split record {c1:#b} is not a proper part of {c:#b}", "cdp", c)
        expansions += 1
        if expansions >= limit:
            raise InternalCorruptionException(f"Split records below {coalition:#b} do not terminate", "cdp", coalition)
        stack.append(c ^ c1)
        stack.append(c1)
    return leaves


def extract_partition(grand: int, p_t) -> CoalitionStructure:
    """Expand recorded splits from ``grand`` until every member is kept whole.

    Args:
        grand: Coalition to expand (normally the grand coalition)
        p_t: Split table (array or mapping from mask to first part, 0 = keep whole)

    Returns:
        Coalition structure over the members of ``grand``
    """
    return CoalitionStructure.from_masks(_expand(grand, p_t))


def evaluate_size(tables: DPTables, size: int, should_stop: Optional[Callable[[], bool]] = None) -> Tuple[int, bool]:
    """Compare every size-``size`` coalition with all of its two-way splits.

    Args:
        tables: Tables to read and update
        size: Coalition size (at least 2)
        should_stop: Polled between blocks

    Returns:
        ``(splits evaluated, completed)``
    """
    n = tables.n
    masks = masks_of_size(n, size)
    patterns = _split_patterns(size)
    width = patterns.shape[1]
    rows_per_block = max(1, BLOCK_ELEMENTS // max(width, n))
    shifts = np.arange(n, dtype=np.int64)
    splits = 0
    for start in range(0, len(masks), rows_per_block):
        block = masks[start:start + rows_per_block]
        rows = np.arange(len(block))
        members = np.nonzero((block[:, None] >> shifts) & 1)[1].reshape(len(block), size)
        member_bits = np.left_shift(np.int64(1), members)
        low = member_bits[:, :1]
        others = member_bits[:, 1:]
        best_values = np.full(len(block), -np.inf)
        best_parts = np.zeros(len(block), dtype=np.int64)
        for offset in range(0, width, BLOCK_ELEMENTS):
            first = low + others @ patterns[:, offset:offset + BLOCK_ELEMENTS]
            values = tables.v_t[first] + tables.v_t[block[:, None] ^ first]
            pick = np.argmax(values, axis=1)
            candidate = values[rows, pick]
            improved = candidate > best_values
            best_values = np.where(improved, candidate, best_values)
            best_parts = np.where(improved, first[rows, pick], best_parts)
        tables.commit(block, best_values, best_parts)
        splits += len(block) * width
        if should_stop is not None and should_stop():
            return splits, start + len(block) >= len(masks)
    return splits, True


def iter_sizes(tables: DPTables, sizes: SizeSet, monitoring: Optional[MonitoringSystem] = None,
               should_stop: Optional[Callable[[], bool]] = None) -> Iterator[Tuple[int, bool]]:
    """Evaluate ``sizes`` then ``n`` one size per step, yielding ``(size, completed)``."""
    for size in sizes.evaluated():
        splits, completed = evaluate_size(tables, size, should_stop)
        if monitoring is not None:
            monitoring.increment("splits_evaluated", splits)
        logger.debug(f"Evaluated size {size} of {sizes}: {splits} splits")
        yield size, completed
        if not completed:
            return


def evaluate_sizes(tables: DPTables, v: CharacteristicFunction, sizes: SizeSet,
                   monitoring: Optional[MonitoringSystem] = None,
                   deadline: Optional[Deadline] = None) -> Tuple[DPTables, CoalitionStructure, float]:
    """Run a DP pass over ``sizes``.

    Args:
        tables: Tables initialized from ``v``
        v: Characteristic function
        sizes: Sizes to evaluate; ``n`` always follows
        monitoring: Receives the split count
        deadline: Checked between blocks and sizes; on expiry the pass stops,
            ``tables.completed`` is cleared and the best structure so far is returned

    Returns:
        ``(tables, best structure, its value)``
    """
    if not tables.ready:
        raise StateException("DP tables must be initialized before evaluation", "cdp")
    should_stop = deadline.expired if deadline is not None else None
    tables.completed = True
    for size, completed in iter_sizes(tables, sizes, monitoring, should_stop):
        if not completed or (size < v.n and should_stop is not None and should_stop()):
            tables.completed = False
            logger.warning(f"DP pass over {sizes} stopped by deadline at size {size}")
            break
    if tables.completed:
        grand = grand_coalition(v.n)
        return tables, tables.extract(grand), float(tables.v_t[grand])
    structure = tables.best_so_far()
    return tables, structure, structure_value(structure, v)


def pair_covers(n: int, pair: Tuple[SizeSet, SizeSet]) -> bool:
    covered = reachable_subspaces(n, pair[0]) | reachable_subspaces(n, pair[1])
    return len(covered) == len(integer_partitions(n))


def cdp_solve(v: CharacteristicFunction, pair: Tuple[SizeSet, SizeSet], concurrent: bool = True,
              monitoring: Optional[MonitoringSystem] = None, deadline: Optional[Deadline] = None) -> SolverResult:
    """Run both DP passes on private tables and keep the better result.

    Args:
        v: Characteristic function
        pair: SSD size sets; together they must reach every subspace
        concurrent: Run the passes on two threads instead of one after the other
        monitoring: Optional monitoring system shared with the caller
        deadline: Optional time limit; passes cut short make the result non-optimal

    Returns:
        The optimal structure, or the best one found before the deadline
    """
    if not pair_covers(v.n, pair):
        raise PreconditionException(f"Size sets {pair[0]} and {pair[1]} do not reach every subspace", "cdp")
    monitoring = monitoring or MonitoringSystem()
    monitoring.start_timing()

    def run(sizes: SizeSet) -> Tuple[DPTables, CoalitionStructure, float]:
        return evaluate_sizes(DPTables.initialized(v), v, sizes, monitoring, deadline)

    if concurrent:
        with ThreadPoolExecutor(max_workers=2, thread_name_prefix="cdp") as executor:
            outcomes = list(executor.map(run, pair))
    else:
        outcomes = [run(sizes) for sizes in pair]

    registry = SubspaceRegistry(integer_partitions(v.n), size_max_table(v))
    for sizes in pair:
        registry.prune_partitions(reachable_subspaces(v.n, sizes), SubspaceState.PRUNED_CONNECTIVITY)

    best = max(range(2), key=lambda i: (outcomes[i][2], -i))
    structure = outcomes[best][1]
    optimal = all(tables.completed for tables, _, _ in outcomes)
    monitoring.stop_timing()
    logger.info(f"CDP passes: {outcomes[0][2]} / {outcomes[1][2]}; keeping pass {best + 1}")
    return SolverResult(structure, structure_value(structure, v), monitoring.stats(registry), optimal, "cdp")
