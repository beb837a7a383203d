"""Offline size-set tuning.

A size set reaches a subspace when the subspace's parts can be merged back
into the grand coalition by binary merges whose intermediate sizes are all in
the set. The coverage table stores, per partition, the bitset of every size
set (by encoding) that reaches it; both tuners read their answers off it.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np

from smart_csg.core.errors import InvalidArgumentException
from smart_csg.core.ipg import IntegerPartition, integer_partitions, reachable_subspaces
from smart_csg.offline.sizes import CostModel, SizeSet, set_time, set_times

logger = logging.getLogger(__name__)

DEFAULT_OMEGAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
TUNING_LIMIT = 22
MIN_TUNING_N = 4

SsdObjective = Literal["minimax", "sequential"]
SSD_OBJECTIVES: Tuple[str, ...] = ("minimax", "sequential")


def _sub_multisets(parts: IntegerPartition) -> Iterable[IntegerPartition]:
    values = sorted(set(parts))
    ranges = [range(parts.count(value) + 1) for value in values]
    for counts in itertools.product(*ranges):
        yield tuple(value for value, count in zip(values, counts) for _ in range(count))


def _difference(parts: IntegerPartition, sub: IntegerPartition) -> IntegerPartition:
    rest = list(parts)
    for value in sub:
        rest.remove(value)
    return tuple(rest)


class CoverageTable:
    """Per-partition bitsets over all ``2**(n-2)`` size-set encodings."""

    def __init__(self, n: int):
        if not MIN_TUNING_N <= n <= TUNING_LIMIT:
            raise InvalidArgumentException(
                f"Exact tuning supports {MIN_TUNING_N} <= n <= {TUNING_LIMIT}, got {n}", "offline")
        self.n = n
        self.num_sets = 1 << (n - 2)
        self.partitions: Tuple[IntegerPartition, ...] = integer_partitions(n)
        self._full = (1 << self.num_sets) - 1
        self._has = self._size_bitsets()
        self._merge_memo: Dict[IntegerPartition, int] = {}
        self.reach_bits: List[int] = [self._reach(p) for p in self.partitions]
        self._merge_memo.clear()
        self.packed = self._pack()
        self.counts, self.row_counts = self._coverage_counts()
        logger.info(f"Built coverage table for n={n}: {len(self.partitions)} subspaces x {self.num_sets} size sets")

    def _size_bitsets(self) -> Dict[int, int]:
        encodings = np.arange(self.num_sets, dtype=np.int64)
        has = {}
        for size in range(2, self.n):
            column = ((encodings >> (size - 2)) & 1).astype(np.uint8)
            has[size] = int.from_bytes(np.packbits(column, bitorder="little").tobytes(), "little")
        return has

    def _admits(self, group: IntegerPartition) -> int:
        # sets under which ``group`` forms one coalition
        if len(group) == 1:
            return self._full
        return self._has[sum(group)] & self._merge(group)

    def _merge(self, group: IntegerPartition) -> int:
        if group in self._merge_memo:
            return self._merge_memo[group]
        result = 0
        for left in _sub_multisets(group):
            if not left or len(left) == len(group):
                continue
            right = _difference(group, left)
            if left > right:
                continue
            result |= self._admits(left) & self._admits(right)
            if result == self._full:
                break
        self._merge_memo[group] = result
        return result

    def _reach(self, p: IntegerPartition) -> int:
        return self._full if len(p) == 1 else self._merge(p)

    def _pack(self) -> np.ndarray:
        width = (self.num_sets + 7) // 8
        rows = [np.frombuffer(bits.to_bytes(width, "little"), dtype=np.uint8) for bits in self.reach_bits]
        return np.vstack(rows)

    def _coverage_counts(self) -> Tuple[np.ndarray, np.ndarray]:
        counts = np.zeros(self.num_sets, dtype=np.int64)
        row_counts = np.zeros(len(self.partitions), dtype=np.int64)
        step = 64
        for start in range(0, len(self.partitions), step):
            block = np.unpackbits(self.packed[start:start + step], axis=1, bitorder="little", count=self.num_sets)
            counts += block.sum(axis=0, dtype=np.int64)
            row_counts[start:start + step] = block.sum(axis=1, dtype=np.int64)
        return counts, row_counts

    def column(self, encoding: int) -> np.ndarray:
        """0/1 vector over partitions: which subspaces set ``encoding`` reaches."""
        return (self.packed[:, encoding >> 3] >> (encoding & 7)) & 1

    def coverage(self, encoding: int) -> int:
        return int(self.counts[encoding])

    def reachable(self, encoding: int) -> List[IntegerPartition]:
        column = self.column(encoding)
        return [p for p, hit in zip(self.partitions, column) if hit]


@lru_cache(maxsize=2)
def coverage_table(n: int) -> CoverageTable:
    return CoverageTable(n)


def _check_tunable(n: int):
    if n < MIN_TUNING_N:
        raise InvalidArgumentException(f"n={n} has no optional coalition sizes to tune (need n >= {MIN_TUNING_N})",
                                       "offline")
    if n > TUNING_LIMIT:
        raise InvalidArgumentException(f"Exact tuning is capped at n={TUNING_LIMIT}, got {n}", "offline")


def coverage_threshold(n_partitions: int, omega: float) -> int:
    """Smallest subspace count that is at least ``omega`` of all subspaces."""
    if not 0 < omega <= 1:
        raise InvalidArgumentException(f"Coverage fraction must be in (0, 1], got {omega}", "offline")
    return math.ceil(Fraction(omega).limit_denominator(10 ** 6) * n_partitions)


def _encodings_from_bits(bits: int, num_sets: int) -> np.ndarray:
    width = (num_sets + 7) // 8
    raw = np.frombuffer(bits.to_bytes(width, "little"), dtype=np.uint8)
    return np.flatnonzero(np.unpackbits(raw, bitorder="little", count=num_sets))


def _partners(table: CoverageTable, encoding: int, position: np.ndarray) -> int:
    """Bitset of every set that reaches all subspaces ``encoding`` misses."""
    missing = np.flatnonzero(table.column(encoding) == 0)
    partners = table._full
    # rarest subspaces first so hopeless candidates fail fast
    for row in missing[np.argsort(position[missing])].tolist():
        partners &= table.reach_bits[row]
        if not partners:
            break
    return partners


def _rarity_positions(table: CoverageTable) -> np.ndarray:
    rarity = np.argsort(table.row_counts, kind="stable")
    position = np.empty(len(rarity), dtype=np.int64)
    position[rarity] = np.arange(len(rarity))
    return position


def _ssd_minimax(n: int, table: CoverageTable, times: np.ndarray) -> Tuple[SizeSet, SizeSet]:
    encodings = np.arange(table.num_sets)
    order = np.lexsort((encodings, times))
    rank = np.empty(table.num_sets, dtype=np.int64)
    rank[order] = np.arange(table.num_sets)
    position = _rarity_positions(table)

    seen = 0
    for slower in order.tolist():
        partners = _partners(table, slower, position) & (seen | (1 << slower))
        if partners:
            candidates = _encodings_from_bits(partners, table.num_sets)
            faster = int(candidates[np.argmin(rank[candidates])])
            return SizeSet(n, slower), SizeSet(n, faster)
        seen |= 1 << slower
    raise AssertionError("the full size set always covers every subspace")


def _ssd_sequential(n: int, table: CoverageTable, times: np.ndarray) -> Tuple[SizeSet, SizeSet]:
    full = table.num_sets - 1
    best = (full, full)
    best_first, best_second = times[full], times[full]
    position = _rarity_positions(table)
    for first in range(1, table.num_sets):
        t1 = times[first]
        # a pair only replaces the record when neither time gets worse
        if t1 > best_first or not (t1 < best_first or t1 < best_second):
            continue
        candidates = _encodings_from_bits(_partners(table, first, position), table.num_sets)
        candidates = candidates[candidates > first]
        if t1 < best_first:
            candidates = candidates[times[candidates] <= best_second]
        else:
            candidates = candidates[times[candidates] < best_second]
        if len(candidates) == 0:
            continue
        # argmin keeps the lowest encoding among equal times, as the ascending scan does
        second = int(candidates[np.argmin(times[candidates])])
        best = (first, second)
        best_first, best_second = t1, times[second]
    return SizeSet(n, best[0]), SizeSet(n, best[1])


def ssd_tune(n: int, cm: Optional[CostModel] = None, objective: SsdObjective = "minimax") -> Tuple[SizeSet, SizeSet]:
    """Pair of size sets that jointly reach every subspace.

    ``minimax`` ranks pairs by their slower member (set time, then
    encoding) and then by the faster one; the same set may appear twice
    when it covers everything alone. ``sequential`` scans first sets in
    ascending encoding, pairs each with the higher encodings covering what
    it misses, and keeps a pair when one time improves without the other
    getting worse. The two can disagree: the scan locks onto the cheapest
    first set it meets.

    Args:
        n: Agent count (4..22)
        cm: Cost model, unit split costs by default
        objective: ``minimax`` or ``sequential``

    Returns:
        The two size sets; ``(slower, faster)`` under ``minimax``
    """
    _check_tunable(n)
    if objective not in SSD_OBJECTIVES:
        raise InvalidArgumentException(
            f"Unknown SSD objective {objective!r}; expected one of {', '.join(SSD_OBJECTIVES)}", "offline")
    cm = cm or CostModel()
    table = coverage_table(n)
    times = set_times(n, cm)
    if objective == "minimax":
        pair = _ssd_minimax(n, table, times)
    else:
        pair = _ssd_sequential(n, table, times)
    logger.info(f"SSD n={n} ({objective}): {pair[0]} ({times[pair[0].bits]:g}) + {pair[1]} ({times[pair[1].bits]:g})")
    return pair


def soft_tune(n: int, omega: float, cm: Optional[CostModel] = None) -> SizeSet:
    """Cheapest size set reaching at least ``omega`` of all subspaces.

    Args:
        n: Agent count (4..22)
        omega: Coverage fraction in (0, 1]
        cm: Cost model, unit split costs by default

    Returns:
        The size set; ties go to the lowest encoding
    """
    _check_tunable(n)
    cm = cm or CostModel()
    table = coverage_table(n)
    needed = coverage_threshold(len(table.partitions), omega)
    eligible = np.flatnonzero(table.counts >= needed)
    times = set_times(n, cm)
    best = int(eligible[np.argmin(times[eligible])])
    logger.info(f"SOFT n={n} omega={omega}: {SizeSet(n, best)} covers {table.coverage(best)}/{len(table.partitions)}")
    return SizeSet(n, best)


@dataclass
class TuningResult:
    """Offline output for one agent count."""

    n: int
    cdp_pair: Tuple[SizeSet, SizeSet]
    grad_sets: Dict[float, SizeSet] = field(default_factory=dict)
    cost_model: CostModel = field(default_factory=CostModel)
    cost_units: Dict[SizeSet, float] = field(default_factory=dict)
    ssd_objective: str = "minimax"

    def distinct_grad_sets(self) -> List[Tuple[float, SizeSet]]:
        """One entry per distinct set, keyed by its smallest omega, ascending."""
        result: List[Tuple[float, SizeSet]] = []
        seen = set()
        for omega in sorted(self.grad_sets):
            sizes = self.grad_sets[omega]
            if sizes not in seen:
                seen.add(sizes)
                result.append((omega, sizes))
        return result


def cost_units_for(sets: Iterable[SizeSet], cm: CostModel) -> Dict[SizeSet, float]:
    return {sizes: set_time(sizes, cm) for sizes in sorted(set(sets))}


def tune_all(n: int, omegas: Sequence[float] = DEFAULT_OMEGAS, cm: Optional[CostModel] = None,
             ssd_objective: SsdObjective = "minimax") -> TuningResult:
    """Run SSD once and SOFT per coverage fraction."""
    cm = cm or CostModel()
    for omega in omegas:
        coverage_threshold(1, omega)
    pair = ssd_tune(n, cm, ssd_objective)
    grad_sets = {float(omega): soft_tune(n, omega, cm) for omega in omegas}
    result = TuningResult(n, pair, dict(sorted(grad_sets.items())), cm,
                          cost_units_for(list(pair) + list(grad_sets.values()), cm), ssd_objective)
    duplicates = len(grad_sets) - len(result.distinct_grad_sets())
    if duplicates:
        logger.info(f"{duplicates} coverage fractions share a size set; one process each")
    return result


def idp_size_set(n: int) -> SizeSet:
    """Sizes ``2..floor(2n/3)`` (plus n), falling back to the ceiling if that misses a subspace."""
    if n < MIN_TUNING_N:
        raise InvalidArgumentException(f"IDP size set needs n >= {MIN_TUNING_N}, got {n}", "baselines")
    floor_set = SizeSet.from_sizes(n, range(2, (2 * n) // 3 + 1))
    if len(reachable_subspaces(n, floor_set)) == len(integer_partitions(n)):
        return floor_set
    upper = min(n - 1, -(-2 * n // 3))
    logger.warning(f"IDP floor set {floor_set} misses subspaces for n={n}; using sizes up to {upper}")
    return SizeSet.from_sizes(n, range(2, upper + 1))


def fallback_tuning(n: int, omegas: Sequence[float] = (1.0,), cm: Optional[CostModel] = None) -> TuningResult:
    """Tuning that needs no search: the IDP set everywhere (every size below 4 agents)."""
    cm = cm or CostModel()
    sizes = idp_size_set(n) if n >= MIN_TUNING_N else SizeSet.full(n)
    grad_sets = {float(omega): sizes for omega in omegas}
    return TuningResult(n, (sizes, sizes), grad_sets, cm, cost_units_for([sizes], cm))
