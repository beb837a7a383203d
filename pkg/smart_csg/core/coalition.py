"""Coalition and structure model

Coalitions are bitmasks over the agents: agent a_i is bit i-1 and the grand
coalition is ``2**n - 1``. This module holds the characteristic function
storage, structure validation, and the enumeration helpers every engine
shares.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from smart_csg.core.errors import InvalidArgumentException, ValidationException

MAX_AGENTS = 30

# Stats every SolverResult carries, in report order.
STAT_KEYS = (
    "splits_evaluated",
    "subspaces_searched",
    "subspaces_pruned_ub",
    "subspaces_pruned_connectivity",
    "bnb_nodes_expanded",
    "bnb_leaves",
    "structures_visited",
    "elapsed_ns",
)


def popcount(mask: int) -> int:
    """Number of agents in a coalition mask."""
    return bin(mask).count("1")


def agents_of(mask: int) -> List[int]:
    """Zero-based agent indices contained in ``mask``, ascending."""
    agents = []
    index = 0
    while mask:
        if mask & 1:
            agents.append(index)
        mask >>= 1
        index += 1
    return agents


def grand_coalition(n: int) -> int:
    return (1 << n) - 1


@lru_cache(maxsize=4)
def popcount_table(n: int) -> np.ndarray:
    """Population counts of every mask below ``2**n`` as a read-only uint8 array."""
    table = np.zeros(1, dtype=np.uint8)
    for _ in range(n):
        table = np.concatenate([table, table + 1])
    table.setflags(write=False)
    return table


def masks_of_size(n: int, s: int) -> np.ndarray:
    """Vectorized counterpart of :func:`coalitions_of_size` (ascending int64 array)."""
    _check_size(n, s)
    return np.flatnonzero(popcount_table(n) == s).astype(np.int64)


def _check_size(n: int, s: int) -> None:
    if not 1 <= n <= MAX_AGENTS:
        raise InvalidArgumentException(f"Agent count must be in 1..{MAX_AGENTS}, got {n}", "core")
    if not 1 <= s <= n:
        raise InvalidArgumentException(f"Coalition size must be in 1..{n}, got {s}", "core")


def coalitions_of_size(n: int, s: int) -> Iterator[int]:
    """Yield every size-``s`` coalition of ``n`` agents in increasing mask order.

    Args:
        n: Agent count (1..30)
        s: Coalition size (1..n)

    Returns:
        Iterator over masks; exactly binomial(n, s) of them
    """
    _check_size(n, s)
    return _gosper(n, s)


def _gosper(n: int, s: int) -> Iterator[int]:
    mask = (1 << s) - 1
    limit = 1 << n
    while mask < limit:
        yield mask
        low = mask & -mask
        ripple = mask + low
        mask = (((ripple ^ mask) >> 2) // low) | ripple


def proper_splits(c: int) -> Iterator[Tuple[int, int]]:
    """Yield each unordered two-way split of ``c`` once.

    The first coalition of every pair holds the lowest agent of ``c``; pairs
    come in increasing order of that first coalition.

    Args:
        c: Coalition mask with at least two agents

    Returns:
        Iterator over ``(c1, c2)`` pairs, ``2**(|c|-1) - 1`` of them
    """
    if c <= 0 or popcount(c) < 2:
        raise InvalidArgumentException(f"Coalition {c:#b} has fewer than two agents", "core")
    return _splits(c)


def _splits(c: int) -> Iterator[Tuple[int, int]]:
    low = c & -c
    rest = c ^ low
    # ascending submasks of rest, excluding rest itself
    sub = 0
    while True:
        if sub != rest:
            c1 = low | sub
            yield c1, c ^ c1
        if sub == rest:
            return
        sub = (sub - rest) & rest


class CharacteristicFunction:
    """Dense table of coalition values indexed by mask.

    The table is immutable after construction and safe to share across threads.
    """

    def __init__(self, n: int, values: Any):
        if not 1 <= n <= MAX_AGENTS:
            raise InvalidArgumentException(f"Agent count must be in 1..{MAX_AGENTS}, got {n}", "core")
        table = np.array(values, dtype=np.float64)
        errors = []
        if table.shape != (1 << n,):
            errors.append(f"expected {1 << n} values, got shape {table.shape}")
        elif table[0] != 0.0:
            errors.append("value of the empty coalition (index 0) must be 0.0")
        if table.size and not np.all(np.isfinite(table)):
            errors.append("values must be finite")
        if errors:
            raise ValidationException("Invalid characteristic function", "core", errors)
        table.setflags(write=False)
        self.n = n
        self.values = table
        self._as_list: Optional[List[float]] = None

    @classmethod
    def from_mapping(cls, n: int, mapping: Dict[int, float]) -> "CharacteristicFunction":
        """Build a function from ``{mask: value}``; unlisted coalitions are worth 0."""
        values = np.zeros(1 << n, dtype=np.float64)
        for mask, value in mapping.items():
            if not 0 < mask < (1 << n):
                raise InvalidArgumentException(f"Mask {mask} is not a coalition of {n} agents", "core")
            values[mask] = value
        return cls(n, values)

    def __call__(self, mask: int) -> float:
        return float(self.values[mask])

    def as_list(self) -> List[float]:
        """Plain-float view for tight Python loops."""
        if self._as_list is None:
            self._as_list = self.values.tolist()
        return self._as_list

    @property
    def grand(self) -> int:
        return grand_coalition(self.n)

    def __repr__(self) -> str:
        return f"CharacteristicFunction(n={self.n})"


@dataclass(frozen=True)
class CoalitionStructure:
    """A partition of the agents into disjoint coalitions (masks kept ascending)."""

    coalitions: Tuple[int, ...]

    @classmethod
    def from_masks(cls, masks: Iterable[int]) -> "CoalitionStructure":
        return cls(tuple(sorted(int(m) for m in masks)))

    @classmethod
    def from_agents(cls, blocks: Iterable[Iterable[int]]) -> "CoalitionStructure":
        """Build from one-based agent lists, e.g. ``[[3], [1, 2]]``."""
        masks = []
        for block in blocks:
            mask = 0
            for agent in block:
                mask |= 1 << (agent - 1)
            masks.append(mask)
        return cls.from_masks(masks)

    def agents(self) -> List[List[int]]:
        """One-based agent lists per coalition."""
        return [[a + 1 for a in agents_of(mask)] for mask in self.coalitions]

    def sizes(self) -> Tuple[int, ...]:
        return tuple(sorted(popcount(mask) for mask in self.coalitions))

    def validation_errors(self, n: int) -> List[str]:
        errors = []
        seen = 0
        for mask in self.coalitions:
            if mask <= 0:
                errors.append(f"empty or negative coalition {mask}")
                continue
            if mask & seen:
                errors.append(f"coalition {mask:#b} overlaps an earlier coalition")
            seen |= mask
        if seen != grand_coalition(n):
            errors.append(f"coalitions cover {seen:#b}, expected {grand_coalition(n):#b}")
        return errors

    def validate(self, n: int) -> None:
        errors = self.validation_errors(n)
        if errors:
            raise ValidationException("Invalid coalition structure", "core", errors)

    def __len__(self) -> int:
        return len(self.coalitions)


def structure_value(cs: CoalitionStructure, v: CharacteristicFunction) -> float:
    """Sum of coalition values of a validated structure.

    Args:
        cs: Coalition structure over ``v.n`` agents
        v: Characteristic function

    Returns:
        Exactly rounded sum, independent of coalition order
    """
    cs.validate(v.n)
    return math.fsum(v.values[mask] for mask in cs.coalitions)


@dataclass(frozen=True)
class SizeMaxTable:
    """Best raw value per coalition size; index 0 is unused and held at 0.0."""

    n: int
    max_by_size: Tuple[float, ...]

    def __getitem__(self, size: int) -> float:
        return self.max_by_size[size]


def size_max_table(v: CharacteristicFunction) -> SizeMaxTable:
    counts = popcount_table(v.n)
    maxes = [0.0]
    for size in range(1, v.n + 1):
        maxes.append(float(v.values[counts == size].max()))
    return SizeMaxTable(v.n, tuple(maxes))


@dataclass
class SolverResult:
    """Outcome of a solve: structure, its value, counters, and the optimality flag."""

    structure: CoalitionStructure
    value: float
    stats: Dict[str, int] = field(default_factory=dict)
    optimal: bool = True
    algorithm: str = ""
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "value": self.value,
            "optimal": self.optimal,
            "structure": self.structure.agents(),
            "stats": dict(self.stats),
            "warnings": list(self.warnings),
        }


def empty_stats() -> Dict[str, int]:
    return {key: 0 for key in STAT_KEYS}
