"""Integer Partition Graph

Each integer partition of n names a subspace: the coalition structures whose
coalition sizes match the partition. Partitions are ascending tuples and act
as canonical keys everywhere in the package.
"""

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Tuple

from smart_csg.core.coalition import MAX_AGENTS, SizeMaxTable
from smart_csg.core.errors import InvalidArgumentException

IntegerPartition = Tuple[int, ...]

PARTITION_COUNT_LIMIT = 120


def canonical(parts: Iterable[int]) -> IntegerPartition:
    return tuple(sorted(int(p) for p in parts))


def _ascending_partitions(n: int, smallest: int) -> List[IntegerPartition]:
    if n == 0:
        return [()]
    result = []
    for first in range(smallest, n + 1):
        if first == n or n - first >= first:
            for tail in _ascending_partitions(n - first, first):
                result.append((first,) + tail)
    return result


@lru_cache(maxsize=None)
def integer_partitions(n: int) -> Tuple[IntegerPartition, ...]:
    """All partitions of ``n``, grouped by level then lexicographic.

    Args:
        n: Agent count (1..30)

    Returns:
        Tuple of ascending part tuples; level 1 ([n]) first
    """
    if not 1 <= n <= MAX_AGENTS:
        raise InvalidArgumentException(f"n must be in 1..{MAX_AGENTS}, got {n}", "ipg")
    return tuple(sorted(_ascending_partitions(n, 1), key=lambda p: (len(p), p)))


def split_children(p: IntegerPartition, x: int) -> List[IntegerPartition]:
    """Partitions obtained by splitting one occurrence of ``x`` into two parts.

    Args:
        p: Ascending partition
        x: Part value to split (present in ``p``, at least 2)

    Returns:
        Distinct canonical children, ordered by the smaller new part
    """
    if x < 2 or x not in p:
        raise InvalidArgumentException(f"Cannot split part {x} of {list(p)}", "ipg")
    rest = list(p)
    rest.remove(x)
    children = []
    for a in range(1, x // 2 + 1):
        child = canonical(rest + [a, x - a])
        if child not in children:
            children.append(child)
    return children


def _size_values(sizes: Any) -> FrozenSet[int]:
    return frozenset(int(s) for s in getattr(sizes, "sizes", sizes))


def reachable_subspaces(n: int, sizes: Any) -> FrozenSet[IntegerPartition]:
    """Closure of ``[n]`` under splits of parts in ``sizes`` (and ``n`` itself).

    Args:
        n: Agent count
        sizes: Size set (a ``SizeSet`` or an iterable of ints)

    Returns:
        Frozen set of reachable partitions, ``[n]`` included
    """
    return _reachable(n, _size_values(sizes) | {n})


@lru_cache(maxsize=4096)
def _reachable(n: int, splittable: FrozenSet[int]) -> FrozenSet[IntegerPartition]:
    start = (n,)
    seen = {start}
    frontier = deque([start])
    while frontier:
        node = frontier.popleft()
        for x in set(node):
            if x < 2 or x not in splittable:
                continue
            for child in split_children(node, x):
                if child not in seen:
                    seen.add(child)
                    frontier.append(child)
    return frozenset(seen)


def subspace_upper_bound(p: IntegerPartition, maxes: SizeMaxTable) -> float:
    """Sum of the per-size maxima over the parts of ``p``."""
    return float(sum(maxes[part] for part in p))


@lru_cache(maxsize=None)
def _partition_counts(limit: int) -> Tuple[int, ...]:
    counts = [1] + [0] * limit
    for m in range(1, limit + 1):
        total = 0
        k = 1
        while True:
            first = m - k * (3 * k - 1) // 2
            if first < 0:
                break
            sign = 1 if k % 2 else -1
            total += sign * counts[first]
            second = m - k * (3 * k + 1) // 2
            if second >= 0:
                total += sign * counts[second]
            k += 1
        counts[m] = total
    return tuple(counts)


def partition_count(n: int) -> int:
    """Exact number of integer partitions of ``n`` (pentagonal-number recurrence)."""
    if not 0 <= n <= PARTITION_COUNT_LIMIT:
        raise InvalidArgumentException(f"n must be in 0..{PARTITION_COUNT_LIMIT}, got {n}", "ipg")
    return _partition_counts(PARTITION_COUNT_LIMIT)[n]


class SubspaceState(Enum):
    """Lifecycle of a subspace; the last three are terminal."""

    UNSEARCHED = "unsearched"
    CLAIMED = "claimed"
    SEARCHED = "searched"
    PRUNED_UB = "pruned_ub"
    PRUNED_CONNECTIVITY = "pruned_connectivity"

    @property
    def terminal(self) -> bool:
        return self in (SubspaceState.SEARCHED, SubspaceState.PRUNED_UB, SubspaceState.PRUNED_CONNECTIVITY)


@dataclass
class Subspace:
    partition: IntegerPartition
    upper_bound: float
    state: SubspaceState = SubspaceState.UNSEARCHED


@dataclass(frozen=True)
class Edge:
    """``upper`` is ``lower`` with one part of value ``split`` divided in two."""

    lower: IntegerPartition
    upper: IntegerPartition
    split: int


@dataclass
class PartitionGraph:
    n: int
    levels: Dict[int, List[IntegerPartition]]
    edges: List[Edge] = field(default_factory=list)

    @property
    def nodes(self) -> List[IntegerPartition]:
        return [p for level in sorted(self.levels) for p in self.levels[level]]

    def to_dot(self, highlight: Optional[Iterable[IntegerPartition]] = None) -> str:
        """Render as DOT text; highlighted nodes are filled.

        Args:
            highlight: Partitions to mark (e.g. those reachable under a size set)

        Returns:
            DOT document
        """
        marked = set(highlight or ())
        lines = [f"digraph ipg_{self.n} {{", "  rankdir=BT;"]
        for level in sorted(self.levels):
            names = " ".join(f'"{_label(p)}";' for p in self.levels[level])
            lines.append(f"  {{ rank=same; {names} }}")
        for p in self.nodes:
            style = ' [style=filled, fillcolor="lightblue"]' if p in marked else ""
            lines.append(f'  "{_label(p)}"{style};')
        for edge in self.edges:
            lines.append(f'  "{_label(edge.lower)}" -> "{_label(edge.upper)}" [label="{edge.split}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _label(p: IntegerPartition) -> str:
    return "[" + ",".join(str(part) for part in p) + "]"


@lru_cache(maxsize=64)
def split_edges(n: int, x: int) -> Tuple[Edge, ...]:
    """Every graph edge produced by splitting a part of value ``x``."""
    edges = []
    for p in integer_partitions(n):
        if x >= 2 and x in p:
            for child in split_children(p, x):
                edges.append(Edge(p, child, x))
    return tuple(edges)


def build_partition_graph(n: int) -> PartitionGraph:
    levels: Dict[int, List[IntegerPartition]] = {}
    for p in integer_partitions(n):
        levels.setdefault(len(p), []).append(p)
    edges = [edge for x in range(2, n + 1) for edge in split_edges(n, x)]
    return PartitionGraph(n, levels, edges)
