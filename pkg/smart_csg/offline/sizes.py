"""Size sets and the split-count cost model."""

from dataclasses import dataclass
from typing import Dict, Iterable, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.special import comb

from smart_csg.core.errors import InvalidArgumentException


@dataclass(frozen=True, order=True)
class SizeSet:
    """Coalition sizes a DP pass splits, encoded in ``n - 2`` bits.

    Bit k set means size k + 2 is evaluated; size n is always evaluated and
    never stored in the bits.
    """

    n: int
    bits: int

    def __post_init__(self):
        width = max(0, self.n - 2)
        if not 0 <= self.bits < (1 << width):
            raise InvalidArgumentException(f"Size set bits {self.bits} out of range for n={self.n}", "offline")

    @classmethod
    def from_sizes(cls, n: int, sizes: Iterable[int]) -> "SizeSet":
        """Encode explicit sizes; ``n`` itself may be listed and is ignored."""
        bits = 0
        for size in sizes:
            size = int(size)
            if size == n:
                continue
            if not 2 <= size < n:
                raise InvalidArgumentException(f"Size {size} cannot be split for n={n}", "offline")
            bits |= 1 << (size - 2)
        return cls(n, bits)

    @classmethod
    def full(cls, n: int) -> "SizeSet":
        return cls(n, (1 << max(0, n - 2)) - 1)

    @property
    def sizes(self) -> Tuple[int, ...]:
        """Optional sizes in ascending order (``n`` excluded)."""
        return tuple(k + 2 for k in range(max(0, self.n - 2)) if self.bits >> k & 1)

    def evaluated(self) -> Tuple[int, ...]:
        """Sizes a DP pass runs, ascending, with ``n`` last."""
        return self.sizes + ((self.n,) if self.n >= 2 else ())

    def __contains__(self, size: int) -> bool:
        return size == self.n or size in self.sizes

    def __str__(self) -> str:
        return "{" + ",".join(str(s) for s in self.evaluated()) + "}"


def split_eval_count(n: int, s: int) -> int:
    """Split comparisons made for all size-``s`` coalitions of ``n`` agents."""
    if not 2 <= s <= n:
        raise InvalidArgumentException(f"Size {s} out of range 2..{n}", "offline")
    return int(comb(n, s, exact=True)) * ((1 << (s - 1)) - 1)


class CostModel(BaseModel):
    """Estimated run time of a DP pass in cost units.

    ``size_weights`` scales the cost of individual sizes, e.g. to plug in
    measured timings; unlisted sizes weigh 1. With ``scale_by_size`` a split
    of a size-s coalition costs s units instead of one, for hardware where
    building the two halves dominates the comparison.
    """

    model_config = ConfigDict(frozen=True)

    unit_split_cost: float = Field(default=1.0, gt=0)
    size_weights: Dict[int, float] = Field(default_factory=dict)
    scale_by_size: bool = False

    @field_validator("size_weights")
    @classmethod
    def _positive_weights(cls, weights: Dict[int, float]) -> Dict[int, float]:
        for size, weight in weights.items():
            if size < 2 or weight <= 0:
                raise ValueError(f"invalid weight {weight} for size {size}")
        return weights

    def per_size_cost(self, n: int) -> np.ndarray:
        """Cost of each size 0..n; entries below 2 are zero."""
        costs = np.zeros(n + 1, dtype=np.float64)
        for size in range(2, n + 1):
            costs[size] = split_eval_count(n, size) * self.unit_split_cost * self.size_weights.get(size, 1.0)
            if self.scale_by_size:
                costs[size] *= size
        return costs

    def set_time(self, sizes: SizeSet) -> float:
        return set_time(sizes, self)


def set_time(sizes: SizeSet, cm: CostModel) -> float:
    """Run time of a pass over ``sizes`` plus the mandatory size ``n``."""
    costs = cm.per_size_cost(sizes.n)
    return float(sum(costs[size] for size in sizes.evaluated()))


def set_times(n: int, cm: CostModel) -> np.ndarray:
    """``set_time`` of every encoding ``0 .. 2**(n-2) - 1`` at once."""
    costs = cm.per_size_cost(n)
    times = np.array([costs[n]], dtype=np.float64)
    for size in range(2, n):
        times = np.concatenate([times, times + costs[size]])
    return times
