"""Shared fixtures for the smart_csg test suite."""

from typing import Dict, Iterator, List

import pytest

from smart_csg.core.coalition import CharacteristicFunction, popcount
from smart_csg.core.ipg import IntegerPartition
from smart_csg.core.registry import SearchState
from smart_csg.distributions import generate, parse_spec
from smart_csg.engines.baselines import brute_force_solve

# Bell numbers: how many coalition structures n agents have.
BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975]


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: exhaustive checks that take several seconds")


def set_partitions(n: int) -> Iterator[List[int]]:
    """Every coalition structure of n agents as a list of masks."""
    blocks: List[int] = []

    def assign(agent: int) -> Iterator[List[int]]:
        if agent == n:
            yield list(blocks)
            return
        bit = 1 << agent
        for j in range(len(blocks)):
            blocks[j] |= bit
            yield from assign(agent + 1)
            blocks[j] ^= bit
        blocks.append(bit)
        yield from assign(agent + 1)
        blocks.pop()

    yield from assign(0)


@pytest.fixture
def r3():
    """Three agents; {a1,a2} is the only valuable pair, optimum {{a3},{a1,a2}} = 4.0."""
    return CharacteristicFunction.from_mapping(3, {
        0b001: 1.0,
        0b010: 1.0,
        0b100: 1.0,
        0b011: 3.0,
        0b101: 1.0,
        0b110: 1.0,
        0b111: 2.5,
    })


@pytest.fixture
def instance():
    """Factory for seeded random instances."""
    def make(n: int, seed: int = 0, dist: str = "uniform") -> CharacteristicFunction:
        return generate(parse_spec(dist, seed), n)
    return make


@pytest.fixture
def optimum():
    """Brute-force optimal value, the oracle every exact engine must reach."""
    def solve(v: CharacteristicFunction) -> float:
        return brute_force_solve(v).value
    return solve


@pytest.fixture
def subspace_optima():
    """Best structure value inside each subspace, by enumerating every structure."""
    def solve(v: CharacteristicFunction) -> Dict[IntegerPartition, float]:
        values = v.as_list()
        best: Dict[IntegerPartition, float] = {}
        for blocks in set_partitions(v.n):
            parts = tuple(sorted(popcount(b) for b in blocks))
            value = sum(values[b] for b in blocks)
            if value > best.get(parts, float("-inf")):
                best[parts] = value
        return best
    return solve


@pytest.fixture
def marking_log(monkeypatch):
    """Records ``(partition, new state, incumbent value)`` whenever a subspace becomes terminal."""
    log = []
    create = SearchState.create.__func__

    def recording_create(cls, *args, **kwargs):
        state = create(cls, *args, **kwargs)
        registry = state.registry
        finish = registry._finish

        def record(i, new_state):
            changed = finish(i, new_state)
            if changed:
                log.append((registry.partitions[i], new_state, state.incumbent.value))
            return changed

        registry._finish = record
        return state

    monkeypatch.setattr(SearchState, "create", classmethod(recording_create))
    return log
