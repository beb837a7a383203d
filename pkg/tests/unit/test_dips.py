"""Unit tests for the distributed integer-partition search."""

import math

import pytest

from smart_csg.core.coalition import CharacteristicFunction, CoalitionStructure, size_max_table
from smart_csg.core.ipg import SubspaceState, integer_partitions
from smart_csg.core.monitoring import MonitoringSystem
from smart_csg.core.registry import IncumbentCell
from smart_csg.engines.dips import SearchInterrupted, dips_run, order_subspaces, search_subspace
from tests.conftest import BELL

R3_OPTIMUM = CoalitionStructure.from_agents([[3], [1, 2]])


def test_order_by_upper_bound(r3):
    """Subspaces are queued by descending upper bound."""
    # Act
    queue = order_subspaces(integer_partitions(3), size_max_table(r3))

    # Assert
    assert [entry.partition for entry in queue.entries] == [(1, 2), (1, 1, 1), (3,)]
    assert [entry.upper_bound for entry in queue.entries] == [4.0, 3.0, 2.5]


def test_ties_order_lexicographically():
    """Equal bounds keep lexicographic partition order."""
    # Arrange
    v = CharacteristicFunction(4, [0.0] * 16)

    # Act
    queue = order_subspaces(integer_partitions(4), size_max_table(v))

    # Assert
    assert [entry.partition for entry in queue.entries] == sorted(integer_partitions(4))


def test_claims_are_handed_out_once(instance):
    """No subspace is claimed twice, even across threads."""
    # Arrange
    v = instance(6)
    queue = order_subspaces(integer_partitions(6), size_max_table(v))

    # Act
    claimed = []
    while (i := queue.claim_next()) is not None:
        claimed.append(i)

    # Assert
    assert sorted(claimed) == list(range(len(integer_partitions(6))))
    assert queue.exhausted
    assert not queue.has_unclaimed()
    assert all(queue.registry.state(i) is SubspaceState.CLAIMED for i in claimed)


def test_search_subspace_on_r3(r3):
    """Test a subspace search on the reference instance."""
    # Arrange
    monitoring = MonitoringSystem()

    # Act
    value, structure = search_subspace((1, 2), r3, size_max_table(r3), monitoring=monitoring)

    # Assert
    assert value == 4.0
    assert structure == R3_OPTIMUM
    assert monitoring.count("bnb_leaves") == 3


def test_high_incumbent_cuts_every_branch(r3):
    """An unbeatable incumbent cuts the search at its roots."""
    # Arrange
    monitoring = MonitoringSystem()

    # Act
    value, structure = search_subspace((1, 2), r3, size_max_table(r3), incumbent=10.0, monitoring=monitoring)

    # Assert
    assert value is None and structure is None
    assert monitoring.count("bnb_nodes_expanded") == 0


def test_each_structure_is_visited_once():
    """With nothing to prune, leaves across all subspaces count the set partitions exactly."""
    # Arrange
    n = 5
    v = CharacteristicFunction(n, [0.0] * (1 << n))
    maxes = size_max_table(v)
    monitoring = MonitoringSystem()

    # Act
    per_subspace = {}
    for parts in integer_partitions(n):
        before = monitoring.count("bnb_leaves")
        search_subspace(parts, v, maxes, monitoring=monitoring)
        per_subspace[parts] = monitoring.count("bnb_leaves") - before

    # Assert
    assert monitoring.count("bnb_leaves") == BELL[n]
    assert per_subspace[(1, 2, 2)] == 15
    assert per_subspace[(1, 1, 1, 2)] == 10
    assert per_subspace[(5,)] == 1


def test_abort_hook_interrupts_search():
    """The abort hook is polled every 1024 nodes."""
    # Arrange
    v = CharacteristicFunction(12, [0.0] * (1 << 12))
    monitoring = MonitoringSystem()

    # Act / Assert
    with pytest.raises(SearchInterrupted):
        search_subspace((2, 2, 2, 2, 2, 2), v, size_max_table(v), monitoring=monitoring, abort=lambda: True)
    assert monitoring.count("bnb_nodes_expanded") == 1024


def test_preloaded_incumbent_expands_nothing(r3):
    """An optimal incumbent from elsewhere settles every subspace by its bound."""
    # Arrange
    maxes = size_max_table(r3)
    incumbent = IncumbentCell()
    incumbent.offer(4.0, R3_OPTIMUM, "cdp")
    queue = order_subspaces(integer_partitions(3), maxes)

    # Act
    result = dips_run(queue, r3, maxes, incumbent)

    # Assert
    assert result.value == 4.0
    assert result.optimal
    assert result.stats["bnb_nodes_expanded"] == 0
    assert result.stats["subspaces_pruned_ub"] == 3


def test_dips_on_r3(r3):
    """Test DIPS on the reference instance."""
    # Arrange
    maxes = size_max_table(r3)

    # Act
    result = dips_run(order_subspaces(integer_partitions(3), maxes), r3, maxes)

    # Assert
    assert result.value == 4.0
    assert result.structure == R3_OPTIMUM
    assert result.stats["subspaces_searched"] + result.stats["subspaces_pruned_ub"] == 3


@pytest.mark.parametrize("workers", [1, 3])
@pytest.mark.parametrize("seed", range(3))
def test_dips_matches_brute_force(instance, optimum, seed, workers):
    """DIPS finds the brute-force optimum with one or more workers."""
    # Arrange
    v = instance(9, seed=seed, dist="normal")
    maxes = size_max_table(v)

    # Act
    result = dips_run(order_subspaces(integer_partitions(9), maxes), v, maxes, workers=workers)
    expected = optimum(v)

    # Assert
    assert result.optimal
    assert math.isclose(result.value, expected, rel_tol=1e-9)


def _structures_in(parts):
    """How many coalition structures have exactly these coalition sizes."""
    count = math.factorial(sum(parts))
    for size in parts:
        count //= math.factorial(size)
    for size in set(parts):
        count //= math.factorial(parts.count(size))
    return count


@pytest.mark.parametrize("n", range(1, 9))
def test_leaves_match_structure_counts(n):
    """With nothing to prune, every subspace yields one leaf per structure it holds."""
    # Arrange
    v = CharacteristicFunction(n, [0.0] * (1 << n))
    maxes = size_max_table(v)

    # Act
    leaves = {}
    for parts in integer_partitions(n):
        monitoring = MonitoringSystem()
        search_subspace(parts, v, maxes, monitoring=monitoring)
        leaves[parts] = monitoring.count("bnb_leaves")

    # Assert
    assert leaves == {parts: _structures_in(parts) for parts in integer_partitions(n)}
    assert sum(leaves.values()) == BELL[n]
