"""Unit tests for gradual search."""

import pytest

from smart_csg.core.coalition import CharacteristicFunction, CoalitionStructure, popcount
from smart_csg.core.errors import PreconditionException
from smart_csg.core.ipg import SubspaceState, integer_partitions, reachable_subspaces, split_edges
from smart_csg.engines.cdp import DPTables
from smart_csg.engines.grad import EdgeSet, GradState, full_coverage, grad_solve, search_process, search_steps
from smart_csg.offline.sizes import SizeSet
from smart_csg.offline.tuning import tune_all


@pytest.fixture
def loners():
    """Four agents who are worth far more alone than together."""
    return CharacteristicFunction.from_mapping(4, {m: 10.0 if popcount(m) == 1 else 1.0 for m in range(1, 16)})


def test_edge_set_connectivity():
    """Connectivity grows only through edges of the requested split sizes."""
    # Arrange
    edges = EdgeSet()

    # Act
    added_two = edges.add_split(4, 2, "first")
    only_two = edges.connected(4, [2])
    edges.add_split(4, 4, "second")
    both = edges.connected(4, [2, 4])

    # Assert
    assert added_two == 2
    assert only_two == {(4,)}
    assert both == {(4,), (1, 3), (2, 2), (1, 1, 2), (1, 1, 1, 1)}
    assert len(edges) == 4
    assert edges.add_split(4, 2, "third") == 0


def test_edge_provenance():
    """Each edge remembers the process that added it first."""
    # Arrange
    edges = EdgeSet()
    edges.add_split(4, 4, "cdp-1")

    # Act
    sources = {edges.provenance(edge) for edge in split_edges(4, 4)}
    missing = [edge for edge in split_edges(4, 2) if edges.provenance(edge) is not None]

    # Assert
    assert sources == {"cdp-1"}
    assert missing == []


def test_grad_on_r3(r3):
    """Test GRAD on the three-agent reference instance."""
    # Act
    result = grad_solve(r3, [SizeSet.full(3)])

    # Assert
    assert result.value == 4.0
    assert result.structure == CoalitionStructure.from_agents([[3], [1, 2]])
    assert result.optimal


def test_grad_stops_once_every_subspace_is_settled(loners):
    """The size-2 two-block offer already proves the all-singleton structure optimal."""
    # Act
    result = grad_solve(loners, [SizeSet.from_sizes(4, [2]), SizeSet.from_sizes(4, [2, 3])])

    # Assert
    assert result.value == 40.0
    assert result.optimal
    assert len(result.structure) == 4
    assert result.stats["splits_evaluated"] == 6
    assert result.stats["subspaces_pruned_connectivity"] == 1
    assert result.stats["subspaces_pruned_ub"] == 4


def test_grad_needs_a_full_coverage_set(instance):
    """GRAD alone refuses size sets that cannot prove optimality."""
    with pytest.raises(PreconditionException):
        grad_solve(instance(4), [SizeSet(4, 0)])


def test_full_coverage():
    """Test full coverage detection for four agents."""
    # Assert
    assert full_coverage(4, SizeSet.from_sizes(4, [2]))
    assert not full_coverage(4, SizeSet.from_sizes(4, [3]))


def test_search_process_returns_its_own_structure(r3):
    """A finished process reports the structure from its own tables."""
    # Arrange
    state = GradState.create(r3)

    # Act
    result = search_process(r3, SizeSet.full(3), state)

    # Assert
    assert result.value == 4.0
    assert result.optimal
    assert state.incumbent.value == 4.0


@pytest.mark.parametrize("seed", range(4))
def test_grad_matches_brute_force(instance, optimum, seed):
    """GRAD over SOFT sets finds the brute-force optimum."""
    # Arrange
    v = instance(8, seed=seed, dist="modified_uniform")
    sets = [sizes for _, sizes in tune_all(8, [0.3, 0.7, 1.0]).distinct_grad_sets()]

    # Act
    result = grad_solve(v, sets)
    expected = optimum(v)

    # Assert
    assert result.optimal
    assert result.value == pytest.approx(expected, rel=1e-9)


def test_grad_threaded_matches_round_robin(instance):
    """Threaded and round-robin GRAD find the same value."""
    # Arrange
    v = instance(9, seed=8)
    sets = [sizes for _, sizes in tune_all(9, [0.5, 1.0]).distinct_grad_sets()]

    # Act
    threaded = grad_solve(v, sets, workers=3)
    round_robin = grad_solve(v, sets, workers=1)

    # Assert
    assert threaded.value == pytest.approx(round_robin.value, rel=1e-12)


def test_sizes_2_4_6_connect_all_but_three_subspaces_at_ten_agents():
    """With splits of sizes 2, 4, 6 and 10 in the graph, 39 of 42 subspaces hang off the bottom node."""
    # Arrange
    edges = EdgeSet()
    for size in (2, 4, 6, 10):
        edges.add_split(10, size, "grad")

    # Act
    connected = edges.connected(10, [2, 4, 6, 10])

    # Assert
    assert connected == reachable_subspaces(10, SizeSet.from_sizes(10, [2, 4, 6]))
    assert len(connected) == 39
    assert set(integer_partitions(10)) - connected == {(1, 1, 1, 7), (1, 2, 7), (2, 3, 5)}


def test_nothing_but_the_bottom_is_connected_before_size_ten():
    """Every path out of [10] starts with a split of the grand coalition."""
    # Arrange
    edges = EdgeSet()
    for size in (2, 4, 6):
        edges.add_split(10, size, "grad")

    # Act
    connected = edges.connected(10, [2, 4, 6])

    # Assert
    assert connected == {(10,)}


def test_search_steps_prune_by_connectivity_only_after_size_n(instance, monkeypatch):
    """Intermediate sizes leave [10] as the only connectivity-pruned subspace."""
    # Arrange
    v = instance(10, seed=5)
    state = GradState.create(v)
    registry = state.registry
    monkeypatch.setattr(registry, "all_terminal", lambda: False)
    sizes = SizeSet.from_sizes(10, [2, 4, 6])

    def by_connectivity():
        return {p for i, p in enumerate(registry.partitions) if registry.state(i) is SubspaceState.PRUNED_CONNECTIVITY}

    # Act
    seen = {}
    for size in search_steps(state, state.edges, sizes, DPTables.initialized(v), "grad", early_exit=False):
        seen[size] = by_connectivity()

    # Assert
    assert list(seen) == [2, 4, 6, 10]
    assert seen[2] == seen[4] == seen[6] == {(10,)}
    reachable = reachable_subspaces(10, sizes)
    assert seen[10] <= reachable
    assert all(registry.state(registry.index[p]).terminal for p in reachable)


@pytest.mark.parametrize("bits", range(0, 32, 3))
def test_search_process_finds_best_over_reachable_subspaces(instance, subspace_optima, monkeypatch, bits):
    """A process that runs every size returns the best structure among the subspaces its sizes reach."""
    # Arrange
    v = instance(7, seed=bits, dist="normal")
    sizes = SizeSet(7, bits)
    state = GradState.create(v)
    monkeypatch.setattr(state.registry, "all_terminal", lambda: False)
    best = subspace_optima(v)

    # Act
    result = search_process(v, sizes, state)

    # Assert
    expected = max(best[p] for p in reachable_subspaces(7, sizes))
    assert result.value == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("seed", range(12))
def test_pruning_is_sound(instance, subspace_optima, marking_log, seed):
    """No subspace is settled while it still holds a structure better than the incumbent."""
    # Arrange
    n = 5 + seed % 5
    v = instance(n, seed=seed, dist=["uniform", "modified_normal", "gamma"][seed % 3])
    sets = [sizes for _, sizes in tune_all(n, [0.2, 0.6, 1.0]).distinct_grad_sets()]
    best = subspace_optima(v)

    # Act
    result = grad_solve(v, sets)

    # Assert
    assert result.optimal
    assert sorted(p for p, _, _ in marking_log) == sorted(integer_partitions(n))
    for parts, state, incumbent in marking_log:
        assert best[parts] <= incumbent + 1e-9, (parts, state)
