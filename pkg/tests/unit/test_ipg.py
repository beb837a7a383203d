"""Unit tests for the integer partition graph."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smart_csg.core.coalition import size_max_table
from smart_csg.core.errors import InvalidArgumentException
from smart_csg.core.ipg import (
    build_partition_graph, integer_partitions, partition_count, reachable_subspaces, split_children,
    subspace_upper_bound
)
from smart_csg.offline.sizes import SizeSet


def test_partitions_of_four():
    """Test the integer partitions of four."""
    # Act
    partitions = integer_partitions(4)

    # Assert
    assert set(partitions) == {(4,), (1, 3), (2, 2), (1, 1, 2), (1, 1, 1, 1)}
    assert partitions[0] == (4,)
    assert [len(p) for p in partitions] == sorted(len(p) for p in partitions)


def test_partition_counts():
    """Test partition counts against known values."""
    # Assert
    assert integer_partitions(1) == ((1,),)
    assert len(integer_partitions(10)) == 42
    assert partition_count(0) == 1
    assert partition_count(1) == 1
    assert partition_count(4) == 5
    assert partition_count(10) == 42
    assert partition_count(100) == 190569292


@pytest.mark.parametrize("n", range(1, 21))
def test_enumeration_matches_recurrence(n):
    """Enumeration agrees with the pentagonal recurrence."""
    assert len(integer_partitions(n)) == partition_count(n)


def test_split_children():
    """Test splitting one part of a partition."""
    # Assert
    assert split_children((4,), 4) == [(1, 3), (2, 2)]
    assert split_children((2, 2), 2) == [(1, 1, 2)]
    assert split_children((1, 9), 9) == [(1, 1, 8), (1, 2, 7), (1, 3, 6), (1, 4, 5)]


def test_split_children_rejects_missing_part():
    """Splitting a part the partition lacks is an error."""
    with pytest.raises(InvalidArgumentException):
        split_children((1, 3), 2)
    with pytest.raises(InvalidArgumentException):
        split_children((1, 3), 1)


def test_reachable_subspaces_small():
    """Test reachability for four agents."""
    # Act
    with_two = reachable_subspaces(4, SizeSet.from_sizes(4, [2]))
    with_three = reachable_subspaces(4, SizeSet.from_sizes(4, [3]))

    # Assert
    assert len(with_two) == 5
    assert with_three == {(4,), (1, 3), (2, 2), (1, 1, 2)}


def test_reachable_subspaces_ten_agents():
    """{2,4,6} misses three subspaces that {2,8} covers."""
    # Act
    first = reachable_subspaces(10, SizeSet.from_sizes(10, [2, 4, 6]))
    second = reachable_subspaces(10, SizeSet.from_sizes(10, [2, 8]))

    # Assert
    assert len(first) == 39
    assert set(integer_partitions(10)) - first == {(1, 1, 1, 7), (1, 2, 7), (2, 3, 5)}
    assert len(second) == 16
    assert first | second == set(integer_partitions(10))


@pytest.mark.parametrize("n", range(2, 13))
def test_full_size_set_reaches_everything(n):
    """Test every subspace is reachable with all sizes."""
    assert len(reachable_subspaces(n, SizeSet.full(n))) == partition_count(n)


@given(st.integers(min_value=4, max_value=11), st.data())
@settings(max_examples=40, deadline=None)
def test_reachability_is_monotone(n, data):
    """Adding sizes never loses a subspace."""
    width = n - 2
    small = data.draw(st.integers(min_value=0, max_value=(1 << width) - 1))
    extra = data.draw(st.integers(min_value=0, max_value=(1 << width) - 1))

    assert reachable_subspaces(n, SizeSet(n, small)) <= reachable_subspaces(n, SizeSet(n, small | extra))


def test_graph_edges_split_one_part():
    """Every graph edge splits exactly one part."""
    # Act
    graph = build_partition_graph(6)

    # Assert
    assert len(graph.nodes) == partition_count(6)
    for edge in graph.edges:
        assert len(edge.upper) == len(edge.lower) + 1
        assert sum(edge.upper) == sum(edge.lower) == 6
        assert edge.split in edge.lower


def test_graph_dot_marks_highlighted_nodes():
    """Test DOT output marks highlighted subspaces."""
    # Act
    dot = build_partition_graph(4).to_dot([(1, 3)])

    # Assert
    assert dot.startswith("digraph ipg_4 {")
    assert '"[1,3]" [style=filled' in dot
    assert '"[4]" -> "[2,2]" [label="4"];' in dot


def test_upper_bounds(r3):
    """Test subspace upper bounds on the reference instance."""
    # Arrange
    maxes = size_max_table(r3)

    # Assert
    assert subspace_upper_bound((1, 2), maxes) == 4.0
    assert subspace_upper_bound((3,), maxes) == 2.5
    assert subspace_upper_bound((1, 1, 1), maxes) == 3.0
