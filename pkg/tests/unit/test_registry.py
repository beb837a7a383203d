"""Unit tests for the shared search state and the worker pool."""

import threading

from smart_csg.core.coalition import CoalitionStructure, size_max_table
from smart_csg.core.ipg import SubspaceState, integer_partitions
from smart_csg.core.monitoring import Deadline, MonitoringSystem, ProgressReporter
from smart_csg.core.registry import IncumbentCell, SearchState, SubspaceRegistry
from smart_csg.core.scheduler import Task, WorkerPool


def test_incumbent_only_moves_up():
    """The incumbent ignores offers that do not strictly improve it."""
    # Arrange
    cell = IncumbentCell()
    low = CoalitionStructure((0b111,))
    high = CoalitionStructure((0b011, 0b100))

    # Act
    first = cell.offer(2.5, low, "grad")
    second = cell.offer(4.0, high, "cdp")
    tie = cell.offer(4.0, low, "dips")

    # Assert
    assert first and second and not tie
    assert cell.snapshot() == (4.0, high, "cdp")


def test_incumbent_under_contention():
    """Concurrent offers leave the maximum in the incumbent."""
    # Arrange
    cell = IncumbentCell()
    structure = CoalitionStructure((1,))

    def offer_many(offset):
        for k in range(500):
            cell.offer(float(k * 4 + offset), structure, str(offset))

    # Act
    threads = [threading.Thread(target=offer_many, args=(i,)) for i in range(4)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()

    # Assert
    assert cell.value == 499 * 4 + 3


def test_registry_states_move_forward(r3):
    """Terminal subspace states never change again."""
    # Arrange
    registry = SubspaceRegistry(integer_partitions(3), size_max_table(r3))
    i = registry.index[(1, 2)]

    # Act
    claimed = registry.claim(i)
    claimed_again = registry.claim(i)
    searched = registry.mark_searched(i)
    pruned_after = registry.prune(i, SubspaceState.PRUNED_UB)

    # Assert
    assert claimed and not claimed_again
    assert searched and not pruned_after
    assert registry.state(i) is SubspaceState.SEARCHED
    assert registry.counts()["subspaces_searched"] == 1
    assert registry.remaining() == 2


def test_upper_bound_pruning_is_inclusive(r3):
    """A bound equal to the incumbent is pruned."""
    # Arrange
    registry = SubspaceRegistry(integer_partitions(3), size_max_table(r3))

    # Act
    pruned = registry.prune_upper_bound(3.0)

    # Assert
    assert pruned == 2
    assert registry.state(registry.index[(1, 2)]) is SubspaceState.UNSEARCHED
    assert not registry.all_terminal()


def test_search_state_without_incumbent_reports_grand_coalition(r3):
    """With no offers the result falls back to the grand coalition."""
    # Arrange
    state = SearchState.create(r3, Deadline(0.0))

    # Act
    result = state.to_result("test")

    # Assert
    assert state.interrupted()
    assert result.structure.coalitions == (0b111,)
    assert result.value == 2.5
    assert not result.optimal


def test_round_robin_pool_interleaves_tasks():
    """The deterministic pool steps tasks in turn."""
    # Arrange
    order = []

    def steps(name, count):
        for k in range(count):
            order.append(f"{name}{k}")
            yield k

    finished = []
    pool = WorkerPool(1)
    pool.submit(Task("a", steps("a", 2), on_finish=lambda task: finished.append(task.name)))
    pool.submit(Task("b", steps("b", 3)))

    # Act
    pool.run(lambda: False)

    # Assert
    assert order == ["a0", "b0", "a1", "b1", "b2"]
    assert finished == ["a"]
    assert pool.completed == ["a", "b"]


def test_threaded_pool_runs_submitted_tasks():
    """Test the threaded pool runs every task to completion."""
    # Arrange
    done = []
    pool = WorkerPool(3)

    def work(name):
        yield
        done.append(name)

    def spawn(task):
        pool.submit(Task(f"{task.name}-next", work(f"{task.name}-next")))

    for k in range(4):
        pool.submit(Task(f"t{k}", work(f"t{k}"), on_finish=spawn))

    # Act
    pool.run(lambda: False)

    # Assert
    assert sorted(done) == sorted([f"t{k}" for k in range(4)] + [f"t{k}-next" for k in range(4)])


def test_monitoring_stats_and_progress(r3):
    """Counters show up in stats and progress lines are rate limited."""
    # Arrange
    monitoring = MonitoringSystem()
    registry = SubspaceRegistry(integer_partitions(3), size_max_table(r3))
    registry.prune(0, SubspaceState.PRUNED_CONNECTIVITY)
    reporter = ProgressReporter(60.0, lambda: {"incumbent": 1.0})

    # Act
    monitoring.start_timing()
    monitoring.increment("splits_evaluated", 7)
    monitoring.stop_timing()
    stats = monitoring.stats(registry)

    # Assert
    assert stats["splits_evaluated"] == 7
    assert stats["subspaces_pruned_connectivity"] == 1
    assert stats["elapsed_ns"] >= 0
    assert not reporter.maybe_report()
    assert reporter.maybe_report(force=True)
    assert reporter.reports == 1
