"""Unit tests for the SMART orchestration."""

import pytest

from smart_csg.core.coalition import CoalitionStructure, size_max_table
from smart_csg.core.errors import PreconditionException, TuningMismatchException
from smart_csg.core.ipg import SubspaceState, partition_count
from smart_csg.core.scheduler import Task, WorkerPool
from smart_csg.engines.baselines import brute_force_solve
from smart_csg.engines.cdp import DPTables, evaluate_sizes
from smart_csg.engines.dips import dips_worker, order_subspaces
from smart_csg.engines.grad import search_steps
from smart_csg.engines.smart import SharedState, dp_processes, handoff_worker, smart_solve
from smart_csg.offline.sizes import SizeSet
from smart_csg.offline.tuning import TuningResult, fallback_tuning, tune_all

SUBSPACE_STATS = ("subspaces_searched", "subspaces_pruned_ub", "subspaces_pruned_connectivity")


def test_smart_on_r3(r3):
    """Test SMART on the reference instance."""
    # Act
    result = smart_solve(r3, fallback_tuning(3), workers=1)

    # Assert
    assert result.value == 4.0
    assert result.structure == CoalitionStructure.from_agents([[3], [1, 2]])
    assert result.optimal
    assert result.algorithm == "smart"


def test_dp_processes_order():
    """CDP passes come before GRAD processes."""
    # Arrange
    tuning = tune_all(6, [0.2, 0.9, 1.0])

    # Act
    names = [name for name, _ in dp_processes(tuning)]

    # Assert
    assert names[0].startswith("cdp-1")
    assert all(name.startswith("grad-") for name in names[len(set(tuning.cdp_pair)):])
    assert len(names) == len(set(tuning.cdp_pair)) + len(tuning.distinct_grad_sets())


def test_dp_processes_dedupe_identical_pair():
    """An identical CDP pair runs as one process."""
    # Act
    processes = dp_processes(fallback_tuning(3))

    # Assert
    assert [name for name, _ in processes] == ["cdp-1{2,3}", "grad-1{2,3}"]


@pytest.mark.parametrize("seed", range(4))
def test_smart_matches_brute_force(instance, seed):
    """Test SMART finds the brute-force optimum."""
    # Arrange
    v = instance(8, seed=seed, dist="modified_normal")

    # Act
    result = smart_solve(v, tune_all(8, [0.5, 1.0]), workers=1)
    oracle = brute_force_solve(v)

    # Assert
    assert result.optimal
    assert result.value == pytest.approx(oracle.value, rel=1e-9)


def test_every_subspace_is_accounted_once(instance):
    """Every subspace ends in exactly one terminal state."""
    # Arrange
    v = instance(9, seed=3)

    # Act
    result = smart_solve(v, tune_all(9, [0.5, 1.0]), workers=1)

    # Assert
    assert sum(result.stats[key] for key in SUBSPACE_STATS) == partition_count(9)


def test_deterministic_mode_repeats_exactly(instance):
    """Deterministic runs repeat structure and counters exactly."""
    # Arrange
    v = instance(8, seed=6, dist="gamma")
    tuning = tune_all(8, [0.5, 1.0])

    # Act
    first = smart_solve(v, tuning, workers=4, deterministic=True)
    second = smart_solve(v, tuning, workers=4, deterministic=True)

    # Assert
    assert first.structure == second.structure
    assert {k: s for k, s in first.stats.items() if k != "elapsed_ns"} == \
        {k: s for k, s in second.stats.items() if k != "elapsed_ns"}


def test_threaded_smart_is_optimal(instance):
    """Test threaded SMART is optimal."""
    # Arrange
    v = instance(9, seed=9, dist="uniform")

    # Act
    result = smart_solve(v, tune_all(9, [0.5, 1.0]), workers=4)
    oracle = brute_force_solve(v)

    # Assert
    assert result.optimal
    assert result.value == pytest.approx(oracle.value, rel=1e-9)


def test_tuning_mismatch_is_rejected(r3):
    """Test a tuning for another n is refused."""
    with pytest.raises(TuningMismatchException, match="tuning/problem size mismatch"):
        smart_solve(r3, tune_all(4, [1.0]))


def test_invalid_tuning_is_rejected(instance):
    """Test a tuning that fails validation is refused."""
    # Arrange
    empty = SizeSet(4, 0)
    tuning = TuningResult(4, (empty, empty), {1.0: SizeSet.from_sizes(4, [2])})

    # Act / Assert
    with pytest.raises(PreconditionException):
        smart_solve(instance(4), tuning)


def test_handoff_starts_dips_only_while_work_remains(instance):
    """A finished DP worker joins DIPS only while subspaces are unclaimed."""
    # Arrange
    v = instance(5)
    state = SharedState.create(v, tables=DPTables.initialized(v))
    queue = order_subspaces(state.registry.partitions, size_max_table(v), state.registry)
    pool = WorkerPool(1)
    finished = Task("cdp-1{2,5}", iter(()))

    # Act
    started = handoff_worker(pool, finished, queue, state)
    while queue.claim_next() is not None:
        pass
    started_after_claims = handoff_worker(pool, finished, queue, state)

    # Assert
    assert started
    assert not started_after_claims
    assert state.handoffs == 1
    assert [task.kind for task in pool.tasks] == ["dips"]


@pytest.mark.parametrize("n, seed", [(7, 0), (9, 1), (10, 2)])
def test_shared_tables_match_private_tables(instance, monkeypatch, n, seed):
    """Interleaved processes writing one table reach the same grand value as private tables."""
    # Arrange
    v = instance(n, seed=seed, dist="beta")
    processes = dp_processes(tune_all(n, [0.3, 1.0]))
    state = SharedState.create(v, tables=DPTables.initialized(v))
    monkeypatch.setattr(state.registry, "all_terminal", lambda: False)
    steps = [search_steps(state, state.edges, sizes, state.tables, name, early_exit=False)
             for name, sizes in processes]

    # Act
    while steps:
        for process in list(steps):
            if next(process, None) is None:
                steps.remove(process)
    private = [evaluate_sizes(DPTables.initialized(v), v, sizes)[2] for _, sizes in processes]

    # Assert
    grand = v.grand
    assert state.tables.v_t[grand] == pytest.approx(max(private), rel=1e-12)
    assert smart_solve(v, tune_all(n, [0.3, 1.0]), workers=1).value == pytest.approx(max(private), rel=1e-12)


def test_handoff_never_reclaims_an_in_flight_subspace(instance):
    """A worker handed over mid-solve skips the subspace another DIPS worker is still searching."""
    # Arrange
    v = instance(5, seed=2)
    state = SharedState.create(v, tables=DPTables.initialized(v))
    queue = order_subspaces(state.registry.partitions, size_max_table(v), state.registry)
    in_flight = queue.claim_next()
    pool = WorkerPool(1)

    # Act
    started = handoff_worker(pool, Task("cdp-1{2,5}", iter(())), queue, state)
    handed_over = list(pool.tasks[0].steps)

    # Assert
    assert started
    assert in_flight not in handed_over
    assert handed_over == queue.order[1:]
    assert state.registry.state(in_flight) is SubspaceState.CLAIMED
    assert not state.registry.all_terminal()


def test_handoff_worker_joins_after_dp_finishes_first(instance):
    """Scripted order: DIPS claims, a DP process finishes, its worker joins, then DIPS resumes."""
    # Arrange
    v = instance(6, seed=4)
    tuning = tune_all(6, [1.0])
    state = SharedState.create(v, tables=DPTables.initialized(v))
    queue = order_subspaces(state.registry.partitions, size_max_table(v), state.registry)
    pool = WorkerPool(1)
    first_dips = dips_worker(queue, state, "dips-1")
    name, sizes = dp_processes(tuning)[0]
    dp = Task(name, search_steps(state, state.edges, sizes, state.tables, name, early_exit=False))

    # Act
    first_claim = next(first_dips)
    for _ in dp.steps:
        pass
    started = handoff_worker(pool, dp, queue, state)
    rest = [i for worker in (pool.tasks[0].steps, first_dips) for i in worker] if started else list(first_dips)

    # Assert
    claimed = [first_claim] + rest
    assert len(claimed) == len(set(claimed))
    assert state.registry.all_terminal()
    assert state.incumbent.value == pytest.approx(brute_force_solve(v).value, rel=1e-9)
