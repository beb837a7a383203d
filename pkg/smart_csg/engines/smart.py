"""SMART orchestration.

Both CDP passes, one GRAD process per distinct tuned set and a number of
DIPS workers run against one shared state: a single pair of DP tables, the
incumbent, the subspace registry and the partition-graph edges. When a DP
process finishes, its worker is handed to DIPS. The solve ends once every
subspace is searched or pruned.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

from smart_csg.core.coalition import CharacteristicFunction, SolverResult
from smart_csg.core.errors import PreconditionException, TuningMismatchException
from smart_csg.core.monitoring import Deadline, MonitoringSystem, ProgressReporter
from smart_csg.core.scheduler import Task, WorkerPool
from smart_csg.engines.cdp import DPTables
from smart_csg.engines.dips import SubspaceQueue, dips_worker, order_subspaces
from smart_csg.engines.grad import GradState, search_steps
from smart_csg.offline.sizes import SizeSet
from smart_csg.offline.tuning import TuningResult
from smart_csg.offline.validation import tuning_errors

logger = logging.getLogger(__name__)


@dataclass
class SharedState(GradState):
    """GradState plus the shared DP tables and the worker pool."""

    tables: Optional[DPTables] = None
    pool: Optional[WorkerPool] = None
    handoffs: int = 0


def dp_processes(tuning: TuningResult) -> List[Tuple[str, SizeSet]]:
    """DP processes in priority order: CDP passes, then GRAD by ascending omega."""
    processes: List[Tuple[str, SizeSet]] = []
    for k, sizes in enumerate(dict.fromkeys(tuning.cdp_pair), start=1):
        processes.append((f"cdp-{k}{sizes}", sizes))
    for omega, sizes in tuning.distinct_grad_sets():
        processes.append((f"grad-{omega:g}{sizes}", sizes))
    return processes


def handoff_worker(pool: WorkerPool, finished_engine: Task, queue: SubspaceQueue, state: SharedState) -> bool:
    """Give the worker of a finished DP process to DIPS.

    Args:
        pool: Pool running the solve
        finished_engine: Task that just finished
        queue: Shared DIPS queue
        state: Shared solve state

    Returns:
        True when a DIPS worker was started
    """
    if state.should_stop() or not queue.has_unclaimed():
        logger.debug(f"{finished_engine.name} finished; nothing left for DIPS")
        return False
    state.handoffs += 1
    name = f"dips-from-{finished_engine.name}"
    pool.submit(Task(name, dips_worker(queue, state, name), kind="dips"))
    logger.debug(f"{finished_engine.name} finished; worker joins DIPS as {name}")
    return True


def smart_solve(v: CharacteristicFunction, tuning: TuningResult, workers: int = 1, deterministic: bool = False,
                deadline: Optional[Deadline] = None, monitoring: Optional[MonitoringSystem] = None,
                progress_interval: Optional[float] = None) -> SolverResult:
    """Run CDP, GRAD and DIPS together until every subspace is settled.

    Args:
        v: Characteristic function
        tuning: Offline tuning for ``v.n``
        workers: Worker threads; fewer than the engine count time-multiplexes them
        deterministic: Step every engine round-robin on the calling thread
        deadline: Optional time limit
        monitoring: Optional monitoring system
        progress_interval: Seconds between progress log lines

    Returns:
        The optimal structure, or the incumbent flagged non-optimal on timeout
    """
    if tuning.n != v.n:
        raise TuningMismatchException(f"tuning/problem size mismatch: tuning is for n={tuning.n}, problem has n={v.n}",
                                      expected_n=v.n, actual_n=tuning.n)
    errors = tuning_errors(tuning)
    if errors:
        raise PreconditionException(f"Invalid tuning for n={v.n}: {'; '.join(errors)}", "smart")

    state = SharedState.create(v, deadline, monitoring, tables=DPTables.initialized(v))
    queue = order_subspaces(state.registry.partitions, state.maxes, state.registry)
    progress = ProgressReporter(progress_interval, state.snapshot) if progress_interval else None
    pool = WorkerPool(workers, deterministic or workers == 1, progress)
    state.pool = pool

    processes = dp_processes(tuning)
    state.active_sets = [sizes for _, sizes in processes]

    def on_finish(task: Task):
        handoff_worker(pool, task, queue, state)

    for name, sizes in processes:
        pool.submit(Task(name, search_steps(state, state.edges, sizes, state.tables, name), on_finish=on_finish))
    dips_workers = max(1, pool.workers - len(processes))
    for k in range(dips_workers):
        name = f"dips-{k + 1}"
        pool.submit(Task(name, dips_worker(queue, state, name), kind="dips"))
    logger.info(f"SMART n={v.n}: {len(processes)} DP processes, {dips_workers} DIPS workers, W={pool.workers}")

    pool.run(state.should_stop)
    result = state.to_result("smart")
    logger.info(f"SMART finished with value {result.value} (optimal={result.optimal}, handoffs={state.handoffs}, "
                f"incumbent from {state.incumbent.source})")
    return result
