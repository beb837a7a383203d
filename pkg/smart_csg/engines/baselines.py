"""Reference solvers: full DP, IDP and brute-force enumeration."""

import logging
import math
from typing import List, Optional

from smart_csg.core.coalition import (
    CharacteristicFunction, CoalitionStructure, SolverResult, size_max_table, structure_value
)
from smart_csg.core.errors import RefusalException
from smart_csg.core.ipg import SubspaceState, integer_partitions, reachable_subspaces
from smart_csg.core.monitoring import Deadline, MonitoringSystem
from smart_csg.core.registry import SubspaceRegistry
from smart_csg.engines.cdp import DPTables, evaluate_sizes
from smart_csg.offline.sizes import SizeSet
from smart_csg.offline.tuning import MIN_TUNING_N, idp_size_set

logger = logging.getLogger(__name__)

DP_LIMIT = 25
BRUTE_FORCE_LIMIT = 13
# Leaves between deadline checks in brute force.
DEADLINE_CHECK_INTERVAL = 4096

__all__ = ["dp_solve", "idp_solve", "idp_size_set", "brute_force_solve", "DP_LIMIT", "BRUTE_FORCE_LIMIT"]


def _dp_with(v: CharacteristicFunction, sizes: SizeSet, algorithm: str, monitoring: Optional[MonitoringSystem],
             deadline: Optional[Deadline]) -> SolverResult:
    if v.n > DP_LIMIT:
        raise RefusalException(f"{algorithm} needs 2^n tables; refusing n={v.n} > {DP_LIMIT}", "baselines")
    monitoring = monitoring or MonitoringSystem()
    monitoring.start_timing()
    tables, structure, _ = evaluate_sizes(DPTables.initialized(v), v, sizes, monitoring, deadline)
    registry = SubspaceRegistry(integer_partitions(v.n), size_max_table(v))
    registry.prune_partitions(reachable_subspaces(v.n, sizes), SubspaceState.PRUNED_CONNECTIVITY)
    monitoring.stop_timing()
    return SolverResult(structure, structure_value(structure, v), monitoring.stats(registry), tables.completed, algorithm)


def dp_solve(v: CharacteristicFunction, monitoring: Optional[MonitoringSystem] = None,
             deadline: Optional[Deadline] = None) -> SolverResult:
    """Split-evaluate every coalition of every size (O(3^n))."""
    return _dp_with(v, SizeSet.full(v.n), "dp", monitoring, deadline)


def idp_solve(v: CharacteristicFunction, monitoring: Optional[MonitoringSystem] = None,
              deadline: Optional[Deadline] = None) -> SolverResult:
    """DP restricted to sizes ``2..2n/3`` and ``n``; below four agents this is plain DP."""
    sizes = idp_size_set(v.n) if v.n >= MIN_TUNING_N else SizeSet.full(v.n)
    return _dp_with(v, sizes, "idp", monitoring, deadline)


def brute_force_solve(v: CharacteristicFunction, deadline: Optional[Deadline] = None,
                      monitoring: Optional[MonitoringSystem] = None) -> SolverResult:
    """Enumerate every set partition as a restricted-growth string.

    Args:
        v: Characteristic function with at most BRUTE_FORCE_LIMIT agents
        deadline: Optional time limit; the best structure so far is returned
            non-optimal when it expires
        monitoring: Receives ``structures_visited``

    Returns:
        Exact optimum; the first maximal structure in enumeration order wins ties
    """
    n = v.n
    if n > BRUTE_FORCE_LIMIT:
        raise RefusalException(f"Brute force visits Bell(n) structures; refusing n={n} > {BRUTE_FORCE_LIMIT}",
                               "baselines")
    monitoring = monitoring or MonitoringSystem()
    deadline = deadline or Deadline()
    monitoring.start_timing()
    values = v.as_list()

    blocks: List[int] = []
    best = {"value": -math.inf, "blocks": None}
    visited = 0
    stopped = False

    def assign(agent: int, partial: float):
        nonlocal visited, stopped
        if agent == n:
            visited += 1
            if partial > best["value"]:
                best["value"] = partial
                best["blocks"] = list(blocks)
            if visited % DEADLINE_CHECK_INTERVAL == 0 and deadline.expired():
                stopped = True
            return
        bit = 1 << agent
        for j, block in enumerate(blocks):
            blocks[j] = block | bit
            assign(agent + 1, partial - values[block] + values[block | bit])
            blocks[j] = block
            if stopped:
                return
        blocks.append(bit)
        assign(agent + 1, partial + values[bit])
        blocks.pop()

    assign(0, 0.0)
    monitoring.increment("structures_visited", visited)
    monitoring.stop_timing()
    if stopped:
        logger.warning(f"Brute force stopped by deadline after {visited} structures; result may be suboptimal")
    structure = CoalitionStructure.from_masks(best["blocks"])
    return SolverResult(structure, structure_value(structure, v), monitoring.stats(), not stopped, "brute")
