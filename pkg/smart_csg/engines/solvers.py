"""Engine wrappers registered with the SolverController.

Each wrapper adapts one solve function to the ``Engine`` interface; the
run options arrive in the context dictionary.
"""

import logging
from typing import Any, Dict, List

from smart_csg.core.coalition import CharacteristicFunction, SolverResult, size_max_table
from smart_csg.core.engine import Engine
from smart_csg.core.errors import PreconditionException
from smart_csg.core.ipg import integer_partitions
from smart_csg.engines.baselines import brute_force_solve, dp_solve, idp_solve
from smart_csg.engines.cdp import cdp_solve
from smart_csg.engines.dips import dips_run, order_subspaces
from smart_csg.engines.grad import grad_solve
from smart_csg.engines.smart import smart_solve

logger = logging.getLogger(__name__)

VERSION = 1.0


class SolverEngine(Engine):
    """Engine whose identifier is derived from its algorithm name."""

    def __init__(self, algorithm: str, capabilities: List[str]):
        super().__init__(f"SMART-CSG-{algorithm.upper()}-ENGINE-V{VERSION}", algorithm, VERSION, capabilities)

    def _initialize(self):
        logger.debug(f"Initializing engine: {self.engine_id}")

    def _tuning(self, context: Dict[str, Any]):
        tuning = context.get("tuning")
        if tuning is None:
            raise PreconditionException(f"{self.algorithm} needs a tuning; run `smart-csg tune` first", self.algorithm)
        return tuning


class SmartEngine(SolverEngine):
    def __init__(self):
        super().__init__("smart", ["tuned", "parallel", "anytime"])

    def solve(self, v: CharacteristicFunction, context: Dict[str, Any]) -> SolverResult:
        return smart_solve(v, self._tuning(context), context.get("workers", 1), context.get("deterministic", False),
                           context.get("deadline"), context.get("monitoring"), context.get("progress_interval"))


class CDPEngine(SolverEngine):
    def __init__(self):
        super().__init__("cdp", ["tuned", "parallel"])

    def solve(self, v: CharacteristicFunction, context: Dict[str, Any]) -> SolverResult:
        concurrent = context.get("workers", 1) > 1 and not context.get("deterministic", False)
        return cdp_solve(v, self._tuning(context).cdp_pair, concurrent, context.get("monitoring"),
                         context.get("deadline"))


class GradEngine(SolverEngine):
    def __init__(self):
        super().__init__("grad", ["tuned", "parallel", "anytime"])

    def solve(self, v: CharacteristicFunction, context: Dict[str, Any]) -> SolverResult:
        sets = [sizes for _, sizes in self._tuning(context).distinct_grad_sets()]
        workers = 1 if context.get("deterministic", False) else context.get("workers", 1)
        return grad_solve(v, sets, workers, context.get("deadline"), context.get("monitoring"),
                          context.get("progress_interval"))


class DipsEngine(SolverEngine):
    def __init__(self):
        super().__init__("dips", ["parallel", "anytime"])

    def solve(self, v: CharacteristicFunction, context: Dict[str, Any]) -> SolverResult:
        maxes = size_max_table(v)
        queue = order_subspaces(integer_partitions(v.n), maxes)
        workers = 1 if context.get("deterministic", False) else context.get("workers", 1)
        return dips_run(queue, v, maxes, None, workers, context.get("deadline"), context.get("monitoring"),
                        context.get("progress_interval"))


class DPEngine(SolverEngine):
    def __init__(self):
        super().__init__("dp", [])

    def solve(self, v: CharacteristicFunction, context: Dict[str, Any]) -> SolverResult:
        return dp_solve(v, context.get("monitoring"), context.get("deadline"))


class IDPEngine(SolverEngine):
    def __init__(self):
        super().__init__("idp", [])

    def solve(self, v: CharacteristicFunction, context: Dict[str, Any]) -> SolverResult:
        return idp_solve(v, context.get("monitoring"), context.get("deadline"))


class BruteForceEngine(SolverEngine):
    def __init__(self):
        super().__init__("brute", ["anytime"])

    def solve(self, v: CharacteristicFunction, context: Dict[str, Any]) -> SolverResult:
        return brute_force_solve(v, context.get("deadline"), context.get("monitoring"))


ALGORITHMS = ("smart", "cdp", "grad", "dips", "idp", "dp", "brute")


def default_engines() -> List[Engine]:
    return [SmartEngine(), CDPEngine(), GradEngine(), DipsEngine(), IDPEngine(), DPEngine(), BruteForceEngine()]
