"""Solver Controller Implementation

Keeps the registered engines, runs the governance rules before each solve,
and checks every result against the input before handing it back.
"""

import logging
from typing import Any, Dict, List, Optional

from smart_csg.core.coalition import CharacteristicFunction, SolverResult
from smart_csg.core.engine import Engine
from smart_csg.core.errors import (
    InvalidArgumentException, PreconditionException, RefusalException, TuningMismatchException, ValidationException
)
from smart_csg.core.governance import GovernanceEngine, default_governance
from smart_csg.core.monitoring import MonitoringSystem

logger = logging.getLogger(__name__)

# Exception raised when a critical rule blocks a solve.
_BLOCKING_ERRORS = {
    "problem_size_rule": RefusalException,
    "tuning_match_rule": TuningMismatchException,
}


class SolverController:
    """Registry of solver engines behind a governed ``solve`` entry point."""

    def __init__(self, governance: Optional[GovernanceEngine] = None):
        self.engines: Dict[str, Engine] = {}
        self.governance = governance or default_governance()

    def register_engine(self, engine: Engine):
        """Register an engine under its algorithm name.

        Args:
            engine: The engine to register
        """
        self.engines[engine.algorithm] = engine
        logger.debug(f"Registered engine: {engine}")

    def unregister_engine(self, algorithm: str):
        if algorithm in self.engines:
            engine = self.engines.pop(algorithm)
            logger.info(f"Unregistered engine: {engine}")
        else:
            logger.warning(f"Engine not found: {algorithm}")

    def get_engine(self, algorithm: str) -> Optional[Engine]:
        return self.engines.get(algorithm)

    def algorithms(self) -> List[str]:
        return list(self.engines)

    def solve(self, v: CharacteristicFunction, algorithm: str, context: Optional[Dict[str, Any]] = None) -> SolverResult:
        """Solve ``v`` with a registered engine.

        Args:
            v: Characteristic function
            algorithm: Name of a registered engine
            context: Run options passed to the engine

        Returns:
            The engine's SolverResult, checked against ``v``
        """
        context = dict(context or {})
        engine = self.get_engine(algorithm)
        if engine is None:
            raise InvalidArgumentException(
                f"Unknown algorithm {algorithm!r}; choose one of {', '.join(self.algorithms())}", "controller")

        governance_context = {
            "algorithm": algorithm,
            "n": v.n,
            "tuning": context.get("tuning"),
            "workers": context.get("workers", 1),
            "deterministic": context.get("deterministic", False),
        }
        governance_result = self.governance.enforce(governance_context)
        if governance_result["action"] == "block":
            violation = governance_result["violations"][0]
            logger.warning(f"Solve blocked by governance rules: {violation['message']}")
            error = _BLOCKING_ERRORS.get(violation["rule_id"])
            if error is RefusalException:
                raise RefusalException(violation["message"], algorithm)
            if error is TuningMismatchException:
                raise TuningMismatchException(violation["message"], expected_n=v.n,
                                              actual_n=getattr(context.get("tuning"), "n", None))
            raise PreconditionException(violation["message"], algorithm)

        context.setdefault("monitoring", MonitoringSystem())
        logger.info(f"Solving n={v.n} with {engine}")
        result = engine.solve(v, context)

        if not engine.validate_result(result, v):
            raise ValidationException(f"{algorithm} returned a structure inconsistent with its value", algorithm,
                                      result.structure.validation_errors(v.n))
        if governance_result["action"] == "warn":
            result.warnings = [violation["message"] for violation in governance_result["violations"]]
        logger.info(f"{algorithm} finished: value={result.value} optimal={result.optimal} "
                    f"elapsed_ns={result.stats.get('elapsed_ns')}")
        return result
