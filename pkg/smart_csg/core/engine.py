"""Base Engine Implementation

Every solver the controller can run derives from ``Engine``.
"""

import math
from abc import ABC, abstractmethod
from typing import Any, Dict, List

from smart_csg.core.coalition import CharacteristicFunction, SolverResult


class Engine(ABC):
    """Base class for coalition structure solvers."""

    # Relative tolerance when checking a reported value against its structure.
    VALUE_TOLERANCE = 1e-9

    def __init__(self, engine_id: str, algorithm: str, version: float, capabilities: List[str]):
        """Initialize a new Engine instance.

        Args:
            engine_id: Unique identifier for the engine
            algorithm: Algorithm name used on the command line
            version: Engine version
            capabilities: Features the engine supports (e.g. "parallel", "anytime")
        """
        self.engine_id = engine_id
        self.algorithm = algorithm
        self.version = version
        self.capabilities = capabilities
        self._initialize()

    def _initialize(self):
        """Initialize engine-specific resources."""

    @property
    def needs_tuning(self) -> bool:
        return "tuned" in self.capabilities

    @abstractmethod
    def solve(self, v: CharacteristicFunction, context: Dict[str, Any]) -> SolverResult:
        """Solve one instance.

        Args:
            v: Characteristic function
            context: Run options (``tuning``, ``workers``, ``deterministic``,
                ``deadline``, ``monitoring``, ``progress_interval``)

        Returns:
            SolverResult
        """

    def validate_result(self, result: SolverResult, v: CharacteristicFunction) -> bool:
        """Check that the structure partitions the agents and carries the reported value."""
        if result.structure.validation_errors(v.n):
            return False
        expected = math.fsum(v.values[mask] for mask in result.structure.coalitions)
        return math.isclose(result.value, expected, rel_tol=self.VALUE_TOLERANCE, abs_tol=self.VALUE_TOLERANCE)

    def __str__(self) -> str:
        return f"{self.engine_id} (v{self.version}) - {self.algorithm}"
