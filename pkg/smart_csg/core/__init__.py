"""Core components: coalition model, partition graph, shared search state."""

from smart_csg.core.coalition import (
    CharacteristicFunction, CoalitionStructure, SizeMaxTable, SolverResult, size_max_table, structure_value
)
from smart_csg.core.controller import SolverController
from smart_csg.core.engine import Engine
from smart_csg.core.errors import (
    CSGException, InvalidArgumentException, PreconditionException, RefusalException, ValidationException,
    format_error_response
)
from smart_csg.core.governance import GovernanceEngine, GovernanceRule
from smart_csg.core.monitoring import Deadline, MonitoringSystem

__all__ = [
    "CharacteristicFunction",
    "CoalitionStructure",
    "SizeMaxTable",
    "SolverResult",
    "size_max_table",
    "structure_value",
    "SolverController",
    "Engine",
    "CSGException",
    "InvalidArgumentException",
    "PreconditionException",
    "RefusalException",
    "ValidationException",
    "format_error_response",
    "GovernanceEngine",
    "GovernanceRule",
    "Deadline",
    "MonitoringSystem",
]
