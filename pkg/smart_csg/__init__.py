"""smart_csg: optimal coalition structure generation."""

__version__ = "1.0.0"

from smart_csg.core.coalition import CharacteristicFunction, CoalitionStructure, SolverResult, structure_value
from smart_csg.smart_csg import SmartCSG

__all__ = [
    "CharacteristicFunction",
    "CoalitionStructure",
    "SolverResult",
    "SmartCSG",
    "structure_value",
]
