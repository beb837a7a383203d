"""Solver configuration."""

import os
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

from smart_csg.offline.sizes import CostModel
from smart_csg.offline.tuning import DEFAULT_OMEGAS, TUNING_LIMIT, SsdObjective

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _default_workers() -> int:
    return os.cpu_count() or 1


class SolverConfig(BaseModel):
    """Defaults for every solve; JSON config files and CLI flags override them."""

    workers: int = Field(default_factory=_default_workers, ge=1)
    deterministic: bool = False
    omegas: List[float] = Field(default_factory=lambda: list(DEFAULT_OMEGAS))
    tuning_limit: int = Field(default=TUNING_LIMIT, ge=4, le=30)
    tuning_dir: Optional[str] = None
    progress_interval: Optional[float] = Field(default=1.0, gt=0)
    logging_level: str = "INFO"
    cost_model: CostModel = Field(default_factory=CostModel)
    ssd_objective: SsdObjective = "minimax"

    @field_validator("logging_level")
    @classmethod
    def _known_level(cls, level: str) -> str:
        if level.upper() not in LOG_LEVELS:
            raise ValueError(f"unknown logging level {level!r}; expected one of {', '.join(LOG_LEVELS)}")
        return level.upper()

    @field_validator("omegas")
    @classmethod
    def _omegas_in_range(cls, omegas: List[float]) -> List[float]:
        if not omegas:
            raise ValueError("at least one omega is required")
        for omega in omegas:
            if not 0 < omega <= 1:
                raise ValueError(f"omega {omega} outside (0, 1]")
        return sorted(set(omegas))

    def tuning_path(self, n: int) -> Optional[str]:
        """Where a stored tuning for ``n`` agents is looked up, if a directory is configured."""
        if self.tuning_dir is None:
            return None
        return os.path.join(self.tuning_dir, f"tuning_n{n}.json")
