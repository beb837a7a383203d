"""SMART coalition structure generation

Facade tying together configuration, tuning resolution and the solver
controller. The CLI is a thin layer over this class.
"""

import json
import logging
import os
from typing import Any, Dict, Optional, Sequence

from pydantic import ValidationError

from smart_csg.config import SolverConfig
from smart_csg.core.coalition import CharacteristicFunction, SolverResult
from smart_csg.core.controller import SolverController
from smart_csg.core.errors import InvalidArgumentException, PreconditionException
from smart_csg.core.monitoring import Deadline, MonitoringSystem
from smart_csg.distributions import generate, parse_spec
from smart_csg.engines.solvers import default_engines
from smart_csg.offline.store import load_tuning, store_tuning
from smart_csg.offline.tuning import MIN_TUNING_N, TuningResult, fallback_tuning, tune_all

logger = logging.getLogger("smart_csg")


class SmartCSG:
    """Main entry point: configuration plus every registered engine."""

    def __init__(self, config_path: Optional[str] = None, **overrides: Any):
        """Initialize the solver facade.

        Args:
            config_path: JSON configuration file (optional)
            **overrides: Config fields taking precedence over the file
        """
        self.config = self._load_config(config_path, overrides)
        logger.setLevel(self.config.logging_level)
        self.controller = self._initialize_controller()
        self._tunings: Dict[int, TuningResult] = {}
        logger.debug(f"SmartCSG initialized with {self.config.workers} workers")

    def _load_config(self, config_path: Optional[str], overrides: Dict[str, Any]) -> SolverConfig:
        """Merge a JSON file and explicit overrides over the defaults.

        Args:
            config_path: Path to configuration file
            overrides: Values that win over the file

        Returns:
            SolverConfig
        """
        settings: Dict[str, Any] = {}
        if config_path and os.path.exists(config_path):
            try:
                with open(config_path, "r") as f:
                    user_config = json.load(f)
                SolverConfig(**user_config)
                settings.update(user_config)
            except (OSError, ValueError, TypeError, ValidationError) as e:
                logger.warning(f"Error loading config file: {e}. Using default configuration.")
        elif config_path:
            logger.warning(f"Config file not found: {config_path}. Using default configuration.")
        settings.update({key: value for key, value in overrides.items() if value is not None})
        return SolverConfig(**settings)

    def _initialize_controller(self) -> SolverController:
        controller = SolverController()
        for engine in default_engines():
            controller.register_engine(engine)
        return controller

    def tune(self, n: int, omegas: Optional[Sequence[float]] = None, out: Optional[str] = None,
             force_idp_fallback: bool = False) -> TuningResult:
        """Run the offline tuning for ``n`` agents.

        Args:
            n: Agent count
            omegas: Coverage fractions for GRAD (config default when omitted)
            out: Tuning file to write
            force_idp_fallback: Above the tuning limit, use the IDP size set instead of refusing

        Returns:
            TuningResult
        """
        omegas = list(omegas or self.config.omegas)
        if n < MIN_TUNING_N:
            raise InvalidArgumentException(f"n={n} has no nontrivial sizes to tune; need n >= {MIN_TUNING_N}",
                                           "offline")
        if n > self.config.tuning_limit:
            if not force_idp_fallback:
                raise PreconditionException(
                    f"Exact tuning is limited to n <= {self.config.tuning_limit}; pass --force-idp-fallback to "
                    f"use the IDP size set for every engine, or raise tuning_limit in the config", "offline")
            logger.warning(f"n={n} above the tuning limit; using the IDP size set")
            tuning = fallback_tuning(n, omegas, self.config.cost_model)
        else:
            tuning = tune_all(n, omegas, self.config.cost_model, self.config.ssd_objective)
        if out:
            store_tuning(tuning, out)
        self._tunings[n] = tuning
        return tuning

    def resolve_tuning(self, n: int, tuning_path: Optional[str] = None) -> TuningResult:
        """Tuning for ``n`` from, in order: an explicit file, the tuning directory,
        this session's cache, or a fresh tuning when ``n`` is within the limit."""
        if tuning_path:
            return load_tuning(tuning_path, expected_n=n)
        stored = self.config.tuning_path(n)
        if stored and os.path.exists(stored):
            return load_tuning(stored, expected_n=n)
        if n in self._tunings:
            return self._tunings[n]
        if n < MIN_TUNING_N:
            tuning = fallback_tuning(n, (1.0,), self.config.cost_model)
        elif n <= self.config.tuning_limit:
            logger.info(f"No stored tuning for n={n}; tuning now")
            tuning = tune_all(n, self.config.omegas, self.config.cost_model, self.config.ssd_objective)
        else:
            raise PreconditionException(
                f"No tuning for n={n} above the exact-tuning limit {self.config.tuning_limit}; "
                f"run `smart-csg tune --n {n} --force-idp-fallback --out FILE` and pass --tuning FILE", "offline")
        self._tunings[n] = tuning
        return tuning

    def solve(self, v: CharacteristicFunction, algorithm: str = "smart", tuning_path: Optional[str] = None,
              timeout: Optional[float] = None, monitoring: Optional[MonitoringSystem] = None) -> SolverResult:
        """Solve ``v`` with the named algorithm.

        Args:
            v: Characteristic function
            algorithm: One of smart, cdp, grad, dips, idp, dp, brute
            tuning_path: Tuning file for the tuned engines
            timeout: Seconds before the best incumbent is returned non-optimal
            monitoring: Optional monitoring system

        Returns:
            SolverResult
        """
        engine = self.controller.get_engine(algorithm)
        context: Dict[str, Any] = {
            "workers": self.config.workers,
            "deterministic": self.config.deterministic,
            "deadline": Deadline(timeout),
            "progress_interval": self.config.progress_interval,
            "monitoring": monitoring or MonitoringSystem(),
        }
        if engine is not None and engine.needs_tuning:
            context["tuning"] = self.resolve_tuning(v.n, tuning_path)
        return self.controller.solve(v, algorithm, context)

    def generate(self, dist: str, n: int, seed: int = 0) -> CharacteristicFunction:
        return generate(parse_spec(dist, seed), n)
