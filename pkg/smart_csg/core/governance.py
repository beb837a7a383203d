"""Governance Implementation

Pre-solve rules. Every solve passes through ``GovernanceEngine.enforce``
before an engine touches the characteristic function; critical violations
block the solve, the rest are logged as warnings.
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Dict

logger = logging.getLogger(__name__)

# Largest n each algorithm accepts.
SIZE_LIMITS = {
    "brute": 13,
    "dp": 25,
    "idp": 25,
}
DEFAULT_SIZE_LIMIT = 30

# DP processes plus one DIPS worker.
MIN_ENGINES = {
    "smart": 4,
    "cdp": 2,
}


class GovernanceRule(ABC):
    """Base class for governance rules."""

    def __init__(self, rule_id: str, description: str, severity: str):
        """Initialize a new GovernanceRule instance.

        Args:
            rule_id: Unique identifier for the rule
            description: Description of the rule
            severity: Severity of a violation (warning, critical)
        """
        self.rule_id = rule_id
        self.description = description
        self.severity = severity

    @abstractmethod
    def evaluate(self, context: Dict[str, Any]) -> Dict[str, Any]:
        """Evaluate the rule against a solve context.

        Args:
            context: Keys ``algorithm``, ``n`` and optionally ``tuning``, ``workers``

        Returns:
            Evaluation results
        """

    def _compliant(self, message: str) -> Dict[str, Any]:
        return {"rule_id": self.rule_id, "status": "compliant", "message": message}

    def _violation(self, message: str, severity: str = None) -> Dict[str, Any]:
        return {
            "rule_id": self.rule_id,
            "status": "violation",
            "severity": severity or self.severity,
            "message": message,
        }


class ProblemSizeRule(GovernanceRule):
    """Refuses agent counts an algorithm cannot handle."""

    def __init__(self):
        super().__init__("problem_size_rule", "Keeps n within each algorithm's table or enumeration limit", "critical")

    def evaluate(self, context: Dict[str, Any]) -> Dict[str, Any]:
        if "algorithm" not in context or "n" not in context:
            return {"rule_id": self.rule_id, "status": "error", "message": "Missing required context: algorithm, n"}
        algorithm = context["algorithm"]
        n = context["n"]
        limit = SIZE_LIMITS.get(algorithm, DEFAULT_SIZE_LIMIT)
        if n > limit:
            return self._violation(f"{algorithm} refuses n={n}; limit is {limit}")
        return self._compliant(f"n={n} is within the {algorithm} limit of {limit}")


class TuningMatchRule(GovernanceRule):
    """The tuning file must have been produced for the problem's n."""

    def __init__(self):
        super().__init__("tuning_match_rule", "Tuning agent count equals the problem agent count", "critical")

    def evaluate(self, context: Dict[str, Any]) -> Dict[str, Any]:
        tuning = context.get("tuning")
        if tuning is None:
            return self._compliant("No tuning in use")
        if tuning.n != context.get("n"):
            return self._violation(f"tuning/problem size mismatch: tuning is for n={tuning.n}, "
                                   f"problem has n={context.get('n')}")
        return self._compliant(f"Tuning matches n={tuning.n}")


class WorkerBudgetRule(GovernanceRule):
    """At least one worker; fewer workers than engines only time-multiplexes them.

    Deterministic runs, which multiplex every engine on one thread, are not warned.
    """

    def __init__(self):
        super().__init__("worker_budget_rule", "Worker count is positive", "critical")

    def evaluate(self, context: Dict[str, Any]) -> Dict[str, Any]:
        workers = context.get("workers", 1)
        if workers < 1:
            return self._violation(f"Worker count must be at least 1, got {workers}")
        engines = MIN_ENGINES.get(context.get("algorithm"), 1)
        if workers < engines and not context.get("deterministic", False):
            return self._violation(f"{workers} workers for at least {engines} engines; engines will share workers",
                                   "warning")
        return self._compliant(f"{workers} workers")


class GovernanceEngine:
    """Engine for enforcing governance rules."""

    def __init__(self):
        self.rules: Dict[str, GovernanceRule] = {}

    def register_rule(self, rule: GovernanceRule):
        self.rules[rule.rule_id] = rule

    def evaluate(self, context: Dict[str, Any]) -> Dict[str, Any]:
        """Evaluate all rules against a context.

        Args:
            context: The context to evaluate

        Returns:
            Per-rule results and the list of violations
        """
        results = {}
        violations = []
        for rule_id, rule in self.rules.items():
            result = rule.evaluate(context)
            results[rule_id] = result
            if result["status"] == "violation":
                violations.append(result)
        return {
            "results": results,
            "violations": violations,
            "status": "violations_detected" if violations else "compliant",
        }

    def enforce(self, context: Dict[str, Any]) -> Dict[str, Any]:
        """Decide whether a solve may start.

        Args:
            context: The context to enforce

        Returns:
            ``action`` of block, warn or proceed, with the violations behind it
        """
        evaluation = self.evaluate(context)
        if evaluation["status"] != "violations_detected":
            return {"action": "proceed", "message": "No violations detected"}
        critical = [v for v in evaluation["violations"] if v["severity"] == "critical"]
        if critical:
            return {"action": "block", "violations": critical, "message": "Blocked due to critical violations"}
        for violation in evaluation["violations"]:
            logger.warning(violation["message"])
        return {"action": "warn", "violations": evaluation["violations"], "message": "Proceeding with warnings"}


def default_governance() -> GovernanceEngine:
    engine = GovernanceEngine()
    for rule in (ProblemSizeRule(), TuningMatchRule(), WorkerBudgetRule()):
        engine.register_rule(rule)
    return engine
