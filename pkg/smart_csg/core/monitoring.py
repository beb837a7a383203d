"""Monitoring Implementation

Counters and timers behind the ``stats`` of every SolverResult, plus the
deadline and progress hooks the engines poll between quanta.
"""

import logging
import threading
import time
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional

from smart_csg.core.coalition import STAT_KEYS

progress_logger = logging.getLogger("smart_csg.progress")


class PerformanceMetric:
    """Base class for performance metrics."""

    def __init__(self, metric_id: str, description: str):
        """Initialize a new PerformanceMetric instance.

        Args:
            metric_id: Unique identifier for the metric
            description: Description of the metric
        """
        self.metric_id = metric_id
        self.description = description
        self.values: List[Dict[str, Any]] = []

    def record(self, value: Any):
        self.values.append({
            "timestamp": datetime.now().isoformat(),
            "value": value
        })

    def get_latest(self) -> Optional[Dict[str, Any]]:
        if self.values:
            return self.values[-1]
        return None


class CounterMetric(PerformanceMetric):
    """Thread-safe running total."""

    def __init__(self, metric_id: str, description: str):
        super().__init__(metric_id, description)
        self.total = 0
        self._lock = threading.Lock()

    def increment(self, amount: int = 1):
        with self._lock:
            self.total += amount

    def get_latest(self) -> Optional[Dict[str, Any]]:
        return {"timestamp": datetime.now().isoformat(), "value": self.total}


class ElapsedTimeMetric(PerformanceMetric):
    """Wall-clock duration of a solve in nanoseconds."""

    def __init__(self):
        super().__init__("elapsed_ns", "Time taken by a solve")
        self.start_time: Optional[int] = None

    def start(self):
        self.start_time = time.perf_counter_ns()

    def stop(self) -> Optional[int]:
        """Stop the timer and record the elapsed time.

        Returns:
            Elapsed nanoseconds, or None if the timer was not started
        """
        if self.start_time is not None:
            elapsed = time.perf_counter_ns() - self.start_time
            self.record(elapsed)
            self.start_time = None
            return elapsed
        return None

    def elapsed(self) -> int:
        if self.start_time is not None:
            return time.perf_counter_ns() - self.start_time
        latest = self.get_latest()
        return latest["value"] if latest else 0


class MonitoringSystem:
    """Collects the counters of one solve."""

    COUNTERS = {
        "splits_evaluated": "Two-way split comparisons made by DP passes",
        "bnb_nodes_expanded": "Branch-and-bound nodes that passed the bound test",
        "bnb_leaves": "Complete structures reached by branch-and-bound",
        "structures_visited": "Structures enumerated by brute force",
    }

    def __init__(self):
        self.metrics: Dict[str, PerformanceMetric] = {}
        for metric_id, description in self.COUNTERS.items():
            self.register_metric(CounterMetric(metric_id, description))
        self.register_metric(ElapsedTimeMetric())

    def register_metric(self, metric: PerformanceMetric):
        self.metrics[metric.metric_id] = metric

    def increment(self, metric_id: str, amount: int = 1):
        metric = self.metrics.get(metric_id)
        if isinstance(metric, CounterMetric):
            metric.increment(amount)

    def count(self, metric_id: str) -> int:
        metric = self.metrics.get(metric_id)
        return metric.total if isinstance(metric, CounterMetric) else 0

    def start_timing(self):
        self.metrics["elapsed_ns"].start()

    def stop_timing(self) -> Optional[int]:
        return self.metrics["elapsed_ns"].stop()

    def stats(self, registry: Any = None) -> Dict[str, int]:
        """Build the stats dictionary of a SolverResult.

        Args:
            registry: Optional SubspaceRegistry supplying subspace counts

        Returns:
            Mapping with every key of ``STAT_KEYS``
        """
        stats = {key: 0 for key in STAT_KEYS}
        for metric_id in self.COUNTERS:
            stats[metric_id] = self.count(metric_id)
        if registry is not None:
            stats.update(registry.counts())
        stats["elapsed_ns"] = self.metrics["elapsed_ns"].elapsed()
        return stats


class Deadline:
    """Monotonic deadline; ``None`` seconds means no limit."""

    def __init__(self, seconds: Optional[float] = None):
        self.seconds = seconds
        self._expires = None if seconds is None else time.monotonic() + seconds

    def expired(self) -> bool:
        return self._expires is not None and time.monotonic() >= self._expires

    def remaining(self) -> Optional[float]:
        if self._expires is None:
            return None
        return max(0.0, self._expires - time.monotonic())


class ProgressReporter:
    """Logs solver snapshots at most once per interval."""

    def __init__(self, interval: float = 1.0, snapshot: Optional[Callable[[], Dict[str, Any]]] = None):
        self.interval = interval
        self.snapshot = snapshot
        self._last = time.monotonic()
        self._lock = threading.Lock()
        self.reports = 0

    def maybe_report(self, force: bool = False) -> bool:
        if self.snapshot is None:
            return False
        with self._lock:
            now = time.monotonic()
            if not force and now - self._last < self.interval:
                return False
            self._last = now
            self.reports += 1
        data = self.snapshot()
        progress_logger.info(
            f"incumbent={data.get('incumbent')} remaining={data.get('subspaces_remaining')} "
            f"splits={data.get('splits_evaluated')}"
        )
        return True
