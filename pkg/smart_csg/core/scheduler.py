"""Worker pool stepping engine generators.

Every engine is written as a generator that yields after one quantum of
work (one coalition size for DP passes, one subspace for DIPS). The pool
runs those generators either round-robin on the calling thread
(deterministic mode) or on W threads pulling from a shared deque. A task is
never advanced by two threads at once: it leaves the deque while it runs.
"""

import logging
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Deque, Iterator, List, Optional

from smart_csg.core.monitoring import ProgressReporter

logger = logging.getLogger(__name__)


@dataclass
class Task:
    name: str
    steps: Iterator[Any]
    kind: str = "dp"
    on_finish: Optional[Callable[["Task"], None]] = None
    quanta: int = 0
    finished: bool = False


@dataclass
class WorkerPool:
    """Runs tasks until they finish or ``should_stop`` turns true."""

    workers: int = 1
    deterministic: bool = False
    progress: Optional[ProgressReporter] = None
    tasks: Deque[Task] = field(default_factory=deque)
    completed: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.workers = max(1, int(self.workers))
        if self.workers == 1:
            self.deterministic = True
        self._cond = threading.Condition()
        self._running = 0
        self._stopped = False
        self._error: Optional[BaseException] = None

    def submit(self, task: Task):
        with self._cond:
            self.tasks.append(task)
            self._cond.notify()
        logger.debug(f"Submitted task {task.name}")

    def _advance(self, task: Task) -> bool:
        """Run one quantum; returns True while the task has more work."""
        try:
            next(task.steps)
            task.quanta += 1
            return True
        except StopIteration:
            task.finished = True
            self.completed.append(task.name)
            logger.debug(f"Task {task.name} finished after {task.quanta} quanta")
            if task.on_finish is not None:
                task.on_finish(task)
            return False

    def step(self) -> bool:
        """Advance the next task by one quantum on the calling thread.

        Returns:
            False when no task is queued
        """
        with self._cond:
            if not self.tasks:
                return False
            task = self.tasks.popleft()
        if self._advance(task):
            with self._cond:
                self.tasks.append(task)
        return True

    def run(self, should_stop: Callable[[], bool]):
        """Run until every task finished or ``should_stop`` returns True.

        Args:
            should_stop: Polled between quanta
        """
        if self.deterministic:
            while not should_stop() and self.step():
                self._report()
        else:
            threads = [
                threading.Thread(target=self._worker_loop, args=(should_stop,), name=f"csg-worker-{i}", daemon=True)
                for i in range(self.workers)
            ]
            for thread in threads:
                thread.start()
            for thread in threads:
                thread.join()
            if self._error is not None:
                raise self._error
        if self.progress is not None:
            self.progress.maybe_report(force=True)

    def _report(self):
        if self.progress is not None:
            self.progress.maybe_report()

    def _worker_loop(self, should_stop: Callable[[], bool]):
        while True:
            with self._cond:
                while True:
                    if self._stopped:
                        return
                    if should_stop():
                        self._stopped = True
                        self._cond.notify_all()
                        return
                    if self.tasks:
                        break
                    if self._running == 0:
                        self._cond.notify_all()
                        return
                    self._cond.wait(0.05)
                task = self.tasks.popleft()
                self._running += 1
            try:
                alive = self._advance(task)
            except BaseException as error:  # surfaced by run()
                logger.exception(f"Task {task.name} failed")
                with self._cond:
                    self._error = self._error or error
                    self._stopped = True
                    self._running -= 1
                    self._cond.notify_all()
                return
            with self._cond:
                self._running -= 1
                if alive:
                    self.tasks.append(task)
                self._cond.notify_all()
            self._report()
