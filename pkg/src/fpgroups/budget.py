"""Resource budgets for the search engines.

Enumeration (Todd-Coxeter, low-index, closure searches) can legitimately fail
to finish; budgets make that a first-class outcome instead of a hang.  Engines
either return an explicit exhausted-result value or raise BudgetExhausted,
depending on their contract.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace


class BudgetExhausted(RuntimeError):
    """A search hit its budget before reaching a definite answer."""

    def __init__(self, what: str):
        super().__init__(what)
        self.what = what


@dataclass(frozen=True)
class Budget:
    time_limit_s: float = 60.0
    max_cosets: int = 100_000
    max_elements: int = 100_000

    def with_time(self, seconds: float) -> "Budget":
        return replace(self, time_limit_s=seconds)

    def start(self) -> "Stopwatch":
        return Stopwatch(self.time_limit_s)


class Stopwatch:
    """Deadline tracker; check() raises once the time budget is spent."""

    __slots__ = ("t0", "limit")

    def __init__(self, limit_s: float):
        self.t0 = time.monotonic()
        self.limit = limit_s

    def elapsed(self) -> float:
        return time.monotonic() - self.t0

    def expired(self) -> bool:
        return self.elapsed() > self.limit

    def check(self, what: str = "time limit") -> None:
        if self.expired():
            raise BudgetExhausted(what)


DEFAULT_BUDGET = Budget()
