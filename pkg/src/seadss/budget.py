"""Wall-clock budget guard shared by the long-running query paths."""

from __future__ import annotations

import time
from dataclasses import dataclass


class TimeBudgetError(RuntimeError):
    """Raised when a query exceeds its server-side time budget."""


@dataclass(frozen=True)
class Deadline:
    """Absolute monotonic-time deadline; ``None`` end means unlimited."""

    t_end: float | None = None

    @staticmethod
    def after(seconds: float | None) -> "Deadline":
        if seconds is None:
            return Deadline(None)
        return Deadline(time.monotonic() + seconds)

    def check(self, what: str) -> None:
        if self.t_end is not None and time.monotonic() > self.t_end:
            raise TimeBudgetError(f"{what} exceeded the time budget")


NO_DEADLINE = Deadline(None)
