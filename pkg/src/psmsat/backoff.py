"""Contention-window schedule and uniform backoff draws."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_MAX_STAGE = 7
DEFAULT_CWMIN = 32
DEFAULT_CWCAP = 1024


@dataclass(frozen=True)
class BackoffSchedule:
    """Windows ``b_0..b_K``; after ``k`` collisions the backoff is uniform on
    ``[0, b_k - 1]``.  A collision at stage ``K`` discards the frame."""

    windows: tuple[int, ...]

    def __post_init__(self):
        w = tuple(int(b) for b in self.windows)
        if not w:
            raise ValueError("schedule needs at least one window")
        if any(b < 1 for b in w):
            raise ValueError(f"every window must be >= 1, got {w}")
        object.__setattr__(self, "windows", w)

    @property
    def max_stage(self) -> int:
        return len(self.windows) - 1

    @classmethod
    def from_windows(cls, windows, max_stage: int | None = None) -> BackoffSchedule:
        windows = tuple(windows)
        if max_stage is not None and len(windows) != max_stage + 1:
            raise ValueError(
                f"windows has {len(windows)} entries but max stage {max_stage} needs {max_stage + 1}"
            )
        return cls(windows)

    @classmethod
    def from_cwmin(cls, cwmin: int, max_stage: int = DEFAULT_MAX_STAGE, cwcap: int = DEFAULT_CWCAP) -> BackoffSchedule:
        """Binary exponential schedule ``min(cwmin * 2**k, cwcap)``."""
        if max_stage < 0:
            raise ValueError("max_stage must be >= 0")
        return cls(tuple(min(cwmin * 2**k, cwcap) for k in range(max_stage + 1)))


def default_schedule() -> BackoffSchedule:
    return BackoffSchedule.from_cwmin(DEFAULT_CWMIN, DEFAULT_MAX_STAGE, DEFAULT_CWCAP)


def _check_stage(schedule: BackoffSchedule, k: int) -> None:
    if not 0 <= k <= schedule.max_stage:
        raise IndexError(f"stage {k} outside 0..{schedule.max_stage}")


def mean_backoff(schedule: BackoffSchedule, k: int) -> float:
    _check_stage(schedule, k)
    return (schedule.windows[k] - 1) / 2.0


def sample_backoff(schedule: BackoffSchedule, k: int, rng: np.random.Generator) -> int:
    _check_stage(schedule, k)
    return int(rng.integers(schedule.windows[k]))
