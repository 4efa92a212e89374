"""Monte-Carlo realisation of the abstract renewal processes behind the
closed forms: the AP interrupts the station's backoff as an independent
per-slot Bernoulli(beta_a) process, and AP attempts collide w.p. beta_s.

Cycles are simulated in lockstep with numpy; each pass advances every
unfinished cycle by one backoff draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backoff import BackoffSchedule


@dataclass(frozen=True)
class StaCycleStats:
    mean_data_slots: float
    mean_pspoll_slots: float
    mean_ap_successes: float
    mean_sta_attempts: float
    n_cycles: int
    standard_errors: dict


@dataclass(frozen=True)
class ApCycleStats:
    mean_attempts: float
    mean_slots: float
    n_cycles: int
    standard_errors: dict


def _first_interrupt(rng: np.random.Generator, beta: float, n: int) -> np.ndarray:
    """Slot index of the first Bernoulli(beta) success (0-based); huge if beta == 0."""
    if beta == 0.0:
        return np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    return rng.geometric(beta, size=n).astype(np.int64) - 1


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    se = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return float(values.mean()), se


def simulate_sta_cycles(beta_a: float, schedule: BackoffSchedule, n_cycles: int, seed: int) -> StaCycleStats:
    """Per-frame rewards of the station: data-backoff slots, PS-POLL residual
    slots, AP interruptions and data attempts, from frame arrival to success
    or discard."""
    if not 0.0 <= beta_a < 1.0:
        raise ValueError("beta_a must lie in [0, 1)")
    if n_cycles < 1:
        raise ValueError("n_cycles must be >= 1")
    rng = np.random.default_rng(seed)
    windows = np.asarray(schedule.windows, dtype=np.int64)
    kmax = schedule.max_stage

    data = np.zeros(n_cycles, dtype=np.int64)
    pspoll = np.zeros(n_cycles, dtype=np.int64)
    ap_succ = np.zeros(n_cycles, dtype=np.int64)
    attempts = np.zeros(n_cycles, dtype=np.int64)

    active = np.arange(n_cycles)
    stage = np.zeros(n_cycles, dtype=np.int64)
    while active.size:
        k = stage[active]
        x = rng.integers(windows[k])
        g = _first_interrupt(rng, beta_a, active.size)

        interrupted = g < x
        reached = ~interrupted
        collided = reached & (g == x)

        data[active] += np.where(interrupted, g, x)
        pspoll[active] += np.where(interrupted, x - g, 0)
        ap_succ[active] += interrupted
        attempts[active] += reached

        new_stage = np.where(interrupted, 0, k + 1)
        done = (reached & ~collided) | (collided & (k == kmax))
        stage[active] = new_stage
        active = active[~done]

    means, ses = {}, {}
    for name, arr in (("data", data), ("pspoll", pspoll), ("ap", ap_succ), ("att", attempts)):
        means[name], ses[name] = _mean_se(arr.astype(float))
    return StaCycleStats(
        mean_data_slots=means["data"],
        mean_pspoll_slots=means["pspoll"],
        mean_ap_successes=means["ap"],
        mean_sta_attempts=means["att"],
        n_cycles=n_cycles,
        standard_errors={
            "mean_data_slots": ses["data"],
            "mean_pspoll_slots": ses["pspoll"],
            "mean_ap_successes": ses["ap"],
            "mean_sta_attempts": ses["att"],
        },
    )


def simulate_ap_cycles(beta_s: float, schedule: BackoffSchedule, n_cycles: int, seed: int) -> ApCycleStats:
    """Attempts and backoff slots per AP frame when each attempt collides w.p. ``beta_s``."""
    if not 0.0 <= beta_s < 1.0:
        raise ValueError("beta_s must lie in [0, 1)")
    if n_cycles < 1:
        raise ValueError("n_cycles must be >= 1")
    rng = np.random.default_rng(seed)
    windows = np.asarray(schedule.windows, dtype=np.int64)
    kmax = schedule.max_stage

    slots = np.zeros(n_cycles, dtype=np.int64)
    attempts = np.zeros(n_cycles, dtype=np.int64)
    active = np.arange(n_cycles)
    k = 0
    while active.size:
        slots[active] += rng.integers(windows[k], size=active.size)
        attempts[active] += 1
        if k == kmax:
            break
        collided = rng.random(active.size) < beta_s
        active = active[collided]
        k += 1

    m_att, se_att = _mean_se(attempts.astype(float))
    m_slots, se_slots = _mean_se(slots.astype(float))
    return ApCycleStats(m_att, m_slots, n_cycles, {"mean_attempts": se_att, "mean_slots": se_slots})
