"""Slot-level simulation of DCF basic access for one saturated AP and one
saturated PSM station.

Idle runs are skipped in one step (both counters drop by their minimum), so
the cost is per channel event rather than per slot.  Clocks are integer
nanoseconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np
from scipy import stats

from .backoff import BackoffSchedule, default_schedule
from .phy import PhyParams, frame_durations, to_ns

MIN_BATCHES = 20

_TALLIES = (
    "restricted_idle_slots", "ap_attempts", "sta_data_attempts", "ap_successes",
    "sta_successes", "collisions", "ap_discards", "sta_discards", "pspoll_count",
    "pspoll_countdown_slots", "time_idle_ns", "time_ap_success_ns",
    "time_sta_success_ns", "time_collision_ns", "time_pspoll_ns",
)


@dataclass(frozen=True)
class SimConfig:
    phy: PhyParams = field(default_factory=PhyParams)
    schedule: BackoffSchedule = field(default_factory=default_schedule)
    seed: int = 0
    horizon_slots: int | None = 10_000_000
    horizon_us: float | None = None
    warmup_fraction: float = 0.1
    batches: int = 30
    # False turns the station into a plain DCF station: no PS-POLL and no
    # backoff restart after AP successes (control runs).
    sta_restart: bool = True

    def __post_init__(self):
        if (self.horizon_slots is None) == (self.horizon_us is None):
            raise ValueError("give exactly one of horizon_slots or horizon_us")
        horizon = self.horizon_slots if self.horizon_us is None else self.horizon_us
        if horizon < 0:
            raise ValueError("horizon must be non-negative")
        if not 0.0 <= self.warmup_fraction <= 0.5:
            raise ValueError("warmup_fraction must lie in [0, 0.5]")
        if self.batches < 1:
            raise ValueError("batches must be >= 1")


@dataclass
class SimCounters:
    restricted_idle_slots: int = 0
    ap_attempts: int = 0
    sta_data_attempts: int = 0
    ap_successes: int = 0
    sta_successes: int = 0
    collisions: int = 0
    ap_discards: int = 0
    sta_discards: int = 0
    pspoll_count: int = 0
    pspoll_countdown_slots: int = 0
    time_idle_ns: int = 0
    time_ap_success_ns: int = 0
    time_sta_success_ns: int = 0
    time_collision_ns: int = 0
    time_pspoll_ns: int = 0
    sim_time_ns: int = 0
    min_pspoll_residual: int | None = None
    sta_stage_slots: tuple[int, ...] = ()
    batches: list[SimCounters] = field(default_factory=list, repr=False)

    @property
    def sim_time(self) -> float:
        """Measured simulated time in microseconds."""
        return self.sim_time_ns / 1000.0

    @classmethod
    def from_tallies(cls, tallies, **extra) -> SimCounters:
        c = cls(**dict(zip(_TALLIES, tallies)), **extra)
        c.sim_time_ns = (c.time_idle_ns + c.time_ap_success_ns + c.time_sta_success_ns
                         + c.time_collision_ns + c.time_pspoll_ns)
        return c


@dataclass(frozen=True)
class EmpiricalEstimates:
    beta_a_hat: float
    beta_s_hat: float
    beta_ps_hat: float
    p_coll_hat: float
    theta_ap_hat: float  # packets/s
    theta_sta_hat: float
    theta_ap_mbps_hat: float
    theta_sta_mbps_hat: float
    confidence_halfwidths: dict | None
    n_batches: int
    note: str = ""


class _Uniforms:
    """Buffered U[0,1) draws; ``draw(b)`` is uniform on ``0..b-1``."""

    def __init__(self, rng: np.random.Generator, block: int = 1 << 16):
        self._rng = rng
        self._block = block
        self._buf: list[float] = []
        self._pos = 0

    def draw(self, b: int) -> int:
        if self._pos == len(self._buf):
            self._buf = self._rng.random(self._block).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return int(u * b)


def run_simulation(config: SimConfig, trace=None) -> SimCounters:
    """Run one replication and return post-warmup tallies.

    ``trace`` is an optional text stream receiving one line per channel event:
    ``<time_us> <kind> <ap_stage> <sta_stage>``.
    """
    sched = config.schedule
    windows = sched.windows
    kmax = sched.max_stage
    d = frame_durations(config.phy)
    slot_ns = to_ns(config.phy.slot_time)
    t_ap_ns = to_ns(d.t_ap_data + config.phy.sifs + d.t_ack + config.phy.difs)
    t_sta_ns = to_ns(d.t_s_sta)
    t_c_ns = to_ns(d.t_c)
    t_pspl_ns = to_ns(d.t_s_pspl)
    restart = config.sta_restart

    by_slots = config.horizon_us is None
    horizon = config.horizon_slots if by_slots else to_ns(config.horizon_us)
    warmup_end = int(math.floor(horizon * config.warmup_fraction))
    span = horizon - warmup_end
    n_batches = config.batches
    boundaries = [warmup_end + (span * (j + 1)) // n_batches for j in range(n_batches)]

    draw = _Uniforms(np.random.default_rng(config.seed)).draw

    idle = ap_att = sta_att = ap_succ = sta_succ = coll = 0
    ap_disc = sta_disc = ps_count = ps_slots = 0
    t_idle = t_ap = t_sta = t_coll = t_ps = 0
    min_resid = None
    stage_slots = [0] * (kmax + 1)

    ap_stage = sta_stage = 0
    ap_c = draw(windows[0])
    sta_c = draw(windows[0])

    def snap():
        return (idle, ap_att, sta_att, ap_succ, sta_succ, coll, ap_disc, sta_disc,
                ps_count, ps_slots, t_idle, t_ap, t_sta, t_coll, t_ps)

    warm_snap = snap() if warmup_end == 0 else None
    warm_stage = list(stage_slots) if warmup_end == 0 else None
    warm_resid_ok = warmup_end == 0
    batch_snaps = []
    nb = 0

    now = 0  # progress measure: idle slots or ns
    while now < horizon:
        m = ap_c if ap_c < sta_c else sta_c
        if m:
            if by_slots and idle + m >= horizon:
                m = horizon - idle
                ap_c -= m
                sta_c -= m
            else:
                ap_c -= m
                sta_c -= m
            idle += m
            t_idle += m * slot_ns
            stage_slots[sta_stage] += m
            if idle >= horizon and by_slots:
                now = idle
                break

        if ap_c == 0 and sta_c == 0:
            ap_att += 1
            sta_att += 1
            coll += 1
            t_coll += t_c_ns
            if trace is not None:
                trace.write(f"{(t_idle + t_ap + t_sta + t_coll + t_ps) / 1000:.3f} collision {ap_stage} {sta_stage}\n")
            if ap_stage == kmax:
                ap_disc += 1
                ap_stage = 0
            else:
                ap_stage += 1
            if sta_stage == kmax:
                sta_disc += 1
                sta_stage = 0
            else:
                sta_stage += 1
            ap_c = draw(windows[ap_stage])
            sta_c = draw(windows[sta_stage])
        elif ap_c == 0:
            ap_att += 1
            ap_succ += 1
            t_ap += t_ap_ns
            if trace is not None:
                trace.write(f"{(t_idle + t_ap + t_sta + t_coll + t_ps) / 1000:.3f} ap_success {ap_stage} {sta_stage}\n")
            if restart:
                # residual STA backoff is spent on a contention-free PS-POLL
                r = sta_c
                ps_count += 1
                ps_slots += r
                t_ps += r * slot_ns + t_pspl_ns
                if warm_resid_ok and (min_resid is None or r < min_resid):
                    min_resid = r
                if trace is not None:
                    trace.write(f"{(t_idle + t_ap + t_sta + t_coll + t_ps) / 1000:.3f} pspoll {ap_stage} {sta_stage}\n")
                sta_stage = 0
                sta_c = draw(windows[0])
            ap_stage = 0
            ap_c = draw(windows[0])
        else:
            sta_att += 1
            sta_succ += 1
            t_sta += t_sta_ns
            if trace is not None:
                trace.write(f"{(t_idle + t_ap + t_sta + t_coll + t_ps) / 1000:.3f} sta_success {ap_stage} {sta_stage}\n")
            sta_stage = 0
            sta_c = draw(windows[0])

        now = idle if by_slots else t_idle + t_ap + t_sta + t_coll + t_ps
        if warm_snap is None and now >= warmup_end:
            warm_snap = snap()
            warm_stage = list(stage_slots)
            warm_resid_ok = True
        while nb < n_batches and now >= boundaries[nb]:
            batch_snaps.append(snap())
            nb += 1

    final = snap()
    if warm_snap is None:
        warm_snap = final
        warm_stage = list(stage_slots)
    while nb < n_batches:
        batch_snaps.append(final)
        nb += 1

    batches = []
    prev = warm_snap
    for s in batch_snaps:
        if s == prev:
            continue
        batches.append(SimCounters.from_tallies([a - b for a, b in zip(s, prev)]))
        prev = s
    return SimCounters.from_tallies(
        [a - b for a, b in zip(final, warm_snap)],
        min_pspoll_residual=min_resid,
        sta_stage_slots=tuple(a - b for a, b in zip(stage_slots, warm_stage)),
        batches=batches,
    )


def merge_counters(runs: list[SimCounters]) -> SimCounters:
    """Pool replications: tallies add, batches concatenate."""
    tallies = [sum(getattr(r, name) for r in runs) for name in _TALLIES]
    resid = [r.min_pspoll_residual for r in runs if r.min_pspoll_residual is not None]
    stages = tuple(int(v) for v in np.sum([r.sta_stage_slots for r in runs], axis=0)) if runs else ()
    return SimCounters.from_tallies(
        tallies,
        min_pspoll_residual=min(resid) if resid else None,
        sta_stage_slots=stages,
        batches=[b for r in runs for b in r.batches],
    )


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def _point(c: SimCounters, phy: PhyParams) -> dict:
    t_s = c.sim_time_ns * 1e-9
    thr_ap = _ratio(c.ap_successes, t_s)
    thr_sta = _ratio(c.sta_successes, t_s)
    events = c.restricted_idle_slots + c.ap_successes + c.sta_successes + c.collisions
    return {
        "beta_a": _ratio(c.ap_attempts, c.restricted_idle_slots),
        "beta_s": _ratio(c.sta_data_attempts, c.restricted_idle_slots),
        "beta_ps": _ratio(c.pspoll_count, c.pspoll_countdown_slots),
        "p_coll": _ratio(c.collisions, events),
        "theta_ap": thr_ap,
        "theta_sta": thr_sta,
        "theta_ap_mbps": thr_ap * phy.ap_payload_bytes * 8 / 1e6,
        "theta_sta_mbps": thr_sta * phy.sta_payload_bytes * 8 / 1e6,
    }


def derive_estimates(counters: SimCounters, config: SimConfig) -> EmpiricalEstimates:
    """Renewal-ratio point estimates with 95% batch-means halfwidths."""
    point = _point(counters, config.phy)
    n = len(counters.batches)
    halfwidths = None
    note = ""
    if counters.ap_attempts + counters.sta_data_attempts == 0:
        note = "no attempts recorded"
    elif n < MIN_BATCHES:
        note = f"insufficient data: {n} batches (< {MIN_BATCHES}), no confidence interval"
    else:
        per_batch = [_point(b, config.phy) for b in counters.batches]
        tq = stats.t.ppf(0.975, n - 1)
        halfwidths = {
            key: float(tq * np.std([p[key] for p in per_batch], ddof=1) / math.sqrt(n))
            for key in point
        }
    return EmpiricalEstimates(
        beta_a_hat=point["beta_a"],
        beta_s_hat=point["beta_s"],
        beta_ps_hat=point["beta_ps"],
        p_coll_hat=point["p_coll"],
        theta_ap_hat=point["theta_ap"],
        theta_sta_hat=point["theta_sta"],
        theta_ap_mbps_hat=point["theta_ap_mbps"],
        theta_sta_mbps_hat=point["theta_sta_mbps"],
        confidence_halfwidths=halfwidths,
        n_batches=n,
        note=note,
    )
