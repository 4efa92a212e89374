"""Frame and channel-event durations for 802.11b basic access.

All durations here are floating point microseconds.  The simulator converts
them once to integer nanoseconds (see :func:`to_ns`) and accumulates exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np


@dataclass(frozen=True)
class PhyParams:
    """PHY/MAC constants.  Rates are bits/us (numerically equal to Mb/s)."""

    data_rate: float = 11.0
    control_rate: float = 2.0
    plcp_time: float = 144.0
    phy_header_time: float = 48.0
    mac_header_bytes: int = 34
    pspoll_bytes: int = 20
    ack_bytes: int = 14
    ap_payload_bytes: int = 512
    sta_payload_bytes: int = 512
    slot_time: float = 20.0
    sifs: float = 10.0
    difs: float = 50.0
    eifs: float = 364.0

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be strictly positive, got {getattr(self, f.name)!r}")
        if self.control_rate > self.data_rate:
            raise ValueError("control_rate must not exceed data_rate")
        if not self.difs > self.sifs:
            raise ValueError("difs must be larger than sifs")
        if not self.eifs > self.difs:
            raise ValueError("eifs must be larger than difs")


@dataclass(frozen=True)
class EventDurations:
    """Durations (us) of every frame and channel event.

    ``t_s_ap`` and ``e_t_pspl`` depend on the PS-POLL attempt rate and stay
    ``None`` until :func:`complete_durations` fills them in.
    """

    t_ack: float
    t_pspl: float
    t_ap_data: float
    t_sta_data: float
    t_s_pspl: float
    t_s_sta: float
    t_c: float
    t_s_ap: float | None = None
    e_t_pspl: float | None = None


def frame_time(plcp: float, phy_header: float, nbytes: float, rate: float) -> float:
    """Air time of one frame: preamble + PHY header + payload bits at ``rate``."""
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate!r}")
    return plcp + phy_header + 8.0 * nbytes / rate


def frame_durations(params: PhyParams) -> EventDurations:
    """Partial :class:`EventDurations` for ``params`` (``t_s_ap`` left unset)."""
    tp, tphy = params.plcp_time, params.phy_header_time
    t_ack = frame_time(tp, tphy, params.ack_bytes, params.control_rate)
    t_pspl = frame_time(tp, tphy, params.pspoll_bytes, params.control_rate)
    t_ap = frame_time(tp, tphy, params.mac_header_bytes + params.ap_payload_bytes, params.data_rate)
    t_sta = frame_time(tp, tphy, params.mac_header_bytes + params.sta_payload_bytes, params.data_rate)
    return EventDurations(
        t_ack=t_ack,
        t_pspl=t_pspl,
        t_ap_data=t_ap,
        t_sta_data=t_sta,
        t_s_pspl=t_pspl + params.sifs + params.difs + t_ack,
        t_s_sta=params.sifs + params.difs + t_ack + t_sta,
        t_c=max(t_ap, t_sta) + params.eifs,
    )


def expected_pspoll_service_time(durations: EventDurations, beta_ps: float, slot: float) -> float:
    """Mean time from an AP data success to the end of the PS-POLL exchange's
    residual countdown plus exchange: ``T_sPSPL + (1 - beta_ps)/beta_ps * slot``."""
    if beta_ps is None or not 0.0 < beta_ps <= 1.0:
        raise ValueError(f"beta_ps must lie in (0, 1], got {beta_ps!r}")
    return durations.t_s_pspl + (1.0 - beta_ps) / beta_ps * slot


def complete_durations(durations: EventDurations, beta_ps: float, params: PhyParams) -> EventDurations:
    e_t_pspl = expected_pspoll_service_time(durations, beta_ps, params.slot_time)
    t_s_ap = params.sifs + params.difs + durations.t_ack + durations.t_ap_data + e_t_pspl
    return replace(durations, t_s_ap=t_s_ap, e_t_pspl=e_t_pspl)


def to_ns(us: float) -> int:
    """Round a duration in microseconds to integer nanoseconds."""
    return int(np.rint(us * 1000.0))
