"""Closed-form attempt rates and saturation throughput for one AP and one
saturated PSM station.

The station's data backoff restarts from stage 0 whenever the AP succeeds, and
the interrupted residual is spent on a contention-free PS-POLL.  Per-slot
attempts are modelled as Bernoulli on the restricted (backoff-only) time axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .backoff import BackoffSchedule, mean_backoff
from .phy import EventDurations, PhyParams, complete_durations

CONSISTENT = "consistent"
PAPER_VERBATIM = "paper_verbatim"
VARIANTS = (CONSISTENT, PAPER_VERBATIM)


class ModelBreakdownError(ArithmeticError):
    """A closed-form ratio left the probability range (0, 1]."""


class DivergenceError(ModelBreakdownError):
    """The restart recursion has a non-positive denominator."""


class ConvergenceError(RuntimeError):
    pass


class UndefinedRateError(ModelBreakdownError):
    """PS-POLL attempt rate requested where no PS-POLL is ever sent."""


@dataclass(frozen=True)
class StageCoefficients:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    beta_a_used: float
    variant: str = CONSISTENT


@dataclass(frozen=True)
class AttemptRates:
    beta_a: float
    beta_s: float
    beta_ps: float | None
    iterations: int = 0
    residual: float = 0.0


@dataclass(frozen=True)
class ThroughputReport:
    theta_ap: float  # packets/s
    theta_sta: float
    theta_ap_mbps: float
    theta_sta_mbps: float
    p_s_ap: float
    p_s_sta: float
    p_c: float
    p_idle: float
    expected_cycle_time: float  # us


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-10
    max_iter: int = 10_000
    damping: float = 0.5
    variant: str = CONSISTENT

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown Y_k variant {self.variant!r}; expected one of {VARIANTS}")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol must be positive and max_iter >= 1")


def _check_beta(name: str, beta: float) -> None:
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"{name} must lie in [0, 1), got {beta!r}")


# -- AP side -----------------------------------------------------------------

def ap_cycle_means(beta_s: float, schedule: BackoffSchedule) -> tuple[float, float]:
    """Mean attempts and mean backoff slots the AP spends per frame."""
    _check_beta("beta_s", beta_s)
    attempts = 0.0
    slots = 0.0
    for k in range(schedule.max_stage + 1):
        w = beta_s**k
        attempts += w
        slots += mean_backoff(schedule, k) * w
    return attempts, slots


def ap_rate_given_sta(beta_s: float, schedule: BackoffSchedule) -> float:
    """AP attempts per restricted slot when each attempt collides w.p. ``beta_s``."""
    attempts, slots = ap_cycle_means(beta_s, schedule)
    if slots <= 0.0 or attempts / slots > 1.0:
        raise ModelBreakdownError(
            f"AP attempt rate {attempts}/{slots} exceeds 1; windows {schedule.windows} are too small"
        )
    return attempts / slots


# -- STA side ----------------------------------------------------------------

def _stage_terms(beta_a: float, b: int, variant: str):
    if beta_a == 0.0:
        return 0.0, 0.0, (b - 1) / 2.0, 0.0, 0.0
    log_q = math.log1p(-beta_a)
    # q**n - 1 computed without cancellation for tiny beta_a
    qb_m1 = math.expm1(b * log_q)
    x_k = 1.0 + qb_m1 / (b * beta_a)
    if variant == CONSISTENT:
        y_k = -qb_m1 / b
    else:
        y_k = -math.expm1((b - 1) * log_q) / b

    idx = np.arange(b, dtype=float)
    q_pow = np.exp(idx * log_q)
    w = q_pow * beta_a  # AP first attempts in slot i
    # prefix sums over i < x
    a = np.concatenate(([0.0], np.cumsum(w)[:-1]))
    s = np.concatenate(([0.0], np.cumsum(w * idx)[:-1]))
    q = 1.0 - beta_a
    z_k = float(np.sum(s + q_pow * beta_a * idx + q_pow * q * idx)) / b
    z1_k = float(np.sum(idx * a - s)) / b
    z2_k = float(np.sum(a)) / b
    return x_k, y_k, z_k, z1_k, z2_k


def stage_coefficients(beta_a: float, schedule: BackoffSchedule, variant: str = CONSISTENT) -> StageCoefficients:
    """Per-stage restart (X), collision (Y) and reward (Z, Z1, Z2) coefficients.

    Z accumulates data-backoff slots, Z1 the residual slots handed to PS-POLLs
    and Z2 the number of AP interruptions, all for one backoff at stage k.
    """
    _check_beta("beta_a", beta_a)
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    rows = np.array([_stage_terms(beta_a, b, variant) for b in schedule.windows])
    return StageCoefficients(
        x=rows[:, 0], y=rows[:, 1], z=rows[:, 2], z1=rows[:, 3], z2=rows[:, 4],
        beta_a_used=beta_a, variant=variant,
    )


def sta_success_probability(beta_a: float, b: int) -> float:
    """Probability that a stage backoff from window ``b`` ends in an STA success."""
    q_pow = np.exp(np.arange(1, b + 1) * math.log1p(-beta_a))
    return float(np.sum(q_pow)) / b


def _solve_restart(coef: StageCoefficients, reward: np.ndarray) -> float:
    reach = np.concatenate(([1.0], np.cumprod(coef.y)[:-1]))
    den = 1.0 - float(np.sum(coef.x * reach))
    if den <= 0.0:
        raise DivergenceError(f"restart recursion diverges (denominator {den})")
    return float(np.sum(reward * reach)) / den


def restart_mean_backoff(beta_a: float, schedule: BackoffSchedule, variant: str = CONSISTENT) -> float:
    """Mean data-backoff slots the STA counts per delivered (or discarded) frame."""
    coef = stage_coefficients(beta_a, schedule, variant)
    return _solve_restart(coef, coef.z)


def pspoll_mean_backoff(beta_a: float, schedule: BackoffSchedule, variant: str = CONSISTENT) -> float:
    """Mean residual slots spent on PS-POLLs per STA data frame."""
    coef = stage_coefficients(beta_a, schedule, variant)
    return _solve_restart(coef, coef.z1)


def pspoll_mean_count(beta_a: float, schedule: BackoffSchedule, variant: str = CONSISTENT) -> float:
    """Mean number of AP successes (hence PS-POLLs) per STA data frame."""
    coef = stage_coefficients(beta_a, schedule, variant)
    return _solve_restart(coef, coef.z2)


def sta_rate_given_ap(beta_a: float, schedule: BackoffSchedule, variant: str = CONSISTENT) -> float:
    if beta_a == 1.0:
        raise ModelBreakdownError("AP attempts in every slot; the STA can never succeed")
    _check_beta("beta_a", beta_a)
    attempts = sum(beta_a**k for k in range(schedule.max_stage + 1))
    slots = restart_mean_backoff(beta_a, schedule, variant)
    if slots <= 0.0:
        raise ModelBreakdownError("STA mean backoff is zero; attempt rate undefined")
    rate = attempts / slots
    if not 0.0 < rate <= 1.0:
        raise ModelBreakdownError(f"STA attempt rate {rate} outside (0, 1]")
    return rate


def pspoll_rate(beta_a: float, schedule: BackoffSchedule, variant: str = CONSISTENT) -> float | None:
    """PS-POLL attempts per countdown slot, or ``None`` when the AP never succeeds."""
    _check_beta("beta_a", beta_a)
    if beta_a == 0.0:
        return None
    coef = stage_coefficients(beta_a, schedule, variant)
    slots = _solve_restart(coef, coef.z1)
    if slots <= 0.0:
        return None
    return _solve_restart(coef, coef.z2) / slots


# -- fixed point -------------------------------------------------------------

def solve_fixed_point(schedule: BackoffSchedule, options: SolverOptions | None = None) -> AttemptRates:
    """Solve ``beta_a = f(beta_s)``, ``beta_s = g(beta_a)`` jointly.

    Damped functional iteration on ``beta_s``; if it fails to settle the
    scalar residual ``h(b) = b - g(f(b))`` is bracketed on (0, 1) instead.
    """
    opts = options or SolverOptions()

    def gf(bs):
        return sta_rate_given_ap(ap_rate_given_sta(bs, schedule), schedule, opts.variant)

    beta_s = 2.0 / (schedule.windows[0] + 1)
    lam = opts.damping
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        target = gf(beta_s)
        if abs(beta_s - target) < opts.tol:
            converged = True
            break
        beta_s = (1.0 - lam) * beta_s + lam * target
        if beta_s >= 1.0:
            break

    if not converged:
        eps = 1e-12
        try:
            beta_s = brentq(lambda b: b - gf(b), eps, 1.0 - eps, xtol=opts.tol * 1e-3, rtol=4 * np.finfo(float).eps)
        except ValueError as exc:
            raise ConvergenceError(f"no fixed point after {opts.max_iter} iterations: {exc}") from exc
        if abs(beta_s - gf(beta_s)) >= opts.tol:
            raise ConvergenceError(f"fixed point residual above {opts.tol}")

    beta_a = ap_rate_given_sta(beta_s, schedule)
    residual = abs(beta_s - sta_rate_given_ap(beta_a, schedule, opts.variant))
    return AttemptRates(
        beta_a=beta_a,
        beta_s=beta_s,
        beta_ps=pspoll_rate(beta_a, schedule, opts.variant),
        iterations=it,
        residual=residual,
    )


# -- throughput --------------------------------------------------------------

def event_probabilities(rates: AttemptRates) -> tuple[float, float, float, float]:
    """(AP success, STA success, collision, idle) probabilities per channel slot."""
    ba, bs = rates.beta_a, rates.beta_s
    return ba * (1.0 - bs), bs * (1.0 - ba), ba * bs, (1.0 - ba) * (1.0 - bs)


def saturation_throughput(rates: AttemptRates, durations: EventDurations, params: PhyParams) -> ThroughputReport:
    if rates.beta_ps is None:
        raise UndefinedRateError("beta_ps undefined: the AP never succeeds")
    if durations.t_s_ap is None:
        durations = complete_durations(durations, rates.beta_ps, params)
    p_ap, p_sta, p_c, p_idle = event_probabilities(rates)
    e_t = p_ap * durations.t_s_ap + p_sta * durations.t_s_sta + p_idle * params.slot_time + p_c * durations.t_c
    theta_ap = p_ap / e_t * 1e6
    theta_sta = p_sta / e_t * 1e6
    return ThroughputReport(
        theta_ap=theta_ap,
        theta_sta=theta_sta,
        theta_ap_mbps=theta_ap * params.ap_payload_bytes * 8 / 1e6,
        theta_sta_mbps=theta_sta * params.sta_payload_bytes * 8 / 1e6,
        p_s_ap=p_ap,
        p_s_sta=p_sta,
        p_c=p_c,
        p_idle=p_idle,
        expected_cycle_time=e_t,
    )
