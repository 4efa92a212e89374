"""Sweep and validation drivers shared by the CLI and the acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass

from . import analysis as an
from .backoff import BackoffSchedule
from .config import RunConfig
from .oracle import simulate_ap_cycles, simulate_sta_cycles
from .phy import frame_durations
from .simulator import derive_estimates, merge_counters, run_simulation

SWEEP_COLUMNS = (
    "cwmin", "beta_a_ana", "beta_s_ana", "beta_ps_ana", "pcoll_ana",
    "thr_ap_pkts_ana", "thr_sta_pkts_ana", "thr_ap_mbps_ana", "thr_sta_mbps_ana",
    "beta_a_sim", "beta_a_ci", "beta_s_sim", "beta_s_ci", "beta_ps_sim", "beta_ps_ci",
    "pcoll_sim", "pcoll_ci", "thr_ap_pkts_sim", "thr_sta_pkts_sim", "seed", "status",
)

Z_FAIL = 5.0


def analytic_point(cfg: RunConfig, schedule: BackoffSchedule):
    """Solved rates and throughput for one schedule."""
    phy = cfg.phy()
    rates = an.solve_fixed_point(schedule, cfg.solver_options())
    report = an.saturation_throughput(rates, frame_durations(phy), phy)
    return rates, report


def replication_seed(seed: int, cwmin: int, rep: int) -> list[int]:
    return [seed, cwmin, rep]


def simulate_point(cfg: RunConfig, schedule: BackoffSchedule, seed: int, replications: int, cwmin: int):
    runs = []
    for rep in range(replications):
        sim_cfg = cfg.sim_config(schedule, replication_seed(seed, cwmin, rep))
        runs.append(run_simulation(sim_cfg))
    pooled = merge_counters(runs)
    return derive_estimates(pooled, cfg.sim_config(schedule, seed)), pooled


def sweep_row(cfg: RunConfig, cwmin: int, seed: int, replications: int) -> dict:
    schedule = cfg.schedule(cwmin)
    row = dict.fromkeys(SWEEP_COLUMNS, None)
    row.update(cwmin=cwmin, seed=seed, status="ok")
    try:
        rates, rep = analytic_point(cfg, schedule)
    except (an.ModelBreakdownError, an.ConvergenceError) as exc:
        row["status"] = f"model_breakdown: {exc}"
    else:
        row.update(
            beta_a_ana=rates.beta_a, beta_s_ana=rates.beta_s, beta_ps_ana=rates.beta_ps,
            pcoll_ana=rep.p_c, thr_ap_pkts_ana=rep.theta_ap, thr_sta_pkts_ana=rep.theta_sta,
            thr_ap_mbps_ana=rep.theta_ap_mbps, thr_sta_mbps_ana=rep.theta_sta_mbps,
        )
        row["status"] = f"ok iterations={rates.iterations} residual={rates.residual:.3e}"
    if replications > 0:
        est, _ = simulate_point(cfg, schedule, seed, replications, cwmin)
        hw = est.confidence_halfwidths or {}
        row.update(
            beta_a_sim=est.beta_a_hat, beta_a_ci=hw.get("beta_a"),
            beta_s_sim=est.beta_s_hat, beta_s_ci=hw.get("beta_s"),
            beta_ps_sim=est.beta_ps_hat, beta_ps_ci=hw.get("beta_ps"),
            pcoll_sim=est.p_coll_hat, pcoll_ci=hw.get("p_coll"),
            thr_ap_pkts_sim=est.theta_ap_hat, thr_sta_pkts_sim=est.theta_sta_hat,
        )
        if est.note:
            row["status"] += f"; {est.note}"
    return row


def sweep(cfg: RunConfig, seed: int | None = None, replications: int | None = None) -> list[dict]:
    seed = cfg["sim.seed"] if seed is None else seed
    replications = cfg["sim.replications"] if replications is None else replications
    return [sweep_row(cfg, cw, seed, replications) for cw in cfg["sweep.cwmin_values"]]


# -- oracle validation --------------------------------------------------------

VALIDATION_BETAS = (0.01, 0.05, 0.1, 0.3)
VALIDATION_SCHEDULES = ((2,), (4, 8), (8, 16, 32, 64), (16, 32, 64, 64))
AP_VALIDATION = ((0.0, (32,)), (0.1, (32, 64)), (0.3, (8, 16, 32, 64)))


@dataclass(frozen=True)
class Comparison:
    case: str
    quantity: str
    closed_form: float
    oracle: float
    standard_error: float

    @property
    def z(self) -> float:
        diff = self.oracle - self.closed_form
        if self.standard_error == 0.0:
            return 0.0 if abs(diff) < 1e-12 else float("inf")
        return diff / self.standard_error


def conservation_error(variant: str, betas=VALIDATION_BETAS, schedules=VALIDATION_SCHEDULES) -> float:
    """Largest |X_k + Y_k + P(STA success at stage k) - 1| over the grid."""
    worst = 0.0
    for beta in betas:
        for w in schedules:
            coef = an.stage_coefficients(beta, BackoffSchedule(w), variant)
            for k, b in enumerate(w):
                err = abs(coef.x[k] + coef.y[k] + an.sta_success_probability(beta, b) - 1.0)
                worst = max(worst, err)
    return worst


def validation_cases():
    cases = [(0.5, (2,))]
    cases += [(b, w) for b in VALIDATION_BETAS for w in VALIDATION_SCHEDULES]
    return cases


def validate(cfg: RunConfig, seed: int | None = None, n_cycles: int | None = None) -> list[Comparison]:
    seed = cfg["sim.seed"] if seed is None else seed
    n_cycles = cfg["oracle.cycles"] if n_cycles is None else n_cycles
    variant = cfg["analysis.yk_variant"]
    out = []
    for i, (beta, w) in enumerate(validation_cases()):
        sched = BackoffSchedule(w)
        stats = simulate_sta_cycles(beta, sched, n_cycles, seed=[seed, 0, i])
        case = f"sta beta_a={beta} windows={list(w)}"
        se = stats.standard_errors
        out += [
            Comparison(case, "b_data", an.restart_mean_backoff(beta, sched, variant),
                       stats.mean_data_slots, se["mean_data_slots"]),
            Comparison(case, "b_pspoll", an.pspoll_mean_backoff(beta, sched, variant),
                       stats.mean_pspoll_slots, se["mean_pspoll_slots"]),
            Comparison(case, "a_pspoll", an.pspoll_mean_count(beta, sched, variant),
                       stats.mean_ap_successes, se["mean_ap_successes"]),
        ]
    for i, (beta_s, w) in enumerate(AP_VALIDATION):
        sched = BackoffSchedule(w)
        stats = simulate_ap_cycles(beta_s, sched, n_cycles, seed=[seed, 1, i])
        case = f"ap beta_s={beta_s} windows={list(w)}"
        att, slots = an.ap_cycle_means(beta_s, sched)
        out += [
            Comparison(case, "ap_attempts", att, stats.mean_attempts, stats.standard_errors["mean_attempts"]),
            Comparison(case, "ap_slots", slots, stats.mean_slots, stats.standard_errors["mean_slots"]),
        ]
    return out
