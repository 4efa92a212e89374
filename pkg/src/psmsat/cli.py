"""Command line entry point: ``psmsat {analyze,simulate,sweep,validate}``.

Exit codes: 0 success, 1 usage/config error, 2 model breakdown,
3 validation failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from . import analysis as an
from .config import ConfigError, load_config
from .harness import (
    SWEEP_COLUMNS, Z_FAIL, analytic_point, conservation_error, replication_seed,
    simulate_point, sweep, validate,
)
from .simulator import derive_estimates, run_simulation

EXIT_OK, EXIT_USAGE, EXIT_BREAKDOWN, EXIT_VALIDATION = 0, 1, 2, 3
CONSERVATION_TOL = 1e-12

# figure file -> (x label, columns)
PLOT_FILES = {
    "fig5a_beta_a.dat": ("beta_a_ana", "beta_a_sim", "beta_a_ci"),
    "fig5b_beta_s.dat": ("beta_s_ana", "beta_s_sim", "beta_s_ci"),
    "fig6a_beta_ps.dat": ("beta_ps_ana", "beta_ps_sim", "beta_ps_ci"),
    "fig6b_pcoll.dat": ("pcoll_ana", "pcoll_sim", "pcoll_ci"),
    "fig7_throughput.dat": ("thr_ap_pkts_ana", "thr_sta_pkts_ana", "thr_ap_mbps_ana",
                            "thr_sta_mbps_ana", "thr_ap_pkts_sim", "thr_sta_pkts_sim"),
}


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".12g")
    return str(value)


def header(command: str, cfg, seed: int, extra=()) -> list[str]:
    lines = [f"# psmsat {__version__}", f"# command: {command}", f"# seed: {seed}"]
    if command == "sweep" and cfg.sweep_is_default:
        lines.append("# note: sweep.cwmin_values is a tool default grid, not taken from measurements")
    lines += [f"# {x}" for x in extra]
    lines += [f"# config: {line}" for line in cfg.lines()]
    return lines


def write_lines(path: Path, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def write_sweep(out: Path, cfg, seed: int, rows: list[dict]) -> None:
    head = header("sweep", cfg, seed)
    body = [",".join(SWEEP_COLUMNS)]
    body += [",".join(_csv_cell(fmt(row[c])) for c in SWEEP_COLUMNS) for row in rows]
    write_lines(out / "sweep.csv", head + body)
    for name, cols in PLOT_FILES.items():
        lines = head + ["# " + " ".join(("cwmin",) + cols)]
        for row in rows:
            lines.append(" ".join([fmt(row["cwmin"])] + [fmt(row[c]) or "nan" for c in cols]))
        write_lines(out / name, lines)


def _csv_cell(text: str) -> str:
    return f'"{text}"' if "," in text else text


def cmd_analyze(args, cfg) -> int:
    schedule = cfg.schedule()
    try:
        rates, rep = analytic_point(cfg, schedule)
    except (an.ModelBreakdownError, an.ConvergenceError) as exc:
        print(f"model breakdown: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN
    body = [
        f"windows = {list(schedule.windows)}",
        f"beta_a = {fmt(rates.beta_a)}",
        f"beta_s = {fmt(rates.beta_s)}",
        f"beta_ps = {fmt(rates.beta_ps)}",
        f"iterations = {rates.iterations}",
        f"residual = {fmt(rates.residual)}",
        f"p_s_ap = {fmt(rep.p_s_ap)}",
        f"p_s_sta = {fmt(rep.p_s_sta)}",
        f"p_c = {fmt(rep.p_c)}",
        f"p_idle = {fmt(rep.p_idle)}",
        f"expected_cycle_time_us = {fmt(rep.expected_cycle_time)}",
        f"thr_ap_pkts = {fmt(rep.theta_ap)}",
        f"thr_sta_pkts = {fmt(rep.theta_sta)}",
        f"thr_ap_mbps = {fmt(rep.theta_ap_mbps)}",
        f"thr_sta_mbps = {fmt(rep.theta_sta_mbps)}",
    ]
    print("\n".join(body))
    if args.out:
        write_lines(Path(args.out) / "analyze.txt", header("analyze", cfg, args.seed) + body)
    return EXIT_OK


SIM_COLUMNS = ("replication", "beta_a", "beta_s", "beta_ps", "pcoll", "thr_ap_pkts", "thr_sta_pkts",
               "thr_ap_mbps", "thr_sta_mbps", "ap_successes", "sta_successes", "collisions",
               "restricted_idle_slots", "sim_time_us")


def _sim_line(label, est, counters) -> str:
    values = (label, est.beta_a_hat, est.beta_s_hat, est.beta_ps_hat, est.p_coll_hat,
              est.theta_ap_hat, est.theta_sta_hat, est.theta_ap_mbps_hat, est.theta_sta_mbps_hat,
              counters.ap_successes, counters.sta_successes, counters.collisions,
              counters.restricted_idle_slots, counters.sim_time)
    return ",".join(fmt(v) for v in values)


def cmd_simulate(args, cfg) -> int:
    schedule = cfg.schedule()
    reps = max(args.replications, 1)
    cw = schedule.windows[0]
    lines = [",".join(SIM_COLUMNS)]
    for rep in range(reps):
        sim_cfg = cfg.sim_config(schedule, replication_seed(args.seed, cw, rep))
        if args.trace and rep == 0 and args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            with open(Path(args.out) / "trace.txt", "w") as fh:
                counters = run_simulation(sim_cfg, trace=fh)
        else:
            counters = run_simulation(sim_cfg)
        lines.append(_sim_line(rep, derive_estimates(counters, sim_cfg), counters))
    est, pooled = simulate_point(cfg, schedule, args.seed, reps, cw)
    lines.append(_sim_line("pooled", est, pooled))
    if est.confidence_halfwidths:
        lines.append("# 95% halfwidths: " + " ".join(
            f"{k}={fmt(v)}" for k, v in est.confidence_halfwidths.items()))
    elif est.note:
        lines.append(f"# {est.note}")
    print("\n".join(lines))
    if args.out:
        write_lines(Path(args.out) / "simulate.csv", header("simulate", cfg, args.seed) + lines)
    return EXIT_OK


def cmd_sweep(args, cfg) -> int:
    rows = sweep(cfg, seed=args.seed, replications=args.replications)
    out = Path(args.out or ".")
    write_sweep(out, cfg, args.seed, rows)
    for row in rows:
        print(" ".join(f"{c}={fmt(row[c])}" for c in SWEEP_COLUMNS if row[c] is not None))
    return EXIT_OK


def cmd_validate(args, cfg) -> int:
    variant = cfg["analysis.yk_variant"]
    comparisons = validate(cfg, seed=args.seed)
    cons = conservation_error(variant)
    cons_ok = cons < CONSERVATION_TOL
    worst = max(abs(c.z) for c in comparisons)
    lines = [f"{'case':<40} {'quantity':<12} {'closed_form':>14} {'oracle':>14} {'std_err':>12} {'z':>8}"]
    for c in comparisons:
        lines.append(f"{c.case:<40} {c.quantity:<12} {c.closed_form:>14.8g} {c.oracle:>14.8g} "
                     f"{c.standard_error:>12.4g} {c.z:>8.3f}")
    lines.append(f"conservation ({variant}): max error {cons:.3e} -> {'pass' if cons_ok else 'FAIL'}")
    lines.append(f"max |z| = {worst:.3f} (fail above {Z_FAIL})")
    failed = (not cons_ok) or worst > Z_FAIL
    lines.append("result: " + ("FAIL" if failed else "pass"))
    print("\n".join(lines))
    if args.out:
        extra = [f"oracle cycles: {cfg['oracle.cycles']}"]
        write_lines(Path(args.out) / "validate.txt", header("validate", cfg, args.seed, extra) + lines)
    return EXIT_VALIDATION if failed else EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "simulate": cmd_simulate, "sweep": cmd_sweep, "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psmsat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"psmsat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="master seed (default: sim.seed)")
        p.add_argument("--replications", type=int, help="simulation replications (default: sim.replications)")
        p.add_argument("--trace", action="store_true", help="write a per-event trace (simulate only)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_overrides(**{"sim.seed": args.seed})
        if args.replications is not None:
            cfg = cfg.with_overrides(**{"sim.replications": args.replications})
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    args.seed = cfg["sim.seed"]
    args.replications = cfg["sim.replications"]
    return COMMANDS[args.command](args, cfg)


if __name__ == "__main__":
    sys.exit(main())
