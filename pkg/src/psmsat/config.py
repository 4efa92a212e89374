"""Flat ``section.key = value`` run configuration.

Values are Python literals (``11``, ``1e-10``, ``[32, 64]``); a bare word is
taken as a string.  ``#`` starts a comment.  Unknown keys are rejected.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import VARIANTS, SolverOptions
from .backoff import BackoffSchedule
from .phy import PhyParams
from .simulator import SimConfig

DEFAULT_SWEEP = [8, 16, 32, 64, 128, 256, 512, 1024]

# key -> (default, type); PhyParams field names follow in _PHY_FIELDS
DEFAULTS: dict[str, tuple[object, type]] = {
    "phy.data_rate_mbps": (11.0, float),
    "phy.control_rate_mbps": (2.0, float),
    "phy.plcp_time_us": (144.0, float),
    "phy.phy_header_time_us": (48.0, float),
    "phy.mac_header_bytes": (34, int),
    "phy.pspoll_bytes": (20, int),
    "phy.ack_bytes": (14, int),
    "phy.ap_payload_bytes": (512, int),
    "phy.sta_payload_bytes": (512, int),
    "phy.slot_time_us": (20.0, float),
    "phy.sifs_us": (10.0, float),
    "phy.difs_us": (50.0, float),
    "phy.eifs_us": (364.0, float),
    "mac.k": (7, int),
    "mac.cwmin": (32, int),
    "mac.cwcap": (1024, int),
    "mac.windows": (None, list),
    "solver.tol": (1e-10, float),
    "solver.max_iter": (10_000, int),
    "solver.damping": (0.5, float),
    "analysis.yk_variant": ("consistent", str),
    "sim.seed": (1, int),
    "sim.horizon_slots": (10_000_000, int),
    "sim.warmup_fraction": (0.1, float),
    "sim.replications": (1, int),
    "sim.batches": (30, int),
    "sweep.cwmin_values": (DEFAULT_SWEEP, list),
    "oracle.cycles": (1_000_000, int),
}
ALIASES = {"solver.yk_variant": "analysis.yk_variant"}

_PHY_FIELDS = {
    "phy.data_rate_mbps": "data_rate",
    "phy.control_rate_mbps": "control_rate",
    "phy.plcp_time_us": "plcp_time",
    "phy.phy_header_time_us": "phy_header_time",
    "phy.mac_header_bytes": "mac_header_bytes",
    "phy.pspoll_bytes": "pspoll_bytes",
    "phy.ack_bytes": "ack_bytes",
    "phy.ap_payload_bytes": "ap_payload_bytes",
    "phy.sta_payload_bytes": "sta_payload_bytes",
    "phy.slot_time_us": "slot_time",
    "phy.sifs_us": "sifs",
    "phy.difs_us": "difs",
    "phy.eifs_us": "eifs",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    values: dict
    explicit: frozenset = field(default_factory=frozenset)

    def __getitem__(self, key):
        return self.values[key]

    def with_overrides(self, **flat) -> RunConfig:
        merged = dict(self.values)
        explicit = set(self.explicit)
        for key, value in flat.items():
            key = ALIASES.get(key, key)
            merged[key] = _coerce(key, value)
            explicit.add(key)
        return _validated(merged, frozenset(explicit))

    @property
    def sweep_is_default(self) -> bool:
        return "sweep.cwmin_values" not in self.explicit

    def phy(self) -> PhyParams:
        return PhyParams(**{f: self.values[k] for k, f in _PHY_FIELDS.items()})

    def schedule(self, cwmin: int | None = None) -> BackoffSchedule:
        if cwmin is None and self.values["mac.windows"] is not None:
            return BackoffSchedule.from_windows(self.values["mac.windows"])
        cw = self.values["mac.cwmin"] if cwmin is None else cwmin
        return BackoffSchedule.from_cwmin(cw, self.values["mac.k"], self.values["mac.cwcap"])

    def solver_options(self) -> SolverOptions:
        return SolverOptions(
            tol=self.values["solver.tol"],
            max_iter=self.values["solver.max_iter"],
            damping=self.values["solver.damping"],
            variant=self.values["analysis.yk_variant"],
        )

    def sim_config(self, schedule: BackoffSchedule, seed) -> SimConfig:
        return SimConfig(
            phy=self.phy(),
            schedule=schedule,
            seed=seed,
            horizon_slots=self.values["sim.horizon_slots"],
            warmup_fraction=self.values["sim.warmup_fraction"],
            batches=self.values["sim.batches"],
        )

    def lines(self) -> list[str]:
        out = []
        for key in sorted(self.values):
            value = self.values[key]
            if isinstance(value, float):
                value = repr(value)
            out.append(f"{key} = {value}")
        return out


def _coerce(key: str, value):
    if key not in DEFAULTS:
        raise ConfigError(f"unknown config key {key!r}")
    default, typ = DEFAULTS[key]
    if value is None and default is None:
        return None
    try:
        if typ is list:
            if not isinstance(value, (list, tuple)):
                raise TypeError("expected a list")
            return [int(v) for v in value]
        if typ is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError("expected an integer")
            return int(value)
        if typ is float:
            if isinstance(value, bool):
                raise TypeError("expected a number")
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot use {value!r} ({exc})") from None


def _validated(values: dict, explicit: frozenset) -> RunConfig:
    cfg = RunConfig(values, explicit)
    try:
        cfg.phy()
    except ValueError as exc:
        raise ConfigError(f"phy: {exc}") from None
    if values["mac.k"] < 0:
        raise ConfigError("mac.k: must be >= 0")
    if values["mac.cwmin"] < 1 or values["mac.cwcap"] < 1:
        raise ConfigError("mac.cwmin / mac.cwcap: must be >= 1")
    windows = values["mac.windows"]
    if windows is not None:
        if "mac.k" in explicit and len(windows) != values["mac.k"] + 1:
            raise ConfigError(
                f"mac.windows: {len(windows)} windows given but mac.k = {values['mac.k']} needs {values['mac.k'] + 1}"
            )
        if any(b < 1 for b in windows):
            raise ConfigError("mac.windows: every window must be >= 1")
        values["mac.k"] = len(windows) - 1
    if values["analysis.yk_variant"] not in VARIANTS:
        raise ConfigError(f"analysis.yk_variant: expected one of {VARIANTS}")
    try:
        cfg.solver_options()
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from None
    if values["sim.horizon_slots"] < 0:
        raise ConfigError("sim.horizon_slots: must be >= 0")
    if not 0.0 <= values["sim.warmup_fraction"] <= 0.5:
        raise ConfigError("sim.warmup_fraction: must lie in [0, 0.5]")
    if values["sim.replications"] < 0:
        raise ConfigError("sim.replications: must be >= 0")
    if values["sim.batches"] < 1:
        raise ConfigError("sim.batches: must be >= 1")
    if values["oracle.cycles"] < 2:
        raise ConfigError("oracle.cycles: must be >= 2")
    if not values["sweep.cwmin_values"] or any(c < 1 for c in values["sweep.cwmin_values"]):
        raise ConfigError("sweep.cwmin_values: need a non-empty list of positive windows")
    return cfg


def parse_config(text: str) -> RunConfig:
    values = {k: (list(d) if isinstance(d, list) else d) for k, (d, _) in DEFAULTS.items()}
    explicit = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, rhs = (s.strip() for s in line.partition("="))
        key = ALIASES.get(key, key)
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        try:
            value = ast.literal_eval(rhs)
        except (ValueError, SyntaxError):
            if not rhs.isidentifier():
                raise ConfigError(f"line {lineno}: {key}: cannot parse value {rhs!r}") from None
            value = rhs
        values[key] = _coerce(key, value)
        explicit.add(key)
    return _validated(values, frozenset(explicit))


def load_config(path: str | Path | None = None) -> RunConfig:
    if path is None:
        return parse_config("")
    return parse_config(Path(path).read_text())
