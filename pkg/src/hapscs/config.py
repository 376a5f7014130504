"""Experiment configuration: defaults, JSON parsing, validation.

Every key is validated against its domain before any run; unknown keys
are rejected by name.  The effective configuration (defaults merged
with overrides) can be echoed back out so any result set is
reproducible from the echo plus the seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import Scenario, ScenarioParams
from .network import MAX_TX_POWER_DBM, noise_floor_dbm, place_network
from .optimize import ViewMode
from .power import PowerParams
from .qlearn import AgentConfig, AgentKind
from .traffic import DemandProfile, ERROR_REGIMES, ErrorRegime, load_profile_csv, synth_profile

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "build_scenario"]

ALGORITHMS = ("ES", "FSD", "LSD", "A3")
REGIME_NAMES = ("none", "eps1", "eps2", "eps3", "custom")
MODES = ("auto", "oracle", "estimated")
ERROR_SCOPES = ("all_sbs", "sleeping_only")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"config key {key!r}: {message}")


@dataclass
class ExperimentConfig:
    """All simulation parameters with their defaults."""

    # scenario matrix
    n_sbs: list[int] = field(default_factory=lambda: [4])
    ue_counts: dict[int, list[int]] = field(
        default_factory=lambda: {4: [100, 200, 300], 8: [200, 400, 600]}
    )
    regimes: list[str] = field(default_factory=lambda: ["none", "eps1", "eps2", "eps3"])
    algorithms: list[str] = field(default_factory=lambda: ["ES", "FSD", "LSD", "A3"])
    seeds: list[int] = field(default_factory=lambda: [1, 2, 3])
    mode: str = "auto"

    # geometry / radio
    area_side: float = 1025.0
    n_ts: int = 50
    slot_s: float = 1.0
    carrier_hz: float = 2.5e9
    ue_bandwidth_hz: float = 200e3
    noise_figure_db: float = 7.0
    rx_sensitivity_dbm: float = -95.0
    sbs_tx_dbm: float = 33.0
    haps_tx_dbm: float = 49.0
    sbs_gain_dbi: float = 4.0
    haps_gain_dbi: float = 43.2
    ue_gain_dbi: float = 0.0
    sigma_los_db: float = 4.0
    sigma_nlos_db: float = 6.0
    nlos_offset_db: float = 20.0
    los_range_m: float = 300.0
    haps_extra_losses_db: tuple[float, float, float] = (1.0, 2.2, 16.0)
    sbs_extra_losses_db: tuple[float, float, float] = (0.0, 0.0, 0.0)
    capacity_rb: int = 250
    haps_capacity_share: float = 0.7
    haps_altitude_m: float = 20_000.0
    sbs_height_m: float = 10.0

    # power model
    sbs_power: PowerParams = field(
        default_factory=lambda: PowerParams(56.0, 2.6, 6.3, 39.0)
    )
    haps_power: PowerParams = field(
        default_factory=lambda: PowerParams(130.0, 4.7, 20.0, 0.0)
    )
    penalty_cost: float = 1e9

    # traffic
    demand_rb_min: int = 1
    demand_rb_max: int = 3
    profile_peak: float = 1.0
    profile_trough: float = 0.2
    profile_csv: str | None = None
    custom_regime: ErrorRegime | None = None

    # behaviour flags
    literal_k1: bool = True
    error_scope: str = "all_sbs"
    clamp_estimates: bool = False
    frozen_loads: bool = False

    # learning
    learning_rate: float = 0.9
    discount_fsd: float = 0.9
    discount_lsd: float = 0.3
    epsilon0: float = 0.8
    epsilon_decay: float = 0.9
    agent_iterations: int = 20_000
    fsd_cell_cap: int = 1 << 12
    enumeration_cap: int = 20

    # plumbing
    history_len: int = 32
    out_dir: str = "out"
    dump_traces: bool = False

    def ue_counts_for(self, n: int) -> list[int]:
        if n not in self.ue_counts:
            raise ConfigError("ue_counts", f"no UE counts configured for n_sbs={n}")
        return self.ue_counts[n]

    def regime_obj(self, name: str) -> ErrorRegime | None:
        if name == "none":
            return None
        if name == "custom":
            if self.custom_regime is None:
                raise ConfigError("regimes", "'custom' requires the epsilon_regime key")
            return self.custom_regime
        return ERROR_REGIMES[name]

    def agent_config(self, kind: AgentKind, iterations: int | None = None) -> AgentConfig:
        return AgentConfig(
            learning_rate=self.learning_rate,
            discount=self.discount_fsd if kind is AgentKind.FSD else self.discount_lsd,
            epsilon0=self.epsilon0,
            decay=self.epsilon_decay,
            iterations=self.agent_iterations if iterations is None else iterations,
        )

    @property
    def noise_dbm(self) -> float:
        return noise_floor_dbm(self.ue_bandwidth_hz, self.noise_figure_db)

    def apply_mode(self) -> None:
        """Resolve the mode flag against the regime list."""
        if self.mode == "oracle":
            self.regimes = ["none"]
        elif self.mode == "estimated":
            self.regimes = [r for r in self.regimes if r != "none"]
            if not self.regimes:
                raise ConfigError("mode", "estimated mode needs at least one error regime")

    def echo_dict(self) -> dict:
        """Effective configuration as a JSON-serialisable dict."""
        return {
            "n_sbs": self.n_sbs,
            "ue_counts": {str(k): v for k, v in self.ue_counts.items()},
            "regimes": self.regimes,
            "algorithms": self.algorithms,
            "seeds": self.seeds,
            "mode": self.mode,
            "area_side": self.area_side,
            "n_ts": self.n_ts,
            "slot_s": self.slot_s,
            "carrier_hz": self.carrier_hz,
            "ue_bandwidth_hz": self.ue_bandwidth_hz,
            "noise_figure_db": self.noise_figure_db,
            "rx_sensitivity_dbm": self.rx_sensitivity_dbm,
            "sbs_tx_dbm": self.sbs_tx_dbm,
            "haps_tx_dbm": self.haps_tx_dbm,
            "sbs_gain_dbi": self.sbs_gain_dbi,
            "haps_gain_dbi": self.haps_gain_dbi,
            "ue_gain_dbi": self.ue_gain_dbi,
            "sigma_los_db": self.sigma_los_db,
            "sigma_nlos_db": self.sigma_nlos_db,
            "nlos_offset_db": self.nlos_offset_db,
            "los_range_m": self.los_range_m,
            "haps_extra_losses_db": list(self.haps_extra_losses_db),
            "sbs_extra_losses_db": list(self.sbs_extra_losses_db),
            "capacity_rb": self.capacity_rb,
            "haps_capacity_share": self.haps_capacity_share,
            "haps_altitude_m": self.haps_altitude_m,
            "sbs_height_m": self.sbs_height_m,
            "sbs_power": _power_dict(self.sbs_power),
            "haps_power": _power_dict(self.haps_power),
            "penalty_cost": self.penalty_cost,
            "demand_rb_min": self.demand_rb_min,
            "demand_rb_max": self.demand_rb_max,
            "profile_peak": self.profile_peak,
            "profile_trough": self.profile_trough,
            "profile_csv": self.profile_csv,
            "epsilon_regime": (
                [self.custom_regime.lower, self.custom_regime.upper]
                if self.custom_regime
                else None
            ),
            "literal_k1": self.literal_k1,
            "error_scope": self.error_scope,
            "clamp_estimates": self.clamp_estimates,
            "frozen_loads": self.frozen_loads,
            "agent": {
                "learning_rate": self.learning_rate,
                "discount_fsd": self.discount_fsd,
                "discount_lsd": self.discount_lsd,
                "epsilon0": self.epsilon0,
                "decay": self.epsilon_decay,
                "iterations": self.agent_iterations,
            },
            "fsd_cell_cap": self.fsd_cell_cap,
            "enumeration_cap": self.enumeration_cap,
            "history_len": self.history_len,
            "out_dir": self.out_dir,
            "dump_traces": self.dump_traces,
        }


def _power_dict(p: PowerParams) -> dict:
    return {
        "p_const": p.p_const,
        "slope": p.slope,
        "p_max_tx": p.p_max_tx,
        "p_sleep": p.p_sleep,
    }


def _expect(key, cond, message):
    if not cond:
        raise ConfigError(key, message)


def _as_float(key, value, lo=None, hi=None):
    _expect(key, isinstance(value, (int, float)) and not isinstance(value, bool),
            f"expected a number, got {value!r}")
    v = float(value)
    if lo is not None:
        _expect(key, v >= lo, f"must be >= {lo}, got {v}")
    if hi is not None:
        _expect(key, v <= hi, f"must be <= {hi}, got {v}")
    return v


def _as_positive(key, value):
    v = _as_float(key, value)
    _expect(key, v > 0, f"must be positive, got {v}")
    return v


def _as_int(key, value, lo=None, hi=None):
    _expect(key, isinstance(value, int) and not isinstance(value, bool),
            f"expected an integer, got {value!r}")
    if lo is not None:
        _expect(key, value >= lo, f"must be >= {lo}, got {value}")
    if hi is not None:
        _expect(key, value <= hi, f"must be <= {hi}, got {value}")
    return value


def _as_bool(key, value):
    _expect(key, isinstance(value, bool), f"expected true/false, got {value!r}")
    return value


def _as_triple(key, value):
    _expect(key, isinstance(value, (list, tuple)) and len(value) == 3,
            f"expected a 3-element list, got {value!r}")
    return tuple(_as_float(key, v, lo=0.0) for v in value)


def _as_power(key, value):
    _expect(key, isinstance(value, dict), f"expected an object, got {value!r}")
    fields = {"p_const", "slope", "p_max_tx", "p_sleep"}
    unknown = set(value) - fields
    _expect(key, not unknown, f"unknown power fields {sorted(unknown)}; valid: {sorted(fields)}")
    _expect(key, set(value) == fields, f"needs exactly the fields {sorted(fields)}")
    try:
        return PowerParams(**{k: _as_float(key, v, lo=0.0) for k, v in value.items()})
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from None


def parse_config_dict(raw: dict) -> ExperimentConfig:
    _expect("<root>", isinstance(raw, dict), "config document must be a JSON object")
    cfg = ExperimentConfig()
    known = set()

    def take(key):
        known.add(key)
        return raw.get(key)

    v = take("n_sbs")
    if v is not None:
        if isinstance(v, list):
            cfg.n_sbs = [_as_int("n_sbs", x, lo=0) for x in v]
            _expect("n_sbs", len(cfg.n_sbs) > 0, "must not be empty")
        else:
            cfg.n_sbs = [_as_int("n_sbs", v, lo=0)]

    v = take("ue_counts")
    if v is not None:
        if isinstance(v, list):
            counts = [_as_int("ue_counts", x, lo=0) for x in v]
            _expect("ue_counts", len(counts) > 0, "must not be empty")
            cfg.ue_counts = {n: list(counts) for n in cfg.n_sbs}
        elif isinstance(v, dict):
            parsed = {}
            for k, lst in v.items():
                _expect("ue_counts", isinstance(k, str) and k.isdigit(),
                        f"keys must be SBS counts as strings, got {k!r}")
                _expect("ue_counts", isinstance(lst, list) and lst,
                        f"value for n={k} must be a non-empty list")
                parsed[int(k)] = [_as_int("ue_counts", x, lo=0) for x in lst]
            cfg.ue_counts = parsed
        else:
            raise ConfigError("ue_counts", f"expected a list or object, got {v!r}")

    v = take("regimes")
    if v is not None:
        _expect("regimes", isinstance(v, list) and v, "expected a non-empty list")
        for r in v:
            _expect("regimes", r in REGIME_NAMES, f"unknown regime {r!r}; valid: {REGIME_NAMES}")
        cfg.regimes = list(v)

    v = take("algorithms")
    if v is not None:
        _expect("algorithms", isinstance(v, list) and v, "expected a non-empty list")
        for a in v:
            _expect("algorithms", a in ALGORITHMS, f"unknown algorithm {a!r}; valid: {ALGORITHMS}")
        cfg.algorithms = list(v)

    v = take("seeds")
    if v is not None:
        if isinstance(v, list):
            _expect("seeds", v, "must not be empty")
            cfg.seeds = [_as_int("seeds", x, lo=0) for x in v]
        else:
            cfg.seeds = [_as_int("seeds", v, lo=0)]

    v = take("mode")
    if v is not None:
        _expect("mode", v in MODES, f"expected one of {MODES}, got {v!r}")
        cfg.mode = v

    for key, lo in (
        ("area_side", None), ("slot_s", None), ("carrier_hz", None),
        ("ue_bandwidth_hz", None), ("los_range_m", None),
        ("haps_altitude_m", None), ("penalty_cost", None),
    ):
        v = take(key)
        if v is not None:
            setattr(cfg, key, _as_positive(key, v))

    for key in ("noise_figure_db", "sigma_los_db", "sigma_nlos_db",
                "nlos_offset_db", "sbs_height_m"):
        v = take(key)
        if v is not None:
            setattr(cfg, key, _as_float(key, v, lo=0.0))

    for key in ("rx_sensitivity_dbm", "sbs_gain_dbi", "haps_gain_dbi", "ue_gain_dbi"):
        v = take(key)
        if v is not None:
            setattr(cfg, key, _as_float(key, v))

    for key in ("sbs_tx_dbm", "haps_tx_dbm"):
        v = take(key)
        if v is not None:
            setattr(cfg, key, _as_float(key, v, hi=MAX_TX_POWER_DBM))

    v = take("n_ts")
    if v is not None:
        cfg.n_ts = _as_int("n_ts", v, lo=1)

    v = take("capacity_rb")
    if v is not None:
        cfg.capacity_rb = _as_int("capacity_rb", v, lo=1)

    v = take("haps_capacity_share")
    if v is not None:
        cfg.haps_capacity_share = _as_float("haps_capacity_share", v, lo=0.0, hi=1.0)
        _expect("haps_capacity_share", cfg.haps_capacity_share > 0, "must be positive")

    v = take("haps_extra_losses_db")
    if v is not None:
        cfg.haps_extra_losses_db = _as_triple("haps_extra_losses_db", v)
    v = take("sbs_extra_losses_db")
    if v is not None:
        cfg.sbs_extra_losses_db = _as_triple("sbs_extra_losses_db", v)

    v = take("sbs_power")
    if v is not None:
        cfg.sbs_power = _as_power("sbs_power", v)
    v = take("haps_power")
    if v is not None:
        cfg.haps_power = _as_power("haps_power", v)

    v = take("demand_rb_min")
    if v is not None:
        cfg.demand_rb_min = _as_int("demand_rb_min", v, lo=0)
    v = take("demand_rb_max")
    if v is not None:
        cfg.demand_rb_max = _as_int("demand_rb_max", v, lo=0)
    _expect("demand_rb_min", cfg.demand_rb_min <= cfg.demand_rb_max,
            f"must be <= demand_rb_max, got ({cfg.demand_rb_min}, {cfg.demand_rb_max})")

    v = take("profile_peak")
    if v is not None:
        cfg.profile_peak = _as_float("profile_peak", v, hi=1.0)
    v = take("profile_trough")
    if v is not None:
        cfg.profile_trough = _as_float("profile_trough", v)
    _expect("profile_trough", 0.0 < cfg.profile_trough <= cfg.profile_peak <= 1.0,
            f"need 0 < trough <= peak <= 1, got ({cfg.profile_trough}, {cfg.profile_peak})")

    v = take("profile_csv")
    if v is not None:
        _expect("profile_csv", isinstance(v, str), f"expected a path string, got {v!r}")
        cfg.profile_csv = v

    v = take("epsilon_regime")
    if v is not None:
        _expect("epsilon_regime", isinstance(v, (list, tuple)) and len(v) == 2,
                f"expected [lower, upper], got {v!r}")
        lo_v = _as_float("epsilon_regime", v[0], lo=0.0)
        hi_v = _as_float("epsilon_regime", v[1], lo=0.0)
        _expect("epsilon_regime", lo_v <= hi_v,
                f"lower bound {lo_v} must not exceed upper bound {hi_v}")
        cfg.custom_regime = ErrorRegime(lo_v, hi_v)

    for key in ("literal_k1", "clamp_estimates", "frozen_loads", "dump_traces"):
        v = take(key)
        if v is not None:
            setattr(cfg, key, _as_bool(key, v))

    v = take("error_scope")
    if v is not None:
        _expect("error_scope", v in ERROR_SCOPES, f"expected one of {ERROR_SCOPES}, got {v!r}")
        cfg.error_scope = v

    v = take("agent")
    if v is not None:
        _expect("agent", isinstance(v, dict), f"expected an object, got {v!r}")
        agent_keys = {"learning_rate", "discount_fsd", "discount_lsd",
                      "epsilon0", "decay", "iterations"}
        unknown = set(v) - agent_keys
        _expect("agent", not unknown, f"unknown fields {sorted(unknown)}; valid: {sorted(agent_keys)}")
        if "learning_rate" in v:
            cfg.learning_rate = _as_float("agent.learning_rate", v["learning_rate"])
            _expect("agent.learning_rate", 0 < cfg.learning_rate <= 1, "must lie in (0, 1]")
        if "discount_fsd" in v:
            cfg.discount_fsd = _as_float("agent.discount_fsd", v["discount_fsd"], lo=0.0)
            _expect("agent.discount_fsd", cfg.discount_fsd < 1, "must lie in [0, 1)")
        if "discount_lsd" in v:
            cfg.discount_lsd = _as_float("agent.discount_lsd", v["discount_lsd"], lo=0.0)
            _expect("agent.discount_lsd", cfg.discount_lsd < 1, "must lie in [0, 1)")
        if "epsilon0" in v:
            cfg.epsilon0 = _as_float("agent.epsilon0", v["epsilon0"], lo=0.0, hi=1.0)
        if "decay" in v:
            cfg.epsilon_decay = _as_float("agent.decay", v["decay"])
            _expect("agent.decay", 0 < cfg.epsilon_decay <= 1, "must lie in (0, 1]")
        if "iterations" in v:
            cfg.agent_iterations = _as_int("agent.iterations", v["iterations"], lo=0)

    v = take("fsd_cell_cap")
    if v is not None:
        cfg.fsd_cell_cap = _as_int("fsd_cell_cap", v, lo=1)
    v = take("enumeration_cap")
    if v is not None:
        cfg.enumeration_cap = _as_int("enumeration_cap", v, lo=0)
    v = take("history_len")
    if v is not None:
        cfg.history_len = _as_int("history_len", v, lo=1)
    v = take("out_dir")
    if v is not None:
        _expect("out_dir", isinstance(v, str) and v, f"expected a path string, got {v!r}")
        cfg.out_dir = v

    unknown = set(raw) - known
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(key, f"unknown key; valid keys: {sorted(known)}")

    for n in cfg.n_sbs:
        cfg.ue_counts_for(n)
    if "custom" in cfg.regimes and cfg.custom_regime is None:
        raise ConfigError("regimes", "'custom' requires the epsilon_regime key")
    cfg.apply_mode()
    return cfg


def parse_config(path) -> ExperimentConfig:
    """Read and validate a JSON config file."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"not valid JSON: {exc}") from None
    return parse_config_dict(raw)


def build_scenario(
    cfg: ExperimentConfig, n: int, n_ues: int, regime_name: str, n_ts: int | None = None
) -> Scenario:
    """Materialise one campaign cell from the configuration."""
    slots = n_ts if n_ts is not None else cfg.n_ts
    specs = place_network(
        n,
        cfg.area_side,
        cfg.haps_altitude_m,
        cfg.sbs_height_m,
        cfg.capacity_rb,
        cfg.haps_capacity_share,
        sbs_tx_dbm=cfg.sbs_tx_dbm,
        haps_tx_dbm=cfg.haps_tx_dbm,
        sbs_gain_dbi=cfg.sbs_gain_dbi,
        haps_gain_dbi=cfg.haps_gain_dbi,
        sbs_power=cfg.sbs_power,
        haps_power=cfg.haps_power,
    )
    if cfg.profile_csv:
        profile = load_profile_csv(cfg.profile_csv, cfg.demand_rb_min, cfg.demand_rb_max)
        if len(profile) < slots:
            raise ConfigError(
                "profile_csv", f"profile has {len(profile)} slots, need {slots}"
            )
    else:
        profile = synth_profile(max(slots, 1), cfg.profile_peak, cfg.profile_trough)
        profile = DemandProfile(profile.scale_series, cfg.demand_rb_min, cfg.demand_rb_max)
    regime = cfg.regime_obj(regime_name)
    mode = ViewMode.ORACLE if regime is None else ViewMode.ESTIMATED
    params = ScenarioParams(
        area_side=cfg.area_side,
        n_ts=slots,
        slot_s=cfg.slot_s,
        frequency_hz=cfg.carrier_hz,
        noise_dbm=cfg.noise_dbm,
        rx_sensitivity_dbm=cfg.rx_sensitivity_dbm,
        ue_gain_dbi=cfg.ue_gain_dbi,
        haps_extra_losses_db=cfg.haps_extra_losses_db,
        sbs_extra_losses_db=cfg.sbs_extra_losses_db,
        sigma_los_db=cfg.sigma_los_db,
        sigma_nlos_db=cfg.sigma_nlos_db,
        nlos_offset_db=cfg.nlos_offset_db,
        los_range_m=cfg.los_range_m,
        literal_k1=cfg.literal_k1,
        error_scope=cfg.error_scope,
        clamp_estimates=cfg.clamp_estimates,
        phi=cfg.penalty_cost,
        history_len=cfg.history_len,
    )
    return Scenario(
        specs=tuple(specs),
        n_ues=n_ues,
        profile=profile,
        regime=regime,
        mode=mode,
        params=params,
    )
