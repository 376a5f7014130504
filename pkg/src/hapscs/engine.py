"""Time-slot simulation loop and controller orchestration.

Each slot: the pre-decided on/off policy is applied, UEs draw demands
and associate against the active BSs, the controller's database picks
up the loads of powered BSs, and the decider fixes the *next* slot's
policy from the (possibly error-inflated) loads view.  Slot 0 always
runs all-on so every BS gets an initial load observation.

Campaigns sweep {algorithms x error regimes x densities x SBS counts}
over seeds and emit aggregate tables; agents are trained per cell
before greedy evaluation.
"""

from __future__ import annotations

import csv
import math
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .network import BaseStationSpec, BSKind, MobilityMode, noise_floor_dbm
from .optimize import (
    LoadsView,
    PENALTY_COST,
    ViewMode,
    es_search,
    evaluate_policy,
    relative_difference,
)
from .power import Policy, erroneous_network_power, network_power, slot_energy
from .qlearn import AgentKind, TrainedAgent, train
from .traffic import DemandProfile, ErrorRegime, LoadRecord

__all__ = [
    "ScenarioParams",
    "Scenario",
    "CcuDatabase",
    "SlotEnvironment",
    "FrozenLoadEnvironment",
    "SlotResult",
    "SlotSimulator",
    "DecisionInfo",
    "EsDecider",
    "A3Decider",
    "AgentDecider",
    "run_evaluation",
    "RunAggregate",
    "CampaignResult",
    "run_campaign",
    "benchmark_elapsed",
]

MOTION_STEP_M = {
    MobilityMode.STATIONARY: 0.0,
    MobilityMode.PEDESTRIAN: 1.4,
    MobilityMode.CYCLIST: 5.0,
    MobilityMode.DRIVER: 15.0,
}


@dataclass(frozen=True)
class ScenarioParams:
    """Physics and policy knobs shared by every slot of a scenario."""

    area_side: float = 1025.0
    n_ts: int = 50
    slot_s: float = 1.0
    frequency_hz: float = 2.5e9
    noise_dbm: float = noise_floor_dbm()
    rx_sensitivity_dbm: float = -95.0
    ue_gain_dbi: float = 0.0
    # gas / scintillation / building-entry extras; nonzero on the HAPS
    # leg so terrestrial cells anchor nearby users
    haps_extra_losses_db: tuple[float, float, float] = (1.0, 2.2, 16.0)
    sbs_extra_losses_db: tuple[float, float, float] = (0.0, 0.0, 0.0)
    sigma_los_db: float = 4.0
    sigma_nlos_db: float = 6.0
    nlos_offset_db: float = 20.0
    los_range_m: float = 300.0
    literal_k1: bool = True
    error_scope: str = "all_sbs"        # or "sleeping_only"
    clamp_estimates: bool = False
    phi: float = PENALTY_COST
    history_len: int = 32


@dataclass(frozen=True)
class Scenario:
    """One cell of the campaign matrix: topology, density, error regime."""

    specs: tuple[BaseStationSpec, ...]
    n_ues: int
    profile: DemandProfile
    regime: ErrorRegime | None
    mode: ViewMode
    params: ScenarioParams

    def __post_init__(self):
        if len(self.profile) < self.params.n_ts:
            raise ValueError(
                f"profile covers {len(self.profile)} slots, need {self.params.n_ts}"
            )
        if self.mode is ViewMode.ESTIMATED and self.regime is None:
            raise ValueError("estimated mode needs an error regime")

    @property
    def n_sbs(self) -> int:
        return len(self.specs) - 1


class CcuDatabase:
    """Load history the controller keeps: one ring buffer per BS plus
    the latest observation; sleeping BSs keep their last on-slot value."""

    def __init__(self, n_bs: int, caps_rb: np.ndarray, history_len: int = 32):
        self.caps_rb = caps_rb
        self.known_rb = np.zeros(n_bs)
        self.history: list[deque] = [deque(maxlen=history_len) for _ in range(n_bs)]

    def observe(self, slot: int, bs_id: int, load_rb: float) -> None:
        self.known_rb[bs_id] = load_rb
        cap = self.caps_rb[bs_id]
        self.history[bs_id].append((slot, load_rb / cap if cap > 0 else 0.0))

    def last_known_fractions(self) -> np.ndarray:
        caps = np.where(self.caps_rb > 0, self.caps_rb, 1.0)
        return np.where(self.caps_rb > 0, self.known_rb / caps, 0.0)


@dataclass
class SlotOutcome:
    """Everything one applied slot produced."""

    slot: int
    policy: Policy
    view: LoadsView
    realized_rb: np.ndarray
    connected: int
    unconnected: int
    reported_power_w: float
    true_power_w: float
    records: list[LoadRecord]
    violations: list[str]


class SlotEnvironment:
    """Owns the network state and random substreams of one scenario.

    Substreams are derived from the master seed in a fixed layout
    (placement, per-UE demands, shadowing, motion, per-SBS error
    draws), so changing the error regime never perturbs the traffic
    realisation and matched-draw comparisons are meaningful.
    """

    def __init__(self, scenario: Scenario, seed):
        self.scenario = scenario
        self.params = scenario.params
        self.specs = scenario.specs
        self.n_sbs = scenario.n_sbs
        self.n_ues = scenario.n_ues
        self.mode = scenario.mode
        self.slots_per_episode = self.params.n_ts

        entropy = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        roots = entropy.spawn(5)
        self._rng_place = np.random.default_rng(roots[0])
        self._rng_demand = [np.random.default_rng(s) for s in roots[1].spawn(max(self.n_ues, 1))]
        self._rng_shadow = np.random.default_rng(roots[2])
        self._rng_motion = np.random.default_rng(roots[3])
        self._rng_error = [np.random.default_rng(s) for s in roots[4].spawn(max(self.n_sbs, 1))]

        m = len(self.specs)
        self._pos = np.array([s.position for s in self.specs])          # (m, 3)
        self._tx_gain = np.array([s.tx_power_dbm + s.antenna_gain_dbi for s in self.specs])
        self._caps = np.array([float(s.capacity_rb) for s in self.specs])
        self._is_haps = np.array([s.kind is BSKind.HAPS for s in self.specs])
        extras = np.where(
            self._is_haps,
            sum(self.params.haps_extra_losses_db),
            sum(self.params.sbs_extra_losses_db),
        )
        self._extras = extras                                           # (m,)
        self._noise_mw = 10.0 ** (self.params.noise_dbm / 10.0)
        self._sbs_params = tuple(s.power for s in self.specs[:-1])
        self._haps_params = self.specs[-1].power
        self._m = m
        self.db: CcuDatabase | None = None
        self.last_outcome: SlotOutcome | None = None
        self._slot = 0
        self._ue_xy = np.empty((0, 2))
        self._ue_modes: list[MobilityMode] = []
        self._demands = np.empty((0, 0), dtype=np.int64)
        self._err_units = np.empty((0, 0))

    # -- episode bookkeeping -------------------------------------------------

    def _start_episode(self) -> None:
        e, n_ts = self.n_ues, self.params.n_ts
        side = self.params.area_side
        self._ue_xy = self._rng_place.uniform(0.0, side, size=(e, 2))
        modes = list(MobilityMode)
        self._ue_modes = [modes[i] for i in self._rng_place.integers(0, len(modes), size=e)]
        prof = self.scenario.profile
        scale = np.asarray(prof.scale_series[:n_ts])
        draws = np.stack(
            [self._rng_demand[i].integers(prof.rb_min, prof.rb_max + 1, size=n_ts) for i in range(e)]
        ) if e else np.zeros((0, n_ts), dtype=np.int64)
        self._demands = np.floor(scale[None, :] * draws + 0.5).astype(np.int64)
        self._err_units = np.stack(
            [self._rng_error[k].random(n_ts) for k in range(self.n_sbs)]
        ) if self.n_sbs else np.zeros((0, n_ts))
        self.db = CcuDatabase(self._m, self._caps, self.params.history_len)
        self._slot = 0

    def reset(self) -> LoadsView:
        """Start an episode: slot 0 runs with every BS on."""
        self._start_episode()
        return self.step(Policy.all_on(self.n_sbs))

    # -- per-slot machinery ----------------------------------------------------

    def _move_ues(self) -> None:
        if self.n_ues == 0:
            return
        theta = self._rng_motion.uniform(0.0, 2.0 * math.pi, size=self.n_ues)
        steps = np.array([MOTION_STEP_M[m] for m in self._ue_modes])
        self._ue_xy[:, 0] += steps * np.cos(theta)
        self._ue_xy[:, 1] += steps * np.sin(theta)
        side = self.params.area_side
        for col in (0, 1):
            v = self._ue_xy[:, col]
            v[v < 0] = -v[v < 0]
            v[v > side] = 2.0 * side - v[v > side]

    def _rx_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Received power (dBm) and 2-D distance for every UE-BS pair."""
        dx = self._ue_xy[:, 0:1] - self._pos[None, :, 0]
        dy = self._ue_xy[:, 1:2] - self._pos[None, :, 1]
        d2 = np.hypot(dx, dy)
        d3 = np.sqrt(d2**2 + self._pos[None, :, 2] ** 2)
        nlos = (~self._is_haps[None, :]) & (d2 > self.params.los_range_m)
        fspl = (
            20.0 * np.log10(d3 / 1e3)
            + 20.0 * np.log10(self.params.frequency_hz / 1e6)
            + 32.44
        )
        sigma = np.where(nlos, self.params.sigma_nlos_db, self.params.sigma_los_db)
        shadow = self._rng_shadow.standard_normal(d2.shape) * sigma
        pl = fspl + self._extras[None, :] + self.params.nlos_offset_db * nlos + shadow
        rx = self._tx_gain[None, :] + self.params.ue_gain_dbi - pl
        return rx, d2

    def _preference_matrix(self, rx: np.ndarray, d2: np.ndarray) -> np.ndarray:
        """Per-SBS recipient ranking by median link strength to the cell's UEs."""
        n, m = self.n_sbs, self._m
        pref = np.zeros((n, n), dtype=np.int64)
        if n == 0:
            return pref
        if self.n_ues:
            home = np.argmin(d2[:, :n], axis=1)
        else:
            home = np.empty(0, dtype=np.int64)
        # centre-to-centre proxy for cells without resident UEs
        bs_dx = self._pos[:, 0:1] - self._pos[None, :, 0]
        bs_dy = self._pos[:, 1:2] - self._pos[None, :, 1]
        bs_dz = self._pos[:, 2:3] - self._pos[None, :, 2]
        bs_d2 = np.hypot(bs_dx, bs_dy)
        bs_d3 = np.sqrt(bs_dx**2 + bs_dy**2 + bs_dz**2)
        np.fill_diagonal(bs_d3, 1.0)
        nlos = (~self._is_haps[None, :]) & (bs_d2 > self.params.los_range_m)
        proxy = self._tx_gain[None, :] - (
            20.0 * np.log10(bs_d3 / 1e3)
            + 20.0 * np.log10(self.params.frequency_hz / 1e6)
            + 32.44
            + self._extras[None, :]
            + self.params.nlos_offset_db * nlos
        )
        for k in range(n):
            members = home == k if self.n_ues else np.zeros(0, dtype=bool)
            if members.any():
                metric = np.median(rx[members, :], axis=0)
            else:
                metric = proxy[k]
            others = [j for j in range(m) if j != k]
            others.sort(key=lambda j: (-metric[j], j))
            pref[k] = others
        return pref

    def step(self, policy: Policy) -> LoadsView:
        """Apply ``policy`` for the upcoming slot and return the fresh view."""
        if len(policy) != self.n_sbs:
            raise ValueError(f"policy length {len(policy)} does not match n={self.n_sbs}")
        t = self._slot
        if t >= self.params.n_ts:
            raise RuntimeError("episode horizon exhausted; reset() first")
        if t > 0:
            self._move_ues()
        demands = self._demands[:, t] if self.n_ues else np.zeros(0, dtype=np.int64)
        rx, d2 = self._rx_matrix()
        active = [k for k in range(self.n_sbs) if policy.bits[k]] + [self.n_sbs]

        # SINR ranking over the active set; ties go to the lower BS id
        rx_mw = 10.0 ** (rx[:, active] / 10.0)
        total = rx_mw.sum(axis=1, keepdims=True)
        interference = total - rx_mw
        sinr = rx[:, active] - 10.0 * np.log10(interference + self._noise_mw)
        order = np.argsort(-sinr, axis=1, kind="stable")
        active_arr = np.array(active, dtype=np.int64)
        ranking = active_arr[order] if self.n_ues else np.zeros((0, len(active)), dtype=np.int64)
        rx_ok = (rx >= self.params.rx_sensitivity_dbm).astype(np.uint8)

        assign, residual = kernels.associate_ues(
            ranking, rx_ok, demands, self._caps, self.params.literal_k1
        )
        served = assign >= 0
        realized_rb = np.bincount(
            assign[served], weights=demands[served].astype(float), minlength=self._m
        )
        connected = int(served.sum())

        violations = []
        for j in range(self._m):
            if realized_rb[j] > self._caps[j] + 1e-9:
                violations.append(
                    f"slot {t}: BS {j} realized load {realized_rb[j]} over capacity"
                )

        for j in active:
            self.db.observe(t, j, float(realized_rb[j]))
        known_rb = self.db.known_rb.copy()

        estimated_rb = known_rb.copy()
        if self.mode is ViewMode.ESTIMATED and self.n_sbs:
            units = self._err_units[:, t]
            draws = np.array(
                [self.scenario.regime.map_draw(float(u)) for u in units]
            )
            scale = 1.0 + draws
            if self.params.error_scope == "sleeping_only":
                on = np.asarray(policy.bits, dtype=bool)
                scale = np.where(on, 1.0, scale)
            estimated_rb[: self.n_sbs] = known_rb[: self.n_sbs] * scale
            if self.params.clamp_estimates:
                estimated_rb = np.minimum(estimated_rb, self._caps)

        view = LoadsView(
            known_rb=known_rb,
            estimated_rb=estimated_rb,
            caps_rb=self._caps.copy(),
            pref=self._preference_matrix(rx, d2),
            sbs_params=self._sbs_params,
            haps_params=self._haps_params,
        )

        caps_safe = np.where(self._caps > 0, self._caps, 1.0)
        realized_frac = np.where(self._caps > 0, realized_rb / caps_safe, 0.0)
        est_frac = np.where(self._caps > 0, estimated_rb / caps_safe, 0.0)
        true_power = network_power(
            policy, realized_frac[: self.n_sbs], realized_frac[self.n_sbs],
            self._sbs_params, self._haps_params,
        )
        if self.mode is ViewMode.ESTIMATED:
            reported = erroneous_network_power(
                policy, est_frac[: self.n_sbs], realized_frac[self.n_sbs],
                self._sbs_params, self._haps_params,
            )
        else:
            reported = true_power

        records = [
            LoadRecord(
                bs_id=j,
                true_load_rb=int(realized_rb[j]),
                true_load=float(realized_frac[j]),
                last_known=float(known_rb[j] / caps_safe[j] if self._caps[j] > 0 else 0.0),
                estimated=float(est_frac[j]),
            )
            for j in range(self._m)
        ]

        self.last_outcome = SlotOutcome(
            slot=t,
            policy=policy,
            view=view,
            realized_rb=realized_rb,
            connected=connected,
            unconnected=self.n_ues - connected,
            reported_power_w=reported,
            true_power_w=true_power,
            records=records,
            violations=violations,
        )
        self._slot = t + 1
        return view

    # -- trace hooks -----------------------------------------------------------

    def demand_trace_rows(self):
        """(slot, ue_id, rb) rows for the current episode's demands."""
        rows = []
        for t in range(self._demands.shape[1]):
            for i in range(self.n_ues):
                rows.append((t, i, int(self._demands[i, t])))
        return rows


class FrozenLoadEnvironment:
    """Static cell-level world: the loads view never changes.

    Used for decision-quality comparisons and timing benchmarks, where
    re-association dynamics would only blur what is being measured.
    Realised power equals the candidate evaluation of the applied
    policy, so agents, exhaustive search and baselines are judged on
    exactly the same surface.
    """

    def __init__(self, view: LoadsView, n_ts: int, mode: ViewMode, n_ues: int = 0,
                 slot_s: float = 1.0, phi: float = PENALTY_COST):
        self.view = view
        self.params = ScenarioParams(n_ts=n_ts, slot_s=slot_s, phi=phi)
        self.mode = mode
        self.n_sbs = view.n_sbs
        self.n_ues = n_ues
        self.slots_per_episode = n_ts
        self.last_outcome: SlotOutcome | None = None
        self._slot = 0

    def reset(self) -> LoadsView:
        self._slot = 0
        return self.step(Policy.all_on(self.n_sbs))

    def step(self, policy: Policy) -> LoadsView:
        ev = evaluate_policy(policy, self.view, self.mode, self.params.phi)
        caps = self.view.caps_rb
        self.last_outcome = SlotOutcome(
            slot=self._slot,
            policy=policy,
            view=self.view,
            realized_rb=ev.predicted_loads * np.where(caps > 0, caps, 1.0),
            connected=self.n_ues,
            unconnected=0,
            reported_power_w=ev.power_w,
            true_power_w=ev.power_w,
            records=[],
            violations=[],
        )
        self._slot += 1
        return self.view


# -- deciders -------------------------------------------------------------------


@dataclass(frozen=True)
class DecisionInfo:
    policy: Policy
    cost: float
    feasible: bool


class EsDecider:
    """Exhaustive search over all candidate policies, one slot ahead."""

    def __init__(self, mode: ViewMode, phi: float = PENALTY_COST, cap: int = 20):
        self.mode = mode
        self.phi = phi
        self.cap = cap
        self.fallback_slots: list[int] = []

    def decide(self, applied: Policy, view: LoadsView) -> DecisionInfo:
        found = es_search(view, self.mode, self.phi, self.cap)
        return DecisionInfo(
            policy=found.policy,
            cost=found.evaluation.cost,
            feasible=found.evaluation.feasible,
        )


class A3Decider:
    """Keep every SBS on; estimation plays no role."""

    def __init__(self, n: int, mode: ViewMode = ViewMode.ORACLE, phi: float = PENALTY_COST):
        self.policy = Policy.all_on(n)
        self.mode = mode
        self.phi = phi

    def decide(self, applied: Policy, view: LoadsView) -> DecisionInfo:
        ev = evaluate_policy(self.policy, view, self.mode, self.phi)
        return DecisionInfo(policy=self.policy, cost=ev.cost, feasible=ev.feasible)


class AgentDecider:
    """Greedy table lookup of a trained agent."""

    def __init__(self, agent: TrainedAgent, mode: ViewMode, phi: float = PENALTY_COST):
        self.agent = agent
        self.mode = mode
        self.phi = phi

    def decide(self, applied: Policy, view: LoadsView) -> DecisionInfo:
        policy = self.agent.decide(applied, view, self.mode)
        ev = evaluate_policy(policy, view, self.mode, self.phi)
        return DecisionInfo(policy=policy, cost=ev.cost, feasible=ev.feasible)


# -- evaluation runs --------------------------------------------------------------


@dataclass
class SlotResult:
    """Metrics of one executed slot."""

    slot: int
    algorithm: str
    mode: ViewMode
    regime: str
    policy: Policy
    power_w: float
    energy_j: float
    connected: int
    unconnected: int
    decision_time_s: float
    true_power_w: float
    decided_cost: float
    decided_feasible: bool


class SlotSimulator:
    """Drives one environment through its horizon with a decider."""

    def __init__(self, env, decider, algorithm: str, regime_name: str = "none"):
        self.env = env
        self.decider = decider
        self.algorithm = algorithm
        self.regime_name = regime_name
        self._pending: Policy | None = None
        self.slot = 0

    def run_slot(self) -> SlotResult:
        if self.slot == 0:
            view = self.env.reset()   # all-on bootstrap, initialisation contract
        else:
            view = self.env.step(self._pending)
        outcome = self.env.last_outcome
        t0 = time.perf_counter()
        info = self.decider.decide(outcome.policy, view)
        dt = time.perf_counter() - t0
        self._pending = info.policy
        result = SlotResult(
            slot=outcome.slot,
            algorithm=self.algorithm,
            mode=self.env.mode,
            regime=self.regime_name,
            policy=outcome.policy,
            power_w=outcome.reported_power_w,
            energy_j=slot_energy(outcome.reported_power_w, self.env.params.slot_s),
            connected=outcome.connected,
            unconnected=outcome.unconnected,
            decision_time_s=dt,
            true_power_w=outcome.true_power_w,
            decided_cost=info.cost,
            decided_feasible=info.feasible,
        )
        self.slot += 1
        return result

    @property
    def violations(self) -> list[str]:
        out = self.env.last_outcome
        return list(out.violations) if out else []


def run_evaluation(env, decider, algorithm: str, regime_name: str = "none") -> tuple[list[SlotResult], list[str]]:
    """Run one full horizon; returns per-slot results and any violations."""
    sim = SlotSimulator(env, decider, algorithm, regime_name)
    results, violations = [], []
    for _ in range(env.params.n_ts):
        results.append(sim.run_slot())
        violations.extend(sim.violations)
    return results, violations


# -- campaign -------------------------------------------------------------------


@dataclass
class RunAggregate:
    n: int
    delta: float
    regime: str
    algorithm: str
    seed: int
    mean_power_w: float
    total_energy_j: float
    unconnected_total: int
    decision_time_s: float


@dataclass
class CampaignResult:
    rows: list[RunAggregate]
    slot_rows: list[tuple]
    notices: list[str]
    violations: list[str]

    def series_energy(self, n: int, delta: float, regime: str, algorithm: str) -> float | None:
        """Mean total energy over seeds for one series point."""
        vals = [
            r.total_energy_j
            for r in self.rows
            if r.n == n and math.isclose(r.delta, delta) and r.regime == regime
            and r.algorithm == algorithm
        ]
        return float(np.mean(vals)) if vals else None


def _series_label(algorithm: str, regime: str) -> str:
    if algorithm == "ES" and regime == "none":
        return "ES_eps0"
    return algorithm


def run_campaign(cfg, out_dir: str | Path | None = None) -> CampaignResult:
    """Sweep the scenario matrix of an :class:`~hapscs.config.ExperimentConfig`.

    FSD cells whose table would blow the memory cap are skipped with a
    notice.  A3 ignores estimates, so its cells run oracle accounting
    whatever the regime.  Emits results/decision/plot/relative-difference
    CSVs when ``out_dir`` is given.
    """
    rows: list[RunAggregate] = []
    slot_rows: list[tuple] = []
    notices: list[str] = []
    violations: list[str] = []
    area = cfg.area_side**2

    for n in cfg.n_sbs:
        for e in cfg.ue_counts_for(n):
            delta = e / area
            for regime_name in cfg.regimes:
                for algorithm in cfg.algorithms:
                    if algorithm == "ES_eps0":
                        continue  # covered by ES at regime "none"
                    for seed in cfg.seeds:
                        agg = _run_cell(
                            cfg, n, e, delta, regime_name, algorithm, seed,
                            notices, violations, slot_rows,
                        )
                        if agg is not None:
                            rows.append(agg)

    result = CampaignResult(rows=rows, slot_rows=slot_rows, notices=notices, violations=violations)
    if out_dir is not None:
        _write_campaign_outputs(cfg, result, Path(out_dir))
    return result


def _run_cell(cfg, n, e, delta, regime_name, algorithm, seed, notices, violations, slot_rows):
    from .config import build_scenario

    mode = ViewMode.ORACLE if (regime_name == "none" or algorithm == "A3") else ViewMode.ESTIMATED
    scenario = build_scenario(cfg, n, e, regime_name if mode is ViewMode.ESTIMATED else "none")
    roots = np.random.SeedSequence(seed).spawn(3)

    if algorithm in ("FSD", "LSD"):
        kind = AgentKind[algorithm]
        agent_cfg = cfg.agent_config(kind)
        env_train = _make_env(cfg, scenario, roots[0])
        try:
            trained = train(
                kind, env_train, agent_cfg,
                np.random.default_rng(roots[1]), cell_cap=cfg.fsd_cell_cap,
            )
        except MemoryError as exc:
            notices.append(f"skipping {algorithm} for n={n}: {exc}")
            return None
        decider = AgentDecider(TrainedAgent(kind, trained.table, n), mode, cfg.penalty_cost)
    elif algorithm == "ES":
        decider = EsDecider(mode, cfg.penalty_cost, cfg.enumeration_cap)
    elif algorithm == "A3":
        decider = A3Decider(n, mode, cfg.penalty_cost)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")

    env = _make_env(cfg, scenario, roots[2])
    results, viols = run_evaluation(env, decider, algorithm, regime_name)
    violations.extend(viols)
    for r in results:
        slot_rows.append(
            (n, repr(delta), regime_name, algorithm, seed, r.slot, str(r.policy),
             repr(r.decided_cost), repr(r.power_w), int(r.decided_feasible))
        )
    return RunAggregate(
        n=n,
        delta=delta,
        regime=regime_name,
        algorithm=algorithm,
        seed=seed,
        mean_power_w=float(np.mean([r.power_w for r in results])),
        total_energy_j=float(np.sum([r.energy_j for r in results])),
        unconnected_total=int(np.sum([r.unconnected for r in results])),
        decision_time_s=float(np.sum([r.decision_time_s for r in results])),
    )


def _make_env(cfg, scenario, seed):
    if cfg.frozen_loads:
        boot = SlotEnvironment(scenario, seed)
        view = boot.reset()
        return FrozenLoadEnvironment(
            view, scenario.params.n_ts, scenario.mode, scenario.n_ues,
            scenario.params.slot_s, scenario.params.phi,
        )
    return SlotEnvironment(scenario, seed)


def _write_campaign_outputs(cfg, result: CampaignResult, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["n", "delta", "regime", "algorithm", "seed", "mean_power_w",
             "total_energy_j", "unconnected_total", "decision_time_s"]
        )
        for r in result.rows:
            writer.writerow(
                [r.n, repr(r.delta), r.regime, r.algorithm, r.seed,
                 repr(r.mean_power_w), repr(r.total_energy_j),
                 r.unconnected_total, repr(r.decision_time_s)]
            )
    with open(out / "decisions.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["n", "delta", "regime", "algorithm", "seed", "slot", "policy",
             "cost", "power_w", "feasible"]
        )
        writer.writerows(result.slot_rows)

    # figure-shaped tables: energy vs density, one column per algorithm
    for n in cfg.n_sbs:
        deltas = [e / cfg.area_side**2 for e in cfg.ue_counts_for(n)]
        for regime in cfg.regimes:
            series: dict[str, list[float | None]] = {}
            for algorithm in cfg.algorithms:
                if algorithm == "ES_eps0":
                    continue
                label = _series_label(algorithm, regime)
                series[label] = [
                    result.series_energy(n, d, regime, algorithm) for d in deltas
                ]
            if regime != "none" and "none" in cfg.regimes and "ES" in cfg.algorithms:
                series["ES_eps0"] = [
                    result.series_energy(n, d, "none", "ES") for d in deltas
                ]
            labels = [k for k in series if any(v is not None for v in series[k])]
            if not labels:
                continue
            with open(out / f"plot_n{n}_{regime}.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["delta"] + labels)
                for i, d in enumerate(deltas):
                    writer.writerow(
                        [repr(d)] + [
                            "" if series[k][i] is None else repr(series[k][i])
                            for k in labels
                        ]
                    )

    reldiff_rows = []
    for n in cfg.n_sbs:
        for e in cfg.ue_counts_for(n):
            d = e / cfg.area_side**2
            for regime in cfg.regimes:
                energies: dict[str, float] = {}
                for algorithm in cfg.algorithms:
                    if algorithm == "ES_eps0":
                        continue
                    val = result.series_energy(n, d, regime, algorithm)
                    if val is not None:
                        energies[_series_label(algorithm, regime)] = val
                if regime != "none":
                    val = result.series_energy(n, d, "none", "ES")
                    if val is not None:
                        energies["ES_eps0"] = val
                labels = sorted(energies)
                for i, a in enumerate(labels):
                    for b in labels[i + 1:]:
                        hi, lo = (a, b) if energies[a] >= energies[b] else (b, a)
                        reldiff_rows.append(
                            (n, repr(d), regime, hi, lo,
                             repr(relative_difference(energies[hi], energies[lo])))
                        )
    with open(out / "reldiff.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "delta", "regime", "greater", "lower", "percent"])
        writer.writerows(reldiff_rows)


# -- elapsed-time benchmark --------------------------------------------------------


def benchmark_elapsed(
    cfg,
    algorithms: Sequence[str] = ("FSD", "LSD"),
    slot_counts: Sequence[int] = (10, 25, 50),
    repeats: int = 10,
    n: int | None = None,
    e: int | None = None,
    iterations: int | None = None,
    cell_cap: int | None = None,
) -> list[tuple[str, int, float]]:
    """Agent-side training+decision seconds per (algorithm, slot count).

    Environment simulation is excluded from the measurement, mirroring
    the per-slot decision-time accounting.  A slot count of zero times
    table setup alone.  Rows are (algorithm, slot_count, mean_seconds).
    """
    from .config import build_scenario

    n = n if n is not None else cfg.n_sbs[0]
    e = e if e is not None else cfg.ue_counts_for(n)[0]
    cap = cell_cap if cell_cap is not None else cfg.fsd_cell_cap
    out_rows = []
    for algorithm in algorithms:
        kind = AgentKind[algorithm]
        for count in slot_counts:
            total = 0.0
            for rep in range(repeats):
                agent_cfg = cfg.agent_config(kind, iterations=iterations)
                if count == 0:
                    t0 = time.perf_counter()
                    from .qlearn import QTable

                    QTable.for_kind(kind, n, cap)
                    total += time.perf_counter() - t0
                    continue
                kids = np.random.SeedSequence((1000 + rep, count)).spawn(3)
                scenario = build_scenario(cfg, n, e, "none", n_ts=count)
                env = _make_env(cfg, scenario, kids[0])
                res = train(
                    kind, env, agent_cfg, np.random.default_rng(kids[1]),
                    cell_cap=cap, timing=True,
                )
                agent = TrainedAgent(kind, res.table, n)
                decider = AgentDecider(agent, scenario.mode, cfg.penalty_cost)
                env_eval = _make_env(cfg, scenario, kids[2])
                results, _ = run_evaluation(env_eval, decider, algorithm)
                total += res.agent_seconds + sum(r.decision_time_s for r in results)
            out_rows.append((algorithm, count, total / repeats))
    return out_rows


def dump_benchmark_csv(rows: Sequence[tuple[str, int, float]], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "slot_count", "mean_seconds"])
        for alg, count, secs in rows:
            writer.writerow([alg, count, repr(secs)])
