"""Per-slot RB demand generation, cell-load aggregation, and the
unidirectional load-estimation error.

UE demand is an integer RB count: a uniform draw in [rb_min, rb_max]
scaled by the slot's diurnal coefficient and rounded half-up.  Cell
loads aggregate those demands per serving BS.  The controller's view of
a load is its last observed value inflated by a multiplicative error
drawn from the active error regime; the error only ever adds load.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .network import BaseStationSpec

__all__ = [
    "DemandProfile",
    "ErrorRegime",
    "ERROR_REGIMES",
    "LoadRecord",
    "draw_demand",
    "aggregate_load",
    "inject_error",
    "synth_profile",
    "load_profile_csv",
    "dump_profile_csv",
    "dump_demand_trace_csv",
]


@dataclass(frozen=True)
class DemandProfile:
    """Diurnal demand-shaping series and the per-UE RB draw bounds."""

    scale_series: tuple[float, ...]   # one coefficient per slot, in (0, 1]
    rb_min: int = 1
    rb_max: int = 3

    def __post_init__(self):
        if not self.scale_series:
            raise ValueError("scale series must not be empty")
        if any(not (0.0 < s <= 1.0) for s in self.scale_series):
            raise ValueError("every scale coefficient must lie in (0, 1]")
        if self.rb_min < 0 or self.rb_max < 0 or self.rb_min > self.rb_max:
            raise ValueError(
                f"need 0 <= rb_min <= rb_max, got ({self.rb_min}, {self.rb_max})"
            )

    def __len__(self) -> int:
        return len(self.scale_series)


@dataclass(frozen=True)
class ErrorRegime:
    """Uniform range of the multiplicative estimation error."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper):
            raise ValueError(
                f"need 0 <= lower <= upper, got ({self.lower}, {self.upper})"
            )

    def map_draw(self, unit: float) -> float:
        """Map a unit-interval draw onto this regime's range."""
        if not (0.0 <= unit <= 1.0):
            raise ValueError(f"unit draw must lie in [0, 1], got {unit}")
        return self.lower + (self.upper - self.lower) * unit


ERROR_REGIMES: dict[str, ErrorRegime] = {
    "eps1": ErrorRegime(0.20, 0.40),
    "eps2": ErrorRegime(0.60, 0.80),
    "eps3": ErrorRegime(1.80, 2.00),
}


@dataclass
class LoadRecord:
    """True, last-observed and error-inflated load of one BS."""

    bs_id: int
    true_load_rb: int
    true_load: float        # fraction of usable capacity
    last_known: float       # fraction observed in the latest on-slot
    estimated: float        # last_known inflated by the error draw

    def __post_init__(self):
        if self.estimated < self.last_known - 1e-12:
            raise ValueError(
                f"BS {self.bs_id}: estimate {self.estimated} below last known "
                f"{self.last_known}; the error is additive-only"
            )


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def draw_demand(profile: DemandProfile, slot: int, uniform_draw: int) -> int:
    """RB demand of one UE for one slot: scaled draw, rounded half-up."""
    if not 0 <= slot < len(profile):
        raise ValueError(f"slot {slot} outside profile of length {len(profile)}")
    if not profile.rb_min <= uniform_draw <= profile.rb_max:
        raise ValueError(
            f"draw {uniform_draw} outside [{profile.rb_min}, {profile.rb_max}]"
        )
    return round_half_up(profile.scale_series[slot] * uniform_draw)


def aggregate_load(
    associations: Mapping[int, int],
    demands: Mapping[int, int],
    specs: Sequence[BaseStationSpec],
) -> list[LoadRecord]:
    """Sum served demand per BS and express it as a capacity fraction.

    ``associations`` maps UE id to serving BS id; unconnected UEs are
    simply absent.  Total served RBs are conserved across the records.
    """
    by_id = {s.id: s for s in specs}
    totals = {s.id: 0 for s in specs}
    for ue_id, bs_id in associations.items():
        if bs_id not in by_id:
            raise ValueError(f"UE {ue_id} mapped to unknown BS {bs_id}")
        totals[bs_id] += demands[ue_id]
    records = []
    for s in specs:
        rb = totals[s.id]
        rho = rb / s.capacity_rb if s.capacity_rb > 0 else 0.0
        records.append(
            LoadRecord(
                bs_id=s.id,
                true_load_rb=rb,
                true_load=rho,
                last_known=rho,
                estimated=rho,
            )
        )
    return records


def inject_error(rho: float, regime: ErrorRegime, uniform_draw: float) -> float:
    """Inflate a load fraction by the drawn error: rho * (1 + draw).

    No clamping: estimates above 1 are preserved so that candidate
    policies can correctly appear infeasible downstream.
    """
    if rho < 0:
        raise ValueError(f"load fraction must be >= 0, got {rho}")
    if not (regime.lower - 1e-12 <= uniform_draw <= regime.upper + 1e-12):
        raise ValueError(
            f"draw {uniform_draw} outside regime [{regime.lower}, {regime.upper}]"
        )
    return rho * (1.0 + uniform_draw)


def synth_profile(num_slots: int, peak: float, trough: float) -> DemandProfile:
    """One sinusoidal diurnal period sampled at ``num_slots`` points.

    The raw sine starts at mid-rise and is affinely rescaled so the
    sampled minimum and maximum hit ``trough`` and ``peak`` exactly
    (degenerate lengths < 3 fall back to the mid value).
    """
    if num_slots <= 0:
        raise ValueError("num_slots must be positive")
    if not (0.0 < trough <= peak <= 1.0):
        raise ValueError(f"need 0 < trough <= peak <= 1, got ({trough}, {peak})")
    mid = (peak + trough) / 2.0
    amp = (peak - trough) / 2.0
    t = np.arange(num_slots)
    raw = mid + amp * np.sin(2.0 * np.pi * t / num_slots)
    span = raw.max() - raw.min()
    if span <= 0.0:
        values = np.full(num_slots, peak if amp == 0.0 else mid)
    else:
        values = trough + (peak - trough) * (raw - raw.min()) / span
        values = np.clip(values, trough, peak)
    return DemandProfile(scale_series=tuple(float(v) for v in values))


def dump_profile_csv(profile: DemandProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slot_index", "psi"])
        for i, s in enumerate(profile.scale_series):
            writer.writerow([i, repr(s)])


def load_profile_csv(path, rb_min: int = 1, rb_max: int = 3) -> DemandProfile:
    rows: list[tuple[int, float]] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["slot_index", "psi"]:
            raise ValueError(f"unexpected profile header: {reader.fieldnames}")
        for row in reader:
            rows.append((int(row["slot_index"]), float(row["psi"])))
    rows.sort()
    if [i for i, _ in rows] != list(range(len(rows))):
        raise ValueError("profile slots must be 0..N-1 without gaps")
    return DemandProfile(
        scale_series=tuple(v for _, v in rows), rb_min=rb_min, rb_max=rb_max
    )


def dump_demand_trace_csv(rows: Sequence[tuple[int, int, int]], path) -> None:
    """Write (slot, ue_id, rb) demand rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slot", "ue_id", "rb"])
        writer.writerows(rows)
