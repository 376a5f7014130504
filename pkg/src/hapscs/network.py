"""Topology generation and link budgets for the two-layer network.

n small cells sit on a centred square grid inside a square service
area; one HAPS super-macro cell hovers above the centre.  Link budgets
use free-space loss plus lognormal shadowing, a fixed NLoS clutter
offset, and configurable additive extras (gas / scintillation /
building-entry) that matter only on the HAPS leg.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .power import HAPS_POWER, SBS_POWER, PowerParams

__all__ = [
    "BSKind",
    "LinkCondition",
    "MobilityMode",
    "BaseStationSpec",
    "UserEquipment",
    "LinkBudget",
    "dbm_to_mw",
    "mw_to_dbm",
    "noise_floor_dbm",
    "free_space_loss_db",
    "path_loss",
    "rx_power_dbm",
    "link_budget",
    "place_network",
    "dump_topology_csv",
    "load_topology_csv",
    "MAX_TX_POWER_DBM",
]


class BSKind(enum.Enum):
    SBS = "SBS"
    HAPS = "HAPS"


class LinkCondition(enum.Enum):
    LOS = "LoS"
    NLOS = "NLoS"


class MobilityMode(enum.Enum):
    STATIONARY = "stationary"
    PEDESTRIAN = "pedestrian"
    CYCLIST = "cyclist"
    DRIVER = "driver"


# Radio defaults
SBS_TX_DBM = 33.0
HAPS_TX_DBM = 49.0
SBS_GAIN_DBI = 4.0
HAPS_GAIN_DBI = 43.2
UE_GAIN_DBI = 0.0
CAPACITY_RB = 250            # 50 MHz carrier / 200 kHz per UE
HAPS_CAPACITY_SHARE = 0.7    # remainder serves other networks in the footprint
SBS_HEIGHT_M = 10.0
HAPS_ALTITUDE_M = 20_000.0
LOS_RANGE_M = 300.0          # SBS links are LoS within this 2-D range
NLOS_OFFSET_DB = 20.0        # clutter penalty on NLoS legs
SIGMA_LOS_DB = 4.0
SIGMA_NLOS_DB = 6.0
MAX_TX_POWER_DBM = 49.0      # no BS may exceed this


@dataclass(frozen=True)
class BaseStationSpec:
    """Static radio and power parameters of one BS.

    ``capacity_rb`` is the usable RB count; for the HAPS the footprint
    share has already been applied.
    """

    id: int
    kind: BSKind
    position: tuple[float, float, float]   # m
    tx_power_dbm: float
    antenna_gain_dbi: float
    capacity_rb: int
    power: PowerParams = field(default=SBS_POWER)

    def __post_init__(self):
        if self.tx_power_dbm > MAX_TX_POWER_DBM:
            raise ValueError(
                f"BS {self.id}: tx power {self.tx_power_dbm} dBm exceeds "
                f"the {MAX_TX_POWER_DBM} dBm maximum"
            )
        if self.capacity_rb < 0:
            raise ValueError(f"BS {self.id}: capacity_rb must be >= 0")


@dataclass
class UserEquipment:
    """One UE: planar position, motion class, receiver floor, RB demand."""

    id: int
    position: tuple[float, float]          # m
    mobility_mode: MobilityMode = MobilityMode.STATIONARY
    rx_sensitivity_dbm: float = -95.0
    demand_rb: int = 0

    def __post_init__(self):
        if self.demand_rb < 0:
            raise ValueError(f"UE {self.id}: demand_rb must be >= 0")


@dataclass(frozen=True)
class LinkBudget:
    """Result of one UE-BS link evaluation."""

    path_loss_db: float
    condition: LinkCondition
    rx_power_dbm: float
    sinr_db: float


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    if mw <= 0:
        raise ValueError(f"power must be positive, got {mw} mW")
    return 10.0 * math.log10(mw)


def noise_floor_dbm(bandwidth_hz: float = 200e3, noise_figure_db: float = 7.0) -> float:
    """Thermal noise over the per-UE bandwidth plus receiver noise figure."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return -174.0 + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def free_space_loss_db(distance_m: float, frequency_hz: float) -> float:
    """Free-space loss, 20 log10(d_km) + 20 log10(f_MHz) + 32.44."""
    if distance_m <= 0 or frequency_hz <= 0:
        raise ValueError("distance and frequency must be positive")
    d_km = distance_m / 1e3
    f_mhz = frequency_hz / 1e6
    return 20.0 * math.log10(d_km) + 20.0 * math.log10(f_mhz) + 32.44


def path_loss(
    distance_m: float,
    frequency_hz: float,
    condition: LinkCondition,
    extra_losses_db: tuple[float, float, float] = (0.0, 0.0, 0.0),
    shadow_db: float = 0.0,
    nlos_offset_db: float = NLOS_OFFSET_DB,
) -> float:
    """Composite path loss in dB.

    Free-space loss plus the three additive extras (gas, scintillation,
    building entry), a clutter offset on NLoS legs, and the caller's
    shadowing draw.  The draw is an argument so the function itself is
    deterministic; callers sample Normal(0, sigma) with sigma 4 dB
    (LoS) or 6 dB (NLoS).
    """
    loss = free_space_loss_db(distance_m, frequency_hz)
    loss += sum(extra_losses_db)
    if condition is LinkCondition.NLOS:
        loss += nlos_offset_db
    return loss + shadow_db


def link_condition(bs: BaseStationSpec, ue_xy: tuple[float, float]) -> LinkCondition:
    """HAPS legs are always LoS; SBS legs are LoS within the 2-D range."""
    if bs.kind is BSKind.HAPS:
        return LinkCondition.LOS
    d2 = math.hypot(bs.position[0] - ue_xy[0], bs.position[1] - ue_xy[1])
    return LinkCondition.LOS if d2 <= LOS_RANGE_M else LinkCondition.NLOS


def _link_distance(bs: BaseStationSpec, ue_xy: tuple[float, float]) -> float:
    return math.sqrt(
        (bs.position[0] - ue_xy[0]) ** 2
        + (bs.position[1] - ue_xy[1]) ** 2
        + bs.position[2] ** 2
    )


def rx_power_dbm(
    bs: BaseStationSpec,
    ue: UserEquipment,
    frequency_hz: float,
    extra_losses_db: tuple[float, float, float] = (0.0, 0.0, 0.0),
    shadow_db: float = 0.0,
    ue_gain_dbi: float = UE_GAIN_DBI,
) -> float:
    """Received power at the UE from one BS (dB arithmetic, exact)."""
    cond = link_condition(bs, ue.position)
    pl = path_loss(
        _link_distance(bs, ue.position), frequency_hz, cond, extra_losses_db, shadow_db
    )
    return bs.tx_power_dbm + bs.antenna_gain_dbi + ue_gain_dbi - pl


def link_budget(
    bs: BaseStationSpec,
    ue: UserEquipment,
    active: Sequence[BaseStationSpec],
    noise_dbm: float,
    frequency_hz: float = 2.5e9,
    extras_by_kind: dict[BSKind, tuple[float, float, float]] | None = None,
    shadows_db: dict[int, float] | None = None,
    ue_gain_dbi: float = UE_GAIN_DBI,
) -> LinkBudget:
    """Evaluate the ``bs`` -> ``ue`` link with every other active BS as
    a co-channel interferer.

    ``shadows_db`` maps BS id to this UE's shadowing draw (default 0).
    """
    if not active:
        raise ValueError("active set must not be empty")
    if all(b.id != bs.id for b in active):
        raise ValueError(f"BS {bs.id} is not in the active set")
    extras = extras_by_kind or {}
    shadows = shadows_db or {}

    def one_rx(b: BaseStationSpec) -> float:
        return rx_power_dbm(
            b,
            ue,
            frequency_hz,
            extras.get(b.kind, (0.0, 0.0, 0.0)),
            shadows.get(b.id, 0.0),
            ue_gain_dbi,
        )

    cond = link_condition(bs, ue.position)
    pl = path_loss(
        _link_distance(bs, ue.position),
        frequency_hz,
        cond,
        extras.get(bs.kind, (0.0, 0.0, 0.0)),
        shadows.get(bs.id, 0.0),
    )
    rx = bs.tx_power_dbm + bs.antenna_gain_dbi + ue_gain_dbi - pl
    interference_mw = sum(dbm_to_mw(one_rx(b)) for b in active if b.id != bs.id)
    sinr = 10.0 * math.log10(dbm_to_mw(rx) / (interference_mw + dbm_to_mw(noise_dbm)))
    return LinkBudget(path_loss_db=pl, condition=cond, rx_power_dbm=rx, sinr_db=sinr)


def _grid_cells(n: int, area_side: float) -> list[tuple[float, float]]:
    g = math.ceil(math.sqrt(n))
    step = area_side / g
    return [((c + 0.5) * step, (r + 0.5) * step) for r in range(g) for c in range(g)]


def place_network(
    n: int,
    area_side: float,
    haps_altitude: float = HAPS_ALTITUDE_M,
    sbs_height: float = SBS_HEIGHT_M,
    capacity_rb: int = CAPACITY_RB,
    haps_capacity_share: float = HAPS_CAPACITY_SHARE,
    sbs_tx_dbm: float = SBS_TX_DBM,
    haps_tx_dbm: float = HAPS_TX_DBM,
    sbs_gain_dbi: float = SBS_GAIN_DBI,
    haps_gain_dbi: float = HAPS_GAIN_DBI,
    sbs_power: PowerParams = SBS_POWER,
    haps_power: PowerParams = HAPS_POWER,
) -> list[BaseStationSpec]:
    """Place ``n`` SBSs plus the central HAPS.

    SBSs occupy centres of a ceil(sqrt(n))-sided grid.  Cells are taken
    centre-outward in reflection pairs so that whenever n is a perfect
    square, even, or odd with a centre cell available, the layout is
    symmetric about the area centre.  Remaining odd leftovers fill in
    distance order and are documented as asymmetric.
    """
    if n < 0:
        raise ValueError("SBS count must be >= 0")
    if area_side <= 0:
        raise ValueError("area side must be positive")

    centre = (area_side / 2.0, area_side / 2.0)
    chosen: list[tuple[float, float]] = []
    if n > 0:
        cells = _grid_cells(n, area_side)
        dist = lambda p: math.hypot(p[0] - centre[0], p[1] - centre[1])
        order = sorted(cells, key=lambda p: (dist(p), p[1], p[0]))

        def mirror(p):
            return (2 * centre[0] - p[0], 2 * centre[1] - p[1])

        def close(a, b):
            return abs(a[0] - b[0]) < 1e-9 and abs(a[1] - b[1]) < 1e-9

        taken = [False] * len(order)
        self_paired = []
        for i, cell in enumerate(order):
            if taken[i]:
                continue
            m = mirror(cell)
            if close(cell, m):
                self_paired.append(i)
                continue
            if len(chosen) + 2 > n:
                continue
            j = next(
                (k for k, q in enumerate(order) if not taken[k] and k != i and close(q, m)),
                None,
            )
            if j is not None:
                taken[i] = taken[j] = True
                chosen.append(cell)
                chosen.append(order[j])
        for i in self_paired:
            if len(chosen) < n:
                taken[i] = True
                chosen.append(order[i])
        for i, cell in enumerate(order):
            if len(chosen) >= n:
                break
            if not taken[i]:
                taken[i] = True
                chosen.append(cell)

    specs = [
        BaseStationSpec(
            id=k,
            kind=BSKind.SBS,
            position=(x, y, sbs_height),
            tx_power_dbm=sbs_tx_dbm,
            antenna_gain_dbi=sbs_gain_dbi,
            capacity_rb=capacity_rb,
            power=sbs_power,
        )
        for k, (x, y) in enumerate(sorted(chosen, key=lambda p: (p[1], p[0])))
    ]
    specs.append(
        BaseStationSpec(
            id=n,
            kind=BSKind.HAPS,
            position=(centre[0], centre[1], haps_altitude),
            tx_power_dbm=haps_tx_dbm,
            antenna_gain_dbi=haps_gain_dbi,
            capacity_rb=int(math.floor(capacity_rb * haps_capacity_share)),
            power=haps_power,
        )
    )
    return specs


TOPOLOGY_HEADER = ["id", "kind", "x", "y", "z", "tx_dbm", "gain_dbi", "capacity_rb"]


def dump_topology_csv(specs: Iterable[BaseStationSpec], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TOPOLOGY_HEADER)
        for s in specs:
            writer.writerow(
                [
                    s.id,
                    s.kind.value,
                    repr(s.position[0]),
                    repr(s.position[1]),
                    repr(s.position[2]),
                    repr(s.tx_power_dbm),
                    repr(s.antenna_gain_dbi),
                    s.capacity_rb,
                ]
            )


def load_topology_csv(path) -> list[BaseStationSpec]:
    specs = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TOPOLOGY_HEADER:
            raise ValueError(f"unexpected topology header: {reader.fieldnames}")
        for row in reader:
            kind = BSKind(row["kind"])
            specs.append(
                BaseStationSpec(
                    id=int(row["id"]),
                    kind=kind,
                    position=(float(row["x"]), float(row["y"]), float(row["z"])),
                    tx_power_dbm=float(row["tx_dbm"]),
                    antenna_gain_dbi=float(row["gain_dbi"]),
                    capacity_rb=int(row["capacity_rb"]),
                    power=HAPS_POWER if kind is BSKind.HAPS else SBS_POWER,
                )
            )
    haps = [s for s in specs if s.kind is BSKind.HAPS]
    if len(haps) != 1:
        raise ValueError(f"topology must contain exactly one HAPS, found {len(haps)}")
    return specs
