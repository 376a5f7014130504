"""Three-criteria user-cell association over the active BS set.

A UE connects to the active BS with the highest SINR, provided that BS
has capacity left for its demand and the received power clears the
UE's sensitivity.  In the literal mode a UE blocked at its best BS
stays unconnected; the fallback mode lets it try lower-SINR BSs.
Processing is sequential in ascending UE id, so capacity contention is
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .network import BaseStationSpec, LinkBudget, UserEquipment

__all__ = ["AssociationResult", "associate", "connected_count", "dump_association_csv"]


@dataclass
class AssociationResult:
    """Binary UE x BS association map plus leftovers."""

    matrix_u: np.ndarray            # (e, n_bs) uint8
    unconnected: list[int]          # UE ids with an all-zero row
    residual_capacity: np.ndarray   # (n_bs,) remaining RBs

    def serving_bs(self, ue_index: int) -> int:
        """Column of the UE's 1-entry, or -1 when unconnected."""
        row = self.matrix_u[ue_index]
        hits = np.flatnonzero(row)
        return int(hits[0]) if hits.size else -1


def _rank_active(
    budgets: dict[tuple[int, int], LinkBudget],
    ue: UserEquipment,
    active_ids: Sequence[int],
) -> list[int]:
    # descending SINR, ties to the lower BS id
    return sorted(active_ids, key=lambda j: (-budgets[(ue.id, j)].sinr_db, j))


def associate(
    ues: Sequence[UserEquipment],
    budgets: dict[tuple[int, int], LinkBudget],
    specs: Sequence[BaseStationSpec],
    active_ids: Sequence[int],
    literal_top: bool = True,
) -> AssociationResult:
    """Associate every UE against the active BSs.

    ``budgets`` maps (ue_id, bs_id) to the evaluated link for every
    active BS.  An empty active set simply leaves every UE unconnected.
    """
    n_bs = len(specs)
    caps = np.array([float(s.capacity_rb) for s in specs])
    if not active_ids:
        return AssociationResult(
            matrix_u=np.zeros((len(ues), n_bs), dtype=np.uint8),
            unconnected=[u.id for u in ues],
            residual_capacity=caps,
        )
    for u in ues:
        for j in active_ids:
            if (u.id, j) not in budgets:
                raise ValueError(f"missing link budget for UE {u.id}, BS {j}")

    ranking = np.array([_rank_active(budgets, u, active_ids) for u in ues], dtype=np.int64)
    rx_ok = np.zeros((len(ues), n_bs), dtype=np.uint8)
    for i, u in enumerate(ues):
        for j in active_ids:
            if budgets[(u.id, j)].rx_power_dbm >= u.rx_sensitivity_dbm:
                rx_ok[i, j] = 1
    demands = np.array([u.demand_rb for u in ues], dtype=np.int64)

    assign, residual = kernels.associate_ues(ranking, rx_ok, demands, caps, literal_top)

    matrix = np.zeros((len(ues), n_bs), dtype=np.uint8)
    unconnected = []
    for i, u in enumerate(ues):
        if assign[i] >= 0:
            matrix[i, assign[i]] = 1
        else:
            unconnected.append(u.id)
    return AssociationResult(
        matrix_u=matrix, unconnected=unconnected, residual_capacity=residual
    )


def connected_count(result: AssociationResult) -> int:
    """Number of served UEs (sum of the association matrix)."""
    return int(result.matrix_u.sum())


def dump_association_csv(rows, path) -> None:
    """Write (slot, ue_id, bs_id) rows; bs_id is -1 when unconnected."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slot", "ue_id", "bs_id"])
        writer.writerows(rows)
