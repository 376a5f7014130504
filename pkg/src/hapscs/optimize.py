"""Policy-space machinery: candidate evaluation with the penalty cost,
exhaustive search over all on/off combinations, the all-active
baseline, and the relative-difference metric.

Candidate loads come from a cell-level reallocation of the controller's
loads view rather than per-candidate re-association: sleeping cells'
loads flow to active BSs in link-preference order.  The reallocation
rule is isolated behind :func:`reallocate_loads` so it can be swapped.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .power import HAPS_POWER, Policy, PowerParams

__all__ = [
    "ViewMode",
    "LoadsView",
    "PolicyEvaluation",
    "EsSearchResult",
    "PENALTY_COST",
    "ENUMERATION_CAP",
    "policy_matrix",
    "enumerate_policies",
    "reallocate_loads",
    "evaluate_policy",
    "evaluate_all",
    "es_search",
    "es_select",
    "a3_policy",
    "relative_difference",
    "dump_decision_log_csv",
]

PENALTY_COST = 1e9      # cost of a candidate that strands load
ENUMERATION_CAP = 20    # refuse to enumerate beyond 2^20 policies


class ViewMode(str, enum.Enum):
    ORACLE = "oracle"
    ESTIMATED = "estimated"


@dataclass(frozen=True)
class LoadsView:
    """The decision-time picture of per-BS loads, in RBs.

    ``known_rb`` is the persistence view (latest observed loads, no
    error); ``estimated_rb`` is the same view inflated by the error
    draws.  Index n (last) is the HAPS.  ``pref`` ranks, for each SBS,
    the other BSs by link preference for absorbing its load.
    """

    known_rb: np.ndarray        # (n+1,)
    estimated_rb: np.ndarray    # (n+1,)
    caps_rb: np.ndarray         # (n+1,)
    pref: np.ndarray            # (n, n) int64
    sbs_params: tuple[PowerParams, ...]
    haps_params: PowerParams = HAPS_POWER

    @property
    def n_sbs(self) -> int:
        return len(self.sbs_params)

    def loads_rb(self, mode: ViewMode) -> np.ndarray:
        return self.known_rb if mode is ViewMode.ORACLE else self.estimated_rb

    def fractions(self, mode: ViewMode) -> np.ndarray:
        """Loads as capacity fractions; zero-capacity BSs map load>0 to inf."""
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.loads_rb(mode) / self.caps_rb
        return np.nan_to_num(out, nan=0.0, posinf=np.inf)

    def param_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        ps = list(self.sbs_params) + [self.haps_params]
        return (
            np.array([p.p_const for p in ps]),
            np.array([p.slope for p in ps]),
            np.array([p.p_max_tx for p in ps]),
            np.array([p.p_sleep for p in ps]),
        )


@dataclass(frozen=True)
class PolicyEvaluation:
    """Outcome of judging one candidate policy against a loads view."""

    policy: Policy
    predicted_loads: np.ndarray   # (n+1,) capacity fractions after reallocation
    feasible: bool
    cost: float
    power_w: float
    unserved_rb: float


@dataclass(frozen=True)
class EsSearchResult:
    policy: Policy
    evaluation: PolicyEvaluation
    all_infeasible: bool


def policy_matrix(n: int, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """All 2^n policies as a (2^n, n) 0/1 matrix in lexicographic order."""
    if n < 0:
        raise ValueError("SBS count must be >= 0")
    if n > cap:
        raise ValueError(f"enumerating 2^{n} policies exceeds the cap of 2^{cap}")
    count = 1 << n
    out = np.zeros((count, n), dtype=np.uint8)
    for k in range(n):
        out[:, k] = (np.arange(count) >> (n - 1 - k)) & 1
    return out


def enumerate_policies(n: int, cap: int = ENUMERATION_CAP) -> list[Policy]:
    """Ordered list of all policies from all-zeros to all-ones."""
    return [Policy(tuple(int(b) for b in row)) for row in policy_matrix(n, cap)]


def _to_fractions(pred_rb: np.ndarray, caps_rb: np.ndarray) -> np.ndarray:
    out = np.zeros_like(pred_rb)
    nz = caps_rb > 0
    out[nz] = pred_rb[nz] / caps_rb[nz]
    return out


def reallocate_loads(
    policy: Policy, view: LoadsView, mode: ViewMode = ViewMode.ORACLE
) -> tuple[np.ndarray, float]:
    """Predict per-BS loads (RBs) under ``policy`` plus unserved RBs."""
    p_const, slope, p_max, p_sleep = view.param_arrays()
    _, _, _, pred, uns = kernels.eval_policies(
        policy.as_array()[None, :],
        view.loads_rb(mode),
        view.caps_rb,
        view.pref,
        p_const,
        slope,
        p_max,
        p_sleep,
        PENALTY_COST,
    )
    return pred[0], float(uns[0])


def evaluate_all(
    view: LoadsView,
    mode: ViewMode,
    phi: float = PENALTY_COST,
    cap: int = ENUMERATION_CAP,
    policies: np.ndarray | None = None,
):
    """Kernel evaluation of a policy matrix (default: all 2^n)."""
    if policies is None:
        policies = policy_matrix(view.n_sbs, cap)
    p_const, slope, p_max, p_sleep = view.param_arrays()
    return policies, kernels.eval_policies(
        policies,
        view.loads_rb(mode),
        view.caps_rb,
        view.pref,
        p_const,
        slope,
        p_max,
        p_sleep,
        phi,
    )


def evaluate_policy(
    policy: Policy,
    view: LoadsView,
    mode: ViewMode = ViewMode.ORACLE,
    phi: float = PENALTY_COST,
) -> PolicyEvaluation:
    """Cost a single candidate: reallocation, feasibility, power, penalty."""
    _, (cost, power, feasible, pred, uns) = evaluate_all(
        view, mode, phi, policies=policy.as_array()[None, :]
    )
    return PolicyEvaluation(
        policy=policy,
        predicted_loads=_to_fractions(pred[0], view.caps_rb),
        feasible=bool(feasible[0]),
        cost=float(cost[0]),
        power_w=float(power[0]),
        unserved_rb=float(uns[0]),
    )


def es_search(
    view: LoadsView,
    mode: ViewMode = ViewMode.ORACLE,
    phi: float = PENALTY_COST,
    cap: int = ENUMERATION_CAP,
) -> EsSearchResult:
    """Exhaustive search for the cheapest feasible policy.

    Cost ties break toward fewer active SBSs, then the smaller
    lexicographic index.  When every candidate is infeasible the
    all-on policy is returned and flagged.
    """
    policies, (cost, power, feasible, pred, uns) = evaluate_all(view, mode, phi, cap)
    n = view.n_sbs
    if not feasible.any():
        all_on = Policy.all_on(n)
        ix = len(policies) - 1
        return EsSearchResult(
            policy=all_on,
            evaluation=PolicyEvaluation(
                policy=all_on,
                predicted_loads=_to_fractions(pred[ix], view.caps_rb),
                feasible=False,
                cost=float(cost[ix]),
                power_w=float(power[ix]),
                unserved_rb=float(uns[ix]),
            ),
            all_infeasible=True,
        )
    best_cost = cost.min()
    candidates = np.flatnonzero(cost == best_cost)
    on_counts = policies[candidates].sum(axis=1)
    order = np.lexsort((candidates, on_counts))
    ix = int(candidates[order[0]])
    chosen = Policy(tuple(int(b) for b in policies[ix]))
    return EsSearchResult(
        policy=chosen,
        evaluation=PolicyEvaluation(
            policy=chosen,
            predicted_loads=_to_fractions(pred[ix], view.caps_rb),
            feasible=bool(feasible[ix]),
            cost=float(cost[ix]),
            power_w=float(power[ix]),
            unserved_rb=float(uns[ix]),
        ),
        all_infeasible=False,
    )


def es_select(
    view: LoadsView,
    mode: ViewMode = ViewMode.ORACLE,
    phi: float = PENALTY_COST,
    cap: int = ENUMERATION_CAP,
) -> Policy:
    """The cheapest policy for this view (all-on fallback when stuck)."""
    return es_search(view, mode, phi, cap).policy


def a3_policy(n: int) -> Policy:
    """The always-all-active baseline."""
    return Policy.all_on(n)


def relative_difference(greater: float, lower: float) -> float:
    """Percentage gap between two energy figures, relative to the greater."""
    if not greater >= lower >= 0:
        raise ValueError(f"need greater >= lower >= 0, got ({greater}, {lower})")
    if greater <= 0:
        raise ValueError("greater value must be positive")
    return 100.0 * (greater - lower) / greater


def dump_decision_log_csv(rows: Sequence[tuple], path) -> None:
    """Write per-slot decisions: (slot, algorithm, policy, cost, power_w, feasible)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slot", "algorithm", "policy", "cost", "power_w", "feasible"])
        writer.writerows(rows)
