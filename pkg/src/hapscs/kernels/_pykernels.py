"""Pure-Python reference kernels.

These are the hot inner loops of the simulator: candidate-policy
evaluation (load reallocation + power + penalty cost) and the
sequential capacity-checked user association.  The compiled backend in
``_cykernels.pyx`` mirrors this code statement for statement; both must
produce bit-identical results, which the test suite asserts.
"""

from __future__ import annotations

import numpy as np

# Relative slack when comparing a reallocated load against capacity;
# absorbs the rounding of "fill exactly to the brim" arithmetic.
CAP_SLACK = 1e-12


def eval_policies(policies, loads_rb, caps_rb, pref, p_const, slope, p_max, p_sleep, phi):
    """Evaluate every candidate on/off policy against one loads view.

    Each sleeping SBS's load moves to active BSs in its preference
    order, capped by residual capacity; leftovers count as unserved.
    A candidate is feasible when nothing is unserved and no BS ends
    above capacity; infeasible candidates cost ``phi``.

    policies : (P, n) uint8, 1 = on.  BS index n (last) is the HAPS.
    loads_rb, caps_rb : (n+1,) float64, in resource blocks.
    pref : (n, n) int64, per-donor recipient order (all other BSs).
    p_const, slope, p_max, p_sleep : (n+1,) float64 power parameters.

    Returns (cost, power, feasible, predicted_rb, unserved).
    """
    policies = np.ascontiguousarray(policies, dtype=np.uint8)
    loads_rb = np.ascontiguousarray(loads_rb, dtype=np.float64)
    caps_rb = np.ascontiguousarray(caps_rb, dtype=np.float64)
    pref = np.ascontiguousarray(pref, dtype=np.int64)
    n_pol, n = policies.shape
    if loads_rb.shape[0] != n + 1 or caps_rb.shape[0] != n + 1:
        raise ValueError("loads and capacities must cover all SBSs plus the HAPS")

    cost = np.empty(n_pol, dtype=np.float64)
    power = np.empty(n_pol, dtype=np.float64)
    feasible = np.empty(n_pol, dtype=np.uint8)
    predicted = np.empty((n_pol, n + 1), dtype=np.float64)
    unserved = np.empty(n_pol, dtype=np.float64)

    for p in range(n_pol):
        pred = loads_rb.copy()
        left_total = 0.0
        for k in range(n):
            if policies[p, k]:
                continue
            moving = pred[k]
            pred[k] = 0.0
            if moving > 0.0:
                for r_ix in range(pref.shape[1]):
                    r = pref[k, r_ix]
                    if r != n and not policies[p, r]:
                        continue
                    room = caps_rb[r] - pred[r]
                    if room > 0.0:
                        mv = moving if moving < room else room
                        pred[r] += mv
                        moving -= mv
                        if moving <= 0.0:
                            break
                left_total += moving
        ok = left_total <= 0.0
        acc = p_const[n] + slope[n] * (pred[n] / caps_rb[n] if caps_rb[n] > 0.0 else 0.0) * p_max[n]
        if pred[n] > caps_rb[n] * (1.0 + CAP_SLACK):
            ok = False
        for k in range(n):
            if policies[p, k]:
                rho = pred[k] / caps_rb[k] if caps_rb[k] > 0.0 else 0.0
                acc += p_const[k] + slope[k] * rho * p_max[k]
            else:
                acc += p_sleep[k]
            if pred[k] > caps_rb[k] * (1.0 + CAP_SLACK):
                ok = False
        power[p] = acc
        feasible[p] = 1 if ok else 0
        cost[p] = acc if ok else phi
        predicted[p, :] = pred
        unserved[p] = left_total
    return cost, power, feasible, predicted, unserved


def associate_ues(ranking, rx_ok, demands, caps, literal_top):
    """Greedy sequential user association with capacity bookkeeping.

    UEs are processed in ascending index order.  Each scans its SINR
    ranking; a BS admits the UE when the receive floor holds and its
    residual capacity covers the demand.  With ``literal_top`` only the
    top-ranked BS is ever considered.

    ranking : (e, m) int64 of BS indices, best first.
    rx_ok : (e, n_bs) uint8, receive power above sensitivity.
    demands : (e,) int64.  caps : (n_bs,) float64.

    Returns (assign, residual); assign is -1 for unconnected UEs.
    """
    ranking = np.ascontiguousarray(ranking, dtype=np.int64)
    rx_ok = np.ascontiguousarray(rx_ok, dtype=np.uint8)
    demands = np.ascontiguousarray(demands, dtype=np.int64)
    n_ue = ranking.shape[0]
    width = ranking.shape[1]
    residual = np.asarray(caps, dtype=np.float64).copy()
    assign = np.full(n_ue, -1, dtype=np.int64)

    for i in range(n_ue):
        limit = 1 if literal_top else width
        for r_ix in range(min(limit, width)):
            j = ranking[i, r_ix]
            if not rx_ok[i, j]:
                continue
            if residual[j] >= demands[i]:
                assign[i] = j
                residual[j] -= demands[i]
                break
    return assign, residual
