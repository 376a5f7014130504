# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; statement-for-statement mirror of ``_pykernels``.

Keeping the arithmetic order identical to the pure-Python reference
makes the two backends bit-compatible, which the test suite asserts.
"""

import numpy as np


DEF CAP_SLACK = 1e-12


def eval_policies(policies, loads_rb, caps_rb, pref, p_const, slope, p_max, p_sleep, phi):
    """See ``_pykernels.eval_policies``; same contract, compiled."""
    cdef unsigned char[:, ::1] pol = np.ascontiguousarray(policies, dtype=np.uint8)
    cdef double[::1] loads = np.ascontiguousarray(loads_rb, dtype=np.float64)
    cdef double[::1] caps = np.ascontiguousarray(caps_rb, dtype=np.float64)
    cdef long long[:, ::1] pr = np.ascontiguousarray(pref, dtype=np.int64)
    cdef double[::1] c_const = np.ascontiguousarray(p_const, dtype=np.float64)
    cdef double[::1] c_slope = np.ascontiguousarray(slope, dtype=np.float64)
    cdef double[::1] c_pmax = np.ascontiguousarray(p_max, dtype=np.float64)
    cdef double[::1] c_sleep = np.ascontiguousarray(p_sleep, dtype=np.float64)
    cdef double c_phi = phi

    cdef Py_ssize_t n_pol = pol.shape[0]
    cdef Py_ssize_t n = pol.shape[1]
    if loads.shape[0] != n + 1 or caps.shape[0] != n + 1:
        raise ValueError("loads and capacities must cover all SBSs plus the HAPS")

    cost_arr = np.empty(n_pol, dtype=np.float64)
    power_arr = np.empty(n_pol, dtype=np.float64)
    feas_arr = np.empty(n_pol, dtype=np.uint8)
    pred_arr = np.empty((n_pol, n + 1), dtype=np.float64)
    uns_arr = np.empty(n_pol, dtype=np.float64)
    cdef double[::1] cost = cost_arr
    cdef double[::1] power = power_arr
    cdef unsigned char[::1] feas = feas_arr
    cdef double[:, ::1] pred_out = pred_arr
    cdef double[::1] uns = uns_arr

    cdef double[::1] pred = np.empty(n + 1, dtype=np.float64)
    cdef Py_ssize_t p, k, r_ix, j
    cdef long long r
    cdef double moving, room, mv, left_total, acc, rho
    cdef bint ok

    for p in range(n_pol):
        for j in range(n + 1):
            pred[j] = loads[j]
        left_total = 0.0
        for k in range(n):
            if pol[p, k]:
                continue
            moving = pred[k]
            pred[k] = 0.0
            if moving > 0.0:
                for r_ix in range(pr.shape[1]):
                    r = pr[k, r_ix]
                    if r != n and not pol[p, r]:
                        continue
                    room = caps[r] - pred[r]
                    if room > 0.0:
                        mv = moving if moving < room else room
                        pred[r] += mv
                        moving -= mv
                        if moving <= 0.0:
                            break
                left_total += moving
        ok = left_total <= 0.0
        acc = c_const[n] + c_slope[n] * (pred[n] / caps[n] if caps[n] > 0.0 else 0.0) * c_pmax[n]
        if pred[n] > caps[n] * (1.0 + CAP_SLACK):
            ok = False
        for k in range(n):
            if pol[p, k]:
                rho = pred[k] / caps[k] if caps[k] > 0.0 else 0.0
                acc += c_const[k] + c_slope[k] * rho * c_pmax[k]
            else:
                acc += c_sleep[k]
            if pred[k] > caps[k] * (1.0 + CAP_SLACK):
                ok = False
        power[p] = acc
        feas[p] = 1 if ok else 0
        cost[p] = acc if ok else c_phi
        for j in range(n + 1):
            pred_out[p, j] = pred[j]
        uns[p] = left_total
    return cost_arr, power_arr, feas_arr, pred_arr, uns_arr


def associate_ues(ranking, rx_ok, demands, caps, literal_top):
    """See ``_pykernels.associate_ues``; same contract, compiled."""
    cdef long long[:, ::1] rank = np.ascontiguousarray(ranking, dtype=np.int64)
    cdef unsigned char[:, ::1] ok = np.ascontiguousarray(rx_ok, dtype=np.uint8)
    cdef long long[::1] dem = np.ascontiguousarray(demands, dtype=np.int64)
    cdef bint literal = literal_top

    cdef Py_ssize_t n_ue = rank.shape[0]
    cdef Py_ssize_t width = rank.shape[1]
    residual_arr = np.asarray(caps, dtype=np.float64).copy()
    assign_arr = np.full(n_ue, -1, dtype=np.int64)
    cdef double[::1] residual = residual_arr
    cdef long long[::1] assign = assign_arr

    cdef Py_ssize_t i, r_ix, limit
    cdef long long j

    for i in range(n_ue):
        limit = 1 if literal else width
        if limit > width:
            limit = width
        for r_ix in range(limit):
            j = rank[i, r_ix]
            if not ok[i, j]:
                continue
            if residual[j] >= dem[i]:
                assign[i] = j
                residual[j] -= dem[i]
                break
    return assign_arr, residual_arr
