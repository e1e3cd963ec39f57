"""Compiled hot paths: line sampling, interval union-find, event evaluation.

Storage convention shared by every kernel: arrivals are kept in CSR form,
``times[off[k]:off[k + 1]]`` sorted ascending for line ``k``.  The death-free
intervals of vertex ``v`` are numbered ``base[v] .. base[v] + n_deaths(v)``
with ``base[v] = d_off[v] + v``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, uint64

from ._philox import philox_block, to_unit

EV_CONNECT = 0
EV_BOUNDARY = 1
EV_CROSSING = 2

FACE_LOWER = 1
FACE_UPPER = 2
FACE_HORIZONTAL = 4


@njit(cache=True)
def sample_lines(k0, k1, ids, rates, t_lo, t_hi):
    """Homogeneous Poisson arrivals on each line over the open window (t_lo, t_hi).

    Gaps are ``-log(1 - u) / rate``; a draw that would not strictly advance the
    time (u == 0, or lost to rounding) is discarded and the next one used.
    """
    n_lines = rates.shape[0]
    width = t_hi - t_lo
    expect = 0.0
    for k in range(n_lines):
        if width > 0.0 and rates[k] > 0.0:
            expect += rates[k] * width
    cap = int(expect + 10.0 * math.sqrt(expect) + 16.0 * n_lines + 16.0)
    times = np.empty(cap, dtype=np.float64)
    off = np.zeros(n_lines + 1, dtype=np.int64)
    n = 0
    zero = uint64(0)
    for k in range(n_lines):
        rate = rates[k]
        if width > 0.0 and rate > 0.0:
            t = t_lo
            block = uint64(0)
            pos = 4
            w0 = w1 = w2 = w3 = zero
            while True:
                if pos == 4:
                    block += uint64(1)
                    w0, w1, w2, w3 = philox_block(block, zero, ids[k, 0], ids[k, 1], k0, k1)
                    pos = 0
                if pos == 0:
                    word = w0
                elif pos == 1:
                    word = w1
                elif pos == 2:
                    word = w2
                else:
                    word = w3
                pos += 1
                u = to_unit(word)
                t_new = t - math.log1p(-u) / rate
                if t_new <= t:
                    continue
                if t_new >= t_hi:
                    break
                if n == times.shape[0]:
                    grown = np.empty(2 * times.shape[0], dtype=np.float64)
                    grown[:n] = times[:n]
                    times = grown
                times[n] = t_new
                n += 1
                t = t_new
        off[k + 1] = n
    return times[:n].copy(), off


@njit(cache=True)
def count_below(times, lo, hi, t):
    """Number of entries of times[lo:hi] strictly below t."""
    a, b = lo, hi
    while a < b:
        m = (a + b) >> 1
        if times[m] < t:
            a = m + 1
        else:
            b = m
    return a - lo


@njit(cache=True)
def count_at_most(times, lo, hi, t):
    a, b = lo, hi
    while a < b:
        m = (a + b) >> 1
        if times[m] <= t:
            a = m + 1
        else:
            b = m
    return a - lo


@njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True)
def build_forest(d_times, d_off, b_times, b_off, e_lo, e_hi, active, w_lo, w_hi):
    """Union death-free intervals along every bond inside the mask.

    Returns the fully compressed root array and the number of successful
    unions.
    """
    n_v = d_off.shape[0] - 1
    n_int = d_off[n_v] + n_v
    parent = np.arange(n_int)
    size = np.ones(n_int, dtype=np.int64)
    unions = 0
    for e in range(e_lo.shape[0]):
        x = e_lo[e]
        y = e_hi[e]
        if not (active[x] and active[y]):
            continue
        bx = d_off[x] + x
        by = d_off[y] + y
        for j in range(b_off[e], b_off[e + 1]):
            t = b_times[j]
            if t <= w_lo or t >= w_hi:
                continue
            i1 = bx + count_below(d_times, d_off[x], d_off[x + 1], t)
            i2 = by + count_below(d_times, d_off[y], d_off[y + 1], t)
            r1 = _find(parent, i1)
            r2 = _find(parent, i2)
            if r1 != r2:
                if size[r1] < size[r2]:
                    r1, r2 = r2, r1
                parent[r2] = r1
                size[r1] += size[r2]
                unions += 1
    for i in range(n_int):
        parent[i] = _find(parent, i)
    return parent, unions


@njit(cache=True)
def locate(d_times, d_off, v, t):
    """Interval index holding (v, t), or -1 when t is a death time on v."""
    k = count_below(d_times, d_off[v], d_off[v + 1], t)
    j = d_off[v] + k
    if j < d_off[v + 1] and d_times[j] == t:
        return -1
    return d_off[v] + v + k


@njit(cache=True)
def lower_interval(d_times, d_off, v, w_lo):
    return d_off[v] + v + count_at_most(d_times, d_off[v], d_off[v + 1], w_lo)


@njit(cache=True)
def upper_interval(d_times, d_off, v, w_hi):
    return d_off[v] + v + count_below(d_times, d_off[v], d_off[v + 1], w_hi)


@njit(cache=True)
def query_root(roots, d_times, d_off, active, w_lo, w_hi, v, t):
    if not active[v] or t <= w_lo or t >= w_hi:
        return -1
    i = locate(d_times, d_off, v, t)
    if i < 0:
        return -1
    return roots[i]


@njit(cache=True)
def boundary_hit_root(roots, d_times, d_off, active, w_lo, w_hi, on_face, r, faces):
    n_v = d_off.shape[0] - 1
    for v in range(n_v):
        if not active[v]:
            continue
        if faces & FACE_LOWER and roots[lower_interval(d_times, d_off, v, w_lo)] == r:
            return True
        if faces & FACE_UPPER and roots[upper_interval(d_times, d_off, v, w_hi)] == r:
            return True
        if faces & FACE_HORIZONTAL and on_face[v]:
            base = d_off[v] + v
            for i in range(base, base + d_off[v + 1] - d_off[v] + 1):
                if roots[i] == r:
                    return True
    return False


@njit(cache=True)
def vertical_crossing(roots, d_times, d_off, active, w_lo, w_hi, stamp, mark):
    """Does some cluster meet both the lower and the upper time face?"""
    n_v = d_off.shape[0] - 1
    for v in range(n_v):
        if active[v]:
            mark[roots[lower_interval(d_times, d_off, v, w_lo)]] = stamp
    for v in range(n_v):
        if active[v] and mark[roots[upper_interval(d_times, d_off, v, w_hi)]] == stamp:
            return True
    return False


@njit(cache=True)
def q_value(roots, d_times, d_off, t_lo, t_hi, r, bd_inner, bd_rate, faces):
    """Boundary-flux statistic of the cluster with root r (unmasked box)."""
    n_v = d_off.shape[0] - 1
    q = 0.0
    if faces & FACE_HORIZONTAL:
        for k in range(bd_inner.shape[0]):
            v = bd_inner[k]
            base = d_off[v] + v
            n_d = d_off[v + 1] - d_off[v]
            alive = 0.0
            for j in range(n_d + 1):
                if roots[base + j] == r:
                    lo = t_lo if j == 0 else d_times[d_off[v] + j - 1]
                    hi = t_hi if j == n_d else d_times[d_off[v] + j]
                    alive += hi - lo
            q += bd_rate[k] * alive
    for v in range(n_v):
        if faces & FACE_LOWER and roots[d_off[v] + v] == r:
            q += 1.0
        if faces & FACE_UPPER and roots[d_off[v + 1] + v] == r:
            q += 1.0
    return q


@njit(cache=True)
def run_events(k0, trial0, n_trials, ids_v, ids_e, death_rates, bond_rates, t_lo, t_hi,
               e_lo, e_hi, on_face, mask_active, mask_lo, mask_hi,
               ev_type, ev_mask, ev_av, ev_at, ev_bv, ev_bt, ev_faces):
    """Outcome matrix (trial, event) of monotone events over consecutive trials."""
    n_ev = ev_type.shape[0]
    n_masks = mask_active.shape[0]
    out = np.zeros((n_trials, n_ev), dtype=np.uint8)
    for s in range(n_trials):
        k1 = uint64(trial0) + uint64(s)
        d_times, d_off = sample_lines(k0, k1, ids_v, death_rates, t_lo, t_hi)
        b_times, b_off = sample_lines(k0, k1, ids_e, bond_rates, t_lo, t_hi)
        d_times, d_off, b_times, b_off = drop_coincident_bonds(d_times, d_off, b_times, b_off, e_lo, e_hi)
        n_int = d_off[d_off.shape[0] - 1] + d_off.shape[0] - 1
        mark = np.zeros(n_int, dtype=np.int64)
        for m in range(n_masks):
            active = mask_active[m]
            w_lo = mask_lo[m]
            w_hi = mask_hi[m]
            roots, _ = build_forest(d_times, d_off, b_times, b_off, e_lo, e_hi, active, w_lo, w_hi)
            for e in range(n_ev):
                if ev_mask[e] != m:
                    continue
                kind = ev_type[e]
                hit = False
                if kind == EV_CROSSING:
                    hit = vertical_crossing(roots, d_times, d_off, active, w_lo, w_hi, e + 1 + n_ev * m, mark)
                else:
                    ra = query_root(roots, d_times, d_off, active, w_lo, w_hi, ev_av[e], ev_at[e])
                    if ra >= 0:
                        if kind == EV_CONNECT:
                            rb = query_root(roots, d_times, d_off, active, w_lo, w_hi, ev_bv[e], ev_bt[e])
                            hit = rb == ra
                        else:
                            hit = boundary_hit_root(roots, d_times, d_off, active, w_lo, w_hi,
                                                    on_face, ra, ev_faces[e])
                if hit:
                    out[s, e] = 1
    return out


@njit(cache=True)
def run_q(k0, trial0, n_trials, ids_v, ids_e, death_rates, bond_rates, t_lo, t_hi,
          e_lo, e_hi, av, at, bd_inner, bd_rate, faces):
    out = np.zeros(n_trials, dtype=np.float64)
    active = np.ones(ids_v.shape[0], dtype=np.bool_)
    for s in range(n_trials):
        k1 = uint64(trial0) + uint64(s)
        d_times, d_off = sample_lines(k0, k1, ids_v, death_rates, t_lo, t_hi)
        b_times, b_off = sample_lines(k0, k1, ids_e, bond_rates, t_lo, t_hi)
        d_times, d_off, b_times, b_off = drop_coincident_bonds(d_times, d_off, b_times, b_off, e_lo, e_hi)
        roots, _ = build_forest(d_times, d_off, b_times, b_off, e_lo, e_hi, active, t_lo, t_hi)
        i = locate(d_times, d_off, av, at)
        if i >= 0:
            out[s] = q_value(roots, d_times, d_off, t_lo, t_hi, roots[i], bd_inner, bd_rate, faces)
    return out


@njit(cache=True)
def drop_coincident_bonds(d_times, d_off, b_times, b_off, e_lo, e_hi):
    """Remove bonds whose time equals a death time on an endpoint line.

    Such coincidences have probability zero; they are resolved by discarding
    the bond arrival so the interval containing the bond is well defined.
    """
    n_e = e_lo.shape[0]
    keep = np.ones(b_times.shape[0], dtype=np.bool_)
    dropped = 0
    for e in range(n_e):
        x = e_lo[e]
        y = e_hi[e]
        for j in range(b_off[e], b_off[e + 1]):
            t = b_times[j]
            if locate(d_times, d_off, x, t) < 0 or locate(d_times, d_off, y, t) < 0:
                keep[j] = False
                dropped += 1
    if dropped == 0:
        return d_times, d_off, b_times, b_off
    new_off = np.zeros_like(b_off)
    new_times = np.empty(b_times.shape[0] - dropped, dtype=np.float64)
    n = 0
    for e in range(n_e):
        for j in range(b_off[e], b_off[e + 1]):
            if keep[j]:
                new_times[n] = b_times[j]
                n += 1
        new_off[e + 1] = n
    return d_times, d_off, new_times, new_off
