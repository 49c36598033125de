"""Naive reference implementations used as independent oracles.

Everything here favors direct transcription over speed: per-index
neighbor scans, slices recomputed from scratch each step, no shared
state with the production code. The fidelity tests require exact
agreement between these and the optimized implementations.
"""

from __future__ import annotations

import math

from trajseg.model import ScenarioType


def reference_local_extremes(v):
    """Brute-force extreme finder: plateau-collapsed neighbor comparison."""
    n = len(v)
    runs = []  # (first_index, value)
    for k in range(n):
        if k == 0 or v[k] != v[k - 1]:
            runs.append((k, v[k]))
    k_min, k_max = [], []
    for j, (start, val) in enumerate(runs):
        left = runs[j - 1][1] if j > 0 else None
        right = runs[j + 1][1] if j + 1 < len(runs) else None
        if (left is None or left < val) and (right is None or right < val):
            k_max.append(start)
        if (left is None or left > val) and (right is None or right > val):
            k_min.append(start)
    return k_min, k_max


def _first_greater(sorted_list, x):
    for y in sorted_list:
        if y > x:
            return y
    return None


def reference_select_influential(v, k_min, k_max, threshold, zero_guard_literal):
    """Direct transcription of the influential-extreme selection sweep."""
    k_min = [int(k) for k in k_min]
    k_max = [int(k) for k in k_max]
    n_last = len(v) - 1

    def drop_exceeds(m):
        nxt = _first_greater(k_min, m)
        return nxt is not None and v[m] - v[nxt] > threshold

    def rise_exceeds(n):
        nxt = _first_greater(k_max, n)
        return nxt is not None and v[nxt] - v[n] > threshold

    inf_min, inf_max = [], []
    prv = 0
    for n_i in k_min:
        slc = [m for m in k_max if prv <= m <= n_last and drop_exceeds(m)]
        if not any(m < n_i for m in slc):
            continue
        later = [m for m in slc if m > n_i]
        bound = min(later) if later else n_last
        cand = [n for n in k_min if n_i <= n <= bound and rise_exceeds(n)]
        if not cand:
            continue
        v_min = min(v[n] for n in cand)
        if not (v[n_i] <= v_min):
            continue
        if zero_guard_literal and v_min == 0:
            continue
        window = [m for m in k_max if prv <= m <= n_i]
        best = window[0]
        for m in window[1:]:
            if v[m] > v[best]:
                best = m
        inf_min.append(n_i)
        inf_max.append(best)
        prv = n_i
    return inf_min, inf_max


def reference_slice_and_dice(v, t, k_min, k_max, inf_min, inf_max,
                             threshold, merge_gap_s):
    """Direct transcription of the slice-and-dice emission loops."""
    k_min = [int(k) for k in k_min]
    k_max = [int(k) for k in k_max]
    n_last = len(v) - 1

    def drop_exceeds(m):
        nxt = _first_greater(k_min, m)
        return nxt is not None and v[m] - v[nxt] > threshold

    def rise_exceeds(n):
        nxt = _first_greater(k_max, n)
        return nxt is not None and v[nxt] - v[n] > threshold

    out = []
    for i in range(len(inf_min)):
        im, imn = int(inf_max[i]), int(inf_min[i])
        brk = [m for m in k_max if im <= m <= imn and drop_exceeds(m)]
        kf_slc = None
        for j, m in enumerate(brk):
            landing = _first_greater(k_min, m)
            if j + 1 < len(brk) and t[brk[j + 1]] - t[landing] > merge_gap_s:
                out.append((m, landing, ScenarioType.B))
                kf_slc = landing
        if kf_slc is not None:
            after = [m for m in brk if m > kf_slc]
            k0 = after[0] if after else im
        else:
            k0 = brk[0] if brk else im
        label = ScenarioType.BSNA if v[imn] == 0 else ScenarioType.BNA
        hi = int(inf_max[i + 1]) if i + 1 < len(inf_max) else n_last
        acc = [n for n in k_min if imn <= n <= hi and rise_exceeds(n)]
        kf_slc = None
        for j, n in enumerate(acc):
            peak = _first_greater(k_max, n)
            if j + 1 < len(acc) and t[acc[j + 1]] - t[peak] > merge_gap_s:
                kf_slc = peak
                if j > 0:
                    out.append((n, peak, ScenarioType.A))
                else:
                    out.append((k0, peak, label))
        if kf_slc is None:
            anchor = acc[-1] if acc else imn
            peak = _first_greater(k_max, anchor)
            out.append((k0, peak if peak is not None else n_last, label))
    return out


def reference_box_summary(values):
    """Full-sort boxplot summary: interpolated quartiles, Tukey whiskers."""
    data = sorted(float(x) for x in values)
    n = len(data)

    def quantile(p):
        h = (n - 1) * p
        lo = math.floor(h)
        hi = math.ceil(h)
        return data[lo] + (data[hi] - data[lo]) * (h - lo)

    q1, med, q3 = quantile(0.25), quantile(0.5), quantile(0.75)
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    wlo = min(x for x in data if x >= lo_fence)
    whi = max(x for x in data if x <= hi_fence)
    return n, med, q1, q3, wlo, whi


def reference_risk_level(v, gap, pv_speed, pv_length,
                         t_critical=1.0, t_forced=3.0, t_urgent=5.5):
    """Brute-force decision table over the published TTC inequalities."""
    if gap is None or pv_speed is None:
        return "NoPV"
    if v - pv_speed <= 0:
        return "FadingAway"
    ttc = (gap - pv_length) / (v - pv_speed)
    if ttc >= t_urgent:
        return "ClosingIn"
    if t_forced <= ttc < t_urgent:
        return "Urgent"
    if t_critical <= ttc < t_forced:
        return "Forced"
    return "Critical"
