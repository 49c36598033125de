"""Pure-Python/NumPy kernels.

These mirror :mod:`trajseg._ext` exactly; the compiled module is preferred
at import time when present. Keep the two in lock-step: the test suite
asserts bitwise-identical outputs on random inputs.
"""

from __future__ import annotations

from collections import deque

import numpy as np


def local_extremes(v: np.ndarray):
    """Find local minima and maxima of a speed series under the plateau rule.

    A run of equal values counts as one extreme at its first index; the
    endpoints are extremes of their one-sided neighborhood. A constant
    series yields index 0 in both lists. Returns sorted int64 arrays
    (k_min, k_max).
    """
    v = np.asarray(v, dtype=float)
    n = len(v)
    change = np.empty(n, dtype=bool)
    change[0] = True
    np.not_equal(v[1:], v[:-1], out=change[1:])
    starts = np.flatnonzero(change)
    rv = v[starts]
    m = len(starts)
    if m == 1:
        zero = np.zeros(1, dtype=np.int64)
        return zero, zero.copy()
    lower_before = np.empty(m, dtype=bool)
    lower_before[0] = True
    np.less(rv[:-1], rv[1:], out=lower_before[1:])
    lower_after = np.empty(m, dtype=bool)
    lower_after[-1] = True
    np.less(rv[1:], rv[:-1], out=lower_after[:-1])
    is_max = lower_before & lower_after
    higher_before = np.empty(m, dtype=bool)
    higher_before[0] = True
    np.greater(rv[:-1], rv[1:], out=higher_before[1:])
    higher_after = np.empty(m, dtype=bool)
    higher_after[-1] = True
    np.greater(rv[1:], rv[:-1], out=higher_after[:-1])
    is_min = higher_before & higher_after
    return starts[is_min].astype(np.int64), starts[is_max].astype(np.int64)


def _next_extreme_qualifiers(v, k_from, k_to, threshold, drop):
    """Indices of k_from whose step to the next k_to extreme exceeds threshold.

    ``drop=True`` tests v[from] - v[next_to] (maxima opening a braking
    drop); ``drop=False`` tests v[next_to] - v[from] (minima opening a
    rise). Extremes with no following counterpart never qualify.
    """
    pos = np.searchsorted(k_to, k_from)
    ok = pos < len(k_to)
    delta = np.full(len(k_from), -np.inf)
    nxt = np.minimum(pos, len(k_to) - 1)
    if len(k_to):
        if drop:
            delta[ok] = v[k_from[ok]] - v[k_to[nxt[ok]]]
        else:
            delta[ok] = v[k_to[nxt[ok]]] - v[k_from[ok]]
    return delta > threshold


def drop_qualifiers(v, k_min, k_max, threshold):
    """Maxima whose drop to the next local minimum exceeds the threshold."""
    return _next_extreme_qualifiers(v, k_max, k_min, threshold, drop=True)


def rise_qualifiers(v, k_min, k_max, threshold):
    """Minima whose rise to the next local maximum exceeds the threshold."""
    return _next_extreme_qualifiers(v, k_min, k_max, threshold, drop=False)


def select_influential(v, k_min, k_max, threshold, zero_guard_literal):
    """Select influential (max, min) pairs delimiting road braking events.

    Sweeps candidate minima in order; a minimum is influential when a
    prior maximum after the previous influential minimum starts a
    qualifying drop, the minimum attains the lowest speed among minima
    that start a qualifying rise in its forward slice, and (under the
    literal zero guard) that lowest speed is nonzero. The paired maximum
    is the highest-speed maximum since the previous influential minimum
    (first index on ties). Returns (k_inf_min, k_inf_max) int64 arrays.
    """
    v = np.asarray(v, dtype=float)
    k_min = np.asarray(k_min, dtype=np.int64)
    k_max = np.asarray(k_max, dtype=np.int64)
    n_last = len(v) - 1
    q = k_max[drop_qualifiers(v, k_min, k_max, threshold)]
    r = k_min[rise_qualifiers(v, k_min, k_max, threshold)]
    rv = v[r]
    inf_min, inf_max = [], []
    prv = 0
    q_lo = 0          # first qualifying drop-max >= prv
    q_hi = 0          # first qualifying drop-max > current minimum
    r_lo = 0          # window pointers into r for the candidate slice
    r_hi = 0
    window = deque()  # indices into r, speeds non-decreasing front to back
    for n_i in k_min:
        while q_lo < len(q) and q[q_lo] < prv:
            q_lo += 1
        if not (q_lo < len(q) and q[q_lo] < n_i):
            continue
        while q_hi < len(q) and q[q_hi] <= n_i:
            q_hi += 1
        bound = q[q_hi] if q_hi < len(q) else n_last
        while r_hi < len(r) and r[r_hi] <= bound:
            while window and rv[window[-1]] >= rv[r_hi]:
                window.pop()
            window.append(r_hi)
            r_hi += 1
        while r_lo < len(r) and r[r_lo] < n_i:
            if window and window[0] == r_lo:
                window.popleft()
            r_lo += 1
        if not window:
            continue
        v_min = rv[window[0]]
        if v[n_i] > v_min:
            continue
        if zero_guard_literal and v_min == 0.0:
            continue
        a = np.searchsorted(k_max, prv, side="left")
        b = np.searchsorted(k_max, n_i, side="right")
        sl = k_max[a:b]
        inf_max.append(int(sl[np.argmax(v[sl])]))
        inf_min.append(int(n_i))
        prv = int(n_i)
    return (np.asarray(inf_min, dtype=np.int64),
            np.asarray(inf_max, dtype=np.int64))


RISK_NO_PV = 0
RISK_FADING = 1
RISK_CLOSING = 2
RISK_URGENT = 3
RISK_FORCED = 4
RISK_CRITICAL = 5


def risk_levels(v, gap, pv_speed, pv_length, t_critical, t_forced, t_urgent):
    """Per-sample collision risk codes from the TTC decision table.

    NaN gap/pv_speed means no preceding vehicle. ``pv_length`` is an
    array already resolved to the default where the channel was absent.
    """
    v = np.asarray(v, dtype=float)
    gap = np.asarray(gap, dtype=float)
    pv_speed = np.asarray(pv_speed, dtype=float)
    pv_length = np.asarray(pv_length, dtype=float)
    codes = np.zeros(len(v), dtype=np.int8)
    has = ~np.isnan(gap) & ~np.isnan(pv_speed)
    dv = v - pv_speed
    closing = has & (dv > 0)
    codes[has & ~closing] = RISK_FADING
    with np.errstate(divide="ignore", invalid="ignore"):
        ttc = (gap - pv_length) / dv
    codes[closing & (ttc >= t_urgent)] = RISK_CLOSING
    codes[closing & (ttc >= t_forced) & (ttc < t_urgent)] = RISK_URGENT
    codes[closing & (ttc >= t_critical) & (ttc < t_forced)] = RISK_FORCED
    codes[closing & (ttc < t_critical)] = RISK_CRITICAL
    return codes


def cut_in_candidates(t, v, gap, pv_speed, margin):
    """Sample indices where a preceding vehicle appears or the gap collapses.

    Returns (candidates, appeared) where ``appeared`` flags, per
    candidate, detection by PV appearance rather than by the kinematic
    gap test. Refractory merging is left to the caller.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    gap = np.asarray(gap, dtype=float)
    pv_speed = np.asarray(pv_speed, dtype=float)
    has = ~np.isnan(gap)
    appear = has[1:] & ~has[:-1]
    both = has[1:] & has[:-1]
    dt = np.diff(t)
    with np.errstate(invalid="ignore"):
        expected = gap[:-1] + (pv_speed[:-1] - v[:-1]) * dt - margin
        sudden = both & (gap[1:] < expected)
    hit = appear | sudden
    idx = np.flatnonzero(hit).astype(np.int64) + 1
    return idx, appear[idx - 1]
