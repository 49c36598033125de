# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; behavior mirrors trajseg._pure bit for bit."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def local_extremes(v):
    """Plateau-collapsed local minima/maxima; endpoints eligible."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t n = vv.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] starts = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rv = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t m = 0, k
    for k in range(n):
        if k == 0 or vv[k] != vv[k - 1]:
            starts[m] = k
            rv[m] = vv[k]
            m += 1
    cdef cnp.ndarray[cnp.int64_t, ndim=1] k_min = np.empty(m, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] k_max = np.empty(m, dtype=np.int64)
    cdef Py_ssize_t n_min = 0, n_max = 0, j
    cdef bint lo_before, lo_after, hi_before, hi_after
    if m == 1:
        k_min[0] = 0
        k_max[0] = 0
        return k_min[:1].copy(), k_max[:1].copy()
    for j in range(m):
        lo_before = j == 0 or rv[j - 1] < rv[j]
        lo_after = j == m - 1 or rv[j + 1] < rv[j]
        hi_before = j == 0 or rv[j - 1] > rv[j]
        hi_after = j == m - 1 or rv[j + 1] > rv[j]
        if lo_before and lo_after:
            k_max[n_max] = starts[j]
            n_max += 1
        if hi_before and hi_after:
            k_min[n_min] = starts[j]
            n_min += 1
    return k_min[:n_min].copy(), k_max[:n_max].copy()


def select_influential(v, k_min, k_max, double threshold, bint zero_guard_literal):
    """Influential (min, max) pair selection; see the pure twin for the spec."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] mins = np.ascontiguousarray(k_min, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] maxs = np.ascontiguousarray(k_max, dtype=np.int64)
    cdef Py_ssize_t n_min = mins.shape[0], n_max = maxs.shape[0]
    cdef Py_ssize_t n_last = vv.shape[0] - 1

    # qualifying drop maxima / rise minima (step to the next opposite extreme)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] q = np.empty(n_max, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] r = np.empty(n_min, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rval = np.empty(n_min, dtype=np.float64)
    cdef Py_ssize_t nq = 0, nr = 0, i, p
    p = 0
    for i in range(n_max):
        while p < n_min and mins[p] < maxs[i]:
            p += 1
        if p < n_min and vv[maxs[i]] - vv[mins[p]] > threshold:
            q[nq] = maxs[i]
            nq += 1
    p = 0
    for i in range(n_min):
        while p < n_max and maxs[p] < mins[i]:
            p += 1
        if p < n_max and vv[maxs[p]] - vv[mins[i]] > threshold:
            r[nr] = mins[i]
            rval[nr] = vv[mins[i]]
            nr += 1

    cdef cnp.ndarray[cnp.int64_t, ndim=1] out_min = np.empty(n_min, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out_max = np.empty(n_min, dtype=np.int64)
    cdef Py_ssize_t n_out = 0
    # monotonic window of indices into r, values non-decreasing front to back
    cdef cnp.ndarray[cnp.int64_t, ndim=1] window = np.empty(nr + 1, dtype=np.int64)
    cdef Py_ssize_t w_head = 0, w_tail = 0   # [w_head, w_tail)
    cdef Py_ssize_t prv = 0, q_lo = 0, q_hi = 0, r_lo = 0, r_hi = 0
    cdef Py_ssize_t n_i, bound, a, b, best
    cdef double v_min

    for i in range(n_min):
        n_i = mins[i]
        while q_lo < nq and q[q_lo] < prv:
            q_lo += 1
        if not (q_lo < nq and q[q_lo] < n_i):
            continue
        while q_hi < nq and q[q_hi] <= n_i:
            q_hi += 1
        bound = q[q_hi] if q_hi < nq else n_last
        while r_hi < nr and r[r_hi] <= bound:
            while w_tail > w_head and rval[window[w_tail - 1]] >= rval[r_hi]:
                w_tail -= 1
            window[w_tail] = r_hi
            w_tail += 1
            r_hi += 1
        while r_lo < nr and r[r_lo] < n_i:
            if w_tail > w_head and window[w_head] == r_lo:
                w_head += 1
            r_lo += 1
        if w_tail == w_head:
            continue
        v_min = rval[window[w_head]]
        if vv[n_i] > v_min:
            continue
        if zero_guard_literal and v_min == 0.0:
            continue
        a = np.searchsorted(maxs, prv, side="left")
        b = np.searchsorted(maxs, n_i, side="right")
        best = a
        for p in range(a + 1, b):
            if vv[maxs[p]] > vv[maxs[best]]:
                best = p
        out_max[n_out] = maxs[best]
        out_min[n_out] = n_i
        n_out += 1
        prv = n_i
    return out_min[:n_out].copy(), out_max[:n_out].copy()


def risk_levels(v, gap, pv_speed, pv_length,
                double t_critical, double t_forced, double t_urgent):
    """Per-sample collision risk codes; NaN gap/pv_speed means no PV."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = np.ascontiguousarray(gap, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pv = np.ascontiguousarray(pv_speed, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lp = np.ascontiguousarray(pv_length, dtype=np.float64)
    cdef Py_ssize_t n = vv.shape[0], k
    cdef cnp.ndarray[cnp.int8_t, ndim=1] codes = np.zeros(n, dtype=np.int8)
    cdef double dv, ttc
    for k in range(n):
        if g[k] != g[k] or pv[k] != pv[k]:
            continue
        dv = vv[k] - pv[k]
        if dv <= 0:
            codes[k] = 1
            continue
        ttc = (g[k] - lp[k]) / dv
        if ttc >= t_urgent:
            codes[k] = 2
        elif ttc >= t_forced:
            codes[k] = 3
        elif ttc >= t_critical:
            codes[k] = 4
        else:
            codes[k] = 5
    return codes
