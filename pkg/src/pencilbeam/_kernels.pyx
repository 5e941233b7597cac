# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops over (measurement spot, beam) pairs.

Each measurement spot is handled by exactly one thread and sums its beams in
array order, so results do not depend on the thread count.
"""

import numpy as np

from cython.parallel cimport prange
from libc.math cimport ceil, exp, fabs, M_PI, M_LN10


cdef inline double wrap_offset(double a) noexcept nogil:
    # same result as the ceil form; the branches cover offsets of angles in [0, 360)
    if a > 180.0:
        if a <= 540.0:
            return a - 360.0
    elif a > -180.0:
        return a
    elif a > -540.0:
        return a + 360.0
    return a - 360.0 * ceil((a - 180.0) / 360.0)


DEF BLOCK = 2048


def emf_accumulate(const double[:, ::1] m_steer, const double[:, ::1] m_tilt,
                   const double[:, ::1] m_d3sq, const long long[::1] b_sector,
                   const double[::1] b_steer, const double[::1] b_tilt,
                   const double[::1] b_wst, const double[::1] b_wtl,
                   double p_eirp, double az_floor, double el_floor, int threads=1):
    cdef Py_ssize_t n_m = m_steer.shape[1]
    cdef Py_ssize_t n_b = b_sector.shape[0]
    out_arr = np.zeros(n_m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t blk, lo, hi, m, b, s
    cdef Py_ssize_t n_blk = (n_m + BLOCK - 1) // BLOCK
    cdef double d_az, d_el, sa, se, bst, btl, c_az, c_el, g
    cdef double k = M_LN10 / 5.0
    cdef double scale = p_eirp / (4.0 * M_PI)
    # gain once both planes sit on their floors; equal to the general path bit for bit
    cdef double floored = exp(k * ((-az_floor) + (-el_floor)))
    if n_b == 0:
        return out_arr
    # Spots are split into blocks, one thread per block; inside a block every
    # spot still adds its beams in array order.
    for blk in prange(n_blk, nogil=True, schedule="static", num_threads=max(threads, 1)):
        lo = blk * BLOCK
        hi = min(lo + BLOCK, n_m)
        for b in range(n_b):
            s = b_sector[b]
            bst = b_steer[b]
            btl = b_tilt[b]
            c_az = 12.0 / (b_wst[b] * b_wst[b])
            c_el = 12.0 / (b_wtl[b] * b_wtl[b])
            for m in range(lo, hi):
                d_az = wrap_offset(m_steer[s, m] - bst)
                d_el = m_tilt[s, m] - btl
                sa = c_az * (d_az * d_az)
                se = c_el * (d_el * d_el)
                if sa >= az_floor and se >= el_floor:
                    g = floored
                else:
                    g = exp(k * (-(sa if sa < az_floor else az_floor)
                                 + -(se if se < el_floor else el_floor)))
                out[m] = out[m] + scale * g / m_d3sq[s, m]
    return out_arr


def overlap_counts(const double[:, ::1] m_steer, const double[:, ::1] m_tilt,
                   const double[:, ::1] m_d3sq, const long long[::1] b_sector,
                   const double[::1] b_steer, const double[::1] b_tilt,
                   const double[::1] b_wst, const double[::1] b_wtl,
                   const double[::1] b_reach, int threads=1):
    cdef Py_ssize_t n_m = m_steer.shape[1]
    cdef Py_ssize_t n_b = b_sector.shape[0]
    out_arr = np.zeros(n_m, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef Py_ssize_t m, b, s
    cdef long long count
    for m in prange(n_m, nogil=True, schedule="static", num_threads=max(threads, 1)):
        count = 0
        for b in range(n_b):
            s = b_sector[b]
            if fabs(wrap_offset(m_steer[s, m] - b_steer[b])) > 0.5 * b_wst[b]:
                continue
            if fabs(m_tilt[s, m] - b_tilt[b]) > 0.5 * b_wtl[b]:
                continue
            if m_d3sq[s, m] > b_reach[b] * b_reach[b]:
                continue
            count = count + 1
        out[m] = count
    return out_arr
