"""Pure numpy versions of the compiled kernels.

Same signatures and the same per-spot summation order (beam by beam), so
results agree with the compiled build to rounding of ``exp``.
"""

import math

import numpy as np

from .geometry import wrap_offset


def emf_accumulate(m_steer, m_tilt, m_d3sq, b_sector, b_steer, b_tilt, b_wst, b_wtl,
                   p_eirp, az_floor, el_floor, threads=1):
    n_m = m_steer.shape[1]
    out = np.zeros(n_m)
    k = math.log(10.0) / 5.0
    scale = p_eirp / (4.0 * math.pi)
    for b in range(len(b_sector)):
        s = b_sector[b]
        q = wrap_offset(m_steer[s] - b_steer[b]) / b_wst[b]
        a_az = -np.minimum(12.0 * q * q, az_floor)
        q = (m_tilt[s] - b_tilt[b]) / b_wtl[b]
        a_el = -np.minimum(12.0 * q * q, el_floor)
        out += scale * np.exp(k * (a_az + a_el)) / m_d3sq[s]
    return out


def overlap_counts(m_steer, m_tilt, m_d3sq, b_sector, b_steer, b_tilt, b_wst, b_wtl,
                   b_reach, threads=1):
    n_m = m_steer.shape[1]
    out = np.zeros(n_m, dtype=np.int64)
    for b in range(len(b_sector)):
        s = b_sector[b]
        inside = np.abs(wrap_offset(m_steer[s] - b_steer[b])) <= 0.5 * b_wst[b]
        inside &= np.abs(m_tilt[s] - b_tilt[b]) <= 0.5 * b_wtl[b]
        inside &= m_d3sq[s] <= b_reach[b] * b_reach[b]
        out += inside
    return out
