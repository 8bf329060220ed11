# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch kernels: tight per-draw loops over elements.

Semantics mirror _fallback exactly; inputs are trusted (validation happens in
the calling modules). Each draw builds the rotation and its three angle
derivatives, then walks the element grid accumulating values and, for the
chain kernel, the summed real/imaginary covariance entries.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt

cnp.import_array()

cdef double _C0 = 299792458.0
cdef double _PI = 3.141592653589793


cdef void _mat3_mul(double[3][3] a, double[3][3] b, double[3][3] out) noexcept nogil:
    cdef int i, j, k
    for i in range(3):
        for j in range(3):
            out[i][j] = 0.0
            for k in range(3):
                out[i][j] += a[i][k] * b[k][j]


cdef void _rot_and_derivs(double roll, double pitch, double yaw,
                          double[3][3] rot, double[3][3][3] drot) noexcept nogil:
    cdef double cx = cos(roll), sx = sin(roll)
    cdef double cy = cos(pitch), sy = sin(pitch)
    cdef double cz = cos(yaw), sz = sin(yaw)
    cdef double[3][3] rx, ry, rz, dx, dy, dz, tmp
    cdef int i, j
    for i in range(3):
        for j in range(3):
            rx[i][j] = ry[i][j] = rz[i][j] = 0.0
            dx[i][j] = dy[i][j] = dz[i][j] = 0.0
    rx[0][0] = 1.0; rx[1][1] = cx; rx[1][2] = -sx; rx[2][1] = sx; rx[2][2] = cx
    ry[0][0] = cy; ry[0][2] = sy; ry[1][1] = 1.0; ry[2][0] = -sy; ry[2][2] = cy
    rz[0][0] = cz; rz[0][1] = -sz; rz[1][0] = sz; rz[1][1] = cz; rz[2][2] = 1.0
    dx[1][1] = -sx; dx[1][2] = -cx; dx[2][1] = cx; dx[2][2] = -sx
    dy[0][0] = -sy; dy[0][2] = cy; dy[2][0] = -cy; dy[2][2] = -sy
    dz[0][0] = -sz; dz[0][1] = -cz; dz[1][0] = cz; dz[1][1] = -sz

    _mat3_mul(rz, ry, tmp)
    _mat3_mul(tmp, rx, rot)
    _mat3_mul(tmp, dx, drot[0])
    _mat3_mul(rz, dy, tmp)
    _mat3_mul(tmp, rx, drot[1])
    _mat3_mul(dz, ry, tmp)
    _mat3_mul(tmp, rx, drot[2])


def batch_amp_phase(p_tx, p_rx, p_c, offsets, double frequency, angles):
    """Cascaded amplitude and phase for every draw and element, each (N, M)."""
    cdef double[::1] tx = np.ascontiguousarray(p_tx, dtype=np.float64)
    cdef double[::1] rx_ = np.ascontiguousarray(p_rx, dtype=np.float64)
    cdef double[::1] pc = np.ascontiguousarray(p_c, dtype=np.float64)
    cdef double[:, ::1] off = np.ascontiguousarray(offsets, dtype=np.float64)
    cdef double[:, ::1] q = np.ascontiguousarray(angles, dtype=np.float64)
    cdef Py_ssize_t n = q.shape[0], m_count = off.shape[0]
    amps_arr = np.empty((n, m_count), dtype=np.float64)
    phases_arr = np.empty((n, m_count), dtype=np.float64)
    cdef double[:, ::1] amps = amps_arr
    cdef double[:, ::1] phases = phases_arr

    cdef double amp_num = _C0 * _C0 / ((4.0 * _PI * frequency) ** 2)
    cdef double k_p = 2.0 * _PI * frequency / _C0
    cdef double[3][3] rot
    cdef double[3][3][3] drot
    cdef double p0, p1, p2, v0, v1, v2, d_tx, d_rx
    cdef Py_ssize_t i, m
    for i in range(n):
        _rot_and_derivs(q[i, 0], q[i, 1], q[i, 2], rot, drot)
        for m in range(m_count):
            p0 = pc[0] + rot[0][0] * off[m, 0] + rot[0][1] * off[m, 1] + rot[0][2] * off[m, 2]
            p1 = pc[1] + rot[1][0] * off[m, 0] + rot[1][1] * off[m, 1] + rot[1][2] * off[m, 2]
            p2 = pc[2] + rot[2][0] * off[m, 0] + rot[2][1] * off[m, 1] + rot[2][2] * off[m, 2]
            v0 = p0 - tx[0]; v1 = p1 - tx[1]; v2 = p2 - tx[2]
            d_tx = sqrt(v0 * v0 + v1 * v1 + v2 * v2)
            v0 = p0 - rx_[0]; v1 = p1 - rx_[1]; v2 = p2 - rx_[2]
            d_rx = sqrt(v0 * v0 + v1 * v1 + v2 * v2)
            amps[i, m] = amp_num / (d_tx * d_rx)
            phases[i, m] = k_p * (d_tx + d_rx)
    return amps_arr, phases_arr


def batch_heff(p_tx, p_rx, p_c, offsets, double frequency, cfg_phases, angles):
    """Effective (ungained) channel value per draw, shape (N,)."""
    cdef double[::1] tx = np.ascontiguousarray(p_tx, dtype=np.float64)
    cdef double[::1] rx_ = np.ascontiguousarray(p_rx, dtype=np.float64)
    cdef double[::1] pc = np.ascontiguousarray(p_c, dtype=np.float64)
    cdef double[:, ::1] off = np.ascontiguousarray(offsets, dtype=np.float64)
    cdef double[:, ::1] q = np.ascontiguousarray(angles, dtype=np.float64)
    cdef Py_ssize_t n = q.shape[0], m_count = off.shape[0]
    cfg = np.asarray(cfg_phases, dtype=np.float64)
    cdef const double[:, :] cfg2 = np.broadcast_to(cfg, (n, m_count))
    out_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] out = out_arr

    cdef double amp_num = _C0 * _C0 / ((4.0 * _PI * frequency) ** 2)
    cdef double k_p = 2.0 * _PI * frequency / _C0
    cdef double[3][3] rot
    cdef double[3][3][3] drot
    cdef double p0, p1, p2, v0, v1, v2, d_tx, d_rx, amp, ang, acc_re, acc_im
    cdef Py_ssize_t i, m
    for i in range(n):
        _rot_and_derivs(q[i, 0], q[i, 1], q[i, 2], rot, drot)
        acc_re = 0.0
        acc_im = 0.0
        for m in range(m_count):
            p0 = pc[0] + rot[0][0] * off[m, 0] + rot[0][1] * off[m, 1] + rot[0][2] * off[m, 2]
            p1 = pc[1] + rot[1][0] * off[m, 0] + rot[1][1] * off[m, 1] + rot[1][2] * off[m, 2]
            p2 = pc[2] + rot[2][0] * off[m, 0] + rot[2][1] * off[m, 1] + rot[2][2] * off[m, 2]
            v0 = p0 - tx[0]; v1 = p1 - tx[1]; v2 = p2 - tx[2]
            d_tx = sqrt(v0 * v0 + v1 * v1 + v2 * v2)
            v0 = p0 - rx_[0]; v1 = p1 - rx_[1]; v2 = p2 - rx_[2]
            d_rx = sqrt(v0 * v0 + v1 * v1 + v2 * v2)
            amp = amp_num / (d_tx * d_rx)
            ang = k_p * (d_tx + d_rx) + cfg2[i, m]
            acc_re += amp * cos(ang)
            acc_im += amp * sin(ang)
        out[i] = acc_re + 1j * acc_im
    return out_arr


def batch_chain(p_tx, p_rx, p_c, offsets, double frequency, cfg_phases, angles, angle_vars):
    """Per-draw propagated totals: values (N,) plus u11/u12/u22 arrays (N,)."""
    cdef double[::1] tx = np.ascontiguousarray(p_tx, dtype=np.float64)
    cdef double[::1] rx_ = np.ascontiguousarray(p_rx, dtype=np.float64)
    cdef double[::1] pc = np.ascontiguousarray(p_c, dtype=np.float64)
    cdef double[:, ::1] off = np.ascontiguousarray(offsets, dtype=np.float64)
    cdef double[:, ::1] q = np.ascontiguousarray(angles, dtype=np.float64)
    cdef double[::1] qvar = np.ascontiguousarray(angle_vars, dtype=np.float64)
    cdef Py_ssize_t n = q.shape[0], m_count = off.shape[0]
    cfg = np.asarray(cfg_phases, dtype=np.float64)
    cdef const double[:, :] cfg2 = np.broadcast_to(cfg, (n, m_count))

    values_arr = np.empty(n, dtype=np.complex128)
    u11_arr = np.empty(n, dtype=np.float64)
    u12_arr = np.empty(n, dtype=np.float64)
    u22_arr = np.empty(n, dtype=np.float64)
    cdef double complex[::1] values = values_arr
    cdef double[::1] u11 = u11_arr
    cdef double[::1] u12 = u12_arr
    cdef double[::1] u22 = u22_arr

    cdef double amp_num = _C0 * _C0 / ((4.0 * _PI * frequency) ** 2)
    cdef double k_p = 2.0 * _PI * frequency / _C0
    cdef double[3][3] rot
    cdef double[3][3][3] drot
    cdef double p0, p1, p2, vt0, vt1, vt2, vr0, vr1, vr2, d_tx, d_rx
    cdef double do0, do1, do2, ct, cr
    cdef double var_tx, var_rx, cov_d, amp, phase, ang, s, c
    cdef double c_a_tx, c_a_rx, va, vp, cap, a2
    cdef double acc_re, acc_im, acc11, acc12, acc22
    cdef Py_ssize_t i, m, a
    for i in range(n):
        _rot_and_derivs(q[i, 0], q[i, 1], q[i, 2], rot, drot)
        acc_re = acc_im = acc11 = acc12 = acc22 = 0.0
        for m in range(m_count):
            p0 = pc[0] + rot[0][0] * off[m, 0] + rot[0][1] * off[m, 1] + rot[0][2] * off[m, 2]
            p1 = pc[1] + rot[1][0] * off[m, 0] + rot[1][1] * off[m, 1] + rot[1][2] * off[m, 2]
            p2 = pc[2] + rot[2][0] * off[m, 0] + rot[2][1] * off[m, 1] + rot[2][2] * off[m, 2]
            vt0 = p0 - tx[0]; vt1 = p1 - tx[1]; vt2 = p2 - tx[2]
            d_tx = sqrt(vt0 * vt0 + vt1 * vt1 + vt2 * vt2)
            vr0 = p0 - rx_[0]; vr1 = p1 - rx_[1]; vr2 = p2 - rx_[2]
            d_rx = sqrt(vr0 * vr0 + vr1 * vr1 + vr2 * vr2)

            var_tx = var_rx = cov_d = 0.0
            for a in range(3):
                do0 = drot[a][0][0] * off[m, 0] + drot[a][0][1] * off[m, 1] + drot[a][0][2] * off[m, 2]
                do1 = drot[a][1][0] * off[m, 0] + drot[a][1][1] * off[m, 1] + drot[a][1][2] * off[m, 2]
                do2 = drot[a][2][0] * off[m, 0] + drot[a][2][1] * off[m, 1] + drot[a][2][2] * off[m, 2]
                ct = (vt0 * do0 + vt1 * do1 + vt2 * do2) / d_tx
                cr = (vr0 * do0 + vr1 * do1 + vr2 * do2) / d_rx
                var_tx += ct * ct * qvar[a]
                var_rx += cr * cr * qvar[a]
                cov_d += ct * cr * qvar[a]

            amp = amp_num / (d_tx * d_rx)
            phase = k_p * (d_tx + d_rx)
            c_a_tx = -amp / d_tx
            c_a_rx = -amp / d_rx
            va = c_a_tx * c_a_tx * var_tx + c_a_rx * c_a_rx * var_rx + 2.0 * c_a_tx * c_a_rx * cov_d
            vp = k_p * k_p * (var_tx + var_rx + 2.0 * cov_d)
            cap = k_p * (c_a_tx * var_tx + c_a_rx * var_rx + (c_a_tx + c_a_rx) * cov_d)

            ang = phase + cfg2[i, m]
            s = sin(ang)
            c = cos(ang)
            a2 = amp * amp
            acc11 += c * c * va + a2 * s * s * vp - 2.0 * amp * s * c * cap
            acc22 += s * s * va + a2 * c * c * vp + 2.0 * amp * s * c * cap
            acc12 += s * c * va - a2 * s * c * vp + amp * (c * c - s * s) * cap
            acc_re += amp * c
            acc_im += amp * s
        values[i] = acc_re + 1j * acc_im
        u11[i] = acc11
        u12[i] = acc12
        u22[i] = acc22
    return values_arr, u11_arr, u12_arr, u22_arr
