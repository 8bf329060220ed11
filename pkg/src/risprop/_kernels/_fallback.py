"""Vectorized numpy implementations of the batch kernels.

Used when the compiled extension is unavailable or disabled. Signatures and
results match risprop._kernels._core; the parity is covered by tests.
"""

import numpy as np

_C0 = 299_792_458.0


def _rotations(angles):
    """Stacked rotations and their three angle derivatives for (N, 3) angles."""
    roll, pitch, yaw = angles[:, 0], angles[:, 1], angles[:, 2]
    cx, sx = np.cos(roll), np.sin(roll)
    cy, sy = np.cos(pitch), np.sin(pitch)
    cz, sz = np.cos(yaw), np.sin(yaw)
    n = angles.shape[0]
    zero = np.zeros(n)
    one = np.ones(n)

    def mat(rows):
        return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)

    rx = mat([[one, zero, zero], [zero, cx, -sx], [zero, sx, cx]])
    ry = mat([[cy, zero, sy], [zero, one, zero], [-sy, zero, cy]])
    rz = mat([[cz, -sz, zero], [sz, cz, zero], [zero, zero, one]])
    drx = mat([[zero, zero, zero], [zero, -sx, -cx], [zero, cx, -sx]])
    dry = mat([[-sy, zero, cy], [zero, zero, zero], [-cy, zero, -sy]])
    drz = mat([[-sz, -cz, zero], [cz, -sz, zero], [zero, zero, zero]])
    rot = rz @ ry @ rx
    d_rot = np.stack([rz @ ry @ drx, rz @ dry @ rx, drz @ ry @ rx])
    return rot, d_rot


def batch_amp_phase(p_tx, p_rx, p_c, offsets, frequency, angles):
    """Cascaded amplitude and phase for every draw and element, each (N, M)."""
    angles = np.asarray(angles, dtype=float)
    rot, _ = _rotations(angles)
    p = np.asarray(p_c) + np.einsum("nij,mj->nmi", rot, np.asarray(offsets))
    d_tx = np.linalg.norm(p - np.asarray(p_tx), axis=2)
    d_rx = np.linalg.norm(p - np.asarray(p_rx), axis=2)
    amps = _C0**2 / ((4.0 * np.pi * frequency) ** 2 * d_tx * d_rx)
    phases = 2.0 * np.pi * frequency / _C0 * (d_tx + d_rx)
    return amps, phases


def batch_heff(p_tx, p_rx, p_c, offsets, frequency, cfg_phases, angles):
    """Effective (ungained) channel value per draw, shape (N,).

    cfg_phases is (M,) shared across draws or (N, M) per draw.
    """
    amps, phases = batch_amp_phase(p_tx, p_rx, p_c, offsets, frequency, angles)
    shifted = phases + np.atleast_2d(np.asarray(cfg_phases, dtype=float))
    return np.sum(amps * np.exp(1j * shifted), axis=1)


def batch_chain(p_tx, p_rx, p_c, offsets, frequency, cfg_phases, angles, angle_vars):
    """Per-draw propagated totals: values (N,) and covariance entries (N,) each.

    One draw runs the whole first-order chain: distance sensitivities,
    distance moments, polar moments, per-element real/imaginary covariance at
    the shifted phase, then the independent sum over elements.
    """
    angles = np.asarray(angles, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    qvar = np.asarray(angle_vars, dtype=float)
    rot, d_rot = _rotations(angles)
    p = np.asarray(p_c) + np.einsum("nij,mj->nmi", rot, offsets)
    d_off = np.einsum("anij,mj->anmi", d_rot, offsets)

    v_tx = p - np.asarray(p_tx)
    v_rx = p - np.asarray(p_rx)
    d_tx = np.linalg.norm(v_tx, axis=2)
    d_rx = np.linalg.norm(v_rx, axis=2)
    c_tx = np.einsum("nmi,anmi->nma", v_tx / d_tx[..., None], d_off)
    c_rx = np.einsum("nmi,anmi->nma", v_rx / d_rx[..., None], d_off)

    var_tx = (c_tx * c_tx) @ qvar
    var_rx = (c_rx * c_rx) @ qvar
    cov_d = (c_tx * c_rx) @ qvar

    amps = _C0**2 / ((4.0 * np.pi * frequency) ** 2 * d_tx * d_rx)
    k_p = 2.0 * np.pi * frequency / _C0
    phases = k_p * (d_tx + d_rx)
    c_a_tx = -amps / d_tx
    c_a_rx = -amps / d_rx
    va = c_a_tx**2 * var_tx + c_a_rx**2 * var_rx + 2.0 * c_a_tx * c_a_rx * cov_d
    vp = k_p * k_p * (var_tx + var_rx + 2.0 * cov_d)
    cap = k_p * (c_a_tx * var_tx + c_a_rx * var_rx + (c_a_tx + c_a_rx) * cov_d)

    ang = phases + np.asarray(cfg_phases, dtype=float)
    s, c = np.sin(ang), np.cos(ang)
    a2 = amps * amps
    u11 = np.sum(c * c * va + a2 * s * s * vp - 2.0 * amps * s * c * cap, axis=1)
    u22 = np.sum(s * s * va + a2 * c * c * vp + 2.0 * amps * s * c * cap, axis=1)
    u12 = np.sum(s * c * va - a2 * s * c * vp + amps * (c * c - s * s) * cap, axis=1)
    values = np.sum(amps * np.exp(1j * ang), axis=1)
    return values, u11, u12, u22
