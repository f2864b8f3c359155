"""Quaternion arithmetic, real and complexified.

Quaternions are stored as arrays of shape (..., 4) in (w, x, y, z) order.
Real unit quaternions represent rotations through q v q^{-1}; quaternions
with complex entries (biquaternions) realize SL(2,C) via

    M(w, v) = w*Id - i (v . sigma),

so the quaternion norm w^2 + |v|^2 equals det M and the hermitian conjugate
of M corresponds to (conj(w), -conj(v)).
"""

import numpy as np


def qmul(a, b):
    """Hamilton product, broadcasting over leading axes."""
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


def qconj(q):
    out = np.array(q, copy=True)
    out[..., 1:] = -out[..., 1:]
    return out


def qdet(q):
    """w^2 + |v|^2; the determinant of the associated 2x2 matrix."""
    return np.sum(q * q, axis=-1)


def qinv(q):
    return qconj(q) / qdet(q)[..., None]


def qvec(v):
    """Pure quaternion (0, v) from 3-vectors of shape (..., 3)."""
    out = np.zeros(v.shape[:-1] + (4,), dtype=np.result_type(v, float))
    out[..., 1:] = v
    return out


def qrotate(q, v):
    """Apply the rotation of the unit quaternion q to 3-vectors v."""
    u = q[..., 1:]
    w = q[..., 0:1]
    t = 2.0 * np.cross(u, v)
    return v + w * t + np.cross(u, t)


def rotation_matrix(q):
    """3x3 rotation matrix of a unit quaternion."""
    return qrotate(q[..., None, :], np.eye(3)).swapaxes(-1, -2)


def quat_from_axis_angle(axis, angle):
    axis = np.asarray(axis, dtype=float)
    half = 0.5 * angle
    return np.concatenate([np.atleast_1d(np.cos(half)),
                           np.sin(half) * axis])


def axis_angle_from_quat(q):
    """Principal (axis, angle) with angle in [0, pi]; axis e_z if identity."""
    w = np.clip(q[0], -1.0, 1.0) if np.isrealobj(q) else q[0]
    s = np.linalg.norm(q[1:])
    angle = 2.0 * np.arctan2(s, w)
    if s < 1e-14:
        return np.array([0.0, 0.0, 1.0]), 0.0 if w > 0 else angle
    return q[1:] / s, angle


def _cos_sinc(theta_sq):
    """cos(theta) and sin(theta)/theta as even functions of theta^2."""
    theta = np.sqrt(theta_sq.astype(complex)) if np.iscomplexobj(theta_sq) \
        else np.sqrt(np.maximum(theta_sq, 0.0))
    small = np.abs(theta_sq) < 1e-12
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.cos(theta)
        s = np.where(small, 1.0 - theta_sq / 6.0, np.sin(theta) / np.where(small, 1.0, theta))
    c = np.where(small, 1.0 - theta_sq / 2.0 + theta_sq ** 2 / 24.0, c)
    return c, s


def qexp_vec(v):
    """exp of the pure quaternion (0, v); works for complex v."""
    v = np.asarray(v)
    theta_sq = np.sum(v * v, axis=-1)
    c, s = _cos_sinc(theta_sq)
    out = np.empty(v.shape[:-1] + (4,), dtype=np.result_type(v, c))
    out[..., 0] = c
    out[..., 1:] = s[..., None] * v
    return out


def dqexp_vec(v, vdot):
    """Pair (exp(0,v), d/dt exp(0,v)) given v and its derivative vdot."""
    v = np.asarray(v)
    vdot = np.asarray(vdot)
    theta_sq = np.sum(v * v, axis=-1)
    dots = np.sum(v * vdot, axis=-1)
    c, s = _cos_sinc(theta_sq)
    # g = (cos t - sinc t)/t^2, even entire function
    small = np.abs(theta_sq) < 1e-10
    safe = np.where(small, 1.0, theta_sq)
    g = np.where(small, -1.0 / 3.0 + theta_sq / 30.0, (c - s) / safe)
    e = np.empty(v.shape[:-1] + (4,), dtype=np.result_type(v, c))
    e[..., 0] = c
    e[..., 1:] = s[..., None] * v
    de = np.empty_like(e)
    de[..., 0] = -s * dots
    de[..., 1:] = s[..., None] * vdot + (g * dots)[..., None] * v
    return e, de


def qnormalize(q):
    """Project onto det = 1: divide by the principal sqrt of w^2 + |v|^2."""
    d = qdet(q)
    return q / np.sqrt(d)[..., None]


def hconj(q):
    """Hermitian conjugate in the biquaternion picture."""
    out = np.conj(q)
    out[..., 1:] = -out[..., 1:]
    return out


def as_matrix(q):
    """2x2 complex matrix w*Id - i (v . sigma)."""
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    m = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    m[..., 0, 0] = w - 1j * z
    m[..., 0, 1] = -1j * x - y
    m[..., 1, 0] = -1j * x + y
    m[..., 1, 1] = w + 1j * z
    return m
