"""Variational gradients G_k and symplectic fields Y_k.

The symplectic hierarchy is generated by Y_0 = T and

    Y_{k+1} = T x Y_k' - (1/2) sum_{i=1}^{k} (Y_i, Y_{k-i+1}) T,

whose tangential part fixes the constant of integration to zero.  Explicit
low-order gradients (G_{-2} .. G_3) are implemented independently as a
cross-check; for k >= 0 the two are related by G_k = T x Y_k.
"""

from dataclasses import dataclass

import numpy as np

from .curves import ddx, deriv
from .errors import ArgumentError, MonodromyCompatibilityError, RangeError

MAX_K_DEFAULT = 8


def check_axis(curve, axis, tol=1e-8):
    """Validate that axis is a unit eigenvector of the monodromy rotation."""
    v = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-6:
        raise ArgumentError("axis vector must be unit length")
    v = v / np.linalg.norm(v)
    if np.linalg.norm(curve.monodromy.apply_vector(v) - v) > tol:
        raise MonodromyCompatibilityError(
            "axis is not fixed by the monodromy rotation")
    return v


def symplectic_Y_list(curve, kmax, dtype=None):
    """[Y_0, ..., Y_kmax] as (n, 3) arrays.

    High k stacks many difference stencils; passing dtype=numpy.longdouble
    keeps the cancellation error below the discretization error there.
    """
    t = deriv(curve, 1, dtype=dtype)
    ys = [t]
    for k in range(kmax):
        yp = ddx(ys[k], curve)
        nxt = np.cross(t, yp)
        if k >= 1:
            f = np.zeros(curve.n, dtype=t.dtype)
            for i in range(1, k + 1):
                f += np.sum(ys[i] * ys[k - i + 1], axis=1)
            nxt -= 0.5 * f[:, None] * t
        ys.append(nxt)
    return ys


def symplectic_Y(k, curve):
    if k < 0:
        raise RangeError("symplectic_Y requires k >= 0")
    return symplectic_Y_list(curve, k)[k]


def gradient_G(k, curve, axis=None):
    """Explicit low-order variational gradients.

    G_{-2} = gamma' x (v x gamma), G_{-1} = gamma' x v, G_0 = 0,
    G_1 = -gamma'', G_2 = -gamma' x gamma''',
    G_3 = (gamma''' + (3/2)|gamma''|^2 gamma')'.
    """
    if k < -2 or k > 3:
        raise RangeError("gradient_G implements k in [-2, 3]; "
                         "use gradient_from_Y for k >= 0")
    if k in (-2, -1):
        if axis is None:
            raise ArgumentError("k in {-2,-1} requires an axis vector")
        v = check_axis(curve, axis)
    if k == 0:
        return np.zeros((curve.n, 3))
    d1 = deriv(curve, 1)
    if k == -2:
        return np.cross(d1, np.cross(v, curve.samples))
    if k == -1:
        return np.cross(d1, np.broadcast_to(v, d1.shape))
    d2 = ddx(d1, curve)
    if k == 1:
        return -d2
    d3 = ddx(d2, curve)
    if k == 2:
        return -np.cross(d1, d3)
    k2 = np.sum(d2 * d2, axis=1)
    return ddx(d3 + 1.5 * k2[:, None] * d1, curve)


def gradient_from_Y(k, curve, dtype=None):
    """G_k = T x Y_k for k >= 0."""
    ys = symplectic_Y_list(curve, k, dtype=dtype)
    return np.cross(ys[0], ys[k]).astype(float)


def recursion_residual(k, curve, dtype=np.longdouble):
    """L2 norm of Y_k' + T x Y_{k+1} over the fundamental domain.

    Evaluated in extended precision by default: at k around 5 the identity
    involves seven stacked derivatives, and in double precision the result
    would measure rounding noise instead of the discretization error.
    """
    ys = symplectic_Y_list(curve, k + 1, dtype=dtype)
    res = ddx(ys[k], curve) + np.cross(ys[0], ys[k + 1])
    return float(np.sqrt(curve.seg_len * np.sum(res * res)))


@dataclass(frozen=True)
class MultiplierFit:
    coefficients: np.ndarray   # c_0 .. c_{k-1}
    axis_term: np.ndarray      # fitted constant vector v
    residual: float            # L2 norm of Y_k - sum c_i Y_i - v


def _axis_columns(curve):
    """Constant vector fields compatible with the monodromy.

    Equivariance forces a constant field to be fixed by the rotation part:
    any vector for trivial rotation, the rotation axis otherwise.
    """
    if curve.monodromy.is_rotation_trivial():
        basis = np.eye(3)
    else:
        axis, _ = curve.monodromy.axis_angle()
        basis = axis[None, :]
    return [np.broadcast_to(b, (curve.n, 3)) for b in basis]


def fit_multipliers(curve, k, include_axis=True):
    """Least-squares fit of Y_k = sum_{i<k} c_i Y_i + v in L2(dx)."""
    if k < 1:
        raise RangeError("need k >= 1")
    ys = symplectic_Y_list(curve, k)
    cols = [y.ravel() for y in ys[:k]]
    axis_cols = _axis_columns(curve) if include_axis else []
    cols += [a.ravel() for a in axis_cols]
    design = np.stack(cols, axis=1)
    target = ys[k].ravel()
    sol, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    res = target - design @ sol
    coeff = sol[:k]
    v = np.zeros(3)
    for a, c in zip(axis_cols, sol[k:]):
        v = v + c * a[0]
    residual = np.sqrt(curve.seg_len * np.sum(res * res))
    return MultiplierFit(coeff, v, residual)


def criticality_residual(curve, k, multipliers, axis_term=None):
    """L2 norm of Y_k - sum_{i=0}^{k-1} c_i Y_i - v."""
    multipliers = np.asarray(multipliers, dtype=float)
    if len(multipliers) != k:
        raise ArgumentError("need exactly k multipliers")
    ys = symplectic_Y_list(curve, k)
    res = ys[k].copy()
    for i, c in enumerate(multipliers):
        res -= c * ys[i]
    if axis_term is not None:
        res -= np.asarray(axis_term, dtype=float)
    return np.sqrt(curve.seg_len * np.sum(res * res))
