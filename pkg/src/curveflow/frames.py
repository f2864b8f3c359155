"""The associated family: frames F' = F (lambda T), Sym curves, monodromy
angles, and the Hamiltonian generating function.

R^3 is identified with su(2) through unit quaternions in the standard
orientation: a rotation by theta about the unit vector u is the quaternion
exp(+(theta/2) u), and the tangent enters the frame ODE as the pure
quaternion +(lambda/2) T.  This is the unique orientation for which the
monodromy angle expands as theta ~ lambda E_1 + E_2 + E_3/lambda + ... with
E_2 the total torsion of the parallel frame (positive for a right-handed
helix); the opposite chirality flips the sign of every parity-odd
coefficient.  The Sym formula reads

    gamma_lambda = gamma(x_0) + 2 vec((dF/dlambda) F^{-1}).

Frames are integrated with a 4th-order Magnus method on two-point Gauss
nodes, with tangents interpolated by 6-point stencils.
"""

from dataclasses import dataclass

import numpy as np

from . import qmath
from .curves import Curve, Monodromy, ddx, extend, resample_arclength, tangent
from .errors import (ArgumentError, IllConditionedFitError,
                     SingularSectorError)
from .functionals import energy, total_torsion

_GAUSS_OFF = np.array([0.5 - np.sqrt(3.0) / 6.0, 0.5 + np.sqrt(3.0) / 6.0])
_STENCIL = np.arange(-2, 4, dtype=float)


def _lagrange_weights(s):
    """Weights of 6-point Lagrange interpolation at offset s in [0, 1]."""
    w = np.ones(6)
    for j in range(6):
        for l in range(6):
            if l != j:
                w[j] *= (s - _STENCIL[l]) / (_STENCIL[j] - _STENCIL[l])
    return w


@dataclass(frozen=True)
class FrameTrajectory:
    lam: complex
    F: np.ndarray        # (n+1, 4) quaternions, F[0] = identity
    dF: np.ndarray       # (n+1, 4) derivative with respect to lambda
    curve: Curve

    @property
    def is_real(self):
        return not np.iscomplexobj(self.F)

    def group_residual(self):
        return np.abs(qmath.qdet(self.F) - 1.0).max()


def _pair_mul(ea, da, eb, db):
    return qmath.qmul(ea, eb), qmath.qmul(da, eb) + qmath.qmul(ea, db)


def integrate_frame(curve, lam, substeps=None):
    """Frame and its lambda-derivative over one fundamental domain."""
    n = curve.n
    h = curve.seg_len
    if substeps is None:
        substeps = max(1, int(np.ceil(abs(lam) * h / 0.005)))
    t = tangent(curve)
    text = extend(t, curve, 3)   # sample i lives at index i + 3

    lam = complex(lam)
    real = lam.imag == 0.0
    if real:
        lam = lam.real
    dtype = float if real else complex

    # accumulate the per-interval transition pair over the substeps
    e_int = np.zeros((n, 4), dtype=dtype)
    e_int[:, 0] = 1.0
    d_int = np.zeros((n, 4), dtype=dtype)
    hs = h / substeps
    base = np.arange(n)
    for j in range(substeps):
        offs = (j + _GAUSS_OFF) / substeps
        ts = []
        for s in offs:
            w = _lagrange_weights(s)
            acc = np.zeros((n, 3))
            for l in range(6):
                acc += w[l] * text[base + 1 + l]
            ts.append(acc)
        t1, t2 = ts
        p = (hs / 4.0) * (t1 + t2)
        q = (np.sqrt(3.0) / 24.0) * hs * hs * np.cross(t1, t2)
        omega = lam * p + lam * lam * q
        domega = p + 2.0 * lam * q
        e, de = qmath.dqexp_vec(omega.astype(dtype), domega.astype(dtype))
        e_int, d_int = _pair_mul(e_int, d_int, e, de)

    # inclusive scan of interval pairs (associative quaternion products)
    pe = e_int.copy()
    pd = d_int.copy()
    shift = 1
    while shift < n:
        ne, nd = _pair_mul(pe[:-shift], pd[:-shift], pe[shift:], pd[shift:])
        pe[shift:] = ne
        pd[shift:] = nd
        shift *= 2

    F = np.zeros((n + 1, 4), dtype=dtype)
    dF = np.zeros((n + 1, 4), dtype=dtype)
    F[0, 0] = 1.0
    F[1:] = pe
    dF[1:] = pd
    F[1:] = qmath.qnormalize(F[1:])
    return FrameTrajectory(lam, F, dF, curve)


def sym_curve(frame):
    """gamma_lambda samples (n+1 points, including the wrap image)."""
    if not frame.is_real:
        raise ArgumentError("Sym formula requires real lambda; "
                            "use the hyperbolic family for complex lambda")
    g = qmath.qmul(frame.dF, qmath.qinv(frame.F))
    return frame.curve.samples[0] + 2.0 * g[:, 1:]


@dataclass(frozen=True)
class FamilyMonodromy:
    quaternion: np.ndarray      # rotation part of the gamma_lambda monodromy
    d_quaternion: np.ndarray
    translation: np.ndarray     # None for complex lambda


def family_monodromy(frame):
    """Monodromy of the associated curve: rotation F[end] A, translation
    from the endpoint of the Sym curve."""
    a = frame.curve.monodromy.rotation.astype(frame.F.dtype)
    tilde = qmath.qmul(frame.F[-1], a)
    dtilde = qmath.qmul(frame.dF[-1], a)
    translation = None
    if frame.is_real:
        pts = sym_curve(frame)
        translation = pts[-1] - qmath.qrotate(tilde, pts[0])
    return FamilyMonodromy(tilde, dtilde, translation)


def angle_from_quat(q, pred):
    """Continuous rotation angle and axis with exp((theta/2) axis) = +-q.

    Among all angles consistent with the unit quaternion q, returns the one
    closest to the prediction `pred`.
    """
    w = q[0]
    v = q[1:]
    s = np.linalg.norm(v)
    phi = 2.0 * np.arctan2(s, w)
    best = None
    for sigma in (1.0, -1.0):
        k = round((pred - sigma * phi) / (2.0 * np.pi))
        cand = sigma * phi + 2.0 * np.pi * k
        if best is None or abs(cand - pred) < abs(best[0] - pred):
            best = (cand, sigma)
    theta, sigma = best
    axis = None if s < 1e-12 else sigma * v / s
    return theta, axis


@dataclass(frozen=True)
class MonodromyAngle:
    lam: float
    theta: float
    axis: np.ndarray   # None when the monodromy is +-identity


def monodromy_angle_scan(curve, lambdas, e1=None, e2=None, e3=None):
    """Continuous branch of theta over a real lambda grid.

    Anchored at the largest lambda by theta ~ lambda E_1 + E_2 + E_3/lambda
    and continued to smaller lambda by local linear prediction.  The E_3/
    lambda term matters: without it the prediction sits exactly halfway
    between the two sign branches of the quaternion angle, and the anchor
    degenerates into a coin flip.
    """
    lambdas = np.sort(np.asarray(lambdas, dtype=float))
    if e1 is None:
        e1 = energy(1, curve)
    if e2 is None:
        e2 = energy(2, curve)
    if e3 is None:
        e3 = energy(3, curve)
    out = []
    prev = None
    for lam in lambdas[::-1]:
        frame = integrate_frame(curve, lam)
        fam = family_monodromy(frame)
        if prev is None:
            pred = lam * e1 + e2 + e3 / lam
        else:
            pred = prev[1] + e1 * (lam - prev[0])
        theta, axis = angle_from_quat(np.real(fam.quaternion), pred)
        out.append(MonodromyAngle(lam, theta, axis))
        prev = (lam, theta)
    return out[::-1]


def monodromy_angle(curve, lam, e1=None, e2=None, e3=None):
    """theta and axis at a single lambda, anchored by the asymptotic series."""
    if e1 is None:
        e1 = energy(1, curve)
    if e2 is None:
        e2 = energy(2, curve)
    if e3 is None:
        e3 = energy(3, curve)
    frame = integrate_frame(curve, lam)
    fam = family_monodromy(frame)
    pred = lam * e1 + e2 + e3 / lam
    theta, axis = angle_from_quat(np.real(fam.quaternion), pred)
    return theta, axis, frame


def hamiltonians_from_angle(curve, lambda_grid=None, kmax=5, guard_terms=3):
    """E_0 .. E_kmax from the expansion theta = sum_k E_k lambda^{2-k}.

    Guard coefficients beyond kmax absorb the truncation tail of the
    asymptotic series.  The default of three balances truncation leakage
    (too few guards) against amplification of the angle-integration noise
    (too many, in an increasingly ill-conditioned fit); columns are
    norm-scaled before the least-squares solve and the scaled condition
    number is checked.
    """
    if kmax > 6:
        raise ArgumentError("kmax must be <= 6")
    if lambda_grid is None:
        lambda_grid = np.geomspace(8.0, 64.0, 32)
    scan = monodromy_angle_scan(curve, lambda_grid)
    lams = np.array([m.lam for m in scan])
    thetas = np.array([m.theta for m in scan])
    powers = 2.0 - np.arange(kmax + guard_terms + 1)
    design = lams[:, None] ** powers[None, :]
    scale = np.linalg.norm(design, axis=0)
    design = design / scale
    sol, _, _, sv = np.linalg.lstsq(design, thetas, rcond=None)
    cond = sv[0] / sv[-1]
    if cond > 1e12:
        raise IllConditionedFitError("angle fit ill conditioned", condition=cond)
    return (sol / scale)[:kmax + 1]


def torsion_shift_check(curve, lam):
    """(E_2 of gamma_lambda, E_2 + lambda E_1): the two should agree."""
    frame = integrate_frame(curve, lam)
    fam = family_monodromy(frame)
    pts = sym_curve(frame)[:-1]
    mono = Monodromy(np.real(fam.quaternion), fam.translation)
    new = resample_arclength(pts, mono, curve.n)
    e1 = energy(1, curve)
    e2 = energy(2, curve)
    return total_torsion(new), e2 + lam * e1


def transported_axis_field(frame, axis0):
    """Axis of the basepoint-shifted monodromy F(x)^{-1} Atilde F(x)."""
    return qmath.qrotate(qmath.qconj(frame.F), axis0)


def spherical_sector_area(curve, lam, min_denominator=1e-3):
    """Area of the spherical sector traced between the tangent image and the
    transported monodromy axis."""
    theta, axis, frame = monodromy_angle(curve, lam)
    if axis is None:
        raise SingularSectorError("monodromy is +-identity; axis undefined")
    y = transported_axis_field(frame, axis)[:-1]
    t = tangent(curve)
    tp = ddx(t, curve)
    denom = 1.0 + np.sum(y * t, axis=1)
    if denom.min() < min_denominator:
        raise SingularSectorError("tangent antipodal to the transported axis")
    integrand = np.sum(y * np.cross(t, tp), axis=1) / denom
    return curve.seg_len * integrand.sum()


def gauss_bonnet_residual(curve, lam):
    """theta - lambda E_1 - E_2 - Area, wrapped to (-pi, pi]."""
    theta, axis, frame = monodromy_angle(curve, lam)
    area = spherical_sector_area(curve, lam)
    e1 = energy(1, curve)
    e2 = energy(2, curve)
    r = theta - lam * e1 - e2 - area
    return (r + np.pi) % (2.0 * np.pi) - np.pi
