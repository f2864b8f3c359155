"""Discrete curves with monodromy.

A Curve stores n samples of an arclength-parametrized curve together with a
Euclidean motion h(p) = A p + a identifying gamma(x + L) with h(gamma(x)).
Closed curves are the h = identity case.  All difference stencils extend data
past the fundamental domain through the monodromy: positions by the full
motion, vector fields by the rotation part only.
"""

from dataclasses import dataclass

import json
import numpy as np
from scipy.interpolate import CubicSpline

from . import qmath
from .errors import (ArgumentError, DegenerateInputError,
                     DegenerateResolutionError, ResamplingError)

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class Monodromy:
    rotation: np.ndarray   # unit quaternion (w, x, y, z)
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))
        if abs(np.linalg.norm(self.rotation) - 1.0) > 1e-12:
            object.__setattr__(self, "rotation",
                               self.rotation / np.linalg.norm(self.rotation))

    @classmethod
    def identity(cls):
        return cls(np.array([1.0, 0, 0, 0]), np.zeros(3))

    @property
    def matrix(self):
        return qmath.rotation_matrix(self.rotation)

    def apply(self, points):
        return qmath.qrotate(self.rotation, points) + self.translation

    def apply_vector(self, vectors):
        return qmath.qrotate(self.rotation, vectors)

    def apply_inverse(self, points):
        return qmath.qrotate(qmath.qconj(self.rotation), points - self.translation)

    def apply_vector_inverse(self, vectors):
        return qmath.qrotate(qmath.qconj(self.rotation), vectors)

    @property
    def is_identity(self):
        return (abs(self.rotation[0]) > 1.0 - 1e-12
                and np.linalg.norm(self.translation) < 1e-12)

    def axis_angle(self):
        return qmath.axis_angle_from_quat(self.rotation)

    def is_rotation_trivial(self, tol=1e-10):
        return np.linalg.norm(self.rotation[1:]) < tol


@dataclass(frozen=True)
class Curve:
    samples: np.ndarray     # (n, 3)
    seg_len: float
    monodromy: Monodromy
    basepoint_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "samples",
                           np.ascontiguousarray(self.samples, dtype=float))
        if self.n < 8:
            raise DegenerateResolutionError("need at least 8 samples, got %d" % self.n)
        if self.seg_len <= 0:
            raise DegenerateInputError("seg_len must be positive")

    @property
    def n(self):
        return len(self.samples)

    @property
    def length(self):
        return self.n * self.seg_len

    @property
    def is_closed(self):
        return self.monodromy.is_identity

    def with_samples(self, samples):
        return Curve(samples, self.seg_len, self.monodromy, self.basepoint_index)


@dataclass(frozen=True)
class NormalFrame:
    nu: np.ndarray           # (n, 3) unit normals
    holonomy_angle: float    # principal value in (-pi, pi]
    winding: int = 0         # branch hint from the cumulative torsion integral

    @property
    def total_angle(self):
        return self.holonomy_angle + 2.0 * np.pi * self.winding


def extend(values, curve, pad, affine=False):
    """Pad an (n, 3) array on both sides using the monodromy.

    affine=True treats values as positions (full motion h applied); otherwise
    they are vector-field values, extended by the rotation part only.
    """
    n = len(values)
    if pad > n:
        raise ArgumentError("padding %d exceeds sample count %d" % (pad, n))
    m = curve.monodromy
    if affine:
        right = m.apply(values[:pad])
        left = m.apply_inverse(values[n - pad:])
    else:
        right = m.apply_vector(values[:pad])
        left = m.apply_vector_inverse(values[n - pad:])
    return np.concatenate([left, values, right], axis=0)


# 4th-order centered first derivative
_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


def ddx(values, curve, affine=False):
    """Arclength derivative of a sampled field along the curve.

    Centered 4th-order differences; stencils crossing the fundamental-domain
    boundary use monodromy-extended values.
    """
    values = np.asarray(values)
    if values.dtype == object:
        values = values.astype(float)
    ext = extend(values, curve, 2, affine=affine)
    n = curve.n
    out = np.zeros((n, 3), dtype=values.dtype)
    for k, c in enumerate(_D1):
        if c != 0.0:
            out += c * ext[k:k + n]
    return out / curve.seg_len


def deriv(curve, order, dtype=None):
    """order-th arclength derivative of the position samples.

    Positions are re-centered before differencing (with the monodromy
    translation adjusted accordingly); this lowers the cancellation error of
    the stencils without changing the result.
    """
    if order < 1:
        raise ArgumentError("order must be >= 1")
    shift = curve.samples.mean(axis=0)
    rot = curve.monodromy.matrix
    mono = Monodromy(curve.monodromy.rotation,
                     curve.monodromy.translation - shift + rot @ shift)
    centered = Curve(curve.samples - shift, curve.seg_len, mono,
                     curve.basepoint_index)
    samples = centered.samples if dtype is None else centered.samples.astype(dtype)
    d = ddx(samples, centered, affine=True)
    for _ in range(order - 1):
        d = ddx(d, centered)
    return d


def tangent(curve, normalized=True):
    t = ddx(curve.samples, curve, affine=True)
    if normalized:
        t = t / np.linalg.norm(t, axis=1, keepdims=True)
    return t


def _spline_through(points, monodromy, pad):
    """Cubic spline through monodromy-extended points, chord parametrized.

    Returns (spline, knots, domain_start_index); the fundamental domain runs
    from knot[pad] to knot[pad + n] where knot[pad + n] is the wrap image
    h(points[0]).
    """
    n = len(points)
    right = monodromy.apply(points[:pad + 1])
    left = monodromy.apply_inverse(points[n - pad:])
    ext = np.concatenate([left, points, right], axis=0)
    chord = np.linalg.norm(np.diff(ext, axis=0), axis=1)
    if np.any(chord < 1e-13 * max(1.0, np.abs(ext).max())):
        raise DegenerateInputError("repeated consecutive points in polyline")
    t = np.concatenate([[0.0], np.cumsum(chord)])
    return CubicSpline(t, ext, axis=0), t, pad


def _segment_arclengths(spline, knots, i0, count):
    """Arclength of each knot interval [i0, i0+count) by 8-pt Gauss."""
    a = knots[i0:i0 + count]
    b = knots[i0 + 1:i0 + count + 1]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    ts = mid[:, None] + half[:, None] * _GAUSS_X[None, :]
    speed = np.linalg.norm(spline(ts.ravel(), 1), axis=1).reshape(ts.shape)
    return half * (speed @ _GAUSS_W)


def _arclength_partial(spline, a, t):
    """Arclength integral from a to t (arrays), 8-pt Gauss per call."""
    half = 0.5 * (t - a)
    mid = 0.5 * (t + a)
    ts = mid[:, None] + half[:, None] * _GAUSS_X[None, :]
    speed = np.linalg.norm(spline(ts.ravel(), 1), axis=1).reshape(ts.shape)
    return half * (speed @ _GAUSS_W)


def resample_arclength(points, monodromy, n, tol=1e-10, max_iter=50):
    """Arclength-uniform Curve through a polyline, wrap closed by monodromy.

    Fixed-point iteration: spline the current samples, place n points at
    equal arclength, repeat until the segment arclengths measured on the new
    spline are uniform to tol * seg_len.
    """
    pts = np.asarray(points, dtype=float)
    if n < 8:
        raise DegenerateResolutionError("need at least 8 samples")
    residual = np.inf
    for _ in range(max_iter):
        pad = min(4, len(pts))
        spline, knots, i0 = _spline_through(pts, monodromy, pad)
        segs = _segment_arclengths(spline, knots, i0, len(pts))
        total = segs.sum()
        dx = total / n if len(pts) == n else None
        if len(pts) == n:
            residual = np.abs(segs - dx).max() / dx
            if residual <= tol:
                return Curve(pts, dx, monodromy)
        # invert cumulative arclength at equal targets
        cum = np.concatenate([[0.0], np.cumsum(segs)])
        targets = total * np.arange(n) / n
        idx = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, len(segs) - 1)
        a = knots[i0 + idx]
        b = knots[i0 + idx + 1]
        t = a + (b - a) * np.clip((targets - cum[idx]) / segs[idx], 0.0, 1.0)
        for _ in range(30):
            f = cum[idx] + _arclength_partial(spline, a, t) - targets
            df = np.linalg.norm(spline(t, 1), axis=1)
            step = f / df
            t = np.clip(t - step, a, knots[i0 + idx + 1])
            if np.abs(step).max() <= 1e-15 * max(total, 1.0):
                break
        pts = spline(t)
    raise ResamplingError("resampling did not converge (residual %.3e)" % residual,
                          residual=residual)


def arclength_deviation(curve):
    """Max relative deviation of spline segment arclengths from seg_len."""
    pad = min(4, curve.n)
    spline, knots, i0 = _spline_through(curve.samples, curve.monodromy, pad)
    segs = _segment_arclengths(spline, knots, i0, curve.n)
    return np.abs(segs - curve.seg_len).max() / curve.seg_len


def measured_length(curve):
    """Quadrature length using finite-difference tangents."""
    sp = np.linalg.norm(ddx(curve.samples, curve, affine=True), axis=1)
    return curve.seg_len * sp.sum()


def make_circle(radius, n):
    """Closed circle of given radius in the xy-plane."""
    if radius <= 0:
        raise DegenerateInputError("radius must be positive")
    if n < 8:
        raise DegenerateResolutionError("need at least 8 samples")
    phi = 2.0 * np.pi * np.arange(n) / n
    pts = radius * np.stack([np.cos(phi), np.sin(phi), np.zeros(n)], axis=1)
    return Curve(pts, 2.0 * np.pi * radius / n, Monodromy.identity())


def make_helix(a, b, turns, n):
    """Unit-speed helix (a cos wx, a sin wx, b w x), w = 1/sqrt(a^2+b^2).

    The monodromy is the screw motion matching one period of `turns` turns:
    rotation about e_z by 2*pi*turns, translation b*w*L along e_z.
    """
    if a <= 0:
        raise DegenerateInputError("helix radius must be positive")
    if turns <= 0 or n < 8:
        raise DegenerateInputError("need positive turns and n >= 8")
    w = 1.0 / np.hypot(a, b)
    length = turns * 2.0 * np.pi / w
    x = length * np.arange(n) / n
    pts = np.stack([a * np.cos(w * x), a * np.sin(w * x), b * w * x], axis=1)
    angle = np.mod(2.0 * np.pi * turns, 2.0 * np.pi)
    rot = qmath.quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), angle)
    mono = Monodromy(rot, np.array([0.0, 0.0, b * w * length]))
    return Curve(pts, length / n, mono)


def make_line(length, n):
    """Straight segment along e_x with pure-translation monodromy."""
    if length <= 0:
        raise DegenerateInputError("length must be positive")
    x = length * np.arange(n) / n
    pts = np.stack([x, np.zeros(n), np.zeros(n)], axis=1)
    mono = Monodromy(np.array([1.0, 0, 0, 0]), np.array([length, 0.0, 0.0]))
    return Curve(pts, length / n, mono)


def make_perturbed_circle(radius, n, amplitude, modes=(2, 3), seed=0):
    """Circle with a smooth random normal perturbation of given relative size.

    Low Fourier modes only, so the result stays well resolved; resampled to
    arclength before returning.
    """
    rng = np.random.default_rng(seed)
    phi = 2.0 * np.pi * np.arange(n) / n
    dr = np.zeros(n)
    dz = np.zeros(n)
    for m in modes:
        c = rng.standard_normal(4)
        dr += c[0] * np.cos(m * phi) + c[1] * np.sin(m * phi)
        dz += c[2] * np.cos(m * phi) + c[3] * np.sin(m * phi)
    scale = amplitude * radius / max(np.abs(dr).max(), np.abs(dz).max())
    r = radius + scale * dr
    pts = np.stack([r * np.cos(phi), r * np.sin(phi), scale * dz], axis=1)
    return resample_arclength(pts, Monodromy.identity(), n)


def random_equivariant_field(curve, seed=0, max_mode=4):
    """Smooth random vector field compatible with the curve's monodromy.

    Built as delta(x) = R(x) g(x) with g a low-mode Fourier field and R the
    fractional power of the monodromy rotation, so delta(x+L) = A delta(x).
    """
    rng = np.random.default_rng(seed)
    n = curve.n
    phi = 2.0 * np.pi * np.arange(n) / n
    g = np.zeros((n, 3))
    for m in range(max_mode + 1):
        c = rng.standard_normal((2, 3))
        g += np.cos(m * phi)[:, None] * c[0] + np.sin(m * phi)[:, None] * c[1]
    axis, angle = curve.monodromy.axis_angle()
    if angle > 1e-12:
        frac = angle * np.arange(n) / n
        half = 0.5 * frac
        q = np.concatenate([np.cos(half)[:, None],
                            np.sin(half)[:, None] * axis[None, :]], axis=1)
        g = qmath.qrotate(q, g)
    return g / np.abs(g).max()


def parallel_normal_frame(curve, initial_normal=None):
    """Rotation-minimizing normal transport (double reflection).

    The holonomy angle compares the transported normal at the far end of the
    fundamental domain, pulled back by the monodromy rotation, against the
    initial normal in the complex structure T x ( ).
    """
    pts = extend(curve.samples, curve, 1, affine=True)[1:]
    tan = tangent(curve)
    tan = np.concatenate([tan, [curve.monodromy.apply_vector(tan[0])]], axis=0)
    t0 = tan[0]
    if initial_normal is None:
        nu0 = np.cross([0.0, 0.0, 1.0], t0)
        if np.linalg.norm(nu0) < 1e-8:
            nu0 = np.cross([1.0, 0.0, 0.0], t0)
    else:
        nu0 = np.asarray(initial_normal, dtype=float)
    nu0 = nu0 - np.dot(nu0, t0) * t0
    nu0 = nu0 / np.linalg.norm(nu0)

    n = curve.n
    nus = np.empty((n + 1, 3))
    nus[0] = nu0
    nu = nu0
    for i in range(n):
        v1 = pts[i + 1] - pts[i]
        c1 = np.dot(v1, v1)
        nu_l = nu - (2.0 / c1) * np.dot(v1, nu) * v1
        t_l = tan[i] - (2.0 / c1) * np.dot(v1, tan[i]) * v1
        v2 = tan[i + 1] - t_l
        c2 = np.dot(v2, v2)
        nu = nu_l - (2.0 / c2) * np.dot(v2, nu_l) * v2
        nu = nu - np.dot(nu, tan[i + 1]) * tan[i + 1]
        nu = nu / np.linalg.norm(nu)
        nus[i + 1] = nu

    back = curve.monodromy.apply_vector_inverse(nus[n])
    # orientation chosen so the result agrees with the Frenet torsion
    # integral (positive for a right-handed helix)
    alpha = np.arctan2(np.dot(back, np.cross(nu0, t0)), np.dot(back, nu0))
    winding = int(round((_torsion_integral(curve) - alpha) / (2.0 * np.pi)))
    return NormalFrame(nus[:n], alpha, winding)


def _torsion_integral(curve):
    """Regularized Frenet torsion integral, used as a branch hint."""
    d1 = deriv(curve, 1)
    d2 = ddx(d1, curve)
    d3 = ddx(d2, curve)
    k2 = np.sum(d2 * d2, axis=1)
    det = np.sum(d1 * np.cross(d2, d3), axis=1)
    mask = k2 > 1e-9 * max(1.0, k2.max())
    tau = np.zeros_like(k2)
    tau[mask] = det[mask] / k2[mask]
    return curve.seg_len * tau.sum()


def complex_curvature(curve, frame=None):
    """psi with gamma'' = psi * nu in the parallel frame, as complex samples."""
    if frame is None:
        frame = parallel_normal_frame(curve)
    d2 = deriv(curve, 2)
    t = tangent(curve)
    return (np.sum(d2 * frame.nu, axis=1)
            + 1j * np.sum(d2 * np.cross(t, frame.nu), axis=1))


def curve_to_dict(curve):
    return {
        "samples": curve.samples.tolist(),
        "seg_len": curve.seg_len,
        "monodromy": {
            "rotation": curve.monodromy.rotation.tolist(),
            "translation": curve.monodromy.translation.tolist(),
        },
        "basepoint_index": curve.basepoint_index,
    }


def curve_from_dict(data):
    mono = Monodromy(np.array(data["monodromy"]["rotation"]),
                     np.array(data["monodromy"]["translation"]))
    return Curve(np.array(data["samples"]), float(data["seg_len"]), mono,
                 int(data.get("basepoint_index", 0)))


def save_curve(curve, path):
    with open(path, "w") as f:
        json.dump(curve_to_dict(curve), f)


def load_curve(path):
    with open(path) as f:
        return curve_from_dict(json.load(f))


def export_polyline(points, path):
    """Plain-text polyline, one 'x y z' triple per line."""
    np.savetxt(path, np.asarray(points), fmt="%.17g")
