"""The conserved functionals E_{-2} .. E_6.

All integrals are Riemann/trapezoid sums over the fundamental domain, which
for the smooth (monodromy-)periodic integrands at hand converges at spectral
order; the quadrature error is therefore dominated by the finite-difference
derivatives inside the integrands.

E_2 (total torsion) is only defined mod 2pi; we return a continuous branch
using the winding hint from the parallel frame, optionally snapped to a
caller-supplied nearby value so trajectories never jump branches.
"""

import io
from dataclasses import dataclass

import numpy as np

from .curves import (Curve, ddx, deriv, measured_length, parallel_normal_frame,
                     resample_arclength)
from .errors import ArgumentError, RangeError
from .hierarchy import check_axis, gradient_G, gradient_from_Y

K_RANGE = range(-2, 7)


def total_torsion(curve, near=None):
    """Continuous-branch total torsion (holonomy angle of the normal bundle)."""
    frame = parallel_normal_frame(curve)
    value = frame.total_angle
    if near is not None:
        value += 2.0 * np.pi * round((near - value) / (2.0 * np.pi))
    return value


def energy(k, curve, axis=None, near=None):
    """E_k of the curve; axis required for k in {-2, -1}.

    `near` selects the torsion branch for k = 2.
    """
    if k not in K_RANGE:
        raise RangeError("energy implements k in [-2, 6]")
    if k in (-2, -1):
        if axis is None:
            raise ArgumentError("k in {-2,-1} requires an axis vector")
        v = check_axis(curve, axis)
    dx = curve.seg_len
    if k == 0:
        return 0.0
    if k == 1:
        return measured_length(curve)
    if k == 2:
        return total_torsion(curve, near=near)
    d1 = deriv(curve, 1)
    if k == -1:
        return 0.5 * dx * np.sum(np.cross(curve.samples, d1) @ v)
    if k == -2:
        # sign chosen so the gradient is gamma' x (v x gamma), matching the
        # flux pattern G = gamma' x W(gamma) of the translation case
        perp = curve.samples - np.outer(curve.samples @ v, v)
        return -0.5 * dx * np.sum(np.sum(perp * perp, axis=1) * (d1 @ v))
    d2 = ddx(d1, curve)
    k2 = np.sum(d2 * d2, axis=1)
    if k == 3:
        return 0.5 * dx * k2.sum()
    d3 = ddx(d2, curve)
    det123 = np.sum(d1 * np.cross(d2, d3), axis=1)
    if k == 4:
        return -0.5 * dx * det123.sum()
    if k == 5:
        return dx * np.sum(0.5 * np.sum(d3 * d3, axis=1) - 0.625 * k2 * k2)
    d4 = ddx(d3, curve)
    det134 = np.sum(d1 * np.cross(d3, d4), axis=1)
    return dx * np.sum(-0.5 * det134 + 0.875 * k2 * det123)


def flux_energy(field_kind, v, curve):
    """Flux functional of a translation (area) or rotation (volume) field."""
    if field_kind == "translation":
        return energy(-1, curve, axis=v)
    if field_kind == "rotation":
        return energy(-2, curve, axis=v)
    raise ArgumentError("field_kind must be 'translation' or 'rotation'")


def translate_to_axis(curve, axis):
    """Shift so the screw axis of the monodromy passes through the origin.

    The volume functional's normalization places the rotation axis through
    the origin; for a trivial rotation part there is no canonical axis line
    and the curve is returned unchanged.
    """
    if curve.monodromy.is_rotation_trivial():
        return curve
    v = check_axis(curve, axis)
    rot = curve.monodromy.matrix
    a = curve.monodromy.translation
    proj = np.eye(3) - np.outer(v, v)
    p0, _, _, _ = np.linalg.lstsq(proj @ (np.eye(3) - rot), proj @ a, rcond=None)
    p0 = proj @ p0
    from .curves import Monodromy
    mono = Monodromy(curve.monodromy.rotation, a - (np.eye(3) - rot) @ p0)
    return Curve(curve.samples - p0, curve.seg_len, mono, curve.basepoint_index)


@dataclass(frozen=True)
class EnergyReport:
    values: dict
    axis: np.ndarray = None
    torsion_branch: int = 0

    def csv_rows(self):
        out = io.StringIO()
        ax = "" if self.axis is None else " ".join("%.17g" % c for c in self.axis)
        for k in sorted(self.values):
            out.write("%d,%.17g,%s,%d\n" % (k, self.values[k], ax,
                                            self.torsion_branch))
        return out.getvalue()


def energy_report(curve, axis=None, near_torsion=None):
    """All available E_k; axis-dependent entries only when an axis is given."""
    ks = [k for k in K_RANGE if axis is not None or k >= 0]
    frame = parallel_normal_frame(curve)
    values = {}
    for k in ks:
        if k == 2:
            values[k] = total_torsion(curve, near=near_torsion)
        else:
            values[k] = energy(k, curve, axis=axis)
    return EnergyReport(values, None if axis is None else np.asarray(axis, float),
                        frame.winding)


def gradient(k, curve, axis=None):
    """The variational gradient used by the consistency checks."""
    if k in (-2, -1):
        return gradient_G(k, curve, axis=axis)
    if 0 <= k <= 3:
        return gradient_G(k, curve, axis=axis)
    if k > 3:
        return gradient_from_Y(k, curve, dtype=np.longdouble)
    raise RangeError("no gradient for k = %d" % k)


def directional_derivative_check(k, curve, direction, h, axis=None):
    """(finite difference of E_k along `direction`, <G_k, direction>).

    The perturbed curves are resampled to arclength before evaluation: the
    functionals are geometric, while the gradient formulas assume arclength
    parametrization.  Richardson extrapolation in h removes the leading
    quadratic error of the central difference.
    """
    direction = np.asarray(direction, dtype=float)
    if h <= 0:
        raise ArgumentError("h must be positive")
    base = energy(k, curve, axis=axis)

    def at(s):
        pts = curve.samples + s * direction
        c = resample_arclength(pts, curve.monodromy, curve.n)
        return energy(k, c, axis=axis, near=base if k == 2 else None)

    def central(step):
        return (at(step) - at(-step)) / (2.0 * step)

    fd = (4.0 * central(0.5 * h) - central(h)) / 3.0
    g = gradient(k, curve, axis=axis)
    inner = curve.seg_len * np.sum(g * direction)
    return fd, inner
