"""Complex-lambda associated family in hyperbolic 3-space and Darboux
transforms.

For nonreal lambda the frame takes values in SL(2,C), realized as complex
quaternions; gamma_lambda = F F* lives in the hermitian determinant-one
matrices (hyperbolic 3-space), with points decomposed as p = w Id + u.sigma.
Ideal boundary points are rays p ~ w(Id + S.sigma), so an eigenline spinor
psi = (a, b) of the monodromy maps to the unit vector

    S = (2 Re(a conj(b)), -2 Im(a conj(b)), |a|^2 - |b|^2) / |psi|^2,

the traceless direction of psi psi*.  This is the ideal limit of the
stereographic chart pi(p) = u/(1 + w) used by poincare_embed, and for real
lambda it reduces to +- the monodromy rotation axis.  Darboux transforms are
eta+- = gamma + (2 Im lambda/|lambda|^2) S+-, the offset that keeps eta
arclength parametrized under the frame convention F' = F (lambda/2) T.
"""

from dataclasses import dataclass

import numpy as np

from . import qmath
from .curves import Curve, arclength_deviation, resample_arclength, tangent, extend
from .errors import ArgumentError, BranchPointError
from .frames import integrate_frame, family_monodromy

_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


@dataclass(frozen=True)
class HyperbolicFamily:
    lam: complex
    points: np.ndarray    # (n+1, 4) biquaternions F F*
    frame: object

    def hermitian_residual(self):
        """Deviation from the hermitian form (w real, vector imaginary)."""
        return max(np.abs(self.points[:, 0].imag).max(),
                   np.abs(self.points[:, 1:].real).max())

    def det_residual(self):
        return np.abs(qmath.qdet(self.points) - 1.0).max()

    def decompose(self):
        """(w, u) with p = w*Id + u.sigma in the hermitian matrix picture."""
        return self.points[:, 0].real, self.points[:, 1:].imag


def hyperbolic_family(curve, lam):
    lam = complex(lam)
    if lam.imag == 0.0:
        raise ArgumentError("real lambda: use the associated_family module")
    frame = integrate_frame(curve, lam)
    pts = qmath.qmul(frame.F, qmath.hconj(frame.F))
    return HyperbolicFamily(lam, pts, frame)


def _extend_hyperbolic(points, tilde, pad):
    """Monodromy extension of the point field, tau*p = Atilde p Atilde*."""
    n = len(points)
    ti = qmath.qinv(tilde)
    ts = qmath.hconj(tilde)
    tsi = qmath.qinv(ts)
    right = qmath.qmul(tilde, qmath.qmul(points[:pad], ts))
    left = qmath.qmul(ti, qmath.qmul(points[n - pad:], tsi))
    return np.concatenate([left, points, right], axis=0)


def hyperbolic_speeds(family):
    """Per-sample hyperbolic speed; the continuum value is 2 Im(lambda)."""
    curve = family.frame.curve
    n = curve.n
    tilde = family_monodromy(family.frame).quaternion
    ext = _extend_hyperbolic(family.points[:n], tilde, 2)
    dp = np.zeros((n, 4), dtype=complex)
    for k, c in enumerate(_D1):
        if c != 0.0:
            dp += c * ext[k:k + n]
    dp /= curve.seg_len
    f = family.frame.F[:n]
    w = qmath.qmul(qmath.qinv(f), qmath.qmul(dp, qmath.qinv(qmath.hconj(f))))
    return 2.0 * np.linalg.norm(w[:, 1:].imag, axis=1)


def poincare_embed(family):
    """Rescaled Poincare-ball polyline touching the original curve.

    pi(p) = -u/(1 + w) for p = w*Id + u.sigma; the embedded curve is
    gamma(x0) + (1/Im lambda) pi(p), tangent to gamma at the basepoint.
    """
    w, u = family.decompose()
    curve = family.frame.curve
    return (curve.samples[0]
            + (1.0 / family.lam.imag) * u / (1.0 + w)[:, None])


def _ideal_point(psi):
    """Unit vector of the eigenline spinor psi = (a, b), possibly batched.

    Sign fixed so the straight line at lambda = 1 + i maps its dominant
    eigenline to +e_x (the tangent direction).
    """
    a = psi[..., 0]
    b = psi[..., 1]
    nn = np.abs(a) ** 2 + np.abs(b) ** 2
    h12 = 2.0 * a * np.conj(b) / nn
    return np.stack([h12.real, -h12.imag, 2.0 * np.abs(a) ** 2 / nn - 1.0],
                    axis=-1)


@dataclass(frozen=True)
class IdealFixedPoints:
    lam: complex
    S_plus: np.ndarray
    S_minus: np.ndarray
    eigenvalues: np.ndarray
    discriminant: float
    parabolic: bool


def fixed_points(curve, lam, gap_tol=1e-8):
    """Ideal fixed points of the family monodromy on the 2-sphere.

    Ordered by eigenvalue modulus (|mu+| >= |mu-|), ties broken by the
    lexicographically larger S; near-parabolic monodromies are flagged and
    both outputs collapse to the single eigenline image.
    """
    frame = integrate_frame(curve, complex(lam))
    tilde = family_monodromy(frame).quaternion
    m = qmath.as_matrix(tilde)
    mu, vecs = np.linalg.eig(m)
    disc = abs(np.trace(m) ** 2 - 4.0)
    s0 = _ideal_point(vecs[:, 0])
    s1 = _ideal_point(vecs[:, 1])
    gap = np.linalg.norm(s0 - s1)
    # a collapsing eigenline gap catches shear-type degenerations; the
    # discriminant catches +-identity monodromies, where the numerical
    # eigenvectors are arbitrary but the eigenvalues still collide
    if gap < gap_tol or disc < gap_tol:
        return IdealFixedPoints(complex(lam), s0, s0, mu, disc, True)
    if abs(abs(mu[0]) - abs(mu[1])) < 1e-12:
        order = 0 if tuple(s0) >= tuple(s1) else 1
    else:
        order = 0 if abs(mu[0]) >= abs(mu[1]) else 1
    if order == 0:
        return IdealFixedPoints(complex(lam), s0, s1, mu, disc, False)
    return IdealFixedPoints(complex(lam), s1, s0, mu[::-1], disc, False)


def fixed_point_field(curve, lam, sign="+"):
    """S along the curve from the conjugated monodromy F(x)^{-1} Atilde F(x).

    Returns (n+1, 3); the extra sample is the wrap image, which should equal
    the monodromy rotation applied to S(x_0).
    """
    frame = integrate_frame(curve, complex(lam))
    tilde = family_monodromy(frame).quaternion
    fp = fixed_points(curve, lam)
    if fp.parabolic:
        raise BranchPointError("parabolic monodromy; eigenlines collide")
    mu = fp.eigenvalues[0] if sign == "+" else fp.eigenvalues[1]

    # the conjugation cancels entries of size exp(|Im theta|/2); extended
    # precision keeps the wrap consistency below the discretization error
    f = frame.F.astype(np.clongdouble)
    tilde = tilde.astype(np.clongdouble)
    conj = qmath.qmul(qmath.qinv(f), qmath.qmul(tilde, f))
    w, x, y, z = conj[..., 0], conj[..., 1], conj[..., 2], conj[..., 3]
    m11 = w - 1j * z
    m12 = -1j * x - y
    m21 = -1j * x + y
    m22 = w + 1j * z
    psi_a = np.stack([m12, mu - m11], axis=-1)
    psi_b = np.stack([mu - m22, m21], axis=-1)
    na = np.linalg.norm(psi_a, axis=-1)
    nb = np.linalg.norm(psi_b, axis=-1)
    psi = np.where((na >= nb)[:, None], psi_a, psi_b)
    if np.minimum(na, nb).min() < 1e-13:
        # fall back: at least one column must resolve the eigenline
        bad = np.maximum(na, nb) < 1e-13
        if np.any(bad):
            raise BranchPointError("degenerate eigenline along the curve")
    return _ideal_point(psi).astype(float)


def transport_fixed_point(curve, lam, s0, substeps=None):
    """RK4 transport of S' = -Re(lam) T x S - Im(lam) S x (T x S).

    The second term is the first vector field rotated by a quarter turn in
    the tangent plane of the sphere at S; written out it is T - (T, S) S.
    Each sample interval is subdivided so the local step |lam| h stays small,
    with tangents interpolated by the same 6-point stencils the frame
    integrator uses.

    Forward transport contracts onto the dominant ('-') sheet: transporting
    the '+' fixed point amplifies the initial rounding error by roughly
    exp(|Im theta|) over one period, so agreement with the eigen-direction
    field degrades for large Im(lambda) on that sheet no matter how fine the
    sampling is.
    """
    lam = complex(lam)
    n = curve.n
    if substeps is None:
        substeps = max(1, int(np.ceil(abs(lam) * curve.seg_len / 0.01)))
    t = tangent(curve)
    text = extend(t, curve, 3)   # sample i lives at index i + 3
    from .frames import _lagrange_weights
    base = np.arange(n)

    def t_at(offset):
        """Tangent interpolated at fractional offset in [0, 1] per interval."""
        w = _lagrange_weights(offset)
        acc = np.zeros((n, 3))
        for l in range(6):
            acc += w[l] * text[base + 1 + l]
        return acc

    # tangents at all substep nodes and midpoints, shape (2*substeps+1, n, 3)
    nodes = [t_at(j / (2.0 * substeps)) for j in range(2 * substeps + 1)]

    def rhs(tv, s):
        return (-lam.real * np.cross(tv, s)
                - lam.imag * (tv - np.dot(tv, s) * s))

    h = curve.seg_len / substeps
    out = np.empty((n + 1, 3))
    s = np.asarray(s0, dtype=float)
    out[0] = s
    for i in range(n):
        for j in range(substeps):
            t0 = nodes[2 * j][i]
            tm = nodes[2 * j + 1][i]
            t1 = nodes[2 * j + 2][i]
            k1 = rhs(t0, s)
            k2 = rhs(tm, s + 0.5 * h * k1)
            k3 = rhs(tm, s + 0.5 * h * k2)
            k4 = rhs(t1, s + h * k3)
            s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            s = s / np.linalg.norm(s)
        out[i + 1] = s
    return out


@dataclass(frozen=True)
class DarbouxResult:
    curve: Curve
    raw_points: np.ndarray
    s_field: np.ndarray
    distance: float
    pre_resample_deviation: float


def darboux_transform(curve, lam, sign="+"):
    """Darboux transform eta = gamma + (2 Im lambda/|lambda|^2) S.

    The offset is the unique one for which eta is again arclength
    parametrized: with S' = -a T x S - b (T - (T,S)S) one gets
    |eta' |^2 = 1 + (1 - (T,S)^2)(2 rho b - rho^2 |lambda|^2) pointwise,
    which vanishes exactly at rho = 2b/|lambda|^2.  Same monodromy as the
    input; resampled to arclength, with the pre-resampling segment-length
    deviation recorded.
    """
    lam = complex(lam)
    if lam.imag == 0.0:
        raise ArgumentError("Darboux transform requires nonreal lambda")
    s = fixed_point_field(curve, lam, sign=sign)
    dist = 2.0 * lam.imag / abs(lam) ** 2
    eta = curve.samples + dist * s[:-1]
    pre = arclength_deviation(Curve(eta, curve.seg_len, curve.monodromy))
    new = resample_arclength(eta, curve.monodromy, curve.n)
    return DarbouxResult(new, eta, s, dist, pre)


def spectral_image_scan(curve, re_values, im_values, threads=1):
    """Sheet samples (lambda, S+, S-) over a complex grid with continuity
    matching along each row; returns a list of row dicts.

    The per-lambda eigenline computations are independent and run on a
    thread pool; the sheet matcher is a cheap serial pass afterwards.
    """
    points = {}
    lams = [complex(re, im) for im in im_values for re in re_values]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for lam, fp in zip(lams, pool.map(
                    lambda l: fixed_points(curve, l), lams)):
                points[lam] = fp
    else:
        for lam in lams:
            points[lam] = fixed_points(curve, lam)
    rows = []
    prev_row = {}
    for im in im_values:
        prev = None
        this_row = {}
        for re in re_values:
            lam = complex(re, im)
            fp = points[lam]
            sp, sm = fp.S_plus, fp.S_minus
            ref = prev if prev is not None else prev_row.get(re)
            if ref is not None and not fp.parabolic:
                keep = np.linalg.norm(sp - ref[0]) + np.linalg.norm(sm - ref[1])
                swap = np.linalg.norm(sm - ref[0]) + np.linalg.norm(sp - ref[1])
                if swap < keep:
                    sp, sm = sm, sp
            prev = (sp, sm)
            this_row[re] = prev
            rows.append({"re": re, "im": im, "S_plus": sp, "S_minus": sm,
                         "discriminant": fp.discriminant,
                         "parabolic": fp.parabolic})
        prev_row = this_row
    return rows


def scan_to_csv(rows, path):
    with open(path, "w") as f:
        f.write("re_lambda,im_lambda,sheet,Sx,Sy,Sz,discriminant,flag\n")
        for r in rows:
            for sheet, s in ((0, r["S_plus"]), (1, r["S_minus"])):
                f.write("%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%d\n"
                        % (r["re"], r["im"], sheet, s[0], s[1], s[2],
                           r["discriminant"], int(r["parabolic"])))
