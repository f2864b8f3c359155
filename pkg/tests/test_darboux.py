"""Hyperbolic family, ideal fixed points, and Darboux transforms."""

import numpy as np
import numpy.testing as npt
import pytest

from curveflow.curves import (make_circle, make_helix, make_line,
                              make_perturbed_circle, tangent)
from curveflow.darboux import (darboux_transform, fixed_point_field,
                               fixed_points, hyperbolic_family,
                               hyperbolic_speeds, poincare_embed, scan_to_csv,
                               spectral_image_scan, transport_fixed_point)
from curveflow.errors import ArgumentError, BranchPointError
from curveflow.frames import monodromy_angle
from curveflow.functionals import energy


def test_line_fixed_points():
    # the straight line has fixed points at +-tangent for every lambda
    l = make_line(2.0, 64)
    fp = fixed_points(l, 1.0 + 1.0j)
    npt.assert_allclose(fp.S_plus, [1.0, 0.0, 0.0], atol=1e-12)
    npt.assert_allclose(fp.S_minus, [-1.0, 0.0, 0.0], atol=1e-12)


def test_real_lambda_fixed_points_are_axis():
    # for real lambda the monodromy is a rotation and the ideal fixed
    # points are the two ends of its axis
    c = make_circle(1.0, 256)
    _, axis, _ = monodromy_angle(c, 2.0)
    fp = fixed_points(c, 2.0 + 0.0j)
    agree = min(np.linalg.norm(fp.S_plus - axis),
                np.linalg.norm(fp.S_plus + axis))
    assert agree < 1e-10
    npt.assert_allclose(fp.S_plus, -fp.S_minus, atol=1e-10)


def test_conjugation_reality():
    # S(+conj lambda) = -S(lambda) sheetwise, even without any curve symmetry
    p = make_perturbed_circle(1.0, 128, 0.05, modes=(2, 3), seed=1)
    fa = fixed_points(p, 0.8 + 0.6j)
    fb = fixed_points(p, 0.8 - 0.6j)
    npt.assert_allclose(fb.S_plus, -fa.S_plus, atol=1e-12)
    npt.assert_allclose(fb.S_minus, -fa.S_minus, atol=1e-12)


def test_hyperbolic_family_structure():
    h = make_helix(1.0, 1.0, 1.0, 256)
    fam = hyperbolic_family(h, 1.0 + 1.0j)
    assert fam.hermitian_residual() < 1e-12
    assert fam.det_residual() < 1e-8
    with pytest.raises(ArgumentError):
        hyperbolic_family(h, 2.0)


def test_hyperbolic_speed():
    # the hyperbolic curve moves at constant speed 2 Im(lambda)
    h = make_helix(1.0, 1.0, 1.0, 256)
    fam = hyperbolic_family(h, 1.0 + 1.0j)
    npt.assert_allclose(hyperbolic_speeds(fam), 2.0, atol=1e-6)


def test_poincare_embed_touches_curve():
    h = make_helix(1.0, 1.0, 1.0, 256)
    fam = hyperbolic_family(h, 1.0 + 1.0j)
    pe = poincare_embed(fam)
    # basepoint match is exact, the polyline stays inside the rescaled ball,
    # and the initial direction agrees with the curve tangent
    npt.assert_allclose(pe[0], h.samples[0], atol=1e-15)
    assert np.linalg.norm(pe - h.samples[0], axis=1).max() < 1.0
    w = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    d = (w @ pe[:5]) / h.seg_len
    d /= np.linalg.norm(d)
    assert np.arccos(np.clip(d @ tangent(h)[0], -1.0, 1.0)) < 1e-5


def test_fixed_point_field_wrap():
    # the eigen-direction field closes up to the monodromy rotation
    h = make_helix(1.0, 1.0, 1.0, 256)
    for lam in (1.0j, 1.0 + 1.0j, 0.5 + 2.0j):
        for sign in ("+", "-"):
            s = fixed_point_field(h, lam, sign=sign)
            image = h.monodromy.apply_vector(s[0])
            assert np.abs(s[-1] - image).max() < 1e-8 * h.seg_len


def test_transport_matches_eigen_field():
    # the transport equation reproduces the eigen-direction field; forward
    # transport contracts onto the dominant sheet, so '-' is much tighter
    h = make_helix(1.0, 1.0, 1.0, 256)
    for lam in (1.0j, 1.0 + 1.0j):
        for sign, tol in (("-", 1e-10), ("+", 1e-6)):
            s = fixed_point_field(h, lam, sign=sign)
            tr = transport_fixed_point(h, lam, s[0])
            assert np.abs(tr - s).max() < tol
            npt.assert_allclose(np.linalg.norm(tr, axis=1), 1.0, atol=1e-12)


def test_darboux_preserves_invariants():
    h = make_helix(1.0, 1.0, 1.0, 256)
    for lam in (1.0j, 1.0 + 1.0j, 0.5 + 2.0j):
        r = darboux_transform(h, lam, sign="-")
        assert abs(r.distance - 2.0 * lam.imag / abs(lam) ** 2) < 1e-15
        # eta is arclength parametrized before any resampling
        assert r.pre_resample_deviation < 1e-7
        for k in (1, 3):
            assert abs(energy(k, r.curve) - energy(k, h)) < 1e-6
        # wrap: the offset field closes the transformed curve
        img = h.monodromy.apply(h.samples[0]) + r.distance * r.s_field[-1]
        npt.assert_allclose(img, h.monodromy.apply(r.raw_points[0]),
                            atol=1e-10)


def test_darboux_degenerates_to_identity():
    # as Im(lambda) -> 0 the transform collapses onto the original curve
    h = make_helix(1.0, 1.0, 1.0, 256)
    gaps = []
    for im in (0.25, 0.125, 0.0625):
        r = darboux_transform(h, 1.0 + 1.0j * im, sign="-")
        gap = np.abs(r.raw_points - h.samples).max()
        assert gap <= 2.0 * im / abs(1.0 + 1.0j * im) ** 2 + 1e-12
        gaps.append(gap)
    assert gaps[0] > gaps[1] > gaps[2]


def test_branch_point_detection():
    # the circle monodromy degenerates to -identity at lambda = i
    c = make_circle(1.0, 256)
    assert fixed_points(c, 1.0j).parabolic
    with pytest.raises(BranchPointError):
        fixed_point_field(c, 1.0j)
    with pytest.raises(ArgumentError):
        darboux_transform(c, 2.0)


def test_spectral_image_scan(tmp_path):
    c = make_circle(1.0, 256)
    re = np.linspace(0.5, 2.0, 8)
    im = np.linspace(0.1, 1.0, 8)
    rows = spectral_image_scan(c, re, im)
    assert len(rows) == 64
    assert not any(r["parabolic"] for r in rows)
    assert min(r["discriminant"] for r in rows) > 0.1
    # threaded evaluation is bit-identical to the serial pass
    rows_mt = spectral_image_scan(c, re, im, threads=4)
    for a, b in zip(rows, rows_mt):
        npt.assert_array_equal(a["S_plus"], b["S_plus"])
        npt.assert_array_equal(a["S_minus"], b["S_minus"])
    path = tmp_path / "scan.csv"
    scan_to_csv(rows, path)
    assert len(path.read_text().splitlines()) == 1 + 2 * len(rows)


def test_scan_sheets_continuous():
    h = make_helix(1.0, 1.0, 1.0, 256)
    rows = spectral_image_scan(h, np.linspace(0.5, 2.0, 8),
                               np.linspace(0.1, 1.0, 8))
    worst = 0.0
    for a, b in zip(rows, rows[1:]):
        if a["im"] == b["im"]:
            worst = max(worst, np.linalg.norm(a["S_plus"] - b["S_plus"]))
    assert worst < 0.2
