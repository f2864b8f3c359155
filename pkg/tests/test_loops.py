"""Truncated loop algebra, Lax flows, and finite-gap curve fields."""

import numpy as np
import numpy.testing as npt
import pytest

from curveflow.curves import make_circle, make_line, make_perturbed_circle
from curveflow.errors import ArgumentError, RangeError
from curveflow.hierarchy import fit_multipliers
from curveflow.loops import (LoopElement, V_k, finite_gap_residual, from_curve,
                             lax_evolve, load_loop, loop_cross, save_loop,
                             spectral_polynomial)


def test_v0_hand_example():
    # xi = e3 + e1 / lambda: (lambda xi)_+ = lambda e3, so
    # V_0 = xi x lambda e3 has the single coefficient e1 x e3 = -e2
    xi = LoopElement(np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]))
    v = V_k(xi, 0)
    npt.assert_allclose(v.coeffs, [[0.0, -1.0, 0.0], [0.0, 0.0, 0.0]],
                        atol=1e-15)


def test_vk_stays_in_algebra():
    rng = np.random.default_rng(2)
    xi = LoopElement(rng.standard_normal((4, 3)))
    for k in (0, 1, 2, 5):
        assert V_k(xi, k).degree == xi.degree
    with pytest.raises(RangeError):
        V_k(xi, -1)


def test_loop_cross_antisymmetric():
    rng = np.random.default_rng(3)
    a = LoopElement(rng.standard_normal((3, 3)))
    b = LoopElement(rng.standard_normal((2, 3)))
    npt.assert_allclose(loop_cross(a, b).coeffs, -loop_cross(b, a).coeffs,
                        atol=1e-15)


def test_spectral_polynomial_conserved():
    rng = np.random.default_rng(2)
    xi = LoopElement(rng.standard_normal((4, 3)))
    p0 = spectral_polynomial(xi).coeffs
    snaps = lax_evolve(xi, {0: 1.0, 1: 0.5, 2: -0.3}, 1e-3, 1000)
    for s in snaps:
        npt.assert_allclose(spectral_polynomial(s).coeffs, p0, atol=5.5e-13)


def test_diagonal_norm_not_conserved():
    # only the full polynomial (xi, xi) is invariant; the plain sum of
    # squared coefficient norms mixes different powers and drifts freely
    rng = np.random.default_rng(2)
    xi = LoopElement(rng.standard_normal((4, 3)))
    snaps = lax_evolve(xi, {0: 1.0, 1: 0.5, 2: -0.3}, 1e-3, 1000)
    s0 = np.sum(xi.coeffs ** 2)
    assert abs(np.sum(snaps[-1].coeffs ** 2) - s0) > 0.1


def test_lax_flows_commute():
    # the V_k flows commute, so the composition defect of two second-order
    # single steps scales like dt^5: halving dt divides it by 32
    rng = np.random.default_rng(2)
    xi = LoopElement(rng.standard_normal((4, 3)))

    def defect(dt):
        a = lax_evolve(xi, {1: 1.0}, dt, 1, integrator="midpoint")[-1]
        a = lax_evolve(a, {2: 1.0}, dt, 1, integrator="midpoint")[-1]
        b = lax_evolve(xi, {2: 1.0}, dt, 1, integrator="midpoint")[-1]
        b = lax_evolve(b, {1: 1.0}, dt, 1, integrator="midpoint")[-1]
        return np.abs(a.coeffs - b.coeffs).max()

    assert defect(1e-2) / defect(5e-3) == pytest.approx(32.0, rel=0.1)


def test_finite_gap_circle_converges():
    # the circle is a degree-2 finite-gap curve; the Lax residual of the
    # fitted field converges at the stencil order
    residuals = []
    for n in (64, 128, 256):
        c = make_circle(1.0, n)
        fit = fit_multipliers(c, 2)
        field = from_curve(c, 2, fit.coefficients)
        residuals.append(finite_gap_residual(field))
    assert residuals[0] < 2e-5
    for a, b in zip(residuals, residuals[1:]):
        assert a / b == pytest.approx(16.0, rel=0.2)


def test_finite_gap_line_exact():
    # the line has constant tangent: xi = T solves the equation to roundoff
    l = make_line(2.0, 64)
    assert finite_gap_residual(from_curve(l, 0, [])) < 1e-12


def test_finite_gap_control():
    p = make_perturbed_circle(1.0, 128, 0.05, modes=(2, 3), seed=1)
    fit = fit_multipliers(p, 2)
    assert finite_gap_residual(from_curve(p, 2, fit.coefficients)) > 1e-2


def test_spectral_polynomial_constant_along_curve():
    c = make_circle(1.0, 128)
    fit = fit_multipliers(c, 2)
    field = from_curve(c, 2, fit.coefficients)
    p0 = spectral_polynomial(field.at(0)).coeffs
    for i in range(16, 128, 16):
        npt.assert_allclose(spectral_polynomial(field.at(i)).coeffs, p0,
                            atol=1e-12)


def test_save_load_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    real = LoopElement(rng.standard_normal((3, 3)))
    cplx = LoopElement(rng.standard_normal((3, 3))
                       + 1j * rng.standard_normal((3, 3)))
    for xi in (real, cplx):
        path = tmp_path / "loop.json"
        save_loop(xi, path)
        back = load_loop(path)
        assert back.is_real == xi.is_real
        npt.assert_allclose(back.coeffs, xi.coeffs)


def test_validation():
    with pytest.raises(ArgumentError):
        LoopElement(np.zeros((3, 2)))
    with pytest.raises(ArgumentError):
        from_curve(make_circle(1.0, 64), 2, [1.0])
    with pytest.raises(ArgumentError):
        lax_evolve(LoopElement(np.eye(3)), {0: 1.0}, 1e-3, 1,
                   integrator="euler")
