"""The symplectic recursion Y_k and the variational gradients G_k."""

import numpy as np
import numpy.testing as npt
import pytest

from curveflow.curves import (Monodromy, make_circle, make_helix,
                              make_perturbed_circle, resample_arclength)
from curveflow.errors import (ArgumentError, MonodromyCompatibilityError,
                              RangeError)
from curveflow.hierarchy import (check_axis, criticality_residual,
                                 fit_multipliers, gradient_G, gradient_from_Y,
                                 recursion_residual, symplectic_Y,
                                 symplectic_Y_list)


def test_gradients_match_cross_check():
    # two independent routes to G_k: explicit formulas vs T x Y_k
    for curve in (make_circle(1.0, 256), make_helix(1.0, 1.0, 1.0, 256)):
        for k in (1, 2, 3):
            a = gradient_G(k, curve)
            b = gradient_from_Y(k, curve)
            npt.assert_allclose(a, b, atol=1e-7)


def test_circle_low_order_relations():
    c = make_circle(1.0, 256)
    ys = symplectic_Y_list(c, 3)
    npt.assert_allclose(ys[2], -0.5 * ys[0], atol=1e-7)
    npt.assert_allclose(ys[3], -0.5 * ys[1], atol=1e-7)


def test_recursion_residuals_small():
    h = make_helix(1.0, 1.0, 1.0, 256)
    for k in (1, 2, 3, 4):
        assert recursion_residual(k, h) < 1e-7


def test_recursion_residual_fourth_order():
    r1 = recursion_residual(2, make_helix(1.0, 1.0, 1.0, 128))
    r2 = recursion_residual(2, make_helix(1.0, 1.0, 1.0, 256))
    factor = r1 / r2
    assert 16.0 * 0.8 < factor < 16.0 * 1.2


def test_formal_unit_norm():
    # sum_{k+l=m} (Y_k, Y_l) is 1 for m = 0 and 0 for m >= 1
    p = make_perturbed_circle(1.0, 256, 0.05, modes=(2, 3), seed=1)
    ys = symplectic_Y_list(p, 6)
    for m in range(5):
        s = np.zeros(p.n)
        for k in range(m + 1):
            s += np.sum(ys[k] * ys[m - k], axis=1)
        target = 1.0 if m == 0 else 0.0
        npt.assert_allclose(s, target, atol=1e-6)


def test_rotation_equivariance():
    p = make_perturbed_circle(1.0, 256, 0.05, modes=(2, 3), seed=1)
    ys = symplectic_Y_list(p, 4)
    ang = np.array([0.3, 0.4, 0.5])
    th = np.linalg.norm(ang)
    u = ang / th
    ux = np.array([[0, -u[2], u[1]], [u[2], 0, -u[0]], [-u[1], u[0], 0]])
    rot = np.eye(3) + np.sin(th) * ux + (1 - np.cos(th)) * (ux @ ux)
    pr = resample_arclength(p.samples @ rot.T, Monodromy.identity(), p.n)
    ys_r = symplectic_Y_list(pr, 4)
    for k in range(5):
        npt.assert_allclose(ys_r[k], ys[k] @ rot.T, atol=1e-7)


def test_fit_multipliers_circle():
    c = make_circle(1.0, 256)
    fit = fit_multipliers(c, 2)
    npt.assert_allclose(fit.coefficients, [-0.5, 0.0], atol=1e-5)
    npt.assert_allclose(fit.axis_term, 0.0, atol=1e-5)
    assert fit.residual < 1e-5
    assert criticality_residual(c, 2, fit.coefficients, fit.axis_term) < 1e-5


def test_fit_multipliers_helix():
    h = make_helix(1.0, 1.0, 1.0, 256)
    fit = fit_multipliers(h, 2)
    assert fit.residual < 1e-5
    # the constant term must point along the screw axis
    assert abs(fit.axis_term[0]) < 1e-8
    assert abs(fit.axis_term[1]) < 1e-8


def test_fit_multipliers_control():
    # a generic perturbed circle is not a critical point of the k=2 problem
    p = make_perturbed_circle(1.0, 256, 0.05, modes=(2, 3), seed=1)
    fit = fit_multipliers(p, 2)
    assert fit.residual > 1e-2


def test_check_axis_validation():
    # half turn: the rotation part is nontrivial, so only the screw axis fits
    c = make_helix(1.0, 1.0, 0.5, 128)
    npt.assert_allclose(check_axis(c, [0, 0, 1]), [0, 0, 1])
    with pytest.raises(ArgumentError):
        check_axis(c, [0, 0, 2])
    with pytest.raises(MonodromyCompatibilityError):
        check_axis(c, [1, 0, 0])


def test_range_errors():
    c = make_circle(1.0, 64)
    with pytest.raises(RangeError):
        symplectic_Y(-1, c)
    with pytest.raises(RangeError):
        gradient_G(4, c)
    with pytest.raises(ArgumentError):
        gradient_G(-1, c)
    with pytest.raises(ArgumentError):
        criticality_residual(c, 2, [1.0])
