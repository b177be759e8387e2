import math

import numpy as np
import pytest

from levylp.errors import PreconditionError, ResolutionError
from levylp.grid import GridSpec
from levylp.kernels import (
    chapman_kolmogorov_residual,
    compute_kernel,
    compute_scaled_kernels,
    hormander_integral,
    psi_at_xi_sandwich,
    q1_relation_residual,
    scaling_factor,
    subadditivity_constant,
    tail_and_difference_estimates,
    verify_kernel_bounds,
)
from levylp.symbols import ClockSymbol, linear, piecewise, radial, stable

HEAT = radial(linear(), 1)


def test_heat_kernel_closed_form():
    g = GridSpec(1, 8.0, 64)
    k = compute_kernel(HEAT, linear(), 0.0, 0.5, g)
    x = g.points()[..., 0]
    exact = np.exp(-(x**2) / 2) / np.sqrt(2 * np.pi)
    inner = np.abs(x) <= 4
    assert np.max(np.abs(k.real - exact)[inner] / exact[inner]) < 1e-6
    # at x = 0, t - s = 1/2 the kernel is 1/sqrt(2 pi)
    assert k.real[np.argmin(np.abs(x))] == pytest.approx(0.3989422804014327, rel=1e-12)
    assert k.mass == pytest.approx(1.0, abs=1e-12)
    assert k.imag_ratio < 1e-12


def test_cauchy_kernel_periodized():
    # psi = -|xi|: p(t, x) = t / (pi (t^2 + x^2)); on the torus the periodized sum
    # is sinh(pi t / L) / (2 L (cosh(pi t / L) - cos(pi x / L)))
    sym = radial(stable(0.5), 1)
    g = GridSpec(1, 16.0, 2048)
    k = compute_kernel(sym, stable(0.5), 0.0, 1.0, g)
    x = g.points()[..., 0]
    L = g.L
    per = np.sinh(np.pi / L) / (2 * L * (np.cosh(np.pi / L) - np.cos(np.pi * x / L)))
    np.testing.assert_allclose(k.real, per, rtol=1e-10)
    assert k.real[g.M // 2] == pytest.approx(per[g.M // 2], rel=1e-12)


def test_resolution_error_reports_required_M():
    sym = radial(stable(0.5), 1)
    with pytest.raises(ResolutionError) as err:
        compute_kernel(sym, stable(0.5), 0.0, 1.0, GridSpec(1, 8.0, 64))
    assert err.value.required_M >= 128


def test_kernel_preconditions():
    with pytest.raises(PreconditionError):
        compute_kernel(HEAT, linear(), 1.0, 1.0, GridSpec(1, 8.0, 64))


@pytest.mark.parametrize("alpha", [0.75, 1.0])
def test_mass_and_q1_relation(alpha):
    phi = stable(alpha)
    sym = radial(phi, 1)
    g = GridSpec(1, 32.0, 4096)
    assert compute_kernel(sym, phi, 0.2, 1.0, g).mass == pytest.approx(1.0, abs=1e-6)
    assert q1_relation_residual(sym, phi, 0.2, 1.0, GridSpec(1, 16.0, 1024)) < 1e-8


def test_scaling_factor_is_inverse_square_root():
    # a_tau = psi^{-1}(1/tau)^{1/2}; for psi = lam^0.5: a_tau = tau^{-1}
    assert scaling_factor(stable(0.5), 4.0) == pytest.approx(0.25)
    assert scaling_factor(linear(), 4.0) == pytest.approx(0.5)


def test_heat_scaled_kernels_self_similar():
    g = GridSpec(1, 16.0, 256)
    a = compute_scaled_kernels(HEAT, linear(), 0.0, 0.5, g)
    b = compute_scaled_kernels(HEAT, linear(), 1.0, 3.0, g)
    np.testing.assert_allclose(a["q1"].real, b["q1"].real, atol=1e-13)
    np.testing.assert_allclose(a["q3"].real, b["q3"].real, atol=1e-13)
    assert a["q2"][0].imag_ratio < 1e-12  # q2 is real with the i xi convention


def test_chapman_kolmogorov():
    sym = ClockSymbol(stable(0.75), piecewise((0.0, 1.0), (1.0, 2.0)), 1)
    assert chapman_kolmogorov_residual(sym, stable(0.75), 0.3, 0.9, 1.6, GridSpec(1, 32.0, 2048)) < 1e-10


def test_kernel_bounds_stable_under_doubling():
    phi = stable(0.75)
    rep = verify_kernel_bounds(radial(phi, 1), phi, [(0.0, 0.5), (0.5, 2.0)], GridSpec(1, 32.0, 1024))
    assert rep.passed and rep.max_rel_change < 0.2


def test_psi_at_xi_sandwich():
    for phi in (stable(0.5), stable(0.75), linear()):
        rep = psi_at_xi_sandwich(phi)
        assert rep["violations"] == 0


def test_tail_estimate_decays_in_c():
    phi = linear()
    g = GridSpec(1, 16.0, 256)
    vals = [tail_and_difference_estimates(HEAT, phi, 0.5, 1.0, 0.25, c, 0.1, g)["tail"]["lhs"] for c in (0.5, 1.0, 2.0)]
    assert vals[0] > vals[1] > vals[2] > 0


def test_subadditivity_constant_linear():
    # phi(c) = 1/a_c = c^{1/2} for the heat case, phi(t+s) <= phi(t) + phi(s)
    assert subadditivity_constant(linear()) == pytest.approx(1.0, abs=1e-6)


def test_hormander_heat_identical_points_and_value():
    assert hormander_integral(HEAT, linear(), (1.0, [0.0]), (1.0, [0.0])) == 0.0
    v32 = hormander_integral(HEAT, linear(), (1.2, [0.3]), (0.7, [-0.2]), R=32.0, grid=GridSpec(1, 32.0, 2048))
    v64 = hormander_integral(HEAT, linear(), (1.2, [0.3]), (0.7, [-0.2]), R=64.0, grid=GridSpec(1, 64.0, 4096))
    assert math.isfinite(v32) and v32 > 0
    assert v64 == pytest.approx(v32, rel=1e-3)
