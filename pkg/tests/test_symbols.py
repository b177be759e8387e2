import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levylp.errors import ConfigurationError, DomainError, OrderingError
from levylp.symbols import (
    AnisotropicSymbol,
    ClockSymbol,
    CompoundPoissonSymbol,
    DriftSymbol,
    PiecewiseConstant,
    QuadratureSymbol,
    SBMSymbol,
    SumSymbol,
    accumulate_exponent,
    eval_symbol,
    linear,
    piecewise,
    radial,
    stable,
    verify_symbol_conditions,
)

STEP = piecewise((0.0, 1.0), (1.0, 2.0))


def test_piecewise_constant_pieces_and_integral():
    pc = piecewise((0.0, 1.0, 3.0), (1.0, 2.0, 0.5))
    assert pc(0.5) == 1.0 and pc(1.0) == 2.0 and pc(10.0) == 0.5
    assert pc.pieces(0.5, 3.5) == [(1.0, 0.5), (2.0, 2.0), (0.5, 0.5)]
    assert pc.integral(0.5, 3.5) == pytest.approx(0.5 + 4.0 + 0.25)
    with pytest.raises(ValueError):
        piecewise((0.5,), (1.0,))


def test_sbm_accumulated_exponent_exact():
    # phi(1) + phi(4) with phi = lam^0.5 and sigma = 1 then 2
    sym = SBMSymbol(stable(0.5), STEP, 1)
    assert accumulate_exponent(sym, 0.0, 2.0, 1.0) == pytest.approx(-3.0, rel=1e-15)
    assert np.exp(accumulate_exponent(sym, 0.0, 2.0, 1.0)).real == pytest.approx(0.049787068367863943, rel=1e-14)


def test_clock_symbol():
    sym = ClockSymbol(stable(0.75), STEP, 1)
    xi = 2.0
    assert accumulate_exponent(sym, 0.5, 1.5, xi) == pytest.approx(-(0.5 + 1.0) * 4.0**0.75)
    assert eval_symbol(sym, 1.2, xi) == pytest.approx(-2 * 4.0**0.75)


def test_heat_symbol_value_and_radiality():
    sym = radial(linear(), 2)
    xi = np.array([[3.0, 4.0], [0.0, 5.0]])
    np.testing.assert_allclose(sym.psi(0.0, xi), [-25.0, -25.0])


def test_ordering_and_domain_errors():
    sym = radial(linear(), 1)
    with pytest.raises(OrderingError):
        accumulate_exponent(sym, 1.0, 0.5, 1.0)
    with pytest.raises(DomainError):
        accumulate_exponent(sym, -1.0, 0.5, 1.0)
    with pytest.raises(ConfigurationError):
        sym.psi(0.0, np.ones((3, 2)))


def test_drift_and_poisson_parts():
    drift = DriftSymbol((0.0, 1.0), ((1.0,), (-2.0,)), 1)
    np.testing.assert_allclose(drift.displacement(0.5, 2.0), [0.5 - 2.0])
    assert accumulate_exponent(drift, 0.5, 2.0, 3.0) == pytest.approx(1j * 3.0 * -1.5)
    cp = CompoundPoissonSymbol(2.0, ("cube", 1.0), 1)
    assert eval_symbol(cp, 0.0, 1.0) == pytest.approx(2.0 * (math.sin(1.0) - 1.0))
    both = SumSymbol((radial(stable(0.75), 1), drift, cp))
    assert both.principal is both.parts[0]
    v = accumulate_exponent(both, 0.0, 1.0, 1.0)
    assert v == pytest.approx(-1.0 + 1j * 1.0 + 2.0 * (math.sin(1.0) - 1.0))


def test_quadrature_symbol_matches_closed_form():
    q = QuadratureSymbol(fn=lambda t, xi: -(1 + t) * np.sum(xi**2, axis=-1), phi=linear(), d=1)
    assert accumulate_exponent(q, 0.0, 2.0, 1.5).real == pytest.approx(-(2 + 2) * 2.25, rel=1e-9)


def test_symbol_audit_passes_for_radial_and_modulated():
    for sym in (radial(stable(0.75), 1), SBMSymbol(stable(0.5), STEP, 2), ClockSymbol(stable(0.75), STEP, 1)):
        rep = verify_symbol_conditions(sym)
        assert rep.passed, rep.summary()
        assert rep.delta1 > 0


def test_anisotropic_symbol_fails_the_audit():
    rep = verify_symbol_conditions(AnisotropicSymbol(1.5, d=2))
    assert not rep.passed
    assert not rep.N1_finite
    # second derivative of |xi_1|^1.5 grows like step^-0.5 at xi_1 = 0
    assert rep.N1_refined > 2 * rep.N1


@given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(-5, 5))
def test_exponent_additive_in_time(a, b, c, xi):
    s, r, t = sorted((a, b, c))
    sym = SBMSymbol(stable(0.5), piecewise((0.0, 0.7, 1.9), (1.0, 2.0, 0.5)), 1)
    whole = accumulate_exponent(sym, s, t, xi)
    parts = accumulate_exponent(sym, s, r, xi) + accumulate_exponent(sym, r, t, xi)
    assert whole == pytest.approx(parts, rel=1e-12, abs=1e-12)


@given(st.floats(-10, 10), st.floats(0, 2))
def test_symmetric_symbols_are_real_and_dissipative(xi, t):
    sym = SBMSymbol(stable(0.75), STEP, 1)
    v = eval_symbol(sym, t, xi)
    assert v.imag == 0 and v.real <= 0
    assert eval_symbol(sym, t, -xi) == v
