import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levylp.errors import DomainError, OrderError, RangeError
from levylp.symbols import (
    derivative_cap,
    eval_phi,
    eval_phi_derivative,
    linear,
    log_minus,
    log_plus,
    log_ratio,
    phi_inverse,
    power,
    psi_inverse_sandwich,
    relativistic,
    stable,
    sum_stable,
    tabulated,
    verify_bernstein_conditions,
)

# value, first and second derivative from a 30-digit mpmath oracle
ORACLE = [
    (stable(0.5), 2.0, (1.414213562373095, 0.35355339059327376, -0.088388347648318441)),
    (sum_stable(0.25, 0.75), 3.0, (3.5955810699072701, 0.67954959865140212, -0.07490793895640146)),
    (log_plus(0.5, 0.3), 10.0, (4.11101501939487, 0.25230783528026815, -0.011093332516594246)),
    (log_minus(0.5, 0.2), 10.0, (2.6548131349811105, 0.11261078274058874, -0.0059042342924221453)),
    (relativistic(0.5, 1.0), 1e-8, (4.9999999875000001e-9, 0.49999999750000002, -0.24999999625000005)),
    (relativistic(0.5, 1.0), 3.0, (1.0, 0.25, -0.03125)),
    (log_ratio(1.0), 5.0, (4.2576418080620784, 0.6010122826849544, -0.028364275722747152)),
]


@pytest.mark.parametrize("spec,lam,expected", ORACLE, ids=lambda v: getattr(v, "label", None))
def test_values_and_derivatives_match_oracle(spec, lam, expected):
    for n, want in enumerate(expected):
        got = eval_phi_derivative(spec, n, lam)
        assert got == pytest.approx(want, rel=1e-12)


def test_derivative_cap():
    assert [derivative_cap(d) for d in (1, 2, 3)] == [1, 2, 2]
    with pytest.raises(OrderError):
        eval_phi_derivative(stable(0.5), 2, 1.0, d=1)
    with pytest.raises(DomainError):
        derivative_cap(0)


def test_domain_errors():
    with pytest.raises(DomainError):
        eval_phi(stable(0.5), 0.0)
    with pytest.raises(DomainError):
        stable(1.5)
    with pytest.raises(DomainError):
        log_plus(0.5, 1.0)
    with pytest.raises(DomainError):
        phi_inverse(linear(), -1.0)


def test_stable_one_is_linear():
    assert stable(1.0) == linear()


def test_tabulated_interpolates_and_guards_range():
    lam = np.geomspace(1e-2, 1e2, 9)
    spec = tabulated(lam, lam**0.5)
    assert eval_phi(spec, 3.0) == pytest.approx(3.0**0.5, rel=1e-12)
    with pytest.raises(RangeError):
        eval_phi(spec, 1e3)
    assert phi_inverse(spec, 2.0) == pytest.approx(4.0, rel=1e-12)


@pytest.mark.parametrize(
    "spec",
    [stable(0.5), stable(0.75), sum_stable(0.25, 0.75), log_plus(0.5, 0.3), log_minus(0.5, 0.2),
     relativistic(0.5, 1.0), linear(), log_ratio(1.0)],
    ids=lambda s: s.label,
)
def test_audit_passes_with_unit_constants(spec):
    rep = verify_bernstein_conditions(spec)
    assert rep.passed
    assert rep.linear_ratio_ok
    assert rep.N_lo == pytest.approx(1.0, abs=0.05)


def test_relativistic_is_not_weakly_scaling_below_one():
    rep = verify_bernstein_conditions(relativistic(0.5, 1.0))
    assert rep.passed and not rep.weak_scaling_below_one


def test_audit_rejects_short_grid():
    from levylp.errors import PreconditionError

    with pytest.raises(PreconditionError):
        verify_bernstein_conditions(stable(0.5), np.geomspace(1, 10, 100))


def test_power_above_one_is_not_bernstein():
    rep = verify_bernstein_conditions(power(1.5))
    assert rep.linear_ratio_ok is None
    assert not power(1.5).is_bernstein


@pytest.mark.parametrize("spec", [stable(0.5), log_plus(0.5, 0.3), relativistic(0.5, 2.0)], ids=lambda s: s.label)
def test_inverse_sandwich(spec):
    rep = psi_inverse_sandwich(spec)
    assert rep.passed and rep.violations == 0


SPECS = st.sampled_from([stable(0.3), sum_stable(0.2, 0.6), log_plus(0.4, 0.3), log_minus(0.6, 0.3),
                         relativistic(0.7, 0.5), log_ratio(0.8)])
LAM = st.floats(1e-4, 1e4)


@given(SPECS, LAM, LAM)
def test_monotone_and_sublinear_ratio(spec, l1, l2):
    l1, l2 = min(l1, l2), max(l1, l2)
    r = eval_phi(spec, l2) / eval_phi(spec, l1)
    assert r >= 1 - 1e-12
    assert r <= l2 / l1 * (1 + 1e-12)


@given(SPECS, LAM)
def test_inverse_roundtrip(spec, lam):
    assert phi_inverse(spec, eval_phi(spec, lam)) == pytest.approx(lam, rel=1e-8)


@given(SPECS, LAM, st.floats(1.0, 1e3))
def test_declared_scaling_bounds(spec, lam, ratio):
    r = eval_phi(spec, lam * ratio) / eval_phi(spec, lam)
    assert spec.N_lo * ratio**spec.delta_lo * (1 - 1e-9) <= r <= spec.N_hi * ratio**spec.delta_hi * (1 + 1e-9)
