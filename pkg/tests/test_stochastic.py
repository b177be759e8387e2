import math

import numpy as np
import pytest

from levylp.errors import ConfigurationError, DomainError, ExtrapolationError, PreconditionError
from levylp.grid import GridSpec, SpaceTimeField
from levylp.registry import get_process, get_symbol
from levylp.solver import solve
from levylp.stochastic import (
    ClockProcess,
    CompoundPoissonProcess,
    DriftProcess,
    SBMProcess,
    SumProcess,
    empirical_cf,
    interpolate_periodic,
    mc_solution,
    sample_increments,
    sample_stable_subordinator,
    verify_cf,
)
from levylp.symbols import piecewise

STEP = piecewise((0.0, 1.0), (1.0, 2.0))
# median of the Levy law with scale 0.7^2 / 2 (mpmath), i.e. the 1/2-stable subordinator at dt = 0.7
LEVY_MEDIAN = 0.53853678788784443


def test_subordinator_laplace_and_median():
    S = sample_stable_subordinator(0.5, 0.7, np.random.default_rng(1), 400_000)
    assert np.mean(np.exp(-S)) == pytest.approx(math.exp(-0.7), abs=4 * 0.5 / math.sqrt(len(S)))
    assert np.median(S) == pytest.approx(LEVY_MEDIAN, rel=1e-2)
    S = sample_stable_subordinator(0.75, 0.3, np.random.default_rng(2), 400_000)
    assert np.mean(np.exp(-2 * S)) == pytest.approx(math.exp(-0.3 * 2**0.75), abs=3e-3)


def test_subordinator_domain():
    rng = np.random.default_rng(0)
    with pytest.raises(DomainError):
        sample_stable_subordinator(1.0, 1.0, rng)
    with pytest.raises(DomainError):
        sample_stable_subordinator(0.5, 0.0, rng)


def test_empirical_cf_basic():
    X = np.random.default_rng(0).standard_normal((1000, 1))
    m, se = empirical_cf(X, [0.0])
    assert m == 1 and se == 0
    m, se = empirical_cf(X, [1.0])
    assert abs(m) <= 1 and se > 0


def test_increments_deterministic_and_shapes():
    p = SBMProcess(0.75, STEP, 2)
    a = sample_increments(p, 0.2, 1.4, 25_000, seed=7)
    b = sample_increments(p, 0.2, 1.4, 25_000, seed=7)
    assert a.shape == (25_000, 2)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, sample_increments(p, 0.2, 1.4, 25_000, seed=8))


def test_sum_components_independent():
    p = SumProcess(SBMProcess(0.75), CompoundPoissonProcess(2.0, ("cube", 0.5), 1))
    rep = verify_cf(p, p.symbol(), [(0.0, 1.0), (0.5, 2.0)], np.linspace(0.3, 3, 8)[:, None], 50_000, seed=1)
    assert rep.passed


@pytest.mark.parametrize(
    "proc",
    [
        SBMProcess(0.5, STEP),
        ClockProcess(0.75, STEP),
        DriftProcess((0.0, 1.0), ((1.0,), (-2.0,)), 1),
        SumProcess(SBMProcess(0.75), DriftProcess((0.0,), ((0.5,),), 1)),
    ],
)
def test_verify_cf_matched(proc):
    pairs = [(0.0, 0.5), (0.7, 1.6), (1.2, 2.0)]
    assert verify_cf(proc, proc.symbol(), pairs, np.linspace(0.2, 3, 10)[:, None], 40_000, seed=3).passed


def test_verify_cf_mismatch_fails_and_dimension_raises():
    pairs = [(0.0, 0.5), (0.7, 1.6), (1.2, 2.0)]
    xis = np.linspace(0.2, 3, 10)[:, None]
    rep = verify_cf(SBMProcess(0.5), SBMProcess(0.75).symbol(), pairs, xis, 40_000, seed=3)
    assert not rep.passed
    with pytest.raises(ConfigurationError):
        verify_cf(SBMProcess(0.5, d=2), SBMProcess(0.5).symbol(), pairs, xis, 100)


def test_registry_lookup():
    assert get_process("ex2.4-clock").symbol().d == 1
    assert get_symbol("remark-anisotropic").d == 2
    with pytest.raises(ConfigurationError):
        get_symbol("nope")
    with pytest.raises(ConfigurationError):
        get_process("heat")


def test_interpolation_exact_on_nodes_and_linear_between():
    g = GridSpec(1, 1.0, 16)
    v = np.arange(16.0)
    np.testing.assert_allclose(interpolate_periodic(v, g, g.points()), v)
    assert interpolate_periodic(v, g, np.array([[-1 + 1.5 * g.h]]))[0] == pytest.approx(1.5)


def _bump_source(K=32):
    g = GridSpec(1, 8.0, 128)
    return SpaceTimeField.from_function(g, 1.0, K, lambda t, x: np.exp(-np.sum(x**2, axis=-1)) * (1 + t))


def test_mc_trivial_sources():
    g = GridSpec(1, 8.0, 64)
    pts = np.array([[0.0], [1.0]])
    zero = SpaceTimeField.zeros(g, 1.0, 8)
    m, se = mc_solution(SBMProcess(0.75), zero, 1.0, pts, 1000, seed=0)
    assert np.all(m == 0) and np.all(se == 0)
    one = SpaceTimeField(g, 1.0, np.ones((9, 64)))
    m, se = mc_solution(SBMProcess(0.75), one, 0.5, pts, 1000, seed=0)
    np.testing.assert_allclose(m, 0.5, atol=1e-12)


def test_mc_errors():
    f = _bump_source(8)
    with pytest.raises(ExtrapolationError):
        mc_solution(SBMProcess(0.75), f, 1.0, [[9.0]], 10)
    with pytest.raises(PreconditionError):
        mc_solution(SBMProcess(0.75), f, 0.3, [[0.0]], 10)


def test_mc_deterministic_across_workers():
    f = _bump_source(8)
    pts = np.array([[0.0], [0.5]])
    a = mc_solution(SBMProcess(0.75), f, 1.0, pts, 25_000, seed=4, workers=1)
    b = mc_solution(SBMProcess(0.75), f, 1.0, pts, 25_000, seed=4, workers=3)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def test_mc_matches_solver():
    f = _bump_source(32)
    p = SBMProcess(0.75)
    u = solve(p.symbol(), f)
    pts = np.linspace(-2, 2, 5)[:, None]
    m, se = mc_solution(p, f, 1.0, pts, 20_000, seed=5)
    ref = interpolate_periodic(u.values[-1], f.grid, pts)
    assert np.all(np.abs(m - ref) <= 3 * se + 2e-3)


def test_drift_shift_is_translation():
    # a pure unit drift moves the argument by X_t - X_s = t - s, the same as shift(s) = -s with t fixed
    f = _bump_source(16)
    pts = np.array([[0.0], [0.4]])
    drift = DriftProcess((0.0,), ((1.0,),), 1)
    zero = DriftProcess((0.0,), ((0.0,),), 1)
    a, _ = mc_solution(drift, f, 1.0, pts, 10, seed=0)
    b, _ = mc_solution(zero, f, 1.0, pts, 10, seed=0, shift=lambda s: 1.0 - s)
    np.testing.assert_allclose(a, b, atol=1e-12)
