"""Bernstein functions, time-dependent symbols and their condition audits."""

from .bernstein import (
    BernsteinSpec,
    derivative_cap,
    eval_phi,
    eval_phi_derivative,
    linear,
    log_minus,
    log_plus,
    log_ratio,
    phi_inverse,
    power,
    relativistic,
    stable,
    sum_stable,
    tabulated,
)
from .symbol import (
    AnisotropicSymbol,
    ClockSymbol,
    CompoundPoissonSymbol,
    DriftSymbol,
    PiecewiseConstant,
    QuadratureSymbol,
    SBMSymbol,
    SumSymbol,
    SymbolSpec,
    accumulate_exponent,
    eval_symbol,
    piecewise,
    radial,
)
from .audit import (
    BernsteinReport,
    SandwichReport,
    SymbolReport,
    geometric_grid,
    psi_inverse_sandwich,
    verify_bernstein_conditions,
    verify_symbol_conditions,
)
