"""Named symbol and process instances referenced by stable ids."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import ConfigurationError
from .stochastic import ClockProcess, CompoundPoissonProcess, DriftProcess, SBMProcess, SumProcess
from .symbols.bernstein import linear, stable
from .symbols.symbol import AnisotropicSymbol, ClockSymbol, piecewise, radial

STEP = piecewise((0.0, 1.0), (1.0, 2.0))  # 1 on [0, 1), 2 afterwards


@dataclass(frozen=True)
class Entry:
    symbol: Callable  # d -> SymbolSpec
    process: Callable | None = None  # d -> ProcessSpec
    description: str = ""


def _sbm(alpha, sigma, name):
    return Entry(
        lambda d: SBMProcess(alpha, sigma, d, name=name).symbol(),
        lambda d: SBMProcess(alpha, sigma, d, name=name),
        f"subordinate BM, stable index {alpha}, sigma modulation {sigma.values}",
    )


def _clock(alpha, a, name):
    return Entry(
        lambda d: ClockSymbol(stable(alpha), a, d, name=name),
        lambda d: ClockProcess(alpha, a, d, name=name),
        f"stable subordinate BM on the clock int a, a = {a.values}",
    )


REGISTRY: dict[str, Entry] = {
    "heat": Entry(lambda d: radial(linear(), d, "heat"), None, "Psi = -|xi|^2"),
    "stable-1.0": _sbm(0.5, STEP.constant(1.0), "stable-1.0"),
    "stable-1.5": _sbm(0.75, STEP.constant(1.0), "stable-1.5"),
    "clock-1.5": _clock(0.75, STEP, "clock-1.5"),
    "ex2.3-sbm-alpha05-sigma1": _sbm(0.5, STEP.constant(1.0), "ex2.3-sbm-alpha05-sigma1"),
    "ex2.3-sbm-alpha05-sigma2": _sbm(0.5, STEP.constant(2.0), "ex2.3-sbm-alpha05-sigma2"),
    "ex2.3-sbm-alpha05-sigma12": _sbm(0.5, STEP, "ex2.3-sbm-alpha05-sigma12"),
    "ex2.3-sbm-alpha075-sigma1": _sbm(0.75, STEP.constant(1.0), "ex2.3-sbm-alpha075-sigma1"),
    "ex2.3-sbm-alpha075-sigma2": _sbm(0.75, STEP.constant(2.0), "ex2.3-sbm-alpha075-sigma2"),
    "ex2.3-sbm-alpha075-sigma12": _sbm(0.75, STEP, "ex2.3-sbm-alpha075-sigma12"),
    "ex2.4-clock": _clock(0.5, STEP, "ex2.4-clock"),
    "ex2.4-clock-alpha075": _clock(0.75, STEP, "ex2.4-clock-alpha075"),
    "remark-anisotropic": Entry(
        lambda d: AnisotropicSymbol(1.5, d=max(d, 2), name="remark-anisotropic"),
        None,
        "sum of |xi_i|^1.5 over coordinates",
    ),
    "sum-drift": Entry(
        lambda d: SumProcess(SBMProcess(0.75, d=d), DriftProcess((0.0,), ((1.0,) * d,), d), name="sum-drift").symbol(),
        lambda d: SumProcess(SBMProcess(0.75, d=d), DriftProcess((0.0,), ((1.0,) * d,), d), name="sum-drift"),
        "stable-1.5 plus unit drift",
    ),
    "sum-poisson": Entry(
        lambda d: SumProcess(
            SBMProcess(0.75, d=d), CompoundPoissonProcess(1.0, ("cube", 0.5), d), name="sum-poisson"
        ).symbol(),
        lambda d: SumProcess(SBMProcess(0.75, d=d), CompoundPoissonProcess(1.0, ("cube", 0.5), d), name="sum-poisson"),
        "stable-1.5 plus compound Poisson jumps uniform on [-0.5, 0.5]^d",
    ),
}


def get_symbol(name: str, d: int = 1):
    try:
        return REGISTRY[name].symbol(d)
    except KeyError:
        raise ConfigurationError(f"unknown symbol id {name!r}; known: {sorted(REGISTRY)}") from None


def get_process(name: str, d: int = 1):
    entry = REGISTRY.get(name)
    if entry is None or entry.process is None:
        known = sorted(k for k, v in REGISTRY.items() if v.process is not None)
        raise ConfigurationError(f"unknown process id {name!r}; known: {known}")
    return entry.process(d)
