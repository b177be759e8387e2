"""Time-dependent symbols Psi(t, xi) and their accumulated exponents.

Frequency arguments are arrays whose last axis has length ``d``; scalar
outputs broadcast over the leading axes.  Phi(s, t, xi) is the time integral
of Psi over [s, t]; it is exact for piecewise-constant modulation and uses
adaptive vector quadrature otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad_vec

from ..errors import ConfigurationError, DomainError, OrderingError
from .bernstein import BernsteinSpec, linear


@dataclass(frozen=True)
class PiecewiseConstant:
    """Right-continuous step function: ``values[j]`` on ``[breaks[j], breaks[j+1])``.

    ``breaks[0]`` must be 0 and the last value extends to infinity.
    """

    breaks: tuple[float, ...] = (0.0,)
    values: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        if len(self.breaks) != len(self.values) or not self.breaks:
            raise ValueError("breaks and values must have equal nonzero length")
        if self.breaks[0] != 0.0 or any(b >= c for b, c in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breaks must start at 0 and increase strictly")

    @classmethod
    def constant(cls, value: float) -> "PiecewiseConstant":
        return cls((0.0,), (float(value),))

    def __call__(self, t: float) -> float:
        j = int(np.searchsorted(self.breaks, t, side="right")) - 1
        return self.values[max(j, 0)]

    def pieces(self, s: float, t: float) -> list[tuple[float, float]]:
        """(value, length) for each constant piece overlapping [s, t]."""
        out = []
        edges = list(self.breaks[1:]) + [math.inf]
        for v, a, b in zip(self.values, self.breaks, edges):
            lo, hi = max(a, s), min(b, t)
            if hi > lo:
                out.append((v, hi - lo))
        return out

    def integral(self, s: float, t: float) -> float:
        return math.fsum(v * w for v, w in self.pieces(s, t))

    @property
    def bounds(self) -> tuple[float, float]:
        return min(self.values), max(self.values)


def _as_xi(xi, d):
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0:
        xi = xi[None]
    if xi.shape[-1] != d:
        raise ConfigurationError(f"frequency has last axis {xi.shape[-1]}, symbol dimension is {d}")
    return xi


def _sqnorm(xi):
    return np.einsum("...i,...i->...", xi, xi)


class SymbolSpec:
    """Base class.  Subclasses implement ``psi`` and ``accumulate``.

    Attributes
    ----------
    d : spatial dimension
    phi : reference Bernstein function for the ellipticity/derivative audit
    delta1 : declared ellipticity constant
    exact : whether ``accumulate`` is a closed-form time integral
    symmetric : Psi(t, -xi) == conj(Psi(t, xi))
    """

    d: int
    phi: BernsteinSpec
    delta1: float = 1.0
    exact: bool = True
    symmetric: bool = True
    name: str = ""

    def psi(self, t: float, xi) -> np.ndarray:
        raise NotImplementedError

    def accumulate(self, s: float, t: float, xi) -> np.ndarray:
        raise NotImplementedError

    @property
    def principal(self) -> "SymbolSpec":
        """The smooth pure-jump part Psi_{X^1} subject to the symbol audit."""
        return self

    def time_breaks(self) -> tuple[float, ...]:
        return (0.0,)


@dataclass(frozen=True, eq=False)
class SBMSymbol(SymbolSpec):
    """Psi(t, xi) = -phi((sigma(t) |xi|)^2): integral of sigma against a subordinate BM."""

    phi: BernsteinSpec
    sigma: PiecewiseConstant = field(default_factory=lambda: PiecewiseConstant.constant(1.0))
    d: int = 1
    name: str = ""

    def __post_init__(self):
        lo = min(abs(v) for v in self.sigma.values)
        if lo == 0:
            # sigma == 0 is allowed for the degenerate sampler check; ellipticity is lost
            object.__setattr__(self, "delta1", 0.0)
        else:
            object.__setattr__(self, "delta1", min(1.0, lo ** (2 * self.phi.delta_hi)))

    def psi(self, t, xi):
        xi = _as_xi(xi, self.d)
        s2 = self.sigma(t) ** 2
        return -(self.phi.at_zero_ok(s2 * _sqnorm(xi))).astype(complex)

    def accumulate(self, s, t, xi):
        _check_order(s, t)
        xi = _as_xi(xi, self.d)
        r2 = _sqnorm(xi)
        out = np.zeros(r2.shape)
        for v, w in self.sigma.pieces(s, t):
            out -= w * self.phi.at_zero_ok(v * v * r2)
        return out.astype(complex)

    def time_breaks(self):
        return self.sigma.breaks


@dataclass(frozen=True, eq=False)
class ClockSymbol(SymbolSpec):
    """Psi(t, xi) = -a(t) phi(|xi|^2): subordinate BM run on an additive clock."""

    phi: BernsteinSpec
    a: PiecewiseConstant = field(default_factory=lambda: PiecewiseConstant.constant(1.0))
    d: int = 1
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "delta1", self.a.bounds[0])

    def psi(self, t, xi):
        xi = _as_xi(xi, self.d)
        return -(self.a(t) * self.phi.at_zero_ok(_sqnorm(xi))).astype(complex)

    def accumulate(self, s, t, xi):
        _check_order(s, t)
        xi = _as_xi(xi, self.d)
        return -(self.a.integral(s, t) * self.phi.at_zero_ok(_sqnorm(xi))).astype(complex)

    def time_breaks(self):
        return self.a.breaks


@dataclass(frozen=True, eq=False)
class AnisotropicSymbol(SymbolSpec):
    """Psi(t, xi) = -a(t) (|xi_1|^alpha + ... + |xi_d|^alpha), the axis-stable symbol.

    Reference phi is lam**(alpha/2), so the ellipticity bound holds; the
    derivative bound fails near the coordinate hyperplanes.
    """

    alpha: float
    a: PiecewiseConstant = field(default_factory=lambda: PiecewiseConstant.constant(1.0))
    d: int = 2
    name: str = ""

    def __post_init__(self):
        from .bernstein import power

        object.__setattr__(self, "phi", power(self.alpha / 2))
        object.__setattr__(self, "delta1", self.a.bounds[0])

    def _base(self, xi):
        return np.sum(np.abs(xi) ** self.alpha, axis=-1)

    def psi(self, t, xi):
        xi = _as_xi(xi, self.d)
        return -(self.a(t) * self._base(xi)).astype(complex)

    def accumulate(self, s, t, xi):
        _check_order(s, t)
        xi = _as_xi(xi, self.d)
        return -(self.a.integral(s, t) * self._base(xi)).astype(complex)

    def time_breaks(self):
        return self.a.breaks


@dataclass(frozen=True, eq=False)
class DriftSymbol(SymbolSpec):
    """Psi(t, xi) = i b(t) . xi for a deterministic piecewise-constant drift b."""

    breaks: tuple[float, ...] = (0.0,)
    velocities: tuple[tuple[float, ...], ...] = ((0.0,),)
    d: int = 1
    name: str = ""

    def __post_init__(self):
        if any(len(v) != self.d for v in self.velocities):
            raise ConfigurationError("drift velocity dimension mismatch")
        object.__setattr__(self, "phi", linear())
        object.__setattr__(self, "delta1", 0.0)
        object.__setattr__(self, "symmetric", True)

    def _component(self, j):
        return PiecewiseConstant(self.breaks, tuple(v[j] for v in self.velocities))

    def displacement(self, s, t) -> np.ndarray:
        return np.array([self._component(j).integral(s, t) for j in range(self.d)])

    def psi(self, t, xi):
        xi = _as_xi(xi, self.d)
        b = np.array([self._component(j)(t) for j in range(self.d)])
        return 1j * (xi @ b)

    def accumulate(self, s, t, xi):
        _check_order(s, t)
        xi = _as_xi(xi, self.d)
        return 1j * (xi @ self.displacement(s, t))

    def time_breaks(self):
        return self.breaks


@dataclass(frozen=True, eq=False)
class CompoundPoissonSymbol(SymbolSpec):
    """Psi(xi) = rate (E exp(i xi.J) - 1), jumps J bounded.

    ``jump`` is ``("cube", r)`` for J uniform on [-r, r]^d or ``("point", v)``
    for a fixed jump vector v.
    """

    rate: float = 1.0
    jump: tuple = ("cube", 1.0)
    d: int = 1
    name: str = ""

    def __post_init__(self):
        if self.rate < 0:
            raise DomainError("jump rate must be nonnegative")
        object.__setattr__(self, "phi", linear())
        object.__setattr__(self, "delta1", 0.0)
        object.__setattr__(self, "symmetric", self.jump[0] == "cube")

    def jump_cf(self, xi):
        kind, par = self.jump
        if kind == "cube":
            return np.prod(np.sinc(xi * par / np.pi), axis=-1).astype(complex)
        if kind == "point":
            return np.exp(1j * (xi @ np.asarray(par, dtype=float)))
        raise ConfigurationError(f"unknown jump law {kind!r}")

    def psi(self, t, xi):
        xi = _as_xi(xi, self.d)
        return self.rate * (self.jump_cf(xi) - 1.0)

    def accumulate(self, s, t, xi):
        _check_order(s, t)
        return (t - s) * self.psi(s, xi)


@dataclass(frozen=True, eq=False)
class SumSymbol(SymbolSpec):
    """Psi_X = Psi_{X^1} + Psi_{X^2}; the audit applies to the first part."""

    parts: tuple[SymbolSpec, ...] = ()
    name: str = ""

    def __post_init__(self):
        if not self.parts:
            raise ConfigurationError("SumSymbol needs at least one part")
        d = self.parts[0].d
        if any(p.d != d for p in self.parts):
            raise ConfigurationError("SumSymbol parts differ in dimension")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "phi", self.parts[0].phi)
        object.__setattr__(self, "delta1", self.parts[0].delta1)
        object.__setattr__(self, "exact", all(p.exact for p in self.parts))
        object.__setattr__(self, "symmetric", all(p.symmetric for p in self.parts))

    @property
    def principal(self):
        return self.parts[0]

    def psi(self, t, xi):
        return sum(p.psi(t, xi) for p in self.parts)

    def accumulate(self, s, t, xi):
        _check_order(s, t)
        return sum(p.accumulate(s, t, xi) for p in self.parts)

    def time_breaks(self):
        return tuple(sorted(set().union(*(p.time_breaks() for p in self.parts))))


@dataclass(frozen=True, eq=False)
class QuadratureSymbol(SymbolSpec):
    """Arbitrary callable Psi(t, xi); Phi by adaptive quadrature (rel tol 1e-10)."""

    fn: Callable = None
    phi: BernsteinSpec = field(default_factory=linear)
    d: int = 1
    delta1: float = 1.0
    symmetric: bool = True
    epsrel: float = 1e-10
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "exact", False)

    def psi(self, t, xi):
        xi = _as_xi(xi, self.d)
        return np.asarray(self.fn(t, xi), dtype=complex)

    def accumulate(self, s, t, xi):
        _check_order(s, t)
        xi = _as_xi(xi, self.d)
        if t == s:
            return np.zeros(xi.shape[:-1], dtype=complex)
        shape = xi.shape[:-1]

        def integrand(r):
            v = self.psi(r, xi).reshape(-1)
            return np.concatenate([v.real, v.imag])

        val, _ = quad_vec(integrand, s, t, epsrel=self.epsrel, epsabs=0.0, norm="max")
        n = val.size // 2
        return (val[:n] + 1j * val[n:]).reshape(shape)


def _check_order(s, t):
    if s > t:
        raise OrderingError(f"accumulate_exponent needs s <= t, got s={s}, t={t}")
    if s < 0:
        raise DomainError("times must be nonnegative")


# -- module-level operations -----------------------------------------------------

def eval_symbol(spec: SymbolSpec, t: float, xi) -> np.ndarray | complex:
    out = spec.psi(t, xi)
    return complex(out) if np.ndim(out) == 0 else out


def accumulate_exponent(spec: SymbolSpec, s: float, t: float, xi) -> np.ndarray | complex:
    out = spec.accumulate(s, t, xi)
    return complex(out) if np.ndim(out) == 0 else out


def radial(phi: BernsteinSpec, d: int = 1, name: str = "") -> SBMSymbol:
    """Time-homogeneous Psi(xi) = -phi(|xi|^2)."""
    return SBMSymbol(phi=phi, d=d, name=name)


def piecewise(breaks: Sequence[float], values: Sequence[float]) -> PiecewiseConstant:
    return PiecewiseConstant(tuple(float(b) for b in breaks), tuple(float(v) for v in values))
