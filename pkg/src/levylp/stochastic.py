"""Samplers for modulated subordinate Brownian motions and additive-clock processes,
characteristic-function checks and the Monte Carlo solution formula.

Brownian motion is normalized so that E exp(i xi . W_t) = exp(-t |xi|^2), i.e. each
coordinate has variance 2t.  Randomness is drawn in fixed-size blocks whose streams
derive from (seed, block index), so results do not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, ExtrapolationError, OrderingError, PreconditionError
from .grid import SpaceTimeField
from .symbols.bernstein import stable
from .symbols.symbol import (
    ClockSymbol,
    CompoundPoissonSymbol,
    DriftSymbol,
    PiecewiseConstant,
    SBMSymbol,
    SumSymbol,
    SymbolSpec,
)

BLOCK = 10_000


def sample_stable_subordinator(alpha: float, dt: float, rng: np.random.Generator, size=None):
    """Increment over dt of the alpha-stable subordinator, E exp(-lam S) = exp(-dt lam^alpha).

    Kanter's representation: S_1 = (A(U) / E)^{(1-alpha)/alpha} with U uniform on (0, pi),
    E standard exponential, A(u) = [sin(alpha u)^alpha sin((1-alpha) u)^{1-alpha} / sin u]^{1/(1-alpha)};
    then S_dt = dt^{1/alpha} S_1.
    """
    if not 0 < alpha < 1:
        raise DomainError("stable subordinator needs 0 < alpha < 1")
    if not dt > 0:
        raise DomainError("dt must be positive")
    u = np.pi * (1.0 - rng.random(size))  # (0, pi]
    u = np.minimum(u, np.pi * (1 - 1e-16))
    e = rng.standard_exponential(size)
    log_a = (alpha * np.log(np.sin(alpha * u)) + (1 - alpha) * np.log(np.sin((1 - alpha) * u)) - np.log(np.sin(u))) / (
        1 - alpha
    )
    log_s = (1 - alpha) / alpha * (log_a - np.log(e)) + math.log(dt) / alpha
    return np.exp(log_s)


# -- process descriptions -------------------------------------------------------------------

class ProcessSpec:
    d: int
    name: str = ""

    def symbol(self) -> SymbolSpec:
        raise NotImplementedError

    def sample_increment(self, s: float, t: float, rng: np.random.Generator, n: int) -> np.ndarray:
        """n independent draws of X_t - X_s, shape (n, d)."""
        raise NotImplementedError

    def step_increments(self, times: np.ndarray, rng: np.random.Generator, n: int) -> np.ndarray:
        """Independent increments over consecutive mesh intervals, shape (n, K, d)."""
        return np.stack([self.sample_increment(a, b, rng, n) for a, b in zip(times[:-1], times[1:])], axis=1)

    def streams(self, rng_seed) -> tuple:
        return (np.random.default_rng(rng_seed),)


def _check(s, t):
    if s > t:
        raise OrderingError(f"need s <= t, got {s} > {t}")


@dataclass(frozen=True)
class SBMProcess(ProcessSpec):
    """X_t = int_0^t sigma(r) dY_r, Y = W(S) with an alpha-stable subordinator S."""

    alpha: float
    sigma: PiecewiseConstant = field(default_factory=lambda: PiecewiseConstant.constant(1.0))
    d: int = 1
    name: str = ""

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")

    def symbol(self):
        return SBMSymbol(stable(self.alpha), self.sigma, self.d, name=self.name)

    def sample_increment(self, s, t, rng, n):
        _check(s, t)
        out = np.zeros((n, self.d))
        for v, w in self.sigma.pieces(s, t):
            if v == 0:
                continue
            S = sample_stable_subordinator(self.alpha, w, rng, n)
            out += v * np.sqrt(2 * S)[:, None] * rng.standard_normal((n, self.d))
        return out


@dataclass(frozen=True)
class ClockProcess(ProcessSpec):
    """Subordinate BM run on the additive clock theta(t) = int_0^t a(r) dr."""

    alpha: float
    a: PiecewiseConstant = field(default_factory=lambda: PiecewiseConstant.constant(1.0))
    d: int = 1
    name: str = ""

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")

    def symbol(self):
        return ClockSymbol(stable(self.alpha), self.a, self.d, name=self.name)

    def sample_increment(self, s, t, rng, n):
        _check(s, t)
        theta = self.a.integral(s, t)
        if theta <= 0:
            return np.zeros((n, self.d))
        S = sample_stable_subordinator(self.alpha, theta, rng, n)
        return np.sqrt(2 * S)[:, None] * rng.standard_normal((n, self.d))


@dataclass(frozen=True)
class DriftProcess(ProcessSpec):
    breaks: tuple = (0.0,)
    velocities: tuple = ((1.0,),)
    d: int = 1
    name: str = ""

    def symbol(self):
        return DriftSymbol(self.breaks, self.velocities, self.d)

    def sample_increment(self, s, t, rng, n):
        _check(s, t)
        return np.broadcast_to(self.symbol().displacement(s, t), (n, self.d)).copy()


@dataclass(frozen=True)
class CompoundPoissonProcess(ProcessSpec):
    rate: float = 1.0
    jump: tuple = ("cube", 1.0)
    d: int = 1
    name: str = ""

    def symbol(self):
        return CompoundPoissonSymbol(self.rate, self.jump, self.d)

    def sample_increment(self, s, t, rng, n):
        _check(s, t)
        counts = rng.poisson(self.rate * (t - s), n)
        out = np.zeros((n, self.d))
        total = int(counts.sum())
        if total == 0:
            return out
        kind, par = self.jump
        if kind == "cube":
            jumps = rng.uniform(-par, par, size=(total, self.d))
        elif kind == "point":
            jumps = np.broadcast_to(np.asarray(par, dtype=float), (total, self.d))
        else:
            raise ConfigurationError(f"unknown jump law {kind!r}")
        owner = np.repeat(np.arange(n), counts)
        np.add.at(out, owner, jumps)
        return out


@dataclass(frozen=True)
class SumProcess(ProcessSpec):
    """X = X1 + X2 with X2 drawn from a stream independent of X1's."""

    x1: ProcessSpec = None
    x2: ProcessSpec = None
    name: str = ""

    def __post_init__(self):
        if self.x1.d != self.x2.d:
            raise ConfigurationError("summands differ in dimension")

    @property
    def d(self):
        return self.x1.d

    def symbol(self):
        return SumSymbol((self.x1.symbol(), self.x2.symbol()), name=self.name)

    def streams(self, rng_seed):
        ss = rng_seed if isinstance(rng_seed, np.random.SeedSequence) else np.random.SeedSequence(rng_seed)
        # explicit child keys instead of spawn(), which would advance ss
        kids = [np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key + (i,)) for i in range(2)]
        return tuple(np.random.default_rng(k) for k in kids)

    def sample_increment(self, s, t, rng, n, rng2=None):
        rng2 = rng if rng2 is None else rng2
        return self.x1.sample_increment(s, t, rng, n) + self.x2.sample_increment(s, t, rng2, n)

    def step_increments(self, times, rng, n, rng2=None):
        rng2 = rng if rng2 is None else rng2
        return self.x1.step_increments(times, rng, n) + self.x2.step_increments(times, rng2, n)


def sample_increment(spec: ProcessSpec, s: float, t: float, rng, n: int = 1) -> np.ndarray:
    out = spec.sample_increment(s, t, rng, n)
    return out[0] if n == 1 else out


def _block_seeds(seed: int, n: int):
    nb = -(-n // BLOCK)
    return [(np.random.SeedSequence([seed, b]), min(BLOCK, n - b * BLOCK)) for b in range(nb)]


def sample_increments(spec: ProcessSpec, s: float, t: float, n: int, seed: int) -> np.ndarray:
    """n increments X_t - X_s, deterministic in (seed, n)."""
    parts = []
    for ss, m in _block_seeds(seed, n):
        streams = spec.streams(ss)
        if len(streams) == 2:
            parts.append(spec.sample_increment(s, t, streams[0], m, rng2=streams[1]))
        else:
            parts.append(spec.sample_increment(s, t, streams[0], m))
    return np.concatenate(parts)


# -- characteristic functions -----------------------------------------------------------------

def empirical_cf(samples: np.ndarray, xi) -> tuple[complex, float]:
    """(1/n) sum exp(i xi . X) and its standard error sqrt((1 - |m|^2)/n)."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    n = samples.shape[0]
    ph = samples @ xi
    m = complex(np.mean(np.cos(ph)), np.mean(np.sin(ph)))
    return m, math.sqrt(max(1.0 - abs(m) ** 2, 0.0) / n)


@dataclass
class CFReport:
    rows: list
    fraction_within: float
    max_deviation: float
    passed: bool

    def summary(self):
        return {
            "points": len(self.rows),
            "fraction_within": self.fraction_within,
            "max_deviation": self.max_deviation,
            "pass": self.passed,
        }


def verify_cf(spec: ProcessSpec, sym: SymbolSpec, pairs, xis, n: int, seed: int = 0) -> CFReport:
    """Normalized deviation |empirical - exp(Phi)| / (3 n^{-1/2}) on every (s, t, xi)."""
    if spec.d != sym.d:
        raise ConfigurationError(f"process dimension {spec.d} differs from symbol dimension {sym.d}")
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    if xis.shape[1] != sym.d:
        xis = xis.reshape(-1, sym.d)
    rows = []
    norm = 3.0 / math.sqrt(n) + 1e-12
    for k, (s, t) in enumerate(pairs):
        X = sample_increments(spec, s, t, n, seed + k) if t > s else np.zeros((n, spec.d))
        for xi in xis:
            m, se = empirical_cf(X, xi)
            exact = complex(np.exp(sym.accumulate(s, t, xi)))
            dev = abs(m - exact) / norm
            rows.append(
                {
                    "s": s,
                    "t": t,
                    **{f"xi{j}": xi[j] for j in range(len(xi))},
                    "empirical_re": m.real,
                    "empirical_im": m.imag,
                    "exact_re": exact.real,
                    "exact_im": exact.imag,
                    "stderr": se,
                    "deviation": dev,
                }
            )
    devs = np.array([r["deviation"] for r in rows])
    frac = float(np.mean(devs <= 1.0))
    return CFReport(rows, frac, float(devs.max()), frac >= 0.99)


# -- Monte Carlo solution -----------------------------------------------------------------

def interpolate_periodic(values: np.ndarray, grid, pts: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of grid values at arbitrary points (periodic extension)."""
    d = grid.d
    u = (pts - (-grid.L)) / grid.h
    i0 = np.floor(u).astype(np.int64)
    fr = u - i0
    out = np.zeros(pts.shape[:-1])
    M = grid.M
    for corner in range(2**d):
        w = np.ones(pts.shape[:-1])
        idx = []
        for ax in range(d):
            bit = (corner >> ax) & 1
            w = w * (fr[..., ax] if bit else 1 - fr[..., ax])
            idx.append((i0[..., ax] + bit) % M)
        out += w * values[tuple(idx)]
    return out


def _trapezoid_weights(K: int, dt: float) -> np.ndarray:
    w = np.full(K + 1, dt)
    w[0] = w[-1] = dt / 2
    return w


def mc_solution(
    spec: ProcessSpec,
    f: SpaceTimeField,
    t: float,
    points,
    n_paths: int,
    seed: int = 0,
    workers: int = 1,
    shift=None,
) -> tuple[np.ndarray, np.ndarray]:
    """u(t, x) = int_0^t E f(s, x + X_t - X_s) ds by trapezoid in s on the mesh of f.

    ``shift(s)`` optionally adds a deterministic displacement to the argument of f at time s.
    Returns (values, standard errors) at each point.
    """
    g = f.grid
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != g.d:
        raise ConfigurationError("evaluation points have the wrong dimension")
    if np.any(pts < -g.L) or np.any(pts > g.L):
        raise ExtrapolationError("evaluation points lie outside the grid")
    times = f.times
    K = int(round(t / f.dt))
    if abs(K * f.dt - t) > 1e-9 * max(t, 1) or K > f.K:
        raise PreconditionError("t must be a level of the source time mesh")
    if K == 0:
        return np.zeros(len(pts)), np.zeros(len(pts))
    w = _trapezoid_weights(K, f.dt)
    mesh = times[: K + 1]
    offsets = np.zeros((K + 1, g.d)) if shift is None else np.stack([np.atleast_1d(shift(s)) for s in mesh])

    def block(args):
        ss, m = args
        streams = spec.streams(ss)
        if len(streams) == 2:
            inc = spec.step_increments(mesh, streams[0], m, rng2=streams[1])
        else:
            inc = spec.step_increments(mesh, streams[0], m)
        # Y_j = X_t - X_{t_j}: reversed cumulative sums, Y_K = 0
        Y = np.zeros((m, K + 1, g.d))
        Y[:, :K] = np.cumsum(inc[:, ::-1], axis=1)[:, ::-1]
        acc = np.zeros((m, len(pts)))
        for j in range(K + 1):
            if w[j] == 0:
                continue
            arg = pts[None, :, :] + Y[:, j, None, :] + offsets[j]
            acc += w[j] * interpolate_periodic(f.values[j], g, arg)
        return acc.sum(axis=0), (acc**2).sum(axis=0)

    jobs = _block_seeds(seed, n_paths)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            res = list(ex.map(block, jobs))
    else:
        res = [block(j) for j in jobs]
    s1 = np.sum([r[0] for r in res], axis=0)
    s2 = np.sum([r[1] for r in res], axis=0)
    mean = s1 / n_paths
    var = np.maximum(s2 / n_paths - mean**2, 0.0) * n_paths / max(n_paths - 1, 1)
    return mean, np.sqrt(var / n_paths)
