"""phi-distorted parabolic cubes, the dyadic filtration of partitions built on them,
and the sharp and maximal operators on discrete fields.

A filtration cell at level n is (i tau_n, (i+1) tau_n] x prod_j (i_j 2^-n, (i_j+1) 2^-n]
with tau_n = phi(2^-n) sigma_n.  Consecutive tau_n differ by exact powers of two, so
tau_n is stored as phi(1) * 2^-m_n and nesting reduces to integer shifts.

Discrete fields are read as piecewise constant: the sample at (t_k, x_j) stands for
(t_{k-1}, t_k] x [x_j, x_j + h)^d.  Operators act on levels k = 1..K; level 0 is
returned as zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.ndimage import correlate, maximum_filter, maximum_filter1d
from scipy.special import gamma

from .errors import CoverageError, PreconditionError
from .grid import GridSpec, SpaceTimeField
from .solver import lp_norm


# -- scale functions ---------------------------------------------------------------------

@dataclass(frozen=True)
class ScaleFunction:
    """Time extent phi(c) of a cube of spatial radius c."""

    fn: Callable
    label: str = "phi"

    def __call__(self, r):
        return self.fn(np.asarray(r, dtype=float))


def power_scale(beta: float) -> ScaleFunction:
    return ScaleFunction(lambda r, b=beta: r**b, f"r^{beta:g}")


def bounded_scale() -> ScaleFunction:
    return ScaleFunction(lambda r: np.minimum(r, 1.0), "min(r,1)")


def from_bernstein(spec) -> ScaleFunction:
    """phi(r) = 1 / psi(r^-2): the time a process with exponent psi(|xi|^2) needs to travel r."""
    from .symbols.bernstein import eval_phi

    return ScaleFunction(lambda r, s=spec: 1.0 / eval_phi(s, r**-2.0), f"1/{spec.label}(r^-2)")


SCALES = {
    "r": power_scale(1.0),
    "r^0.5": power_scale(0.5),
    "r^1.5": power_scale(1.5),
    "r^2": power_scale(2.0),
    "bounded": bounded_scale(),
}


def get_scale(name: str) -> ScaleFunction:
    if name in SCALES:
        return SCALES[name]
    if name.startswith("r^"):
        return power_scale(float(name[2:]))
    raise KeyError(f"unknown scale function {name!r}")


@dataclass
class PhiReport:
    label: str
    c_tilde: float
    lambda0: float | None
    positive: bool
    nondecreasing: bool
    passed: bool

    def summary(self):
        return dict(self.__dict__)


def check_phi_assumptions(phi: ScaleFunction, lo: float = 1e-6, hi: float = 1e6, per_decade: int = 50) -> PhiReport:
    """c~ = sup phi(2r)/phi(r) and the smallest power of two lambda0 with phi(lambda0 r) >= 2 phi(r)."""
    r = np.geomspace(lo, hi, int(round(np.log10(hi / lo) * per_decade)) + 1)
    v = phi(r)
    positive = bool(np.all(v > 0))
    nondec = bool(np.all(np.diff(v) >= -1e-14 * np.abs(v[1:])))
    with np.errstate(divide="ignore", invalid="ignore"):
        c_tilde = float(np.max(phi(2 * r) / v)) if positive else math.inf
    lam0 = None
    if positive:
        for k in range(1, 41):
            lam = 2.0**k
            if np.all(phi(lam * r) >= 2 * v * (1 - 1e-12)):
                lam0 = lam
                break
    ok = positive and nondec and math.isfinite(c_tilde) and lam0 is not None
    return PhiReport(getattr(phi, "label", "phi"), c_tilde, lam0, positive, nondec, bool(ok))


# -- cubes -------------------------------------------------------------------------------

def ball_volume(d: int, c: float) -> float:
    return math.pi ** (d / 2) / gamma(d / 2 + 1) * c**d


@dataclass(frozen=True)
class ParabolicCube:
    """(t0, t0 + phi(c)] x B_c(x0)."""

    t0: float
    x0: tuple
    c: float
    phi: ScaleFunction

    def __post_init__(self):
        if not self.c > 0:
            raise PreconditionError("cube radius must be positive")

    @property
    def duration(self) -> float:
        return float(self.phi(self.c))

    @property
    def volume(self) -> float:
        return self.duration * ball_volume(len(self.x0), self.c)

    def contains(self, t, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        inside_t = (t > self.t0) & (t <= self.t0 + self.duration)
        return inside_t & (np.linalg.norm(x - np.asarray(self.x0), axis=-1) < self.c)


# -- filtration --------------------------------------------------------------------------

@dataclass
class PartitionFiltration:
    phi: ScaleFunction
    n_min: int
    n_max: int
    d: int
    half: bool
    sigma: dict  # level -> sigma_n
    shift: dict  # level -> m_n with tau_n = phi(1) 2^{-m_n}
    c_tilde: float
    truncated_below: bool = True
    nesting_ok: bool = False
    nesting_checked: int = 0

    @property
    def levels(self):
        return range(self.n_min, self.n_max + 1)

    def tau(self, n: int) -> float:
        return math.ldexp(float(self.phi(1.0)), -self.shift[n])

    def side(self, n: int) -> float:
        return math.ldexp(1.0, -n)

    def ell(self, n: int) -> int:
        """log2 of tau_{n-1} / tau_n."""
        return self.shift[n] - self.shift[n - 1]

    def volume_ratio(self, n: int) -> float:
        return 2.0 ** (self.ell(n) + self.d)

    @property
    def N0(self) -> float:
        """Largest parent/child volume ratio realised on the level range."""
        return max(self.volume_ratio(n) for n in range(self.n_min + 1, self.n_max + 1))

    @property
    def N0_bound(self) -> float:
        return 2.0 ** (self.d + 1) * self.c_tilde

    def cell_of(self, n: int, t, x) -> tuple:
        """Cell indices (i, i_1..i_d) of points t > 0 (cells are left-open, right-closed)."""
        i = np.ceil(np.asarray(t) / self.tau(n)) - 1
        j = np.ceil(np.asarray(x) / self.side(n)) - 1
        return i.astype(np.int64), j.astype(np.int64)

    def summary(self):
        return {
            "phi": self.phi.label,
            "levels": [self.n_min, self.n_max],
            "d": self.d,
            "U": "half" if self.half else "full",
            "sigma": {str(n): self.sigma[n] for n in self.levels},
            "ell": {str(n): self.ell(n) for n in range(self.n_min + 1, self.n_max + 1)},
            "N0": self.N0,
            "N0_bound": self.N0_bound,
            "c_tilde": self.c_tilde,
            "nesting_ok": self.nesting_ok,
            "nesting_checked": self.nesting_checked,
            "truncated_below": self.truncated_below,
        }


def _bracket(x: float) -> int:
    """l with x in [2^l, 2^{l+1})."""
    m, e = math.frexp(x)  # x = m 2^e, m in [0.5, 1)
    return e - 1


def build_filtration(phi: ScaleFunction, n_min: int, n_max: int, d: int = 1, U: str = "full") -> PartitionFiltration:
    if n_min > n_max:
        raise PreconditionError("n_min must not exceed n_max")
    if U not in ("full", "half"):
        raise PreconditionError("U must be 'full' or 'half'")
    rep = check_phi_assumptions(phi)
    if not rep.passed:
        raise PreconditionError(f"scale function {rep.label} violates the growth assumptions")
    p1 = float(phi(1.0))
    sigma, shift = {0: 1.0}, {0: 0}
    for k in range(0, max(n_max, 0)):
        x = float(phi(2.0**-k)) * sigma[k] / float(phi(2.0 ** -(k + 1)))
        ell = _bracket(x)
        if ell < 0:
            raise AssertionError("phi decreased between levels")
        shift[k + 1] = shift[k] + ell
        sigma[k + 1] = math.ldexp(p1, -shift[k + 1]) / float(phi(2.0 ** -(k + 1)))
    for k in range(0, min(n_min, 0), -1):
        x = float(phi(2.0**-k)) * sigma.get(k, 1.0) / float(phi(2.0 ** -(k - 1)))
        ell = -_bracket(x)
        if ell < 0:
            raise AssertionError("phi decreased between levels")
        shift[k - 1] = shift[k] - ell
        sigma[k - 1] = math.ldexp(p1, -shift[k - 1]) / float(phi(2.0 ** -(k - 1)))
    for k in shift:
        sigma[k] = math.ldexp(p1, -shift[k]) / float(phi(2.0**-k))
        if not 1.0 - 1e-12 <= sigma[k] < 2.0:
            raise AssertionError(f"sigma_{k} = {sigma[k]} left [1, 2)")
    filt = PartitionFiltration(
        phi, n_min, n_max, d, U == "half",
        {n: sigma[n] for n in range(n_min, n_max + 1)},
        {n: shift[n] for n in range(n_min, n_max + 1)},
        rep.c_tilde,
    )
    filt.nesting_ok, filt.nesting_checked = check_nesting(filt)
    return filt


def check_nesting(filt: PartitionFiltration, n_cells: int = 64) -> tuple[bool, int]:
    """Every child interval (time and each space axis) lies in the parent given by index shifts,
    the children of a parent tile it, and volume ratios stay below N0_bound."""
    ok = True
    count = 0
    for n in range(filt.n_min + 1, filt.n_max + 1):
        tp, tc = filt.tau(n - 1), filt.tau(n)
        ell = filt.ell(n)
        i = np.arange(n_cells * 2**ell)
        I = i >> ell
        ok &= bool(np.all(I * tp <= i * tc) and np.all((i + 1) * tc <= (I + 1) * tp))
        # children of parent I are exactly I 2^ell .. (I+1) 2^ell - 1
        ok &= bool(np.all(np.bincount(I) == 2**ell))
        sp, sc = filt.side(n - 1), filt.side(n)
        j = np.arange(-2 * n_cells, 2 * n_cells)
        J = j >> 1
        ok &= bool(np.all(J * sp <= j * sc) and np.all((j + 1) * sc <= (J + 1) * sp))
        ok &= filt.volume_ratio(n) <= filt.N0_bound * (1 + 1e-12)
        count += len(i) + len(j)
    return bool(ok), count


# -- per-level cell structure on a grid ------------------------------------------------------

def _axis_index(coord: np.ndarray, step: float, size: float) -> np.ndarray:
    """floor of the midpoint coordinate / size, exact when size/step is an integer."""
    r = size / step
    base = coord / step
    if abs(r - round(r)) < 1e-9 and np.allclose(base, np.round(base), atol=1e-9):
        return np.floor_divide(np.round(base).astype(np.int64), int(round(r)))
    return np.floor((coord + step / 2) / size).astype(np.int64)


def _labels(field: SpaceTimeField, filt: PartitionFiltration, n: int):
    g = field.grid
    k = np.arange(1, field.K + 1)
    # time sample t_k stands for (t_{k-1}, t_k]
    ti = _axis_index(field.times[k] - field.dt, field.dt, filt.tau(n))
    xi = _axis_index(g.axis, g.h, filt.side(n))
    xi = xi - xi.min()
    ti = ti - ti.min()
    dims = (int(ti.max()) + 1,) + (int(xi.max()) + 1,) * g.d
    grids = np.meshgrid(ti, *([xi] * g.d), indexing="ij")
    return np.ravel_multi_index(grids, dims).ravel(), int(np.prod(dims))


def resolved_levels(field: SpaceTimeField, filt: PartitionFiltration) -> list:
    """Levels whose cells are at least one sample wide; finer levels see a piecewise-constant
    field as constant on every cell and contribute no oscillation."""
    tol = 1 - 1e-9
    return [n for n in filt.levels if filt.tau(n) >= field.dt * tol and filt.side(n) >= field.grid.h * tol]


def _covered(field: SpaceTimeField, filt: PartitionFiltration) -> np.ndarray:
    g = field.grid
    mask = np.ones((field.K,) + g.shape, dtype=bool)
    if filt.half:
        first = g.axis + g.h / 2 > 0
        shape = (1, g.M) + (1,) * (g.d - 1)
        mask &= first.reshape(shape)
    return mask


def _restrict(field: SpaceTimeField, filt: PartitionFiltration):
    vals = field.values[1:]
    mask = _covered(field, filt)
    if np.any(vals[~mask] != 0):
        raise CoverageError("field is nonzero outside the region covered by the filtration")
    return vals, mask


def cell_means(field: SpaceTimeField, filt: PartitionFiltration, n: int) -> np.ndarray:
    """Per-sample mean of the field over its level-n cell (levels 1..K, covered samples)."""
    vals, mask = _restrict(field, filt)
    lab, size = _labels(field, filt, n)
    m = mask.ravel()
    v = vals.ravel()
    cnt = np.bincount(lab[m], minlength=size)
    s = np.bincount(lab[m], weights=v[m], minlength=size)
    mean = np.divide(s, cnt, out=np.zeros(size), where=cnt > 0)
    out = np.where(m, mean[lab], 0.0)
    return out.reshape(vals.shape)


def sharp_function(field: SpaceTimeField, filt: PartitionFiltration) -> SpaceTimeField:
    """max over levels of the mean oscillation of the field over the containing cell."""
    vals, mask = _restrict(field, filt)
    m = mask.ravel()
    v = vals.ravel()
    best = np.zeros(v.shape)
    for n in resolved_levels(field, filt):
        lab, size = _labels(field, filt, n)
        lm = lab[m]
        cnt = np.bincount(lm, minlength=size)
        s = np.bincount(lm, weights=v[m], minlength=size)
        mean = np.divide(s, cnt, out=np.zeros(size), where=cnt > 0)
        dev = np.bincount(lm, weights=np.abs(v[m] - mean[lm]), minlength=size)
        osc = np.divide(dev, cnt, out=np.zeros(size), where=cnt > 0)
        best = np.maximum(best, np.where(m, osc[lab], 0.0))
    out = np.zeros_like(field.values, dtype=float)
    out[1:] = best.reshape(vals.shape)
    return field.with_values(out)


def empirical_N0(field: SpaceTimeField, filt: PartitionFiltration) -> float:
    """Largest parent/child sample-count ratio on the field's grid (the discrete N0)."""
    _, mask = _restrict(field, filt)
    m = mask.ravel()
    worst = 1.0
    prev = None
    for n in resolved_levels(field, filt):
        lab, size = _labels(field, filt, n)
        lab = lab[m]
        if prev is not None:
            child = np.bincount(lab)
            parent = np.bincount(prev)
            # parent of each child: any sample of the child
            first = np.full(child.shape, -1)
            first[lab[::-1]] = prev[::-1]
            if np.any(np.bincount(lab, weights=prev)[child > 0] != first[child > 0] * child[child > 0]):
                raise AssertionError("a child cell straddles two parents")
            nz = child > 0
            worst = max(worst, float(np.max(parent[first[nz]] / child[nz])))
        prev = lab
    return worst


# -- maximal function ------------------------------------------------------------------------

def default_ladder(grid: GridSpec, T: float, phi: ScaleFunction, ratio: float = 2**0.5) -> np.ndarray:
    """c = h ratio^j until the ball spans the domain and phi(c) exceeds T."""
    cs = [grid.h]
    diam = 2 * grid.L * math.sqrt(grid.d)
    while cs[-1] < diam or float(phi(cs[-1])) < T:
        cs.append(cs[-1] * ratio)
        if len(cs) > 400:
            break
    return np.array(cs)


def _ball_footprint(d: int, c: float, h: float) -> np.ndarray:
    r = int(math.ceil(c / h))
    ax = np.arange(-r, r + 1)
    g = np.meshgrid(*([ax] * d), indexing="ij")
    return (np.sqrt(sum(a**2 for a in g)) * h < c).astype(float)


def _trailing_max(A: np.ndarray, n: int) -> np.ndarray:
    """out[k] = max(A[k-n], ..., A[k-1]) along axis 0, zeros before the start."""
    pad = np.zeros((n + 1,) + A.shape[1:])
    B = np.concatenate([pad, A], axis=0)
    F = maximum_filter1d(B, size=n, axis=0, mode="constant", cval=0.0)
    idx = np.arange(A.shape[0]) + (n + 1) - 1 - (n - 1) // 2
    return F[idx]


def maximal_function(field: SpaceTimeField, phi: ScaleFunction, ladder=None, half: bool = False) -> SpaceTimeField:
    """max over grid-anchored cubes (t_a, t_a + phi(c)] x B_c(x_j) containing the sample of
    the mean of |field| (counting measure, zero outside the sampled region)."""
    g = field.grid
    T = field.T
    ladder = default_ladder(g, T, phi) if ladder is None else np.asarray(ladder, dtype=float)
    K = field.K
    absf = np.abs(field.values).astype(float)
    absf[0] = 0.0
    if half:
        keep = (g.axis + g.h / 2 > 0).reshape((1, g.M) + (1,) * (g.d - 1))
        absf = absf * keep
    out = np.zeros_like(absf)
    for c in ladder:
        nt = int(math.floor(float(phi(c)) / field.dt + 1e-9))
        if nt < 1:
            continue
        fp = _ball_footprint(g.d, c, g.h)
        vol = nt * fp.sum()
        S = correlate(absf, fp[None], mode="constant", cval=0.0)
        # A[a] = sum over levels a+1..a+nt of S
        cs = np.concatenate([np.zeros((1,) + g.shape), np.cumsum(S, axis=0)])
        a = np.arange(K + 1)
        hi = np.minimum(a + nt, K)
        A = (cs[hi + 1] - cs[a + 1]) / vol
        A[K] = 0.0  # anchors at T hold no samples
        if half:
            A = A * keep
        # points (k, x) with anchor a in [k - nt, k - 1] and |x - x0| < c
        Mx = maximum_filter(A, footprint=fp[None] > 0, mode="constant", cval=0.0)
        out = np.maximum(out, _trailing_max(Mx, nt))
    out[0] = 0.0
    return field.with_values(out)


def brute_force_maximal(field: SpaceTimeField, phi: ScaleFunction, ladder) -> np.ndarray:
    """Reference implementation: loop over every cube and every sample."""
    g = field.grid
    K = field.K
    vals = np.abs(field.values).astype(float)
    idx = np.stack(np.meshgrid(*([np.arange(g.M)] * g.d), indexing="ij"), axis=-1).reshape(-1, g.d)
    flat = vals.reshape(K + 1, -1)
    out = np.zeros_like(flat)
    for c in ladder:
        nt = int(math.floor(float(phi(c)) / field.dt + 1e-9))
        if nt < 1:
            continue
        # counting-measure volume includes samples outside the domain
        vol = nt * _ball_footprint(g.d, c, g.h).sum()
        for a in range(K):
            ks = np.arange(a + 1, min(a + nt, K) + 1)
            for j0 in range(idx.shape[0]):
                inside = np.sqrt(np.sum((idx - idx[j0]) ** 2, axis=1)) * g.h < c
                mean = flat[np.ix_(ks, np.nonzero(inside)[0])].sum() / vol
                sub = out[np.ix_(ks, np.nonzero(inside)[0])]
                out[np.ix_(ks, np.nonzero(inside)[0])] = np.maximum(sub, mean)
    return out.reshape(vals.shape)


# -- verification ----------------------------------------------------------------------------

def fs_constant(p: float, N0: float) -> float:
    q = p / (p - 1)
    return (2 * q) ** p * N0 ** (p - 1)


def aligned_grid(filt: PartitionFiltration, budget: int = 2**17) -> tuple[GridSpec, float, int, int]:
    """Grid whose samples tile the level-n_min cells around the origin at the finest level
    that fits the budget.  Returns (grid, T, K, n_fine)."""
    n_c = filt.n_min
    best = None
    for n_f in range(n_c + 3, filt.n_max + 1):
        M = 2 ** (n_f - n_c + 1)
        K = 2 ** (filt.shift[n_f] - filt.shift[n_c])
        if M**filt.d * K > budget and best is not None:
            break
        best = (GridSpec(filt.d, filt.side(n_c), M), filt.tau(n_c), K, n_f)
    if best is None:
        raise PreconditionError("level range too short for an aligned grid (need n_max >= n_min + 3)")
    return best


def random_field(grid: GridSpec, T: float, K: int, seed: int, support: float = 0.5) -> SpaceTimeField:
    """Seeded mixture of box indicators, smooth bumps and white noise, supported in the
    central fraction ``support`` of space and the first half of time."""
    rng = np.random.default_rng(seed)
    x = grid.points()
    t = np.linspace(0, T, K + 1)[:, None]
    t = t.reshape((K + 1,) + (1,) * grid.d)
    lim = support * grid.L
    vals = np.zeros((K + 1,) + grid.shape)
    for _ in range(rng.integers(1, 5)):
        lo = rng.uniform(-lim, lim, grid.d)
        w = rng.uniform(0.05, 0.5) * lim
        t0 = rng.uniform(0, T / 2)
        dt = rng.uniform(0.05, 0.5) * T / 2
        box = np.all((x > lo) & (x <= np.minimum(lo + w, lim)), axis=-1)
        vals += rng.normal() * ((t > t0) & (t <= min(t0 + dt, T / 2))) * box
    c = rng.uniform(-lim / 2, lim / 2, grid.d)
    s = rng.uniform(0.05, 0.3) * lim
    bump = np.exp(-np.sum((x - c) ** 2, axis=-1) / s**2)
    inside = np.all(np.abs(x) <= lim, axis=-1)
    vals += rng.normal() * bump * inside * np.sin(rng.uniform(1, 6) * np.pi * t / T) * (t <= T / 2)
    if rng.random() < 0.5:
        vals += 0.3 * rng.standard_normal(vals.shape) * inside * (t <= T / 2)
    vals[0] = 0.0
    return SpaceTimeField(grid, T, vals)


def parse_fields(spec: str) -> tuple[int, int]:
    """'random:<count>:<seed>' -> (count, seed)."""
    parts = spec.split(":")
    if len(parts) != 3 or parts[0] != "random":
        raise ValueError("fields must look like random:<count>:<seed>")
    return int(parts[1]), int(parts[2])


@dataclass
class FSHLReport:
    filtration: dict
    grid: dict
    n_fine: int
    N0: float
    rows: list = field(default_factory=list)
    hl_rows: list = field(default_factory=list)
    violations: dict = field(default_factory=dict)
    hl_max: dict = field(default_factory=dict)
    hl_change: dict = field(default_factory=dict)
    passed: bool = False

    def summary(self):
        return {
            "filtration": self.filtration,
            "grid": self.grid,
            "n_fine": self.n_fine,
            "N0": self.N0,
            "fs_constant": {str(p): fs_constant(p, self.N0) for p in self.violations},
            "violations": {str(k): v for k, v in self.violations.items()},
            "hl_max_ratio": {str(k): v for k, v in self.hl_max.items()},
            "hl_relative_change": {str(k): v for k, v in self.hl_change.items()},
            "pass": self.passed,
        }


def verify_fs_hl(
    filt: PartitionFiltration,
    n_fields: int = 100,
    seed: int = 0,
    p_list=(2, 4),
    budget: int = 2**17,
    hl_M: int = 32,
    hl_fields: int | None = None,
) -> FSHLReport:
    """Fefferman-Stein with the explicit constant on the aligned grid, and Hardy-Littlewood
    ratios ||M f||_p / ||f||_p at two resolutions (hl_M and 2 hl_M)."""
    grid, T, K, n_f = aligned_grid(filt, budget)
    rows = []
    viol = {p: 0 for p in p_list}
    N0 = None
    for j in range(n_fields):
        f = random_field(grid, T, K, seed * 100_003 + j)
        if filt.half:
            f = f.with_values(f.values * _half_mask(grid))
        if N0 is None:
            N0 = empirical_N0(f, filt)
        sh = sharp_function(f, filt)
        for p in p_list:
            lhs = lp_norm(f, p)
            rhs = fs_constant(p, N0) * lp_norm(sh, p)
            bad = lhs > rhs * (1 + 1e-12)
            viol[p] += int(bad)
            rows.append({"field": j, "p": p, "f_norm": lhs, "sharp_norm": lp_norm(sh, p), "bound": rhs, "violation": bad})

    hl_rows = []
    hl_max = {}
    nh = n_fields if hl_fields is None else hl_fields
    for M in (hl_M, 2 * hl_M):
        g = GridSpec(filt.d, 1.0, M)
        Th = float(filt.phi(1.0))
        for j in range(nh):
            f = random_field(g, Th, M, seed * 100_003 + j)
            if filt.half:
                f = f.with_values(f.values * _half_mask(g))
            mf = maximal_function(f, filt.phi, half=filt.half)
            for p in p_list:
                fn = lp_norm(f, p)
                r = lp_norm(mf, p) / fn if fn > 0 else 0.0
                hl_rows.append({"M": M, "field": j, "p": p, "ratio": r})
                hl_max[(M, p)] = max(hl_max.get((M, p), 0.0), r)
    change = {p: abs(hl_max[(2 * hl_M, p)] / hl_max[(hl_M, p)] - 1) for p in p_list}
    passed = all(v == 0 for v in viol.values()) and all(c <= 0.2 for c in change.values()) and filt.nesting_ok
    return FSHLReport(
        filt.summary(),
        dict(grid.meta(), T=T, K=K),
        n_f,
        N0,
        rows,
        hl_rows,
        viol,
        {f"M={M},p={p}": v for (M, p), v in hl_max.items()},
        change,
        passed,
    )


def _half_mask(grid: GridSpec) -> np.ndarray:
    keep = grid.axis + grid.h / 2 > 0
    return keep.reshape((1, grid.M) + (1,) * (grid.d - 1))
