"""Numerical audits of the scaling, ellipticity and smoothness conditions.

Every audit returns a report object carrying the fitted constants, a
pass flag and per-point rows suitable for CSV export.  Violations are
reported, never raised.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..errors import PreconditionError
from .bernstein import BernsteinSpec, derivative_cap, eval_phi, eval_phi_derivative, phi_inverse
from .symbol import SymbolSpec

SLACK = 0.05


def geometric_grid(lo: float = 1e-4, hi: float = 1e4, per_decade: int = 64) -> np.ndarray:
    n = int(round(np.log10(hi / lo) * per_decade)) + 1
    return np.geomspace(lo, hi, n)


@dataclass
class BernsteinReport:
    label: str
    delta_lo: float
    delta_hi: float
    N_lo: float  # best constant with the declared lower exponent
    N_hi: float
    N4: dict
    monotone: bool
    positive: bool
    linear_ratio_ok: bool | None
    weak_scaling_below_one: bool
    passed: bool
    rows: list = field(default_factory=list, repr=False)

    @property
    def N2(self):
        return 1.0 / self.N_lo if self.N_lo > 0 else np.inf

    @property
    def N3(self):
        return self.N_hi

    def summary(self) -> dict:
        return {
            "phi": self.label,
            "delta_lo": self.delta_lo,
            "delta_hi": self.delta_hi,
            "N_lo": self.N_lo,
            "N_hi": self.N_hi,
            "N2": self.N2,
            "N3": self.N3,
            "N4": {str(k): v for k, v in self.N4.items()},
            "monotone": self.monotone,
            "positive": self.positive,
            "linear_ratio_ok": self.linear_ratio_ok,
            "weak_scaling_below_one": self.weak_scaling_below_one,
            "pass": self.passed,
        }


def _pair_extremes(g):
    """min and max over i <= j of g[j] - g[i], in one pass."""
    run_max = np.maximum.accumulate(g)
    run_min = np.minimum.accumulate(g)
    return float(np.min(g - run_max)), float(np.max(g - run_min))


def verify_bernstein_conditions(spec: BernsteinSpec, lam=None, d: int = 3) -> BernsteinReport:
    lam = geometric_grid() if lam is None else np.asarray(lam, dtype=float)
    lam = np.sort(lam)
    decades = np.log10(lam[-1] / lam[0])
    if decades < 8 - 1e-9 or len(lam) < 64 * 8:
        raise PreconditionError("audit grid must span 8 decades with 64 points per decade")
    v = eval_phi(spec, lam)
    positive = bool(np.all(v > 0))
    monotone = bool(np.all(np.diff(v) >= 0))
    ll, lv = np.log(lam), np.log(np.where(v > 0, v, np.nan))
    slopes = np.diff(lv) / np.diff(ll)
    d_lo, d_hi = float(np.nanmin(slopes)), float(np.nanmax(slopes))

    lo_min, _ = _pair_extremes(lv - spec.delta_lo * ll)
    _, hi_max = _pair_extremes(lv - spec.delta_hi * ll)
    N_lo, N_hi = float(np.exp(lo_min)), float(np.exp(hi_max))

    # phi(l2)/phi(l1) <= l2/l1 iff phi(l)/l is nonincreasing
    lin_ok = None
    if spec.is_bernstein:
        _, m = _pair_extremes(lv - ll)
        lin_ok = bool(m <= 1e-10)

    N4 = {}
    derivs = {}
    for n in range(1, derivative_cap(d) + 1):
        dn = eval_phi_derivative(spec, n, lam, d=d)
        derivs[n] = dn
        N4[n] = float(np.max(lam**n * np.abs(dn) / v))

    passed = (
        positive
        and monotone
        and N_lo >= (1 - SLACK) * spec.N_lo
        and N_hi <= (1 + SLACK) * spec.N_hi
        and lin_ok is not False
    )
    rows = []
    for i in range(len(lam)):
        row = {"lambda": lam[i], "phi": v[i]}
        for n, dn in derivs.items():
            row[f"d{n}"] = dn[i]
        rows.append(row)
    return BernsteinReport(
        label=spec.label,
        delta_lo=d_lo,
        delta_hi=d_hi,
        N_lo=N_lo,
        N_hi=N_hi,
        N4=N4,
        monotone=monotone,
        positive=positive,
        linear_ratio_ok=lin_ok,
        weak_scaling_below_one=d_hi < 1 - 1e-3,
        passed=bool(passed),
        rows=rows,
    )


# -- symbol conditions --------------------------------------------------------------

@dataclass
class SymbolReport:
    name: str
    delta1: float
    N1: float
    N1_refined: float
    N1_finite: bool
    growth_exponent: float
    worst_point: tuple
    passed: bool
    rows: list = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        return {
            "symbol": self.name,
            "delta1": self.delta1,
            "N1": self.N1,
            "N1_refined": self.N1_refined,
            "N1_finite": self.N1_finite,
            "growth_exponent": self.growth_exponent,
            "worst_point": list(self.worst_point),
            "pass": self.passed,
        }


def multi_indices(d: int, order: int):
    """All multi-indices alpha in N^d with 1 <= |alpha| <= order."""
    out = []
    for k in range(1, order + 1):
        for combo in itertools.combinations_with_replacement(range(d), k):
            a = [0] * d
            for j in combo:
                a[j] += 1
            out.append(tuple(a))
    return out


_STENCIL = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
}


def fd_derivative(fn, xi: np.ndarray, alpha: tuple, h: np.ndarray) -> np.ndarray:
    """Tensor-product centered difference D^alpha fn at points xi (..., d), step h (...)."""
    d = xi.shape[-1]
    total = np.zeros(xi.shape[:-1], dtype=complex)
    for taps in itertools.product(*(_STENCIL[a] for a in alpha)):
        shift = np.array([o for o, _ in taps], dtype=float)
        w = np.prod([c for _, c in taps])
        total = total + w * fn(xi + h[..., None] * shift)
    return total / h ** sum(alpha)


def audit_directions(d: int, n_random: int = 32, seed: int = 0) -> np.ndarray:
    eye = np.eye(d)
    if d == 1:
        return np.array([[1.0], [-1.0]])
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n_random, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.vstack([g, eye])


def _N1_estimate(sym, t_grid, xi, mags, phi_vals, alphas, rel_step):
    h = rel_step * mags
    best = np.zeros(xi.shape[:-1])
    for a in alphas:
        vals = []
        for t in t_grid:
            fn = lambda z, t=t: sym.psi(t, z)
            vals.append(np.abs(fd_derivative(fn, xi, a, h)))
        m = np.max(vals, axis=0) * mags ** sum(a) / phi_vals
        best = np.maximum(best, m)
    # order-zero term
    base = np.max([np.abs(sym.psi(t, xi)) for t in t_grid], axis=0) / phi_vals
    return np.maximum(best, base)


def verify_symbol_conditions(
    spec: SymbolSpec,
    xi_mags=None,
    t_grid=None,
    n_dirs: int = 32,
    seed: int = 0,
    step: float = 1e-4,
) -> SymbolReport:
    sym = spec.principal
    d = sym.d
    mags = np.geomspace(1e-3, 1e3, 49) if xi_mags is None else np.asarray(xi_mags, dtype=float)
    if np.any(mags <= 0):
        raise PreconditionError("frequency grid must exclude 0")
    t_grid = np.linspace(0.0, 1.0, 5) if t_grid is None else np.asarray(t_grid, dtype=float)
    dirs = audit_directions(d, n_dirs, seed)
    xi = mags[:, None, None] * dirs[None, :, :]
    M = np.broadcast_to(mags[:, None], xi.shape[:-1])
    phi_vals = eval_phi(sym.phi, M**2)

    ell = np.min([(-sym.psi(t, xi)).real for t in t_grid], axis=0) / phi_vals
    delta1 = float(np.min(ell))

    alphas = multi_indices(d, derivative_cap(d))
    ratio = _N1_estimate(sym, t_grid, xi, M, phi_vals, alphas, step)
    ratio_fine = _N1_estimate(sym, t_grid, xi, M, phi_vals, alphas, step / 10)
    N1, N1f = float(np.max(ratio)), float(np.max(ratio_fine))
    finite = bool(np.isfinite(N1) and np.isfinite(N1f) and abs(N1f - N1) <= 0.1 * N1)

    absval = np.max([np.abs(sym.psi(t, xi)) for t in t_grid], axis=0).max(axis=1)
    with np.errstate(divide="ignore"):
        la = np.log(np.where(absval > 0, absval, np.nan))
    growth = float(np.nanmax(np.diff(la) / np.diff(np.log(mags)))) if len(mags) > 1 else np.nan

    i, j = np.unravel_index(int(np.argmax(ratio_fine)), ratio_fine.shape)
    rows = []
    for a in range(len(mags)):
        for b in range(len(dirs)):
            rows.append(
                {
                    "abs_xi": mags[a],
                    **{f"dir{k}": dirs[b, k] for k in range(d)},
                    "ellipticity_ratio": ell[a, b],
                    "derivative_ratio": ratio[a, b],
                    "derivative_ratio_refined": ratio_fine[a, b],
                }
            )
    return SymbolReport(
        name=spec.name or type(spec).__name__,
        delta1=delta1,
        N1=N1,
        N1_refined=N1f,
        N1_finite=finite,
        growth_exponent=growth,
        worst_point=(float(mags[i]), *map(float, dirs[j])),
        passed=bool(delta1 > 0 and finite),
        rows=rows,
    )


# -- inverse sandwich -----------------------------------------------------------------

@dataclass
class SandwichReport:
    label: str
    N: float
    upper_ok: bool  # psi^{-1}(psi(t)) <= t
    violations: int
    n_points: int
    passed: bool

    def summary(self):
        return dict(self.__dict__)


def _inverse_ratios(spec, t):
    r1 = phi_inverse(spec, eval_phi(spec, t)) / t
    r2 = eval_phi(spec, phi_inverse(spec, t)) / t
    return r1, r2


def psi_inverse_sandwich(spec: BernsteinSpec, t=None, validate=None) -> SandwichReport:
    """Fit one N with N^{-1} t <= psi^{-1}(psi(t)) <= t and N^{-1} t <= psi(psi^{-1}(t)) <= N t.

    N is fitted on ``t`` and checked (5% slack) on the interleaved ``validate`` grid.
    """
    t = np.geomspace(1e-6, 1e6, 32) if t is None else np.asarray(t, dtype=float)
    if validate is None:
        lt = np.log(t)
        validate = np.exp(0.5 * (lt[1:] + lt[:-1]))
    r1, r2 = _inverse_ratios(spec, t)
    N = float(max(1.0, 1 / r1.min(), 1 / r2.min(), r2.max()))
    upper = bool(np.all(r1 <= 1 + 1e-9))
    v1, v2 = _inverse_ratios(spec, validate)
    Nv = N * (1 + SLACK)
    bad = (v1 < 1 / Nv) | (v1 > 1 + 1e-9) | (v2 < 1 / Nv) | (v2 > Nv)
    bad_fit = (r1 < 1 / N * (1 - 1e-12)) | (r1 > 1 + 1e-9) | (r2 < 1 / N * (1 - 1e-12)) | (r2 > N * (1 + 1e-12))
    nviol = int(bad.sum() + bad_fit.sum())
    return SandwichReport(spec.label, N, upper, nviol, len(t) + len(validate), upper and nviol == 0)
