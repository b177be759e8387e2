"""Closed-form Bernstein functions and their derivatives.

Every kind carries declared weak-scaling constants ``(delta_lo, delta_hi,
N_lo, N_hi)`` such that, for all ``lam2 >= lam1 > 0``::

    N_lo * (lam2/lam1)**delta_lo <= phi(lam2)/phi(lam1) <= N_hi * (lam2/lam1)**delta_hi

For the closed-form kinds these follow from the range of the local log-slope
``lam * phi'(lam) / phi(lam)``, so all declared ``N`` are 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..errors import DomainError, OrderError, RangeError

KINDS = (
    "stable",
    "power",
    "sum_stable",
    "log_plus",
    "log_minus",
    "relativistic",
    "linear",
    "log_ratio",
    "tabulated",
)

# kinds whose phi is a genuine Bernstein function with phi(0+) = 0
_BERNSTEIN_KINDS = {"stable", "sum_stable", "log_plus", "log_minus", "relativistic", "linear", "log_ratio"}


def derivative_cap(d: int) -> int:
    """d0 = floor(d/2) + 1, the highest xi-derivative order the assumptions use."""
    if d < 1:
        raise DomainError(f"dimension must be positive, got {d}")
    return d // 2 + 1


@dataclass(frozen=True)
class BernsteinSpec:
    kind: str
    params: tuple[float, ...] = ()
    delta_lo: float = 1.0
    delta_hi: float = 1.0
    N_lo: float = 1.0
    N_hi: float = 1.0
    table: tuple[np.ndarray, np.ndarray] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown Bernstein kind {self.kind!r}")

    @property
    def is_bernstein(self) -> bool:
        return self.kind in _BERNSTEIN_KINDS

    @property
    def label(self) -> str:
        if not self.params:
            return self.kind
        return self.kind + ":" + ":".join(f"{p:g}" for p in self.params)

    def __call__(self, lam):
        return eval_phi(self, lam)

    def at_zero_ok(self, lam):
        """phi(lam) with the continuous extension phi(0) = 0."""
        lam = np.asarray(lam, dtype=float)
        out = np.zeros_like(lam)
        pos = lam > 0
        out[pos] = eval_phi(self, lam[pos])
        return out


# -- constructors ------------------------------------------------------------

def stable(alpha: float) -> BernsteinSpec:
    if not 0 < alpha <= 1:
        raise DomainError(f"stable exponent must lie in (0, 1], got {alpha}")
    if alpha == 1:
        return linear()
    return BernsteinSpec("stable", (alpha,), alpha, alpha)


def power(alpha: float) -> BernsteinSpec:
    """lam**alpha for any alpha > 0; a scaling function, not Bernstein when alpha > 1."""
    if alpha <= 0:
        raise DomainError(f"power exponent must be positive, got {alpha}")
    return BernsteinSpec("power", (alpha,), alpha, alpha)


def sum_stable(beta: float, alpha: float) -> BernsteinSpec:
    if not 0 < beta < alpha < 1:
        raise DomainError("sum_stable needs 0 < beta < alpha < 1")
    return BernsteinSpec("sum_stable", (beta, alpha), beta, alpha)


def log_plus(alpha: float, beta: float) -> BernsteinSpec:
    if not (0 < alpha < 1 and 0 < beta < 1 - alpha):
        raise DomainError("log_plus needs 0 < alpha < 1 and 0 < beta < 1 - alpha")
    return BernsteinSpec("log_plus", (alpha, beta), alpha, alpha + beta)


def log_minus(alpha: float, beta: float) -> BernsteinSpec:
    if not (0 < alpha < 1 and 0 < beta < alpha):
        raise DomainError("log_minus needs 0 < beta < alpha < 1")
    return BernsteinSpec("log_minus", (alpha, beta), alpha - beta, alpha)


def relativistic(alpha: float, m: float) -> BernsteinSpec:
    if not (0 < alpha < 1 and m > 0):
        raise DomainError("relativistic needs 0 < alpha < 1 and m > 0")
    return BernsteinSpec("relativistic", (alpha, m), alpha, 1.0)


def linear() -> BernsteinSpec:
    return BernsteinSpec("linear", (), 1.0, 1.0)


def log_ratio(beta: float) -> BernsteinSpec:
    if not 0 < beta < 2:
        raise DomainError("log_ratio needs beta in (0, 2)")
    return BernsteinSpec("log_ratio", (beta,), 1.0 - beta / 2, 1.0)


def tabulated(lam, values, delta_lo=None, delta_hi=None, N_lo=1.0, N_hi=1.0) -> BernsteinSpec:
    """Monotone log-log linear interpolation of sampled (lam, phi) pairs.

    Undeclared exponents default to the extreme log-slopes of the table.
    """
    lam = np.asarray(lam, dtype=float)
    values = np.asarray(values, dtype=float)
    if lam.ndim != 1 or lam.shape != values.shape or lam.size < 2:
        raise ValueError("table must be two 1-d arrays of equal length >= 2")
    if np.any(lam <= 0) or np.any(values <= 0):
        raise DomainError("tabulated lam and phi must be positive")
    if np.any(np.diff(lam) <= 0) or np.any(np.diff(values) < 0):
        raise DomainError("table must be increasing in lam and nondecreasing in phi")
    slopes = np.diff(np.log(values)) / np.diff(np.log(lam))
    lo = float(slopes.min()) if delta_lo is None else delta_lo
    hi = float(slopes.max()) if delta_hi is None else delta_hi
    return BernsteinSpec("tabulated", (), lo, hi, N_lo, N_hi, table=(np.log(lam), np.log(values)))


# -- evaluation ----------------------------------------------------------------

def _check_positive(lam):
    arr = np.asarray(lam, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("phi is defined for lam > 0 only")
    return arr


def _log1p_pow(lam, b):
    return np.log1p(lam ** b)


def eval_phi(spec: BernsteinSpec, lam):
    """phi(lam) for scalar or array lam > 0."""
    scalar = np.ndim(lam) == 0
    x = _check_positive(lam)
    k, p = spec.kind, spec.params
    if k in ("stable", "power"):
        out = x ** p[0]
    elif k == "sum_stable":
        out = x ** p[0] + x ** p[1]
    elif k == "log_plus":
        out = x ** p[0] * np.log1p(x) ** p[1]
    elif k == "log_minus":
        out = x ** p[0] * np.log1p(x) ** (-p[1])
    elif k == "relativistic":
        a, m = p
        c = m ** (1.0 / a)
        # (x + c)**a - c**a, written to avoid cancellation for small x
        out = c ** a * np.expm1(a * np.log1p(x / c))
    elif k == "linear":
        out = x.copy()
    elif k == "log_ratio":
        out = x / _log1p_pow(x, p[0] / 2)
    else:
        out = _eval_table(spec, x)
    return float(out) if scalar else out


def _eval_table(spec, x):
    ll, lv = spec.table
    lx = np.log(x)
    if np.any(lx < ll[0] - 1e-12) or np.any(lx > ll[-1] + 1e-12):
        raise RangeError(f"lam outside tabulated range [{np.exp(ll[0]):g}, {np.exp(ll[-1]):g}]")
    return np.exp(np.interp(lx, ll, lv))


def eval_phi_derivative(spec: BernsteinSpec, n: int, lam, d: int = 3):
    """n-th derivative of phi at lam, for 0 <= n <= d0(d).

    Closed forms are hand-derived for n <= 2 (the cap for d <= 3); tabulated
    kinds use centered differences with step lam * 1e-5.
    """
    cap = derivative_cap(d)
    if n < 0 or n > cap:
        raise OrderError(f"derivative order {n} exceeds d0 = {cap} for d = {d}")
    if n == 0:
        return eval_phi(spec, lam)
    scalar = np.ndim(lam) == 0
    x = _check_positive(lam)
    if n > 2 and spec.kind not in ("stable", "power", "sum_stable", "linear", "tabulated"):
        raise OrderError(f"closed-form derivatives of order > 2 not available for {spec.kind}")
    k, p = spec.kind, spec.params
    if k in ("stable", "power"):
        out = _falling(p[0], n) * x ** (p[0] - n)
    elif k == "sum_stable":
        out = _falling(p[0], n) * x ** (p[0] - n) + _falling(p[1], n) * x ** (p[1] - n)
    elif k == "linear":
        out = np.ones_like(x) if n == 1 else np.zeros_like(x)
    elif k in ("log_plus", "log_minus"):
        out = _log_power_derivative(p[0], p[1] if k == "log_plus" else -p[1], n, x)
    elif k == "relativistic":
        a, m = p
        c = m ** (1.0 / a)
        out = _falling(a, n) * (x + c) ** (a - n)
    elif k == "log_ratio":
        out = _log_ratio_derivative(p[0] / 2, n, x)
    else:
        out = _table_derivative(spec, n, x)
    return float(out) if scalar else out


def _falling(a, n):
    r = 1.0
    for j in range(n):
        r *= a - j
    return r


def _log_power_derivative(a, b, n, x):
    # phi = g * h with g = x**a, h = log(1+x)**b
    L = np.log1p(x)
    L1 = 1.0 / (1.0 + x)
    L2 = -L1 ** 2
    g, g1, g2 = x ** a, a * x ** (a - 1), a * (a - 1) * x ** (a - 2)
    h = L ** b
    h1 = b * L ** (b - 1) * L1
    if n == 1:
        return g1 * h + g * h1
    h2 = b * (b - 1) * L ** (b - 2) * L1 ** 2 + b * L ** (b - 1) * L2
    return g2 * h + 2 * g1 * h1 + g * h2


def _log_ratio_derivative(b, n, x):
    # phi = x / L with L = log(1 + u), u = x**b
    u = x ** b
    u1 = b * x ** (b - 1)
    L = np.log1p(u)
    L1 = u1 / (1 + u)
    if n == 1:
        return 1.0 / L - x * L1 / L ** 2
    u2 = b * (b - 1) * x ** (b - 2)
    L2 = u2 / (1 + u) - u1 ** 2 / (1 + u) ** 2
    return -2 * L1 / L ** 2 - x * L2 / L ** 2 + 2 * x * L1 ** 2 / L ** 3


def _table_derivative(spec, n, x):
    h = x * 1e-5
    f = lambda y: _eval_table(spec, y)
    if n == 1:
        return (f(x + h) - f(x - h)) / (2 * h)
    if n == 2:
        return (f(x + h) - 2 * f(x) + f(x - h)) / h ** 2
    raise OrderError("tabulated derivatives limited to order 2")


# -- inverse -------------------------------------------------------------------

def phi_inverse(spec: BernsteinSpec, t):
    """Generalized inverse inf{s >= 0 : phi(s) >= t} for t > 0."""
    scalar = np.ndim(t) == 0
    y = np.asarray(t, dtype=float)
    if np.any(~(y > 0)):
        raise DomainError("phi_inverse is defined for t > 0 only")
    k, p = spec.kind, spec.params
    if k in ("stable", "power"):
        out = y ** (1.0 / p[0])
    elif k == "linear":
        out = y.copy()
    elif k == "relativistic":
        a, m = p
        c = m ** (1.0 / a)
        out = c * np.expm1(np.log1p(y / m) / a)
    elif k == "tabulated":
        ll, lv = spec.table
        ly = np.log(y)
        if np.any(ly < lv[0] - 1e-12) or np.any(ly > lv[-1] + 1e-12):
            raise RangeError("t outside the tabulated range of phi")
        # leftmost lam reaching the value, respecting flat pieces
        out = np.exp(np.interp(ly, *_strict_table(lv, ll)))
    else:
        out = np.vectorize(lambda v: _bisect_inverse(spec, v), otypes=[float])(y)
    return float(out) if scalar else out


def _strict_table(lv, ll):
    keep = np.concatenate([[True], np.diff(lv) > 0])
    return lv[keep], ll[keep]


def _bisect_inverse(spec, v):
    lo, hi = 1.0, 1.0
    while eval_phi(spec, lo) >= v:
        lo *= 0.5
        if lo < 1e-300:
            return 0.0
    while eval_phi(spec, hi) < v:
        hi *= 2.0
        if hi > 1e300:
            raise RangeError(f"phi never reaches {v}")
    # root in log-space keeps relative accuracy across decades
    g = lambda s: math.log(eval_phi(spec, math.exp(s))) - math.log(v)
    s = brentq(g, math.log(lo), math.log(hi), xtol=1e-14, rtol=1e-13, maxiter=500)
    return math.exp(s)
