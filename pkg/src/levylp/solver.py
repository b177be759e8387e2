"""Spectral Duhamel solver for u_t = Psi(t, iD) u + f, u(0) = 0.

Each Fourier mode is advanced by exponential time differencing: the propagator
is exp(Phi(t_k, t_{k+1}, xi)) from the exact accumulated exponent, and the source
is interpolated linearly in time over each step, which makes the scheme second
order.  ``scheme="etd1"`` keeps the source frozen at the left endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import InstabilityError, PreconditionError
from .grid import GridSpec, SpaceTimeField
from .symbols.bernstein import BernsteinSpec
from .symbols.symbol import SymbolSpec

IMAG_TOL = 1e-10


def _phi12(z):
    """phi1 = (e^z - 1)/z and phi2 = (e^z - 1 - z)/z^2 with series near 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-2
    zs = np.where(small, 1.0, z)
    ez = np.exp(zs)
    p1 = (ez - 1) / zs
    p2 = (ez - 1 - zs) / zs**2
    w = np.where(small, z, 0.0)
    s1 = 1 + w / 2 + w**2 / 6 + w**3 / 24 + w**4 / 120 + w**5 / 720
    s2 = 0.5 + w / 6 + w**2 / 24 + w**3 / 120 + w**4 / 720 + w**5 / 5040
    return np.where(small, s1, p1), np.where(small, s2, p2)


def _realify(values: np.ndarray, meta: dict) -> np.ndarray:
    m = float(np.abs(values).max()) if values.size else 0.0
    im = float(np.abs(values.imag).max()) if np.iscomplexobj(values) else 0.0
    meta["max_imag"] = im
    if im <= IMAG_TOL * max(m, 1e-300):
        return values.real.copy()
    return values


def _spectra(field: SpaceTimeField) -> np.ndarray:
    return field.grid.fft(field.values)


def solve(sym: SymbolSpec, f: SpaceTimeField, scheme: str = "etd2") -> SpaceTimeField:
    """Per-mode Duhamel recurrence on the time mesh of ``f``."""
    g = f.grid
    if sym.d != g.d:
        raise PreconditionError("symbol and grid dimensions differ")
    if scheme not in ("etd1", "etd2"):
        raise ValueError("scheme must be 'etd1' or 'etd2'")
    xi = g.frequencies()
    t = f.times
    dt = f.dt
    fh = _spectra(f)
    uh = np.zeros_like(fh, dtype=complex)
    for k in range(f.K):
        z = sym.accumulate(t[k], t[k + 1], xi)
        if np.max(z.real) > 1e-8:
            raise InstabilityError(f"Re Phi = {np.max(z.real):.3g} > 0 on step {k}: symbol is not dissipative")
        p1, p2 = _phi12(z)
        if scheme == "etd2":
            src = dt * ((p1 - p2) * fh[k] + p2 * fh[k + 1])
        else:
            src = dt * p1 * fh[k]
        uh[k + 1] = np.exp(z) * uh[k] + src
    meta = {"scheme": scheme}
    values = _realify(g.ifft(uh), meta)
    return SpaceTimeField(g, f.T, values, meta)


def multiplier_values(m, t: float, xi: np.ndarray) -> np.ndarray:
    if isinstance(m, BernsteinSpec):
        return m.at_zero_ok(np.einsum("...i,...i->...", xi, xi))
    if isinstance(m, SymbolSpec):
        return m.psi(t, xi)
    return np.asarray(m(t, xi))


def apply_multiplier(field: SpaceTimeField, m) -> SpaceTimeField:
    """phi(|xi|^2) for a BernsteinSpec, Psi(t_k, xi) for a SymbolSpec, or callable m(t, xi)."""
    g = field.grid
    xi = g.frequencies()
    spec = _spectra(field)
    out = np.stack([multiplier_values(m, tk, xi) * spec[k] for k, tk in enumerate(field.times)])
    meta = {}
    values = _realify(g.ifft(out), meta)
    return SpaceTimeField(g, field.T, values, meta)


# -- norms ------------------------------------------------------------------------------

def lp_norm(field: SpaceTimeField, p: float) -> float:
    """Riemann sum over time levels 1..K (weight dt) and all grid points (weight h^d)."""
    a = np.abs(field.values[1:]).ravel()
    w = field.dt * field.grid.cell_volume
    if p == np.inf:
        return float(a.max()) if a.size else 0.0
    return float((np.sum(a**p) * w) ** (1.0 / p))


@dataclass
class NormReport:
    p: float
    u_norm: float
    phi_norm: float
    f_norm: float | None = None

    @property
    def h_norm(self) -> float:
        return self.u_norm + self.phi_norm

    @property
    def ratio(self) -> float | None:
        if self.f_norm is None:
            return None
        return self.phi_norm / self.f_norm if self.f_norm > 0 else 0.0

    def summary(self):
        return {
            "p": self.p,
            "u_norm": self.u_norm,
            "phi_norm": self.phi_norm,
            "h_norm": self.h_norm,
            "f_norm": self.f_norm,
            "ratio": self.ratio,
        }


def phi_potential_norm(u: SpaceTimeField, phi: BernsteinSpec, p: float, f: SpaceTimeField | None = None) -> NormReport:
    if not 1 < p < np.inf:
        raise PreconditionError("p must lie in (1, inf)")
    pu = apply_multiplier(u, phi)
    return NormReport(p, lp_norm(u, p), lp_norm(pu, p), None if f is None else lp_norm(f, p))


# -- weak residual ----------------------------------------------------------------------

def _bump(y):
    out = np.zeros_like(y)
    inside = np.abs(y) < 1
    yi = y[inside]
    out[inside] = np.exp(-1.0 / (1.0 - yi**2))
    return out


def _dbump(y):
    out = np.zeros_like(y)
    inside = np.abs(y) < 1
    yi = y[inside]
    out[inside] = np.exp(-1.0 / (1.0 - yi**2)) * (-2 * yi / (1 - yi**2) ** 2)
    return out


def bump_family(grid: GridSpec, T: float, n_centers: int = 5, scales=(0.5, 0.25, 0.125), seed: int = 0):
    """Smooth bumps zeta(t, x) = b((t - tc)/rt) prod b((x_i - c_i)/rx), supported in (0,T) x grid.

    ``scales`` are fractions of the domain; returns a list of (zeta, zeta_t) callables.
    """
    rng = np.random.default_rng(seed)
    out = []
    for sc in scales:
        rt = sc * T / 2
        rx = sc * grid.L
        for _ in range(n_centers):
            tc = rng.uniform(rt, T - rt)
            c = rng.uniform(-grid.L + rx, grid.L - rx, size=grid.d)

            def space(x, c=c, rx=rx):
                return np.prod(_bump((x - c) / rx), axis=-1)

            z = lambda t, x, tc=tc, rt=rt, space=space: _bump(np.array((t - tc) / rt)) * space(x)
            zt = lambda t, x, tc=tc, rt=rt, space=space: _dbump(np.array((t - tc) / rt)) / rt * space(x)
            out.append((z, zt))
    return out


def _pair(a: np.ndarray, b: np.ndarray, dt: float, vol: float) -> float:
    # trapezoid in time; the test functions vanish at both ends
    w = np.full(a.shape[0], dt)
    w[0] = w[-1] = dt / 2
    return float(np.einsum("k,k...->", w, (a * b).reshape(a.shape[0], -1).sum(axis=1)) * vol)


def weak_residual(u: SpaceTimeField, f: SpaceTimeField, sym: SymbolSpec, zetas=None) -> float:
    """max over test functions of |-<u,zeta_t> - <u,A* zeta> - <f,zeta>| / (||zeta|| (||u|| + ||f||)),
    A* the multiplier conj(Psi(t, xi)); all norms L2 over space-time."""
    g = u.grid
    zetas = bump_family(g, u.T) if zetas is None else zetas
    x = g.points()
    t = u.times
    dt, vol = u.dt, g.cell_volume
    xi = g.frequencies()
    l2 = lambda v: np.sqrt(_pair(np.abs(v), np.abs(v), dt, vol))
    scale = l2(u.values) + l2(f.values)
    if scale == 0:
        return 0.0
    worst = 0.0
    for z, zt in zetas:
        Z = np.stack([z(tk, x) for tk in t])
        Zt = np.stack([zt(tk, x) for tk in t])
        spec = g.fft(Z)
        AZ = np.stack([g.ifft(np.conj(sym.psi(tk, xi)) * spec[k]) for k, tk in enumerate(t)])
        if sym.symmetric:
            AZ = AZ.real
        r = -_pair(u.values, Zt, dt, vol) - _pair(u.values, AZ, dt, vol) - _pair(f.values, Z, dt, vol)
        worst = max(worst, abs(r) / (l2(Z) * scale))
    return float(worst)


def perturb(field: SpaceTimeField, level: float, seed: int = 0, kind: str = "smooth", kmax: int = 4) -> SpaceTimeField:
    """field + level * rms(field) * eta with eta of unit rms.

    ``kind="white"`` draws eta i.i.d. per node; ``kind="smooth"`` uses a random
    superposition of low space-time modes (|k| <= kmax), which does not average out
    against smooth test functions.
    """
    rng = np.random.default_rng(seed)
    g = field.grid
    if kind == "white":
        eta = rng.standard_normal(field.values.shape)
    elif kind == "smooth":
        x = g.points()
        t = field.times
        eta = np.zeros(field.values.shape)
        unit = np.pi / g.L
        for _ in range(12):
            k = rng.integers(-kmax, kmax + 1, size=g.d)
            w = rng.uniform(0, kmax) * np.pi / field.T
            a, b = rng.uniform(0, 2 * np.pi, 2)
            eta += rng.standard_normal() * np.cos(w * t + a)[(slice(None),) + (None,) * g.d] * np.cos(
                unit * (x @ k) + b
            )
    else:
        raise ValueError("kind must be 'smooth' or 'white'")
    eta /= np.sqrt(np.mean(eta**2))
    rms = np.sqrt(np.mean(field.values**2))
    return field.with_values(field.values + level * rms * eta)


# -- sources and the estimate harness ------------------------------------------------------

def band_limited_source(grid: GridSpec, T: float, K: int, seed: int, n_modes: int = 6, kmax: int = 8):
    """Real source sum_j c_j cos(w_j t + a_j) cos(k_j . x + b_j) with integer wavenumbers
    k_j (in units of pi / L), |k_j| <= kmax, identical across resolutions."""
    rng = np.random.default_rng(seed)
    ks = rng.integers(-kmax, kmax + 1, size=(n_modes, grid.d))
    ks[np.all(ks == 0, axis=1), 0] = 1
    c = rng.standard_normal(n_modes)
    w = rng.uniform(0, 2 * np.pi / T * 3, n_modes)
    a = rng.uniform(0, 2 * np.pi, n_modes)
    b = rng.uniform(0, 2 * np.pi, n_modes)
    unit = np.pi / grid.L

    def fn(t, x):
        out = np.zeros(x.shape[:-1])
        for j in range(n_modes):
            out += c[j] * np.cos(w[j] * t + a[j]) * np.cos(unit * (x @ ks[j]) + b[j])
        return out

    return SpaceTimeField.from_function(grid, T, K, fn)


def estimate_ratio_harness(
    sym: SymbolSpec,
    phi: BernsteinSpec,
    p_list=(2, 4),
    n_sources: int = 20,
    ladder=(64, 128, 256),
    seed: int = 0,
    L: float = np.pi,
    T: float = 1.0,
    source_fn=None,
):
    """Ratios ||phi(Delta) u||_p / ||f||_p per (source, p, M), with K = M time steps.

    Returns (rows, summary) where summary maps 'p=<p>' to the max ratio per M.
    """
    rows = []
    for M in ladder:
        grid = GridSpec(sym.d, L, M)
        for j in range(n_sources):
            src = source_fn or band_limited_source
            f = src(grid, T, M, seed * 1000 + j)
            u = solve(sym, f)
            pu = apply_multiplier(u, phi)
            for p in p_list:
                fn = lp_norm(f, p)
                rows.append({"M": M, "source": j, "p": p, "ratio": lp_norm(pu, p) / fn if fn > 0 else 0.0})
    summary = {}
    for p in p_list:
        per = {M: max(r["ratio"] for r in rows if r["p"] == p and r["M"] == M) for M in ladder}
        vals = list(per.values())
        summary[f"p={p}"] = {"max_ratio": per, "spread": max(vals) / min(vals) if min(vals) > 0 else np.inf}
    return rows, summary


def single_mode_reference(psi_value: complex, g, t: float, n: int = 20001) -> complex:
    """int_0^t exp(psi (t - s)) g(s) ds by composite Simpson on n points (n odd)."""
    s = np.linspace(0.0, t, n)
    y = np.exp(psi_value * (t - s)) * g(s)
    return complex(simpson(y, x=s))
