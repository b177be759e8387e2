"""Transition kernels, their psi(Delta)-images and the rescaled q-kernels.

All kernels are inverse discrete Fourier transforms of multipliers sampled on a
periodic grid.  The rescaled kernels q1, q2, q3 live on the coordinate
v = a_{t-s} x, where a_tau = psi^{-1}(1/tau)^{1/2} is the parabolic scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import AccuracyError, PreconditionError, ResolutionError, TruncationError
from .grid import GridSpec
from .symbols.bernstein import BernsteinSpec, eval_phi, phi_inverse
from .symbols.symbol import SymbolSpec

DECAY = 1e-12


def scaling_factor(psi: BernsteinSpec, tau: float) -> float:
    """a_tau = (psi^{-1}(1/tau))^{1/2}."""
    if not tau > 0:
        raise PreconditionError("scaling_factor needs tau > 0")
    return float(np.sqrt(phi_inverse(psi, 1.0 / tau)))


def time_modulus(psi: BernsteinSpec, tau):
    """Length scale 1 / a_tau attached to a duration tau (0 at tau = 0)."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    out = np.zeros_like(tau)
    pos = tau > 0
    out[pos] = 1.0 / np.sqrt(phi_inverse(psi, 1.0 / tau[pos]))
    return out


@dataclass
class KernelSnapshot:
    which: str
    s: float
    t: float
    grid: GridSpec
    values: np.ndarray  # complex, grid.shape
    scale: float  # a_{t-s}; 1 for physical-coordinate kernels
    meta: dict = field(default_factory=dict)

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def imag_ratio(self) -> float:
        m = np.abs(self.values.real).max()
        return float(np.abs(self.values.imag).max() / m) if m > 0 else 0.0

    @property
    def mass(self) -> float:
        return float(self.values.real.sum() * self.grid.cell_volume)

    def sup(self) -> float:
        return float(np.abs(self.values).max())

    def weighted_norm(self, power: float) -> float:
        """sum over the grid of | |x|^power K(x) |^2 h^d."""
        r = np.linalg.norm(self.grid.points(), axis=-1)
        return float(np.sum((r**power * np.abs(self.values)) ** 2) * self.grid.cell_volume)

    def rows(self):
        x = self.grid.points().reshape(-1, self.grid.d)
        v = self.values.reshape(-1)
        for xi, vi in zip(x, v):
            yield {**{f"x{k}": xi[k] for k in range(self.grid.d)}, "re": vi.real, "im": vi.imag}

    def summary(self) -> dict:
        return {
            "which": self.which,
            "s": self.s,
            "t": self.t,
            "scale": self.scale,
            "mass": self.mass,
            "sup": self.sup(),
            "imag_ratio": self.imag_ratio,
            "grid": self.grid.meta(),
            **self.meta,
        }


# -- multipliers ---------------------------------------------------------------------

def _multiplier(sym, psi, s, t, which, scale=1.0, ell=0):
    """Multiplier as a function of frequency arrays (..., d)."""
    tau = t - s

    def m(xi):
        z = scale * xi
        e = np.exp(sym.accumulate(s, t, z))
        if which == "p":
            return e
        w = psi.at_zero_ok(np.einsum("...i,...i->...", z, z)) * e
        if which == "psi_delta_p":
            return w
        if which == "q1":
            return tau * w
        if which == "q2":
            return tau * 1j * xi[..., ell] * w
        if which == "q3":
            return tau**2 * sym.psi(t, z) * w
        raise ValueError(f"unknown kernel {which!r}")

    return m


def _edge_max(grid: GridSpec, mult_vals: np.ndarray) -> float:
    """Largest |multiplier| on the two outermost frequency shells."""
    M = grid.M
    idx = np.abs(np.fft.fftfreq(M) * M)
    edge1 = idx >= M // 2 - 1
    mask = np.zeros(grid.shape, dtype=bool)
    for ax in range(grid.d):
        sl = [np.newaxis] * grid.d
        sl[ax] = slice(None)
        mask |= np.broadcast_to(edge1[tuple(sl)], grid.shape)
    return float(np.abs(mult_vals[mask]).max())


def _probe_required_M(grid: GridSpec, mfn, peak: float) -> int:
    # the edge shell is nearest the origin along a coordinate axis
    e0 = np.eye(grid.d)[0]
    M = grid.M
    while M < 2**24:
        M *= 2
        nyq = np.pi * M / (2 * grid.L)
        if abs(complex(np.ravel(mfn((nyq * e0)[None, :]))[0])) <= DECAY * peak:
            return M
    return M


def _check_resolution(grid, mfn, vals):
    peak = float(np.abs(vals).max())
    if peak == 0:
        return
    if _edge_max(grid, vals) > DECAY * peak:
        req = _probe_required_M(grid, mfn, peak)
        raise ResolutionError(
            f"multiplier has not decayed below {DECAY:g} of its peak at the Nyquist frequency "
            f"(M={grid.M}); need M >= {req}",
            required_M=req,
        )


def _kernel(sym, psi, s, t, grid, which, scale=1.0, ell=0, check=True, shift=None, negate=False):
    """Kernel K(w); with ``negate`` K(-w); with ``shift`` evaluated at w + shift."""
    mfn = _multiplier(sym, psi, s, t, which, scale, ell)
    xi = grid.frequencies()
    vals = mfn(-xi if negate else xi)
    if check:
        _check_resolution(grid, mfn, vals)
    if shift is not None:
        vals = vals * np.exp(1j * xi @ np.asarray(shift, dtype=float))
    return grid.multiplier_to_kernel(vals)


def compute_kernel(
    sym: SymbolSpec, psi: BernsteinSpec, s: float, t: float, grid: GridSpec, which: str = "p"
) -> KernelSnapshot:
    """p(s,t,.) or psi(Delta)p(s,t,.) on a periodic grid."""
    if not s < t:
        raise PreconditionError("compute_kernel needs s < t")
    if which not in ("p", "psi_delta_p"):
        raise ValueError("which must be 'p' or 'psi_delta_p'")
    vals = _kernel(sym, psi, s, t, grid, which)
    return KernelSnapshot(which, s, t, grid, vals, 1.0)


def compute_scaled_kernels(sym: SymbolSpec, psi: BernsteinSpec, s: float, t: float, grid: GridSpec) -> dict:
    """{'q1': snapshot, 'q2': [snapshot per axis], 'q3': snapshot} on the rescaled coordinate."""
    if not s < t:
        raise PreconditionError("compute_scaled_kernels needs s < t")
    a = scaling_factor(psi, t - s)
    out = {"a": a}
    out["q1"] = KernelSnapshot("q1", s, t, grid, _kernel(sym, psi, s, t, grid, "q1", a), a)
    out["q2"] = [
        KernelSnapshot(f"q2_{ell + 1}", s, t, grid, _kernel(sym, psi, s, t, grid, "q2", a, ell), a)
        for ell in range(sym.d)
    ]
    out["q3"] = KernelSnapshot("q3", s, t, grid, _kernel(sym, psi, s, t, grid, "q3", a), a)
    return out


def q1_relation_residual(sym, psi, s, t, grid: GridSpec) -> float:
    """Max relative gap in (t-s) a^{-d} [psi(Delta)p](x/a) = q1(x), both sides computed on grids.

    The physical grid is the rescaled one shrunk by a, so its nodes are exactly x/a.
    """
    a = scaling_factor(psi, t - s)
    phys = GridSpec(grid.d, grid.L / a, grid.M)
    lhs = (t - s) * a ** (-grid.d) * compute_kernel(sym, psi, s, t, phys, "psi_delta_p").values
    q1 = compute_scaled_kernels(sym, psi, s, t, grid)["q1"].values
    return float(np.abs(lhs - q1).max() / np.abs(q1).max())


# -- kernel bounds -----------------------------------------------------------------

@dataclass
class KernelBoundsReport:
    delta: float
    sup: dict
    weighted: dict
    weighted_refined: dict
    max_rel_change: float
    passed: bool
    rows: list = field(default_factory=list, repr=False)

    def summary(self):
        return {
            "delta": self.delta,
            "sup": self.sup,
            "weighted": self.weighted,
            "weighted_refined": self.weighted_refined,
            "max_rel_change": self.max_rel_change,
            "pass": self.passed,
        }


def default_delta(psi: BernsteinSpec) -> float:
    return 0.45 * min(psi.delta_lo, 0.5)


def _q_stats(sym, psi, pairs, grid, power):
    sup, wt, rows = {}, {}, []
    for s, t in pairs:
        q = compute_scaled_kernels(sym, psi, s, t, grid)
        snaps = [q["q1"], *q["q2"], q["q3"]]
        for sn in snaps:
            sv, wv = sn.sup(), sn.weighted_norm(power)
            sup[sn.which] = max(sup.get(sn.which, 0.0), sv)
            wt[sn.which] = max(wt.get(sn.which, 0.0), wv)
            rows.append({"s": s, "t": t, "kernel": sn.which, "M": grid.M, "L": grid.L, "sup": sv, "weighted": wv})
    return sup, wt, rows


def verify_kernel_bounds(sym, psi, pairs, grid: GridSpec, delta: float | None = None) -> KernelBoundsReport:
    """Sup norms and |x|^{d/2+delta}-weighted L2 norms of q1, q2, q3 over (s,t) pairs,
    with a stability check under doubling both L and M."""
    delta = default_delta(psi) if delta is None else delta
    if not 0 < delta < min(psi.delta_lo, 0.5):
        raise PreconditionError(f"delta must lie in (0, {min(psi.delta_lo, 0.5):g})")
    power = grid.d / 2 + delta
    sup, wt, rows = _q_stats(sym, psi, pairs, grid, power)
    fine = GridSpec(grid.d, 2 * grid.L, 2 * grid.M)
    sup2, wt2, rows2 = _q_stats(sym, psi, pairs, fine, power)
    changes = [abs(wt2[k] - wt[k]) / wt[k] for k in wt if wt[k] > 0]
    changes += [abs(sup2[k] - sup[k]) / sup[k] for k in sup if sup[k] > 0]
    finite = all(np.isfinite(v) for v in [*sup.values(), *wt.values(), *wt2.values()])
    mx = max(changes) if changes else 0.0
    return KernelBoundsReport(delta, sup, wt, wt2, mx, bool(finite and mx <= 0.2), rows + rows2)


def psi_at_xi_sandwich(psi: BernsteinSpec, t=None, xi=None) -> dict:
    """Fit N in N^{-1}|xi|^{d1} <= t psi(|a_t xi|^2) <= N |xi|^{d2}, with exponents
    2*delta_lo / 2*delta_hi swapped across |xi| = 1.  N is fitted on the given grid
    and validated (5% slack) on the interleaved grid."""
    t = np.geomspace(1e-3, 1e3, 32) if t is None else np.asarray(t, dtype=float)
    xi = np.geomspace(1e-3, 1e3, 32) if xi is None else np.asarray(xi, dtype=float)

    def ratios(tt, xx):
        a2 = phi_inverse(psi, 1.0 / tt)
        v = tt[:, None] * eval_phi(psi, a2[:, None] * xx[None, :] ** 2)
        big = xx[None, :] >= 1
        e1 = np.where(big, 2 * psi.delta_lo, 2 * psi.delta_hi)
        e2 = np.where(big, 2 * psi.delta_hi, 2 * psi.delta_lo)
        return xx[None, :] ** e1 / v, v / xx[None, :] ** e2

    lo, hi = ratios(t, xi)
    N = float(max(1.0, lo.max(), hi.max()))
    mid = lambda g: np.exp(0.5 * (np.log(g[1:]) + np.log(g[:-1])))
    vlo, vhi = ratios(mid(t), mid(xi))
    viol = int(np.sum(lo > N) + np.sum(hi > N) + np.sum(vlo > 1.05 * N) + np.sum(vhi > 1.05 * N))
    return {"phi": psi.label, "N": N, "violations": viol, "n_points": lo.size + vlo.size, "pass": viol == 0}


def chapman_kolmogorov_residual(sym, psi, s, r, t, grid: GridSpec) -> float:
    """max |p(s,r) * p(r,t) h^d - p(s,t)| via FFT convolution on the torus."""
    a = compute_kernel(sym, psi, s, r, grid).values
    b = compute_kernel(sym, psi, r, t, grid).values
    c = compute_kernel(sym, psi, s, t, grid).values
    axes = tuple(range(grid.d))
    conv = np.fft.ifftn(np.fft.fftn(a, axes=axes) * np.fft.fftn(b, axes=axes), axes=axes) * grid.cell_volume
    # grid origin is at index M/2 on each axis, so the circular convolution is shifted by M/2
    conv = np.roll(conv, shift=(grid.M // 2,) * grid.d, axis=axes)
    return float(np.abs(conv - c).max())


# -- tail and difference estimates -----------------------------------------------

def _log_midpoint(fn, lo, hi, n0=9, tol=1e-3, max_iter=6, atol=0.0):
    """Composite midpoint in u = log(tau) on [lo, hi], refined by tripling (which reuses
    every node) until the relative change of the first component is below tol.

    ``fn`` may return a scalar or a tuple; the result has the same form.
    """
    ulo, span = math.log(lo), math.log(hi) - math.log(lo)
    cache = {}

    def value(n):
        du = span / n
        acc = None
        for j in range(n):
            key = (2 * j + 1) * (3 ** max_iter // (n // n0) if n0 else 1)
            if key not in cache:
                m = math.exp(ulo + (j + 0.5) * du)
                cache[key] = np.atleast_1d(np.asarray(fn(m), dtype=float)) * m
            acc = cache[key].copy() if acc is None else acc + cache[key]
        return acc * du

    n = n0
    prev = value(n)
    for _ in range(max_iter):
        n *= 3
        val = value(n)
        if abs(val[0] - prev[0]) <= max(tol * abs(val[0]), atol, 1e-300):
            break
        prev = val
    else:
        if abs(val[0] - prev[0]) > 10 * max(tol * abs(val[0]), atol, 1e-300):
            raise AccuracyError(f"time quadrature did not converge: {prev[0]} -> {val[0]}")
    return float(val[0]) if len(val) == 1 else tuple(float(v) for v in val)


def tail_and_difference_estimates(
    sym, psi, s, t, a, c, hshift, grid: GridSpec, delta: float | None = None, tau_floor: float = 1e-8
) -> dict:
    """Left and right sides of the tail, translation and time-difference estimates.

    ``grid`` is the rescaled grid used for the q1-based integrals.  Right sides are
    reported with N = 1, so ``ratio`` is the fitted constant for that point.
    """
    if not (t > s > a > 0 and c > 0):
        raise PreconditionError("need t > s > a > 0 and c > 0")
    delta = default_delta(psi) if delta is None else delta
    d = grid.d
    r_norm = np.linalg.norm(grid.points(), axis=-1)
    hvec = np.zeros(d)
    hvec[0] = hshift

    # tail: int_s^t int_{|z|>=c} |psi(Delta)p(r,t,z)| dz dr, tau = t - r
    def tail(tau):
        at = scaling_factor(psi, tau)
        q = _kernel(sym, psi, t - tau, t, grid, "q1", at)
        return np.sum(np.abs(q)[r_norm >= at * c]) * grid.cell_volume / tau

    lhs1 = _log_midpoint(tail, tau_floor * (t - s), t - s)
    rhs1 = (scaling_factor(psi, t - s) * c) ** (-delta)

    # translation: int_0^a int |K(r,t,z+h) - K(r,t,z)| dz dr
    def trans(tau):
        at = scaling_factor(psi, tau)
        q = _kernel(sym, psi, t - tau, t, grid, "q1", at)
        qs = _kernel(sym, psi, t - tau, t, grid, "q1", at, shift=at * hvec, check=False)
        return np.sum(np.abs(qs - q)) * grid.cell_volume / tau

    lhs2 = _log_midpoint(trans, t - a, t) if hshift != 0 else 0.0
    rhs2 = abs(hshift) * scaling_factor(psi, t - a)

    # time difference: int_0^a int |K(r,t,z) - K(r,s,z)| dz dr on a physical grid
    a_min = scaling_factor(psi, s - a)
    a_max = scaling_factor(psi, t)
    Lp = grid.L / a_max
    hp = grid.h / a_min
    Mp = max(16, 1 << int(math.ceil(math.log2(2 * Lp / hp))))
    phys = GridSpec(d, Lp, Mp)

    def tdiff(tau_s):
        r = s - tau_s
        k1 = _kernel(sym, psi, r, t, phys, "psi_delta_p")
        k2 = _kernel(sym, psi, r, s, phys, "psi_delta_p")
        return np.sum(np.abs(k1 - k2)) * phys.cell_volume

    lhs3 = _log_midpoint(tdiff, s - a, s)
    rhs3 = (t - s) / (s - a)
    return {
        "tail": {"lhs": lhs1, "rhs": rhs1, "ratio": lhs1 / rhs1, "delta": delta},
        "translation": {"lhs": lhs2, "rhs": rhs2, "ratio": lhs2 / rhs2 if rhs2 else 0.0},
        "time": {"lhs": lhs3, "rhs": rhs3, "ratio": lhs3 / rhs3, "grid": phys.meta()},
    }


# -- Hormander integral -----------------------------------------------------------

def subadditivity_constant(psi: BernsteinSpec, lo: float = 1e-4, hi: float = 1e4, n: int = 81) -> float:
    """c0 with phi(t+s) <= c0 (phi(t) + phi(s)), phi(tau) = 1/a_tau, by grid search."""
    tt = np.geomspace(lo, hi, n)
    ss = np.geomspace(lo, hi, n)
    T, S = np.meshgrid(tt, ss, indexing="ij")
    ph = lambda x: time_modulus(psi, x.ravel()).reshape(x.shape)
    return float(max(1.0, np.max(ph(T + S) / (ph(T) + ph(S)))))


def _radial_shells(radii: np.ndarray):
    ur, inv = np.unique(np.round(radii.ravel(), 12), return_inverse=True)
    return ur, inv


def _radial_tail(vals, shells, r_lo, r_hi, vol):
    """Mass of |vals| on r_lo <= |w| <= r_hi, interpolated linearly in the radius between
    distinct grid radii so the result is continuous in the bounds."""
    if r_hi <= r_lo:
        return 0.0
    ur, inv = shells
    mass = np.bincount(inv, weights=np.abs(vals).ravel(), minlength=len(ur)) * vol
    tail = np.concatenate([np.cumsum(mass[::-1])[::-1], [0.0]])
    rr = np.concatenate([ur, [ur[-1] * (1 + 1e-12) + 1e-300]])
    f = lambda r: np.interp(r, rr, tail)
    return float(f(max(r_lo, 0.0)) - f(r_hi))


def _mask_sum(vals, mask, vol):
    return float(np.sum(np.abs(vals)[mask]) * vol)


def hormander_integral(
    sym,
    psi,
    tx,
    sy,
    c0: float | None = None,
    R: float = 16.0,
    grid: GridSpec | None = None,
    qgrid: GridSpec | None = None,
    tol: float = 1e-3,
    shell_tol: float = 0.02,
    return_parts: bool = False,
):
    """int_0^inf int_A |1_{r<t} K(r,t,x-z) - 1_{r<s} K(r,s,y-z)| dz dr, K = psi(Delta)p,
    A = {z : phi(|t-r|) + |x-z| >= c0 (phi(|t-s|) + |x-y|)}, restricted to |z - x| <= R.

    ``grid`` is the physical grid (half-extent is forced to R); ``qgrid`` the rescaled grid.
    Raises TruncationError when the shell 0.8 R < |z-x| <= R carries more than ``shell_tol``
    of the total.
    """
    (t, x), (s, y) = tx, sy
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if t < s:
        (t, x), (s, y) = (s, y), (t, x)
    d = sym.d
    if t == s and np.array_equal(x, y):
        return (0.0, {}) if return_parts else 0.0
    if c0 is None:
        c0 = 4 * subadditivity_constant(psi)
    M = grid.M if grid is not None else 4096
    phys = GridSpec(d, R, M)
    qgrid = qgrid or GridSpec(d, 64.0, 1024)
    dvec = y - x
    D = float(time_modulus(psi, t - s)[0] + np.linalg.norm(dvec))
    rho = lambda tau_t: c0 * D - float(time_modulus(psi, tau_t)[0])

    zpts = phys.points()  # z - x on the physical torus
    zr = np.linalg.norm(zpts, axis=-1)
    qpts = qgrid.points()
    qr = np.linalg.norm(qpts, axis=-1)
    zsh = _radial_shells(zr)
    qsh = _radial_shells(qr)

    # smallest resolvable tau on the physical grid
    lam_nyq = phys.nyquist**2
    tau_floor = 40.0 / float(eval_phi(psi, lam_nyq))
    tau_floor = min(tau_floor, 0.5 * s) if s > 0 else tau_floor

    def kt_resc(tau, rho_v):
        # int_{|w| >= rho_v} |K(t - tau, t, w)| dw with |w| <= R via q1 on the rescaled grid
        at = scaling_factor(psi, tau)
        q = _kernel(sym, psi, t - tau, t, qgrid, "q1", at)
        vol = qgrid.cell_volume / tau
        lo = at * rho_v
        return (
            _radial_tail(q, qsh, lo, at * R, vol),
            _radial_tail(q, qsh, max(lo, 0.8 * at * R), at * R, vol),
        )

    def ks_resc(tau, rho_v):
        # int_{|x - z| >= rho_v} |K(s - tau, s, y - z)| dz, z = y - v / a
        at = scaling_factor(psi, tau)
        q = _kernel(sym, psi, s - tau, s, qgrid, "q1", at)
        dist = np.linalg.norm(dvec + qpts / at, axis=-1)
        m = (dist >= rho_v) & (dist <= R)
        return _mask_sum(q, m, qgrid.cell_volume) / tau

    def both_phys(r):
        k1 = _kernel(sym, psi, r, t, phys, "psi_delta_p")
        # K(r,s,y-z) with z - x = w: y - z = dvec - w, i.e. K evaluated at -(w - dvec)
        k2 = _kernel(sym, psi, r, s, phys, "psi_delta_p", shift=-dvec, negate=True)
        lo = rho(t - r)
        diff = k1 - k2
        vol = phys.cell_volume
        return _radial_tail(diff, zsh, lo, R, vol), _radial_tail(diff, zsh, max(lo, 0.8 * R), R, vol)

    parts = {}
    shell = {}
    # r in [s, t): only the K(r, t) term
    if t > s:
        # below tau_in the excluded ball already covers the rescaled grid
        lo = 1e-6 * (t - s)
        reach = qgrid.L * math.sqrt(d)
        if scaling_factor(psi, t - s) * rho(t - s) < reach:
            f = lambda u: scaling_factor(psi, math.exp(u)) * rho(math.exp(u)) - reach
            if f(math.log(lo)) > 0:
                lo = math.exp(brentq(f, math.log(lo), math.log(t - s), xtol=1e-6))
        else:
            lo = None
    if t > s and lo is not None:
        parts["late"], shell["late"] = _log_midpoint(
            lambda tau: kt_resc(tau, rho(tau)), lo, t - s, n0=27, tol=tol, atol=1e-10
        )
    if s > 0:
        # r in (0, s - tau_floor): both kernels resolved on the physical grid
        if s > tau_floor:
            parts["early"], shell["early"] = _log_midpoint(lambda ts: both_phys(s - ts), tau_floor, s, tol=tol, atol=1e-10)
        # r in (s - tau_floor, s): K(r,s) is unresolved; use the sum of the two tails
        lo = 1e-6 * tau_floor
        near = lambda ts: _radial_tail(
            _kernel(sym, psi, s - ts, t, phys, "psi_delta_p"), zsh, rho(t - s + ts), R, phys.cell_volume
        ) + ks_resc(ts, rho(t - s + ts))
        scale = math.fsum(parts.values())
        parts["near"] = _log_midpoint(near, lo, min(tau_floor, s), tol=tol, atol=max(tol * scale, 1e-10))
    total = math.fsum(parts.values())
    sh = math.fsum(shell.values())
    if total > 0 and sh > shell_tol * total:
        raise TruncationError(
            f"outer shell carries {sh / total:.3g} of the Hormander integral at R={R}", suggested_R=4 * R
        )
    info = {"parts": parts, "shell": sh, "c0": c0, "D": D, "tau_floor": tau_floor, "R": R}
    return (total, info) if return_parts else total


@dataclass
class HormanderReport:
    R: tuple
    sups: tuple
    rel_change: float
    passed: bool
    rows: list = field(default_factory=list, repr=False)

    def summary(self):
        return {"R": list(self.R), "sup": list(self.sups), "rel_change": self.rel_change, "pass": self.passed}


def random_pairs(n: int, seed: int, d: int = 1, tmin: float = 0.1, tmax: float = 2.0, xmax: float = 1.0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        t, s = rng.uniform(tmin, tmax, 2)
        x, y = rng.uniform(-xmax, xmax, (2, d))
        out.append(((float(t), x), (float(s), y)))
    return out


def hormander_sup(sym, psi, n_pairs: int = 50, seed: int = 0, R: float = 32.0, M: int = 2048, tol: float = 1e-3):
    """Sup of the Hormander integral over random pairs at truncation R and 2R, with the
    spatial step held fixed (M doubles with R)."""
    pairs = random_pairs(n_pairs, seed, sym.d)
    c0 = 4 * subadditivity_constant(psi)
    rows, sups = [], []
    for RR, MM in ((R, M), (2 * R, 2 * M)):
        grid = GridSpec(sym.d, RR, MM)
        best = 0.0
        for k, (tx, sy) in enumerate(pairs):
            v = hormander_integral(sym, psi, tx, sy, c0=c0, R=RR, grid=grid, tol=tol)
            best = max(best, v)
            rows.append({"R": RR, "pair": k, "t": tx[0], "s": sy[0], "x0": tx[1][0], "y0": sy[1][0], "value": v})
        sups.append(best)
    change = abs(sups[1] - sups[0]) / sups[0] if sups[0] > 0 else 0.0
    return HormanderReport((R, 2 * R), tuple(sups), change, bool(change < 0.1), rows)
