"""End-to-end acceptance checks, one test per criterion.

Each test records a single PASS/FAIL line (shown in the terminal summary and printed
under ``-s``) and then asserts, so a failing criterion also fails the run.
"""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from levylp.grid import GridSpec, SpaceTimeField
from levylp.kernels import (
    compute_kernel,
    hormander_sup,
    psi_at_xi_sandwich,
    q1_relation_residual,
    verify_kernel_bounds,
)
from levylp.maximal import build_filtration, get_scale, verify_fs_hl
from levylp.registry import get_process, get_symbol
from levylp.solver import estimate_ratio_harness, perturb, solve, weak_residual
from levylp.stochastic import interpolate_periodic, mc_solution, verify_cf
from levylp.symbols import (
    ClockSymbol,
    linear,
    log_minus,
    log_plus,
    piecewise,
    psi_inverse_sandwich,
    radial,
    relativistic,
    stable,
    sum_stable,
    verify_symbol_conditions,
)

PAIRS = [(s, s + w) for s in (0.0, 0.5, 0.9, 1.3) for w in (0.05, 0.1, 0.4, 0.8, 1.5)]  # 20 pairs
XIS = np.linspace(0.2, 3.0, 10)[:, None]  # x 10 frequencies = 200 points
EXACT_MODE = -0.14056119503803959  # int_0^1 e^{-2(1-s)} cos(3s) ds, mpmath


def record(n, ok, detail, t0):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail} [{time.time() - t0:.1f}s]"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def bump(T=1.0, K=64, M=256):
    g = GridSpec(1, 8.0, M)
    return SpaceTimeField.from_function(g, T, K, lambda t, x: np.exp(-np.sum(x**2, axis=-1)) * (1 + t))


def test_criterion_1_characteristic_functions():
    t0 = time.time()
    ids = ["ex2.3-sbm-alpha05-sigma12", "ex2.3-sbm-alpha075-sigma12", "ex2.4-clock", "ex2.4-clock-alpha075"]
    fracs = {}
    for k, name in enumerate(ids):
        proc = get_process(name)
        rep = verify_cf(proc, get_symbol(name), PAIRS, XIS, 100_000, seed=1000 * k)
        assert len(rep.rows) == 200
        fracs[name] = rep.fraction_within
    elapsed = time.time() - t0
    ok = all(f >= 0.99 for f in fracs.values()) and elapsed <= 120
    detail = "fraction within 3 SE " + ", ".join(f"{k}={v:.3f}" for k, v in fracs.items())
    assert record(1, ok, detail, t0)


def test_criterion_2_monte_carlo_vs_spectral():
    t0 = time.time()
    proc = get_process("ex2.3-sbm-alpha075-sigma12")
    f = bump()
    u = solve(proc.symbol(), f)
    pts = np.linspace(-2, 2, 16)[:, None]
    mean, se = mc_solution(proc, f, 1.0, pts, 100_000, seed=5)
    ref = interpolate_periodic(u.values[-1], f.grid, pts)
    dev = np.abs(mean - ref) / (3 * se + 1e-3)
    ok = bool(np.all(dev <= 1)) and time.time() - t0 <= 300
    assert record(2, ok, f"max |mc - solve| / (3 SE + 1e-3) = {dev.max():.3f} over 16 points", t0)


def test_criterion_3_estimate_harness():
    t0 = time.time()
    spreads = {}
    for name in ("stable-1.0", "stable-1.5", "clock-1.5"):
        sym = get_symbol(name)
        _, summ = estimate_ratio_harness(sym, sym.principal.phi, (2, 4), 20, (64, 128, 256), seed=0)
        spreads[name] = max(v["spread"] for v in summ.values())
    heat = get_symbol("heat")
    _, summ = estimate_ratio_harness(heat, linear(), (2,), 20, (64, 128, 256), seed=0)
    heat_max = max(summ["p=2"]["max_ratio"].values())
    ok = all(s < 2 for s in spreads.values()) and heat_max <= 1 + 1e-3
    detail = "spreads " + ", ".join(f"{k}={v:.3f}" for k, v in spreads.items()) + f"; heat p=2 max ratio {heat_max:.6f}"
    assert record(3, ok, detail, t0)


def test_criterion_4_kernel_suite():
    t0 = time.time()
    heat = radial(linear(), 1)
    # (a) closed form
    g = GridSpec(1, 8.0, 64)
    x = g.points()[..., 0]
    inner = np.abs(x) <= 4
    rel_a = 0.0
    for s, t in [(0.0, 0.5), (0.3, 1.0), (1.0, 3.0)]:
        k = compute_kernel(heat, linear(), s, t, g).real
        exact = np.exp(-(x**2) / (4 * (t - s))) / np.sqrt(4 * np.pi * (t - s))
        rel_a = max(rel_a, float(np.max(np.abs(k - exact)[inner] / exact[inner])))
    # (b) mass of every computed kernel
    cases = [
        (heat, linear()),
        (radial(stable(0.5), 1), stable(0.5)),
        (radial(stable(0.75), 1), stable(0.75)),
        (ClockSymbol(stable(0.75), piecewise((0.0, 1.0), (1.0, 2.0)), 1), stable(0.75)),
    ]
    big = GridSpec(1, 64.0, 8192)
    mass_err = max(
        abs(compute_kernel(sym, psi, s, t, big).mass - 1)
        for sym, psi in cases
        for s, t in [(0.0, 0.5), (0.5, 2.0)]
    )
    # (c) scaling identity
    q1 = max(q1_relation_residual(sym, psi, 0.2, 1.0, GridSpec(1, 16.0, 1024)) for sym, psi in cases)
    # (d) weighted norms under L, M doubling
    ch = {}
    for alpha in (0.75, 1.0):
        psi = linear() if alpha == 1.0 else stable(alpha)
        rep = verify_kernel_bounds(radial(psi, 1), psi, [(0.0, 0.5), (0.5, 2.0)], GridSpec(1, 32.0, 1024))
        ch[alpha] = (rep.max_rel_change, rep.passed)
    # (e) Hormander sup under truncation doubling
    hr = hormander_sup(heat, linear(), n_pairs=50, seed=0, R=32.0, M=2048)
    ok = rel_a < 1e-6 and mass_err < 1e-6 and q1 < 1e-8 and all(p for _, p in ch.values()) and hr.rel_change < 0.1
    detail = (
        f"(a) rel {rel_a:.1e} (b) mass err {mass_err:.1e} (c) q1 {q1:.1e} "
        f"(d) change {max(c for c, _ in ch.values()):.3f} (e) sup change {hr.rel_change:.1e}"
    )
    assert record(4, ok, detail, t0)


def test_criterion_5_sandwiches():
    t0 = time.time()
    specs = [stable(0.5), stable(0.75), linear(), sum_stable(0.3, 0.8), log_plus(0.5, 0.3), log_minus(0.6, 0.2), relativistic(0.5, 1.0)]
    viol = 0
    for spec in specs:
        viol += psi_inverse_sandwich(spec).violations
        rep = psi_at_xi_sandwich(spec, np.geomspace(1e-3, 1e3, 32), np.geomspace(1e-3, 1e3, 32))
        viol += rep["violations"]
    assert record(5, viol == 0, f"{viol} violations over {len(specs)} Bernstein functions (32x32 grids)", t0)


def test_criterion_6_maximal_machinery():
    t0 = time.time()
    parts = []
    ok = True
    for name in ("r", "r^0.5", "r^1.5", "r^2"):
        filt = build_filtration(get_scale(name), -4, 8)
        sig_ok = all(1 <= s < 2 for s in filt.sigma.values())
        vol_ok = filt.N0 <= filt.N0_bound
        rep = verify_fs_hl(filt, n_fields=100, seed=0, p_list=(2, 4))
        fs = sum(rep.violations.values())
        hl = max(rep.hl_change.values())
        ok &= sig_ok and vol_ok and filt.nesting_ok and fs == 0 and hl <= 0.2
        parts.append(f"{name}: N0={filt.N0:g} FS viol={fs} HL change={hl:.3f}")
    ok &= time.time() - t0 <= 120
    assert record(6, ok, "; ".join(parts), t0)


def test_criterion_7_negative_controls():
    t0 = time.time()
    aniso = verify_symbol_conditions(get_symbol("remark-anisotropic"))
    mism = verify_cf(get_process("ex2.3-sbm-alpha05-sigma12"), get_symbol("ex2.3-sbm-alpha075-sigma12"), PAIRS, XIS, 100_000, seed=1)
    sym = radial(stable(0.75), 1)
    g = GridSpec(1, 8.0, 256)
    f = SpaceTimeField.from_function(g, 1.0, 256, lambda t, x: np.exp(-np.sum(x**2, axis=-1)) * np.cos(3 * t))
    u = solve(sym, f)
    base = weak_residual(u, f, sym)
    noisy = weak_residual(perturb(u, 0.01, seed=1), f, sym)
    ok = (not aniso.passed) and (not mism.passed) and noisy >= 10 * base
    detail = f"anisotropic audit passed={aniso.passed}; mismatched cf fraction={mism.fraction_within:.3f}; residual x{noisy / base:.1f}"
    assert record(7, ok, detail, t0)


def _mode_error(K):
    g = GridSpec(1, np.pi / np.sqrt(2), 16)  # first mode at |xi|^2 = 2
    f = SpaceTimeField.from_function(g, 1.0, K, lambda t, x: np.cos(3 * t) * np.cos(np.sqrt(2) * x[..., 0]))
    u = solve(radial(linear(), 1), f)
    return float(np.max(np.abs(u.values[-1] - EXACT_MODE * np.cos(np.sqrt(2) * g.points()[..., 0]))))


def test_criterion_8_solver():
    t0 = time.time()
    Ks = (20, 40, 80, 160, 320)
    errs = np.array([_mode_error(K) for K in Ks])
    order = float(np.min(np.log2(errs[:-1] / errs[1:])))
    # error bound 1e-6 + C dt^2 with C fitted on the coarsest step
    C = errs[0] * Ks[0] ** 2
    within = bool(np.all(errs <= 1e-6 + C / np.array(Ks) ** 2))
    g = GridSpec(1, np.pi, 64)
    sym = ClockSymbol(stable(0.75), piecewise((0.0, 1.0), (1.0, 2.0)), 1)
    rng = np.random.default_rng(0)
    lin = caus = 0.0
    for _ in range(5):
        f1 = SpaceTimeField(g, 2.0, rng.standard_normal((33, 64)))
        f2 = SpaceTimeField(g, 2.0, rng.standard_normal((33, 64)))
        a, b = rng.normal(size=2)
        u = solve(sym, f1.with_values(a * f1.values + b * f2.values)).values
        v = a * solve(sym, f1).values + b * solve(sym, f2).values
        lin = max(lin, float(np.max(np.abs(u - v))))
        k0 = int(rng.integers(1, 31))
        w = f1.values.copy()
        w[k0 + 1 :] = rng.standard_normal(w[k0 + 1 :].shape)
        caus = max(caus, float(np.max(np.abs(solve(sym, f1).values[: k0 + 1] - solve(sym, f1.with_values(w)).values[: k0 + 1]))))
    ok = order >= 1.9 and within and errs[-1] < 1e-4 and lin <= 1e-10 and caus <= 1e-10
    detail = f"finest error {errs[-1]:.2e}, observed order {order:.3f}, linearity {lin:.1e}, causality {caus:.1e}"
    assert record(8, ok, detail, t0)
