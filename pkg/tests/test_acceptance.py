"""Acceptance gate: one test per release criterion, each printing a
PASS/FAIL line (run with `pytest tests/test_acceptance.py -v -s`).

Fixed seeds make every criterion deterministic and reproducible.
"""

import math
import time

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gammaln, ndtr, ndtri
from scipy.stats import ks_2samp

import mvawgn as mv
from mvawgn._util import philox_stream
from mvawgn.cli import main as cli_main
from mvawgn.shell_density import (
    BESSEL_NU_CROSSOVER,
    _log_bessel_i_asymptotic,
    _log_bessel_i_series,
)

from oracles import direct_info_density_sums, grid_min_expected_phi

GAMMA, NOISE = 2.0, 1.0


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def test_criterion_01_closed_form_suite():
    """Closed forms match 50-digit evaluation at 20 random tuples, 1e-10 rel."""
    start = time.perf_counter()
    mp.mp.dps = 50
    rng = philox_stream(1001)
    worst = 0.0
    for _ in range(20):
        g = float(rng.uniform(0.2, 8.0))
        nv = float(rng.uniform(0.2, 4.0))
        x = float(rng.uniform(-3.0, 3.0))
        cost = float(rng.uniform(0.0, 6.0))
        n = int(rng.integers(1, 5000))
        spec = mv.ChannelSpec(nv, g, 0.0)

        mg, mn, mx, mc = mp.mpf(g), mp.mpf(nv), mp.mpf(x), mp.mpf(cost)
        cap = mp.log(1 + mg / mn) / 2
        slope = 1 / (2 * (mg + mn))
        disp = (mg**2 + 2 * mg * mn) / (2 * (mg + mn) ** 2)
        nu_x = (mg**2 + 2 * mx**2 * mn) / (2 * (mg + mn) ** 2)
        mean = n * (cap - slope * (mg - mc))
        var = (n * mg**2 + 2 * mn * n * mc) / (2 * (mg + mn) ** 2)

        pairs = [
            (mv.capacity_cost(spec), cap),
            (mv.capacity_cost_derivative(spec), slope),
            (mv.dispersion(spec), disp),
            (mv.info_density_variance_at(spec, x), nu_x),
            (mv.info_density_mean(spec, cost, n), mean),
            (mv.info_density_sum_variance(spec, cost, n), var),
        ]
        for mine, ref in pairs:
            ref = float(ref)
            denom = max(abs(ref), 1e-300)
            worst = max(worst, abs(mine - ref) / denom)
    elapsed = time.perf_counter() - start
    _report(1, worst < 1e-10 and elapsed < 1.0, f"worst rel err {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_min_phi_oracle_equivalence():
    """Solver vs brute-force grid on the 5x5 lattice + monotonicity margins."""
    start = time.perf_counter()
    rs = np.linspace(-2.0, 2.0, 5)
    vs = np.linspace(0.1, 4.0, 5)
    values = {}
    worst_gap = 0.0
    for r in rs:
        for v in vs:
            res = mv.min_expected_phi(float(r), float(v))
            values[(r, v)] = res.value
            oracle = grid_min_expected_phi(float(r), float(v))
            worst_gap = max(worst_gap, abs(res.value - oracle))
    mono_r = min(
        values[(r2, v)] - values[(r1, v)]
        for v in vs
        for r1, r2 in zip(rs, rs[1:])
    )
    mono_v = min(
        values[(r, v1)] - values[(r, v2)]
        for r in rs
        for v1, v2 in zip(vs, vs[1:])
    )
    dominance = min(float(ndtr(r)) - values[(r, v)] for r in rs for v in vs)
    elapsed = time.perf_counter() - start
    ok = worst_gap < 1e-3 and mono_r > 1e-6 and mono_v > 1e-6 and dominance > 1e-6 and elapsed < 60
    _report(
        2,
        ok,
        f"oracle gap {worst_gap:.2e}, r-margin {mono_r:.2e}, v-margin {mono_v:.2e}, "
        f"dominance {dominance:.2e}, {elapsed:.1f}s",
    )


def test_criterion_03_socr_zero_variance_collapse():
    """socr at V=0 equals sqrt(4/9) * ndtri(eps) to 1e-6."""
    spec = mv.ChannelSpec(NOISE, GAMMA, 0.0)
    worst = max(
        abs(mv.socr(spec, eps) - math.sqrt(4.0 / 9.0) * float(ndtri(eps)))
        for eps in (0.01, 0.1, 0.5, 0.9)
    )
    _report(3, worst <= 1e-6, f"worst gap {worst:.2e}")


def test_criterion_04_socr_curves_dominate_and_order():
    """V in {0.5,1,2} curves strictly above V=0 pointwise and ordered in V."""
    start = time.perf_counter()
    eps_grid = [0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5]
    sqrt_vd = math.sqrt(4.0 / 9.0)
    base = {eps: sqrt_vd * float(ndtri(eps)) for eps in eps_grid}
    curves = {
        v: {eps: mv.socr(mv.ChannelSpec(NOISE, GAMMA, v), eps) for eps in eps_grid}
        for v in (0.5, 1.0, 2.0)
    }
    dominance = min(curves[0.5][eps] - base[eps] for eps in eps_grid)
    ordering = min(
        min(curves[1.0][eps] - curves[0.5][eps] for eps in eps_grid),
        min(curves[2.0][eps] - curves[1.0][eps] for eps in eps_grid),
    )
    increasing = all(
        curves[v][e2] > curves[v][e1]
        for v in curves
        for e1, e2 in zip(eps_grid, eps_grid[1:])
    )
    elapsed = time.perf_counter() - start
    ok = dominance > 0 and ordering > 0 and increasing and elapsed < 300
    _report(
        4,
        ok,
        f"min dominance {dominance:.2e}, min ordering {ordering:.2e}, "
        f"increasing={increasing}, {elapsed:.0f}s",
    )


def test_criterion_05_minimizer_sweep_trends():
    """Two-point minimizers: heavy mass on the lower point, upper point grows,
    lower point drifts slowly (total-variation ratio < 1/3)."""
    r = math.sqrt(4.0 / 9.0) * float(ndtri(0.1))
    rows = mv.minimizer_sweep(r, list(np.linspace(0.25, 4.0, 16)))
    two_point = all(row.minimizer is not None and len(row.minimizer.atoms) == 2 for row in rows)
    lowers = [row.minimizer.points[0] for row in rows]
    uppers = [row.minimizer.points[-1] for row in rows]
    heavy_low = all(row.minimizer.probs[0] > row.minimizer.probs[-1] for row in rows)
    upper_grows = all(b > a for a, b in zip(uppers, uppers[1:]))
    ratio = abs(lowers[-1] - lowers[0]) / (uppers[-1] - uppers[0])
    ok = two_point and heavy_low and upper_grows and ratio < 1.0 / 3.0
    _report(
        5,
        ok,
        f"two-point={two_point}, heavy-low={heavy_low}, upper-grows={upper_grows}, "
        f"drift ratio {ratio:.3f}",
    )


def test_criterion_06_bessel_and_density_suite():
    """Half-integer forms 1e-10; branch agreement 1e-6; normalization 1e-6;
    squared-norm moments 1e-4 at n=32."""
    start = time.perf_counter()
    half_err = max(
        abs(
            mv.log_bessel_i(0.5, x)
            - (math.log(math.sinh(x)) + 0.5 * math.log(2.0 / (math.pi * x)))
        )
        for x in (1.0, 5.0, 20.0)
    )
    branch_err = max(
        abs(
            math.expm1(
                _log_bessel_i_asymptotic(BESSEL_NU_CROSSOVER, np.array([BESSEL_NU_CROSSOVER * z]))[0]
                - _log_bessel_i_series(BESSEL_NU_CROSSOVER, np.array([BESSEL_NU_CROSSOVER * z]))[0]
            )
        )
        for z in np.linspace(0.2, 5.0, 30)
    )

    def radial_log_pdf(dens, rho):
        n = dens.blocklength
        log_surf = (
            math.log(2.0)
            + 0.5 * n * math.log(math.pi)
            + (n - 1) * math.log(rho)
            - gammaln(0.5 * n)
        )
        return dens.log_density(rho * rho) + log_surf

    norm_err = 0.0
    for n in (2, 8, 32):
        dens = mv.ShellOutputDensity(n, math.sqrt(n * GAMMA), NOISE)
        top = math.sqrt(n * (GAMMA + NOISE)) + 40.0
        mass, _ = quad(lambda r: math.exp(radial_log_pdf(dens, r)), 1e-12, top, limit=300)
        norm_err = max(norm_err, abs(mass - 1.0))

    dens32 = mv.ShellOutputDensity(32, math.sqrt(32 * GAMMA), NOISE)
    top = math.sqrt(32 * (GAMMA + NOISE)) + 40.0
    m2, _ = quad(lambda r: r * r * math.exp(radial_log_pdf(dens32, r)), 1e-12, top, limit=300)
    m4, _ = quad(lambda r: r**4 * math.exp(radial_log_pdf(dens32, r)), 1e-12, top, limit=300)
    mean_err = abs(m2 - 96.0) / 96.0
    var_err = abs((m4 - m2 * m2) - 320.0) / 320.0
    elapsed = time.perf_counter() - start
    ok = half_err < 1e-10 and branch_err < 1e-6 and norm_err < 1e-6 and mean_err < 1e-4 and var_err < 1e-4
    _report(
        6,
        ok,
        f"half-integer {half_err:.1e}, branch {branch_err:.1e}, norm {norm_err:.1e}, "
        f"E-norm2 {mean_err:.1e}, Var-norm2 {var_err:.1e}, {elapsed:.0f}s",
    )


def test_criterion_07_log_ratio_bounds():
    """sup/log n bounded for shrinking perturbations; linear growth for a
    fixed perturbation (log-log slope 1 +/- 0.15)."""
    start = time.perf_counter()
    ns = [128, 512, 2048, 8192]
    gauss = mv.log_ratio_shell_vs_gaussian(GAMMA, NOISE, ns, 10_000, seed=71)
    ratios_g = [row.sup_over_log_n for row in gauss]
    bounded_g = max(ratios_g) <= 3.0 * ratios_g[0]

    shrink = mv.log_ratio_shell_vs_shell(
        GAMMA, 0.5, NOISE, ns, 10_000, seed=72, eps_scaling="inv-sqrt-n"
    )
    ratios_s = [row.sup_over_log_n for row in shrink]
    bounded_s = max(ratios_s) <= 3.0 * ratios_s[0]

    fixed = mv.log_ratio_shell_vs_shell(
        GAMMA, 0.5, NOISE, ns, 10_000, seed=73, eps_scaling="fixed"
    )
    slope = float(
        np.polyfit(np.log(ns), np.log([row.sup_abs_log_ratio for row in fixed]), 1)[0]
    )
    coverage = all(not row.low_coverage for row in gauss + shrink + fixed)
    elapsed = time.perf_counter() - start
    ok = bounded_g and bounded_s and 0.85 <= slope <= 1.15 and coverage and elapsed < 600
    _report(
        7,
        ok,
        f"gauss ratio span {max(ratios_g) / ratios_g[0]:.2f}x, shrink span "
        f"{max(ratios_s) / ratios_s[0]:.2f}x, fixed-eps slope {slope:.3f}, {elapsed:.0f}s",
    )


def test_criterion_08_clt_and_spherical_symmetry():
    """Sampled KS decay exponent in [0.35, 0.65]; two-sample agreement between
    the reduction sampler and direct simulation at n=64."""
    start = time.perf_counter()
    spec = mv.ChannelSpec(NOISE, GAMMA, 0.0)
    ks = [
        mv.empirical_cdf_info_density(spec, GAMMA, n, 100_000, seed=5).ks_vs_normal
        for n in (100, 1000, 10_000)
    ]
    exponent = -float(np.polyfit(np.log([100, 1000, 10_000]), np.log(ks), 1)[0])

    mine = mv.sample_info_density_sums(spec, GAMMA, 64, 100_000, philox_stream(640))
    direct = direct_info_density_sums(
        GAMMA, NOISE, np.full(64, math.sqrt(GAMMA)), 100_000, philox_stream(641)
    )
    pvalue = float(ks_2samp(mine, direct).pvalue)
    elapsed = time.perf_counter() - start
    ok = 0.35 <= exponent <= 0.65 and pvalue > 0.01
    _report(
        8,
        ok,
        f"KS={['%.4f' % k for k in ks]}, exponent {exponent:.3f}, two-sample p {pvalue:.3f}, "
        f"{elapsed:.0f}s",
    )


def test_criterion_09_end_to_end_achievability():
    """V=0 estimate hits the asymptotic value at n=2000; V=1 estimates move
    toward the limit as n grows."""
    start = time.perf_counter()
    spec0 = mv.ChannelSpec(NOISE, GAMMA, 0.0)
    r0 = math.sqrt(4.0 / 9.0) * float(ndtri(0.1))
    code0 = mv.build_mixture(spec0, 2000, r=r0)
    est0 = mv.estimate_error_functional(code0, spec0, 100_000, seed=42)
    half_width = max(est0.estimate - est0.ci_low, est0.ci_high - est0.estimate)
    v0_ok = abs(est0.estimate - 0.1) <= max(half_width, 0.03)

    spec1 = mv.ChannelSpec(NOISE, GAMMA, 1.0)
    r1 = mv.socr(spec1, 0.1)
    limit = mv.error_probability_bound(spec1, r1)
    devs = []
    for n in (500, 2000, 8000):
        code = mv.build_mixture(spec1, n, r=r1)
        est = mv.estimate_error_functional(code, spec1, 400_000, seed=101)
        devs.append(abs(est.estimate - limit))
    trend_ok = all(a >= b for a, b in zip(devs, devs[1:]))
    elapsed = time.perf_counter() - start
    ok = v0_ok and trend_ok and abs(limit - 0.1) < 1e-6 and elapsed < 900
    _report(
        9,
        ok,
        f"V=0 estimate {est0.estimate:.4f} (target 0.1), V=1 deviations "
        f"{['%.5f' % d for d in devs]}, {elapsed:.0f}s",
    )


def test_criterion_10_manifest_rerun_determinism(tmp_path):
    """Re-running any command from its manifest reproduces data.csv bytes."""
    out = tmp_path / "out"
    results = []
    for args in (
        ["clt-check", "--gamma", "2", "--noise", "1", "--n-list", "100,400",
         "--trials", "20000", "--seed", "5", "--out-dir", str(out)],
        ["simulate", "--gamma", "2", "--noise", "1", "--v", "0", "--r", "-0.85",
         "--n-list", "200", "--trials", "4000", "--seed", "9", "--out-dir", str(out)],
        ["minimizer-sweep", "--r", "0", "--v-list", "0.5,1", "--out-dir", str(out)],
    ):
        assert cli_main(args) == 0
        command = args[0]
        first = sorted((out / command).iterdir())[0]
        assert cli_main(["rerun", str(first / "manifest.json")]) == 0
        second = sorted((out / command).iterdir())[1]
        results.append(
            (first / "data.csv").read_bytes() == (second / "data.csv").read_bytes()
        )
    _report(10, all(results), f"byte-identical reruns: {results}")
