"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Each criterion runs at its stated tolerance and (where stated) within its
runtime budget.  Criterion 9's gap check is expected to fail: the printed
large-blocklength formula cannot reach the stated tolerance under any
resolved reading (see discrepancy D9 in the validate report and the
decisions ledger); it is implemented faithfully and left red rather than
loosened.
"""

import math
import time

import numpy as np
import pytest

from risbound.bound import (
    BoundQuery,
    expected_bound,
    moment_integral,
    log_asymptotic_bound,
    phi_chebyshev,
    phi_exact_2d,
)
from risbound.channel import RisChannelSpec, analytic_moments, gamma_fit, sample_moments
from risbound.codesim import SimConfig, simulate_ml_error
from risbound.errors import OutOfRegimeError
from risbound.quadrature import log_gaussian_exponential_integral
from risbound.spheregeom import log_cap_area, log_cap_ratio, solve_alpha1
from risbound.validate import measure_crossing, run_validation

PATH_GAIN_DB = -48.00479719372155
SPEC4 = RisChannelSpec(4, 1.0, 0.5)
SPEC64 = RisChannelSpec(64, 1.0, 0.5)


def report(num, ok, detail):
    print(f"\nACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


def test_criterion_1_geometry_exactness():
    t0 = time.time()
    ok2 = math.exp(log_cap_area(math.pi, 2)) == pytest.approx(2 * math.pi, rel=1e-12)
    ok3 = math.exp(log_cap_area(math.pi, 3)) == pytest.approx(4 * math.pi, rel=1e-12)
    worst = 0.0
    grid = np.linspace(0.9, math.pi, 50)
    for n in range(4, 41):
        for alpha in grid:
            ref = log_cap_ratio(float(alpha), n, "incomplete_beta")
            got = log_cap_ratio(float(alpha), n, "recursion")
            worst = max(worst, abs(math.expm1(got - ref)))
    elapsed = time.time() - t0
    ok = ok2 and ok3 and worst <= 1e-9 and elapsed < 1.0
    assert report(1, ok, f"full-sphere areas exact; method agreement {worst:.2e} "
                         f"(tol 1e-9) on 37x50 grid; {elapsed:.2f}s (budget 1s)")


def test_criterion_2_alpha1_solver():
    t0 = time.time()
    worst = 0.0
    for n in range(8, 129, 8):
        for rate in (0.25, 0.5, 0.75):
            worst = max(worst, abs(solve_alpha1(n, rate).residual))
    dec_n = [solve_alpha1(n, 0.5).alpha1 for n in range(8, 129, 8)]
    dec_r = [solve_alpha1(64, r).alpha1 for r in (0.25, 0.5, 0.75)]
    mono = all(b < a for a, b in zip(dec_n, dec_n[1:])) and all(
        b < a for a, b in zip(dec_r, dec_r[1:]))
    elapsed = time.time() - t0
    ok = worst <= 1e-12 and mono and elapsed < 1.0
    assert report(2, ok, f"worst residual {worst:.2e} (tol 1e-12); strictly "
                         f"decreasing in n and rate; {elapsed:.2f}s (budget 1s)")


def test_criterion_3_moment_integral_resolution():
    t0 = time.time()
    rng = np.random.default_rng(20240817)
    worst = 0.0
    for _ in range(20):
        p = float(rng.uniform(0.5, 200.0))
        b = float(rng.uniform(0.2, 2.0))
        z = float(rng.uniform(0.05, 1.0)) * min(10.0, 20.0 / p)
        c = 1.0 / (4.0 * b * b * z)
        ref = log_gaussian_exponential_integral(p, c, 1.0 / b)
        got = moment_integral(p, b, c, variant="auto")
        worst = max(worst, abs(math.expm1(got.log_abs - ref)))
    g0 = abs(moment_integral(0.0, math.inf, 2.0).to_float() - 0.5 * math.sqrt(math.pi / 2.0))
    g1 = abs(moment_integral(1.0, math.inf, 2.0).to_float() - 0.25)
    elapsed = time.time() - t0
    ok = worst <= 1e-6 and g0 <= 1e-12 and g1 <= 1e-12 and elapsed < 5.0
    assert report(3, ok, f"oracle-selected variant vs quadrature {worst:.2e} over 20 "
                         f"triples (tol 1e-6); Gaussian trivials exact; "
                         f"{elapsed:.2f}s (budget 5s)")


def test_criterion_4_collapse_chebyshev_accuracy():
    t0 = time.time()
    m = analytic_moments(SPEC4)
    rms = math.sqrt(m.second_moment)
    snrs = {8: (0.1, 0.3, 0.8, 1.5, 3.0), 16: (0.1, 0.3, 0.5, 1.0, 3.0),
            32: (0.1, 0.3, 0.5, 1.0, 3.0)}
    worst = 0.0
    lines = []
    for n in (8, 16, 32):
        cone = solve_alpha1(n, 0.5)
        for snr in snrs[n]:
            exact = phi_exact_2d(cone.alpha1, n, rms, snr)
            cheb = phi_chebyshev(cone.alpha1, n, rms, snr, m)
            gap = abs(math.expm1(cheb.log_value - exact.log_value))
            worst = max(worst, gap)
            lines.append(f"n={n}/snr={snr}: {gap:.3f}")
    elapsed = time.time() - t0
    ok = worst <= 0.10 and elapsed < 120.0
    assert report(4, ok, f"worst relative gap {worst:.4f} (contract 0.10) at the rms "
                         f"amplitude; achieved: {'; '.join(lines)}; "
                         f"{elapsed:.1f}s (budget 120s)")


def test_criterion_5_expectation_consistency():
    t0 = time.time()
    worst = 0.0
    cells = 0
    for spec, lo in ((SPEC4, 40.0), (SPEC64, 16.0)):
        for n in (64, 128):
            for k in range(20):
                tx = lo + k
                snr = 10 ** ((tx + PATH_GAIN_DB) / 10.0)
                closed = expected_bound(
                    BoundQuery(n=n, rate=0.5, snr=snr, method="closed_form"), spec)
                numeric = expected_bound(
                    BoundQuery(n=n, rate=0.5, snr=snr, method="chebyshev"), spec)
                gap = abs(math.expm1(closed.log_expected_bound - numeric.log_expected_bound))
                worst = max(worst, gap)
                cells += 1
    elapsed = time.time() - t0
    ok = worst <= 0.02 and elapsed < 120.0
    assert report(5, ok, f"closed form vs numerical expectation: worst relative "
                         f"{worst:.2e} over {cells} cells (tol 0.02); "
                         f"{elapsed:.1f}s (budget 120s)")


def test_criterion_6_channel_moments():
    t0 = time.time()
    worst_z = 0.0
    for nris in (1, 4, 64):
        for kf in ((0.0, 0.0), (1.0, 0.5)):
            spec = RisChannelSpec(nris, kf[0], kf[1])
            m = analytic_moments(spec)
            sm = sample_moments(spec, 10**6, seed=20240817)
            worst_z = max(worst_z,
                          abs(sm["mean"] - m.k1) / sm["mean_se"],
                          abs(sm["var"] - m.k2) / sm["var_se"])
    elapsed = time.time() - t0
    ok = worst_z <= 4.0 and elapsed < 60.0
    assert report(6, ok, f"1e6-sample moments: worst z-score {worst_z:.2f} over six "
                         f"configurations (tol 4 SE); {elapsed:.1f}s (budget 60s)")


def test_criterion_7_converse_dominance():
    t0 = time.time()
    ok = True
    details = []
    for snr in (0.05, 0.1, 0.2):
        cfg = SimConfig.from_rate(8, 0.5, snr, SPEC4, trials=10**5, seed=20240817)
        sim = simulate_ml_error(cfg)
        bound = expected_bound(
            BoundQuery(n=8, rate=0.5, snr=snr, method="exact_2d"), SPEC4)
        margin = sim.error_rate + 3 * sim.std_error - bound.expected_bound
        ok = ok and margin >= 0.0
        details.append(f"snr={snr}: code {sim.error_rate:.4f} vs bound "
                       f"{bound.expected_bound:.4f} (margin {margin:+.4f})")
    elapsed = time.time() - t0
    ok = ok and elapsed < 120.0
    assert report(7, ok, "; ".join(details) + f"; {elapsed:.1f}s (budget 120s)")


def test_criterion_8_curve_crossings():
    x4 = measure_crossing(4, np.arange(34.0, 44.01, 0.5))
    in4 = x4 is not None and 33.0 <= x4 <= 39.0
    x64 = measure_crossing(64, np.arange(10.0, 20.01, 0.5))
    in64 = x64 is not None and 8.0 <= x64 <= 14.0
    if in64:
        detail64 = f"64-element crossing {x64:.2f} dB inside 11 +- 3"
        escape = True
    else:
        # the criterion's documented-discrepancy path: the validate report
        # must explain the rejected reading, and the ground-truth family
        # must be shown; its crossing lies inside the window
        report_text, _ = run_validation(level="fast")
        has_entry = "[D8]" in report_text
        x64e = measure_crossing(64, np.arange(6.0, 14.01, 1.0), method="exact")
        exact_in = x64e is not None and 8.0 <= x64e <= 14.0
        escape = has_entry and exact_in
        detail64 = (f"64-element accelerated crossing {x64:.2f} dB outside 11 +- 3; "
                    f"discrepancy D8 present in validate report: {has_entry}; "
                    f"ground-truth crossing {x64e:.2f} dB inside window: {exact_in}")
    ok = in4 and escape
    assert report(8, ok, f"4-element crossing {x4:.2f} dB (window 36 +- 3: {in4}); "
                         + detail64)


def test_criterion_9_asymptotic_sanity():
    # measured at the friendliest configuration (concentrated amplitude,
    # lower edge of the validity region); the tolerance is unattainable at
    # n = 512 for the printed formula -- see discrepancy D9.  This check is
    # implemented faithfully and left failing.
    t0 = time.time()
    m = analytic_moments(SPEC64)
    fit = gamma_fit(m)
    worst = 0.0
    mono_ok = True
    details = []
    for n in (256, 512):
        best = math.inf
        prev = None
        for tx in (15.5, 16.0, 16.5, 17.0):
            snr = 10 ** ((tx + PATH_GAIN_DB) / 10.0)
            try:
                la = log_asymptotic_bound(
                    BoundQuery(n=n, rate=0.5, snr=snr, method="asymptotic"), m, fit)
            except OutOfRegimeError:
                continue
            if prev is not None and la >= prev:
                mono_ok = False
            prev = la
            ref = expected_bound(
                BoundQuery(n=n, rate=0.5, snr=snr, method="chebyshev"), SPEC64)
            best = min(best, abs(la - ref.log_expected_bound))
        worst = max(worst, best)
        details.append(f"n={n}: best |log gap| {best:.2f}")
    elapsed = time.time() - t0
    ok = worst <= 1.0 and mono_ok and elapsed < 60.0
    assert report(
        9, ok,
        f"monotone in snr: {mono_ok}; {'; '.join(details)} (tol 1 natural-log unit). "
        "KNOWN RED: the printed large-blocklength form is structurally short the "
        "Stirling remainder exp(-n/2) and the squared saddle factor; no resolved "
        "reading attains the tolerance at n=512 (discrepancy D9, decisions ledger)"
    )


def test_criterion_10_determinism(tmp_path):
    from risbound.cli import main

    args = ["sweep", "--n", "64", "--rate", "0.5", "--snr-db", "40:42:1",
            "--nris", "4", "--method", "chebyshev,closed_form", "--seed", "7"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    sweep_same = a.read_bytes() == b.read_bytes()
    r1, ok1 = run_validation(level="fast", seed=13)
    r2, ok2 = run_validation(level="fast", seed=13)
    validate_same = (r1 == r2) and ok1 and ok2
    ok = sweep_same and validate_same
    assert report(10, ok, f"sweep outputs byte-identical: {sweep_same}; "
                          f"validate --fast reports byte-identical: {validate_same}")
