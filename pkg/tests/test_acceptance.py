"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each
(run with ``pytest tests/test_acceptance.py -s`` to watch them live).

Expected values marked "frozen" were computed with the independent oracles
in this file and in tests/test_theory.py (Brent root bracketing, golden
section via scipy, matching enumeration, inclusion-exclusion) and are fixed
here; tolerances are the stated deviation scales.
"""

import itertools
import math
import time
from collections import Counter

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.stats import chisquare

from satlab import theory
from satlab.cola import core_via_cola, run_cola_core, trajectory
from satlab.confmodel import estimate_sim_prob
from satlab.experiments import (
    ExperimentConfig,
    _random_small_formula,
    run_experiment,
    window_super_slope,
)
from satlab.formula import MultiFormula
from satlab.gen import LambdaCell, stream_rng
from satlab.reduce import kernel, kernel_order_invariance_check, pla_core
from satlab.sat import brute_force, decide_2sat, verify_assignment

from conftest import acceptance_line

# frozen oracle values for n = 1e5, lambda = 1.5
THETA15 = 0.5828116438658116
MU15 = 0.8742174657987174  # theta * lambda
CORE_VARS = 33966.94122255697
CORE_CLAUSES = 50950.41183383545
KERNEL_VARS = 20665.358640982613
KERNEL_CLAUSES = 37648.829252261094
C11 = 13301.58258157435
C21_PLUS_12 = 11628.475815576288
SCALE_CORE = 241.41492163199268  # (theta n)^(1/2)
SCALE_KERNEL = 140.69942733007773  # (theta^3 n)^(1/2)
LAMBDA3 = 2.4554074822841274
THETA3_CORE = 23430.418423327126  # theta_{3,lambda(3)+0.3} * 3e4


def mean_std(rows, key):
    vals = [r[key] for r in rows]
    m = sum(vals) / len(vals)
    var = sum((x - m) ** 2 for x in vals) / (len(vals) - 1)
    return m, math.sqrt(var)


def test_criterion_01_fixed_point():
    t0 = time.perf_counter()
    mine = theory.theta_fixed_point(2.0, 2).theta
    oracle = brentq(lambda t: 1.0 - math.exp(-2.0 * t) - t, 1e-9, 1.0,
                    xtol=1e-15, rtol=8.9e-16)
    agree = abs(mine - oracle) <= 1e-10
    max_resid = max(
        abs(1.0 - math.exp(-theory.theta_fixed_point(lam).theta * lam)
            - theory.theta_fixed_point(lam).theta)
        for lam in (1.01, 1.1, 1.5, 2.0, 3.0)
    )
    elapsed = time.perf_counter() - t0
    ok = agree and max_resid <= 1e-12 and elapsed < 1.0
    acceptance_line(1, ok, f"fixed point: |theta-oracle|={abs(mine-oracle):.2e}, "
                           f"max residual={max_resid:.2e}, {elapsed:.3f}s")
    assert ok


def test_criterion_02_core_size(cloning_batch):
    rows = cloning_batch["rows"]
    mv, _ = mean_std(rows, "core_vars")
    mc, _ = mean_std(rows, "core_clauses")
    tol = 5 * SCALE_CORE
    ok_v = abs(mv - CORE_VARS) <= tol
    ok_c = abs(mc - CORE_CLAUSES) <= tol
    runtime = cloning_batch["phase_a_seconds"]
    ok = ok_v and ok_c and runtime < 60.0
    acceptance_line(2, ok, f"core size: vars {mv:.1f} vs {CORE_VARS:.1f} (tol {tol:.0f}), "
                           f"clauses {mc:.1f} vs {CORE_CLAUSES:.1f}, runtime {runtime:.1f}s")
    assert ok


def test_criterion_03_census(cloning_batch):
    rows = cloning_batch["rows"]
    trials = len(rows)
    m11, s11 = mean_std(rows, "C_11")
    m2112, s2112 = mean_std(rows, "C_21_plus_12")
    se11 = s11 / math.sqrt(trials)
    se2112 = s2112 / math.sqrt(trials)
    ok_11 = abs(m11 - C11) <= 5 * se11
    ok_2112 = abs(m2112 - C21_PLUS_12) <= 5 * se2112
    ok = ok_11 and ok_2112
    acceptance_line(3, ok, f"census: C(1,1) {m11:.1f} vs {C11:.1f} (5se={5*se11:.1f}), "
                           f"C(2,1)+C(1,2) {m2112:.1f} vs {C21_PLUS_12:.1f} (5se={5*se2112:.1f})")
    assert ok


def test_criterion_04_kernel_size(cloning_batch):
    rows = cloning_batch["rows"]
    mv, _ = mean_std(rows, "kernel_vars")
    mc, _ = mean_std(rows, "kernel_clauses")
    tol = 5 * SCALE_KERNEL
    ok = abs(mv - KERNEL_VARS) <= tol and abs(mc - KERNEL_CLAUSES) <= tol
    acceptance_line(4, ok, f"kernel size: vars {mv:.1f} vs {KERNEL_VARS:.1f} (tol {tol:.0f}), "
                           f"clauses {mc:.1f} vs {KERNEL_CLAUSES:.1f}")
    assert ok


def test_criterion_05_lambda_c(cloning_batch):
    rows = cloning_batch["rows"]
    m, sd = mean_std(rows, "lambda_c")
    band = 5 * 1.5 / math.sqrt(THETA15 * cloning_batch["n"])
    sd_bound = 20 / math.sqrt(THETA15 * cloning_batch["n"])
    ok = abs(m - MU15) <= band and sd < sd_bound
    acceptance_line(5, ok, f"lambda_C: mean {m:.5f} vs {MU15:.5f} (band {band:.5f}), "
                           f"sd {sd:.5f} < {sd_bound:.5f}")
    assert ok


def test_criterion_06_cutoff_trajectory():
    n, lam, trials = 10**5, 1.5, 20
    bound = 10 * math.sqrt(n)
    within = 0
    worst = 0.0
    for t in range(trials):
        out = core_via_cola(n, lam, stream_rng(606, t), record_trace=True)
        sup = max(abs(nt - 2 * (1 - th * th) * lam * n)
                  for th, nt, _ in trajectory(out.trace, (0.95, 0.9, 0.8)))
        worst = max(worst, sup)
        if sup <= bound:
            within += 1
    ok = within >= 18
    acceptance_line(6, ok, f"trajectory: {within}/{trials} trials within {bound:.0f} "
                           f"(worst sup dev {worst:.0f})")
    assert ok


def test_criterion_07_window_subcritical():
    config = ExperimentConfig(experiment="window-sub", n=2000, trials=10**5,
                              seed=707, sigma=0.3)
    t0 = time.perf_counter()
    report = run_experiment(config)
    elapsed = time.perf_counter() - t0
    kern = report.metrics["kernel_nonempty"].mean
    unsat = report.metrics["unsat"].mean
    cond = report.metrics["unsat_given_kernel"].mean
    p_kern, p_unsat = 15.0 / 864.0, 1.0 / 864.0
    ok_kern = 0.5 * p_kern <= kern <= 2.0 * p_kern
    ok_unsat = 0.5 * p_unsat <= unsat <= 2.0 * p_unsat
    ok_cond = 1.0 / 30.0 <= cond <= 2.0 / 15.0
    ok = ok_kern and ok_unsat and ok_cond and elapsed < 600.0
    acceptance_line(
        7, ok,
        f"window-sub: kernel {kern:.5f} in [{0.5*p_kern:.5f},{2*p_kern:.5f}]? {ok_kern}; "
        f"unsat {unsat:.6f} in [{0.5*p_unsat:.6f},{2*p_unsat:.6f}]? {ok_unsat}; "
        f"cond {cond:.4f} in [{1/30:.4f},{2/15:.4f}]? {ok_cond}; runtime {elapsed:.0f}s")
    assert ok, (
        "subcritical window fractions sit far below the sigma->0 constants "
        "15/(16 s^3 n) and 1/(16 s^3 n): at sigma=0.3, n=2000 the measured "
        "values are ~0.15x and ~0.3x the predictions (verified against an "
        "independent first-moment computation and a sigma-trend study), so "
        "the factor-2 band cannot hold at these parameters."
    )


def test_criterion_08_window_supercritical():
    t0 = time.perf_counter()
    points = []
    for n in (320, 640, 1280):
        config = ExperimentConfig(experiment="window-super", n=n, trials=10**5,
                                  seed=808, sigma=0.25)
        report = run_experiment(config)
        sat = report.metrics["sat"]
        points.append({
            "sigma3n": 0.25**3 * n,
            "sat": int(round(sat.mean * config.trials)),
            "trials": config.trials,
        })
    fit = window_super_slope(points)
    elapsed = time.perf_counter() - t0
    slope = fit["slope"]
    ok = -10.0 <= slope <= -0.01 and elapsed < 900.0
    acceptance_line(8, ok, f"window-super: slope {slope:.4f} in [-10,-0.01], "
                           f"points {[(p['sigma3n'], p['sat']) for p in points]}, "
                           f"runtime {elapsed:.0f}s")
    assert ok


def test_criterion_09_simple_probability():
    big = estimate_sim_prob({(1, 1): 10**4}, 10**4, stream_rng(909, 0))
    limit = math.exp(-0.5)
    ok_big = abs(big.probability - limit) <= 0.015
    small = estimate_sim_prob({(1, 1): 2}, 10**5, stream_rng(909, 1))
    sd = math.sqrt((2.0 / 3.0) * (1.0 / 3.0) / small.trials)
    ok_small = abs(small.probability - 2.0 / 3.0) <= 3 * sd
    ok = ok_big and ok_small
    acceptance_line(9, ok, f"Pr[SIMPLE]: large census {big.probability:.4f} vs {limit:.4f} "
                           f"(±0.015), small census {small.probability:.5f} vs 0.66667 "
                           f"(±{3*sd:.5f})")
    assert ok


def test_criterion_10_decider_against_brute_force():
    disagreements = 0
    for trial in range(10**4):
        rng = stream_rng(1010, trial)
        f = _random_small_formula(rng)
        fast = decide_2sat(f)
        if fast.satisfiable != brute_force(f).satisfiable:
            disagreements += 1
        elif fast.satisfiable:
            assert verify_assignment(f, fast.assignment)
    units = [(1,), (-1,), (2,), (-2,)]
    pairs = sorted({tuple(sorted((a, b), key=lambda l: (abs(l), l < 0)))
                    for a, b in itertools.combinations_with_replacement([1, -1, 2, -2], 2)})
    exhaustive_bad = 0
    for size in range(0, 4):
        for combo in itertools.combinations_with_replacement(units + pairs, size):
            f = MultiFormula(n=2, clauses=combo)
            if decide_2sat(f).satisfiable != brute_force(f).satisfiable:
                exhaustive_bad += 1
    ok = disagreements == 0 and exhaustive_bad == 0
    acceptance_line(10, ok, f"decider: 0 disagreements required, got {disagreements} random "
                            f"and {exhaustive_bad} exhaustive")
    assert ok


def test_criterion_11_pipeline_invariants():
    checked = 0
    failures = []
    rng_orders = stream_rng(1111, 99999)
    for lam, count in ((0.8, 334), (1.0, 333), (1.5, 333)):
        for t in range(count):
            rng = stream_rng(1111, checked)
            out = core_via_cola(500, lam, rng)
            f = out.formula
            res = pla_core(f)
            if res.core != out.core_formula:
                failures.append(("cola-core", lam, t))
            sat_f = decide_2sat(f).satisfiable
            if res.core.num_clauses == 0 and not sat_f:
                failures.append(("pla-success-sat", lam, t))
            kres = kernel(res.core)
            sat_core = decide_2sat(res.core).satisfiable
            sat_kernel = decide_2sat(kres.kernel).satisfiable
            if not (sat_f == sat_core == sat_kernel):
                failures.append(("equisat", lam, t))
            if not kernel_order_invariance_check(res.core, trials=2, rng=rng_orders):
                failures.append(("kernel-order", lam, t))
            checked += 1
    ok = not failures and checked == 1000
    acceptance_line(11, ok, f"pipeline invariants on {checked} instances: "
                            f"{'all hold' if ok else failures[:3]}")
    assert ok


def test_criterion_12_matching_uniformity():
    lits = np.asarray([0, 2, 4, 6, 8, 10], dtype=np.int64)
    runs = 150_000
    seen = Counter()
    for t in range(runs):
        rng = stream_rng(1212, t)
        cell = LambdaCell(n=6, lam=1.0, lit=lits, pos=rng.random(6))
        out = run_cola_core(cell, rng)
        seen[out.formula.clauses] += 1
    counts = list(seen.values())
    ok_support = len(counts) == 15
    stat, pvalue = chisquare(counts)
    ok = ok_support and pvalue > 1e-3
    acceptance_line(12, ok, f"matching uniformity: {len(counts)} outcomes, "
                            f"chi2 p={pvalue:.4f} > 0.001")
    assert ok


def test_criterion_13_pla_threshold_k3():
    thr = theory.pla_threshold(3)
    ok_lambda = abs(thr["lambda_k"] - LAMBDA3) <= 1e-6
    n, trials = 30_000, 30
    rates = {}
    cores = []
    for tag, lam in (("sub", LAMBDA3 - 0.3), ("super", LAMBDA3 + 0.3)):
        succ = 0
        for t in range(trials):
            rng = stream_rng(1313 if tag == "sub" else 1314, t)
            p = lam / math.comb(2 * n - 1, 2)
            from satlab.gen import sample_classical

            f = sample_classical(n, p, 3, rng)
            res = pla_core(f)
            if res.core.num_clauses == 0:
                succ += 1
            elif tag == "super":
                cores.append(len(res.core.variables()))
        rates[tag] = succ / trials
    mean_core = sum(cores) / len(cores)
    sd_core = math.sqrt(sum((x - mean_core) ** 2 for x in cores) / (len(cores) - 1))
    se = sd_core / math.sqrt(len(cores))
    ok_core = abs(mean_core - THETA3_CORE) <= 5 * se
    ok = (ok_lambda and rates["sub"] >= 0.9 and rates["super"] <= 0.1 and ok_core)
    acceptance_line(13, ok, f"k=3: lambda(3)={thr['lambda_k']:.5f}, success sub={rates['sub']:.2f} "
                            f">=0.9, super={rates['super']:.2f} <=0.1, core {mean_core:.0f} vs "
                            f"{THETA3_CORE:.0f} (5se={5*se:.0f})")
    assert ok
