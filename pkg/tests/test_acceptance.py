"""Acceptance criteria, one PASS/FAIL line per criterion (run with ``pytest -s`` to see them)."""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from rscap import model as m
from rscap.lemmas import verify_all
from rscap.solver import NoSolution, approach_critical, capacity, sign_changes, solve_saddle, sweep


def report(n, ok, detail):
    print(f"\ncriterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_01_alpha_c_zero():
    err = abs(m.alpha_c(0.0) - 4 / math.pi)
    report(1, err <= 1e-12, f"|alpha_c(0) - 4/pi| = {err:.3e}")


def test_criterion_02_alpha_star():
    t = time.perf_counter()
    res = capacity(0.0)
    dt = time.perf_counter() - t
    a = res.alpha_star
    ok = a is not None and 0.830 <= a <= 0.836 and dt < 10
    if ok:
        lo, hi = a - res.bracket_width, a + res.bracket_width
        ok = solve_saddle(lo, 0.0).rs_value > 0 > solve_saddle(hi, 0.0).rs_value
    report(2, ok, f"alpha_star = {a!r}, RS changes sign across it, {dt:.2f} s")


def test_criterion_03_existence():
    t = time.perf_counter()
    none = solve_saddle(1.3, 0.0)
    sols = [solve_saddle(a, 0.0) for a in (0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.25)]
    dt = time.perf_counter() - t
    ok = isinstance(none, NoSolution) and all(
        s.solved and s.residual_q <= 1e-9 and s.residual_r <= 1e-8 for s in sols) and dt < 5
    worst = max(s.residual_r for s in sols if s.solved)
    report(3, ok, f"NoSolution at 1.3, 7 solves, max residual_r = {worst:.2e}, {dt:.2f} s")


def test_criterion_04_uniqueness_probe():
    t = time.perf_counter()
    counts = {(k, round(a, 6)): sign_changes(a, k)
              for k in (0.0, 1.0) for a in (0.2, 0.5, 0.9 * m.alpha_c(k))}
    dt = time.perf_counter() - t
    report(4, max(counts.values()) <= 1 and dt < 5, f"sign changes {counts}, {dt:.2f} s")


def test_criterion_05_g_zero_and_pi_estimate():
    err = abs(m.g_fun(0.0) + 4 * (math.pi - 3) / math.pi ** 2)
    gap = 4 * (math.pi - 3) / math.pi ** 2 - 1 / 18
    report(5, err <= 1e-12 and gap > 0, f"|g(0) + 4(pi-3)/pi^2| = {err:.2e}, pi-estimate margin {gap:.5f}")


@pytest.mark.slow
def test_criterion_06_verify_all():
    t = time.perf_counter()
    reps = verify_all(10_000)
    dt = time.perf_counter() - t
    failed = [r.lemma_id for r in reps if not r.passed]
    report(6, not failed and dt < 60, f"{len(reps)} checks, failed {failed}, {dt:.1f} s")


def test_criterion_07_bprime_gradient():
    t = time.perf_counter()
    h, worst = 1e-5, 0.0
    for kappa in (0.0, 1.0):
        for s in (0.1, 0.5, 0.9):
            fd = (m.big_B(s + h, kappa) - m.big_B(s - h, kappa)) / (2 * h)
            worst = max(worst, abs(m.b_prime(s, kappa) - fd) / abs(fd))
    dt = time.perf_counter() - t
    report(7, worst <= 1e-5 and dt < 5, f"max relative error {worst:.2e}, {dt:.2f} s")


def test_criterion_08_divergence():
    # thresholds confirmed beforehand at 601 nodes, rel_tol 1e-12:
    # q12 = 0.99975 / 0.99943 and rs12 = -2.209 / -1.0139 for kappa = 0 / 1
    t = time.perf_counter()
    lines, ok = [], True
    for kappa in (0.0, 1.0):
        sols = approach_critical(kappa, 12)
        q = np.array([s.q for s in sols])
        r = np.array([s.r for s in sols])
        good = (np.all(np.diff(q) > 0) and np.all(np.diff(r) > 0)
                and q[-1] > 0.99 and sols[-1].rs_value < -1)
        ok &= bool(good)
        lines.append(f"kappa={kappa}: q12={q[-1]:.5f}, rs12={sols[-1].rs_value:.4f}")
    dt = time.perf_counter() - t
    report(8, ok and dt < 30, "; ".join(lines) + f", {dt:.2f} s")


def test_criterion_09_dual_representations():
    t = time.perf_counter()
    r_grid = 2.0 ** np.arange(41) * 1e-3
    a_err = max(abs(m.cap_A(r) - m.cap_A_integral(r)) for r in r_grid)
    c_err = max(abs(m.c_kappa(k) - m.c_kappa_quadrature(k)) for k in (0.0, 0.5, 1.0, 2.0, 5.0))
    dt = time.perf_counter() - t
    report(9, a_err <= 1e-10 and c_err <= 1e-10 and dt < 5,
           f"A max diff {a_err:.2e}, C max diff {c_err:.2e}, {dt:.2f} s")


def test_criterion_10_determinism():
    t = time.perf_counter()
    argv = [sys.executable, "-m", "rscap", "sweep", "--kappa", "0", "--alpha-min", "0.2",
            "--alpha-max", "1.3", "--steps", "6"]
    outs = [subprocess.run(argv, capture_output=True, check=True).stdout for _ in range(2)]
    serial = sweep(0.0, 0.2, 1.3, 12)
    parallel = sweep(0.0, 0.2, 1.3, 12, workers=4)
    dt = time.perf_counter() - t
    report(10, outs[0] == outs[1] and serial == parallel and dt < 10,
           f"CLI byte-identical, concurrent sweep == serial, {dt:.2f} s")
