"""Acceptance criteria, each at its stated tolerance and time budget.

Every test prints one PASS/FAIL line; the lines are repeated in the
terminal summary under "acceptance criteria".
"""

import io
import json
import math
import time
import warnings
from contextlib import redirect_stdout

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from wirtinger import build_model, derive, j_second_at_zero, key_integral_gap, minimize_j, verify_moment_identities
from wirtinger.cli import main
from wirtinger.oracle import minimize_rayleigh
from wirtinger.perturb import gamma_piecewise, piecewise_fit, second_order_fit
from wirtinger.verify import m_grid, phi_monotone, pointwise_inequality, psi_monotone, terminal_identity_residual

P_GRID = (1.5, 2.0, 3.0)
R_GRID = (1.5, 2.0, 3.0)


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def grid_triples(factors):
    return [(p, (2 * r - 1) * p * f, r) for p in P_GRID for r in R_GRID for f in factors]


def test_criterion_1_classical_constant():
    buf = io.StringIO()
    t0 = time.perf_counter()
    with redirect_stdout(buf):
        code = main(["constant", "--p", "2", "--q", "2", "--r", "2"])
    elapsed = time.perf_counter() - t0
    data = json.loads(buf.getvalue())
    err = max(abs(data["lambda_w"] - math.pi), abs(data["lambda_p"] - math.pi))
    report(1, code == 0 and err <= 1e-8 and elapsed < 1.0, f"|lambda - pi| = {err:.2e}, {elapsed:.2f} s")


def test_criterion_2_symmetric_regime():
    t0 = time.perf_counter()
    worst_mu, worst_gap = 0.0, 0.0
    for triple in grid_triples((0.5, 0.9, 1.0)):
        res = minimize_j(derive(*triple))
        worst_mu = max(worst_mu, res.mu_star)
        worst_gap = max(worst_gap, abs(res.lambda_w - res.lambda_p))
    elapsed = time.perf_counter() - t0
    ok = worst_mu <= 1e-6 and worst_gap <= 1e-8 and elapsed < 120.0
    report(2, ok, f"27 triples, max mu_star = {worst_mu:.1e}, max |lw - lp| = {worst_gap:.1e}, {elapsed:.1f} s")


def test_criterion_3_asymmetric_regime():
    t0 = time.perf_counter()
    failures = []
    min_mu, max_d2 = math.inf, -math.inf
    for triple in grid_triples((1.2, 1.5)):
        P = derive(*triple)
        res = minimize_j(P)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            d2 = j_second_at_zero(P)
        min_mu, max_d2 = min(min_mu, res.mu_star), max(max_d2, d2)
        if not (res.mu_star > 1e-3 and res.j_min < res.j_at_zero and d2 < 0.0):
            failures.append(triple)
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 120.0
    report(3, ok, f"18 triples, min mu_star = {min_mu:.3f}, max J''(0) = {max_d2:.3e}, failures {failures}, {elapsed:.1f} s")


def test_criterion_4_key_inequality():
    # the boundary q = (2r-1)p is the tightest case of the symmetric regime
    triples = grid_triples((1.0,))
    min_gap = math.inf
    for triple in triples:
        P = derive(*triple)
        for m in m_grid(25):
            min_gap = min(min_gap, key_integral_gap(P, float(m)))
    axis = np.linspace(0.0, 1.0, 52)[1:-1]
    min_slack = min(float(np.min(pointwise_inequality(derive(*t), float(m), axis))) for t in triples for m in axis)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        p, q, r, m = rng.uniform(1.1, 5.0), rng.uniform(1.1, 20.0), rng.uniform(1.1, 4.0), rng.uniform(0.01, 0.99)
        worst = max(worst, terminal_identity_residual(p, q, r, m))
    ok = min_gap > 0.0 and min_slack >= -1e-12 and worst <= 1e-12
    report(4, ok, f"min gap = {min_gap:.3e}, min slack = {min_slack:.3e}, max identity residual = {worst:.1e}")


def test_criterion_5_moment_identities():
    worst = 0.0
    for triple in [(2, 2, 2), (2, 4, 2), (2, 8, 2), (3, 4, 1.5), (1.5, 9, 3), (2, 3.5, 1.5)]:
        model = build_model(derive(*triple))
        for s in (0.0, 1.0, triple[2] - 1.0):
            worst = max(worst, *verify_moment_identities(model, s))
    report(5, worst <= 1e-8, f"6 triples x 3 exponents, max residual = {worst:.1e}")


def test_criterion_6_perturbation_expansion():
    t0 = time.perf_counter()
    parts, ok = [], True
    for triple in [(2, 8, 2), (2, 4, 2), (3, 12, 2)]:
        fit = second_order_fit(build_model(derive(*triple)))
        ok &= fit.relative_error <= 0.05
        parts.append(f"{triple}: c = {fit.fitted_c:.5f} vs {fit.predicted_c:.5f}")
    edge = second_order_fit(build_model(derive(2, 6, 2)))
    ok &= abs(edge.fitted_c) <= 0.05
    parts.append(f"(2, 6, 2): c = {edge.fitted_c:.1e}")
    pw = piecewise_fit(build_model(derive(2, 10, 2)))
    target = gamma_piecewise(derive(2, 10, 2))
    ok &= abs(pw.fitted_c - target) <= 0.05 * abs(target)
    parts.append(f"piecewise (2, 10, 2): c = {pw.fitted_c:.5f} vs {target:.5f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60.0
    report(6, bool(ok), "; ".join(parts) + f"; {elapsed:.1f} s")


def test_criterion_7_oracle_agreement():
    t0 = time.perf_counter()
    parts, ok = [], True
    for triple in [(2, 2, 2), (2, 4, 2), (2, 8, 2)]:
        P = derive(*triple)
        ref = minimize_j(P)
        est = minimize_rayleigh(P, n=400).lambda_est
        rel = abs(est - ref.lambda_w) / ref.lambda_w
        ok &= rel <= 0.01
        if ref.interior:
            ok &= est < ref.lambda_p
            parts.append(f"{triple}: {est:.6f} vs {ref.lambda_w:.6f} (lambda_p {ref.lambda_p:.6f})")
        else:
            parts.append(f"{triple}: rel diff {rel:.1e}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 180.0
    report(7, bool(ok), "; ".join(parts) + f"; {elapsed:.1f} s")


def test_criterion_8_phase_diagram(tmp_path):
    outputs = []
    for threads in ("1", "2"):
        path = tmp_path / f"scan{threads}.json"
        code = main(["region-scan", "--r", "2", "--p-range", "1.5", "3", "--q-range", "2", "12",
                     "--steps", "20", "40", "1", "--threads", threads, "--output", str(path)])
        assert code == 0
        outputs.append(path.read_bytes())
    data = json.loads(outputs[0])
    summ = data["summary"]
    tracked = all(b["within_one_step"] for b in data["boundaries"])
    identical = outputs[0] == outputs[1]
    ok = summ["all_agree_outside_band"] and tracked and identical and summ["cells"] == 800
    report(8, ok, f"{summ['agree_outside_band']}/{summ['outside_band']} agree outside band, boundary within one step: {tracked}, byte-identical: {identical}")


def test_criterion_9_monotonicity_lemmas():
    rng = np.random.default_rng(99)
    a = rng.uniform(0.05, 8.0, 1000)
    b = a + rng.uniform(0.01, 12.0, 1000)
    phi_ok = sum(phi_monotone(x, y, grid_n=4096) for x, y in zip(a, b))
    psi_ok = sum(psi_monotone(x, y, grid_n=4096) for x, y in zip(a, b))
    report(9, phi_ok == 1000 and psi_ok == 1000, f"phi {phi_ok}/1000, psi {psi_ok}/1000")
