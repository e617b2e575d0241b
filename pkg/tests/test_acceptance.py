"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python tests/test_acceptance.py``.
"""
import math
import time

import numpy as np

from relasym.bounds import theorem_bound, trace_cap_check
from relasym.extremal import child_seed, sample_conditioned_pair, saturating_pair
from relasym.frechet import DEFAULT_RULE, r_form, r_op_quadrature, t_op_quadrature, t_op_spectral
from relasym.scalar import asym_a
from relasym.spectral import matrix_log, trace_distance
from relasym import sweeps

SEED = 20240601
RESULTS = []

# sixth-order central stencil for the second derivative, used at h = 1e-3
STENCIL7 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])


def record(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_criterion_1_theorem_sweep():
    start = time.perf_counter()
    worst = {}
    for d in (2, 3, 4, 6):
        reports = [r for r in sweeps.verify_sweep(d, 1000, SEED, 1e-3) if r.check == "theorem"]
        worst[d] = min(r.slack for r in reports)
    elapsed = time.perf_counter() - start
    ok = all(s >= -1e-9 for s in worst.values()) and elapsed <= 60
    detail = ", ".join(f"d={d} min slack {s:.3g}" for d, s in worst.items())
    record(1, ok, f"theorem slack >= -1e-9 on 4x1000 pairs ({detail}; {elapsed:.1f} s)")


def test_criterion_2_sharpness():
    worst = 0.0
    for x in (0.05, 0.1, 0.25):
        for T in (0.05, 0.1, 0.2):
            if x + T <= 0.5:
                worst = max(worst, abs(theorem_bound(*saturating_pair(x, T)).slack))
    record(2, worst <= 1e-9, f"saturating pairs |slack| <= 1e-9 (max {worst:.3g})")


def test_criterion_3_corollary():
    worst, dominated = math.inf, True
    for d in (2, 3, 4, 6):
        reports = [r for r in sweeps.verify_sweep(d, 1000, SEED, 1e-3) if r.check == "corollary"]
        worst = min(worst, min(r.slack for r in reports))
        dominated &= all(r.extra["dominates"] for r in reports)
    grid = np.linspace(0.01, 0.45, 10)
    monotone = all(
        asym_a(min(x, y), T) >= asym_a(max(x, y), T)
        for x in grid for y in grid for T in (0.3,)
    )
    ok = worst >= -1e-9 and monotone and dominated
    record(
        3, ok,
        f"corollary slack >= -1e-9 (min {worst:.3g}); a(min,T) >= a(max,T) on 100-point grid: "
        f"{monotone}; corollary rhs dominates one-sided: {dominated}",
    )


def test_criterion_4_proposition():
    worst = {}
    for d in (2, 3, 4):
        reports = sweeps.prop_sweep(d, 500, SEED)
        worst[d] = min(r.rhs - r.lhs for r in reports)
    extremal = 0.0
    for x, t in ((0.1, 0.2), (0.25, 0.1), (0.05, 0.3)):
        lhs = r_form(np.diag([x + t, 1 - x - t]), np.diag([1.0, -1.0]))
        rhs = (x + t) ** -2 - (1 - x - t) ** -2
        extremal = max(extremal, abs(lhs - rhs))
    ok = all(s >= -1e-8 for s in worst.values()) and extremal <= 1e-8
    detail = ", ".join(f"d={d} min slack {s:.3g}" for d, s in worst.items())
    record(4, ok, f"proposition on 3x500 triples ({detail}); extremal |slack| {extremal:.3g}")


def _second_difference(A, D, h):
    logs = [matrix_log(A + j * h * D).data for j in range(-3, 4)]
    return -sum(c * L for c, L in zip(STENCIL7, logs)) / h**2


def test_criterion_5_frechet():
    from relasym.extremal import EnsembleSpec, random_density, random_perturbation

    t_err = r_err = 0.0
    for d in (2, 3, 5):
        for i in range(100):
            A = random_density(EnsembleSpec("min_eig_conditioned", d, child_seed(SEED, 5, d, i), 0.05)).data
            D = random_perturbation(d, child_seed(SEED, 6, d, i)).data
            t_err = max(t_err, np.max(np.abs(t_op_spectral(A, D).data - t_op_quadrature(A, D).data)))
            fd = _second_difference(A, D, 1e-3)
            r_err = max(r_err, np.max(np.abs(r_op_quadrature(A, D).data - fd)))
    s_err = max(abs(DEFAULT_RULE.integrate_log(x) - math.log(x)) for x in (0.1, 2.0, 50.0))
    ok = t_err <= 1e-8 and r_err <= 1e-6 and s_err < 1e-10
    record(
        5, ok,
        f"T spectral vs quadrature {t_err:.3g} (<= 1e-8); R vs second difference {r_err:.3g} "
        f"(<= 1e-6); scalar log quadrature {s_err:.3g} (< 1e-10)",
    )


def test_criterion_6_proof_chain():
    coarse = sweeps.chain_sweep(3, 50, SEED)
    fine = sweeps.chain_sweep(3, 50, SEED, t_nodes=128)
    res = np.array([r.residuals for r in coarse])
    res_fine = np.array([r.residuals for r in fine])
    within = res[:, 0].max() <= 1e-6 and res[:, 1].max() <= 1e-6 and res[:, 2].max() <= 1e-10
    # only check (1) involves the t rule; judge samples resolvable above rounding
    total_ratio = res[:, 0].sum() / res_fine[:, 0].sum()
    resolvable = res[:, 0] > 1e-12
    ratios = res[resolvable, 0] / res_fine[resolvable, 0]
    shrink = total_ratio >= 3 and bool(np.all(ratios >= 3))
    record(
        6, within and shrink,
        f"max residuals ({res[:, 0].max():.3g}, {res[:, 1].max():.3g}, {res[:, 2].max():.3g}); "
        f"64 -> 128 t-nodes: total shrink {total_ratio:.1f}x, min per-sample {ratios.min():.1f}x "
        f"over {resolvable.sum()} resolvable samples",
    )


def test_criterion_7_ascent():
    records = []
    for d in (2, 3):
        records += sweeps.ascent_sweep(d, 50, SEED)
    defect = max(r["commutator_defect"] for r in records)
    gap = max(abs(r["gap"]) for r in records)
    ordered = all(r["anti_ordered"] for r in records)
    ok = defect <= 1e-6 and gap <= 1e-6 and ordered
    record(
        7, ok,
        f"100 ascents: max commutator defect {defect:.3g}, max |gap| {gap:.3g}, all anti-ordered: {ordered}",
    )


def test_criterion_8_taylor():
    p = 0.3
    t = np.logspace(-4, -2, 30)
    a = np.array([asym_a(p, float(x)) for x in t])
    slope = np.polyfit(np.log(t), np.log(a), 1)[0]
    coef = (p**-2 - (1 - p) ** -2) / 6
    rel = abs(asym_a(p, 1e-3) / 1e-9 - coef) / coef
    ok = abs(slope - 3.0) <= 0.05 and rel <= 0.01
    record(8, ok, f"log-log slope {slope:.4f} (3 +- 0.05); leading coefficient rel. error {rel:.3g}")


def test_criterion_9_trace_cap():
    worst = -math.inf
    for d, z in ((2, 0.2), (3, 0.1)):
        for i in range(200):
            rho, sigma = sample_conditioned_pair(d, child_seed(SEED, 9, d, i), z)
            rep = trace_cap_check(rho, sigma, z)
            worst = max(worst, rep.lhs - rep.rhs)
    z = 0.2
    T = trace_distance(np.diag([z, 1 - z]), np.diag([1 - z, z]))
    equality = abs(T - (1 - 2 * z))
    ok = worst <= 1e-12 and equality <= 1e-12
    record(9, ok, f"max T - (1 - dz) {worst:.3g} (<= 1e-12); extremal pair |T - (1 - 2z)| {equality:.3g}")


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
