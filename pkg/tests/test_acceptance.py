"""End-to-end acceptance criteria.

Each test prints one ``[PASS]``/``[FAIL]`` line (also collected into the
terminal summary) and asserts the criterion at its stated tolerance.
"""

import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from ietlab.cli import EXIT_OK, main
from ietlab.cocycle import (
    cancellation_profile,
    make_asymmetric_cocycle,
    make_odd_cocycle,
    quasi_random,
)
from ietlab.ergodicity import (
    case_letter,
    centers_in_tower,
    choose_eta,
    midpoint_identities,
    run_criterion,
    select_case,
    symmetry_profile,
    tightness_integral,
)
from ietlab.iet import Iet, golden_rotation, make_symmetric_permutation, random_lengths
from ietlab.involution import locate_center_shifts
from ietlab.pipeline import oracle_check, sample_tau
from ietlab.quadrature import linear_phase_selftest, stationary_phase_sweep
from ietlab.rauzy import induce, is_balanced, scan_good_times
from ietlab.towers import audit_tower, build_Xi


def report(number, title, ok, detail, elapsed):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail} ({elapsed:.1f} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


# ---------------------------------------------------------------------------
# 1. induction against the brute-force first return
# ---------------------------------------------------------------------------

def test_criterion_1_induction_oracle():
    t0 = time.perf_counter()
    ss = np.random.SeedSequence(2024).spawn(100)
    worst, bad = 0.0, []
    iets = []
    for i, child in enumerate(ss):
        rng = np.random.default_rng(child)
        d = 2 + i % 4
        iets.append(Iet(make_symmetric_permutation(d), random_lengths(rng, d)))
    iets.append(golden_rotation())
    for i, T in enumerate(iets):
        r = oracle_check(T, 12)
        worst = max(worst, r["max_rel_length"])
        if not (r["ok"] and r["depth"] == 12):
            bad.append(i)
    elapsed = time.perf_counter() - t0
    ok = not bad and worst <= 1e-12 and elapsed < 60
    report(1, "induction oracle", ok,
           f"{len(iets) - len(bad)}/{len(iets)} IETs match to n=12, max rel length err {worst:.2e}",
           elapsed)
    assert ok, bad


# ---------------------------------------------------------------------------
# 2. Fibonacci return times of the golden rotation
# ---------------------------------------------------------------------------

def test_criterion_2_fibonacci():
    t0 = time.perf_counter()
    T = golden_rotation()
    fib = [1, 1]
    while len(fib) < 23:
        fib.append(fib[-1] + fib[-2])
    mismatches, unbalanced = [], []
    for n in range(21):
        st = induce(T, n)
        if sorted(st.q) != [fib[n], fib[n + 1]]:
            mismatches.append(n)
        if not is_balanced(st, 3):
            unbalanced.append(n)
    ok = not mismatches and not unbalanced
    report(2, "golden rotation Fibonacci times", ok,
           f"Fibonacci mismatches {mismatches}, unbalanced (nu=3) {unbalanced}, n<=20",
           time.perf_counter() - t0)
    assert ok


# ---------------------------------------------------------------------------
# 3. symmetry identities of odd cocycles
# ---------------------------------------------------------------------------

def test_criterion_3_symmetry_suite():
    t0 = time.perf_counter()
    n = 10_000
    ss = np.random.SeedSequence(33).spawn(20)
    worst = 0.0
    clipped = 0
    checked = 0
    for child in ss:
        rng = np.random.default_rng(child)
        T = Iet(make_symmetric_permutation(5), random_lengths(rng, 5))
        phi = make_odd_cocycle(T, tuple(rng.uniform(0.5, 2.0, 5)))
        scale = np.maximum(np.arange(n + 1), 1)
        for x in quasi_random(3, float(rng.uniform())) * float(T.total):
            res, clip = symmetry_profile(T, phi, x, n)
            clipped += int(clip.sum())
            checked += int((~clip).sum())
            worst = max(worst, float((res[~clip] / scale[~clip]).max()))
        for m in midpoint_identities(T, phi, n):
            clipped += m.clipped_count
            checked += n + 1 - m.clipped_count
            worst = max(worst, m.max_scaled)
            assert m.phi_at_point in (None, 0.0)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 120
    report(3, "symmetry identities", ok,
           f"20 IETs d=5, n<=1e4, {checked} non-clipped residuals, max residual/n {worst:.2e}, "
           f"{clipped} clipped excluded", elapsed)
    assert ok


# ---------------------------------------------------------------------------
# 4. tower claims at every good time
# ---------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_4_tower_audit():
    t0 = time.perf_counter()
    nu = 3
    ss = np.random.SeedSequence(4).spawn(20)
    total, failures = 0, []
    for i, child in enumerate(ss):
        rng = np.random.default_rng(child)
        d = 2 + i % 4
        perm = make_symmetric_permutation(d)
        lam = random_lengths(rng, d)
        tau, _ = sample_tau(perm, rng, 100_000)
        T = Iet(perm, tuple(Fraction(v) for v in lam))
        delta, eta = Fraction(1, 20 * d), Fraction(1, 2000)
        scan = scan_good_times(T, tau, nu, delta, 40)
        for rec in scan.good_times():
            state = induce(T, rec.n, tau)
            for a in rec.good_letters():
                total += 1
                rep = audit_tower(build_Xi(T, state, a, eta), T, state, delta)
                if not rep.claims_ok:
                    why = [k for k in ("floors_disjoint", "length_bound", "gaps_ok", "exceptional_ok")
                           if not getattr(rep, k)]
                    if not rep.base_ratio > Fraction(1, 2):
                        why.append("base_ratio")
                    failures.append(f"sample {i} (d={d}) n={rec.n} letter {a}: {','.join(why)}")
    ok = total > 0 and not failures
    report(4, "tower audit (exact arithmetic)", ok,
           f"{total - len(failures)}/{total} towers satisfy every claim"
           + (f"; failing: {'; '.join(failures)}" if failures else ""),
           time.perf_counter() - t0)
    assert ok, failures


# ---------------------------------------------------------------------------
# 5 and 7. criterion runs
# ---------------------------------------------------------------------------

CRIT_D = 3
CRIT_NU = 10
CRIT_KS = [1, 10, 100, 1000]


@pytest.fixture(scope="module")
def criterion_runs():
    """Seeded samples with at least three good times whose tower holds an
    original center; odd cocycle and its asymmetric contrast on each."""
    t0 = time.perf_counter()
    d = CRIT_D
    delta = 0.5 / (10 * d)
    perm = make_symmetric_permutation(d)
    runs = []
    seed = 0
    while len(runs) < 3 and seed < 200:
        rng = np.random.default_rng(seed)
        T = Iet(perm, random_lengths(rng, d))
        tau, _ = sample_tau(perm, rng, 100_000)
        seed += 1
        phi = make_odd_cocycle(T, (1.0,) * d)
        case = select_case(phi)
        a = case_letter(perm, case)
        scan = scan_good_times(T, tau, CRIT_NU, delta, 60, q_cap=600)
        times = [r for r in scan.good_times(a) if centers_in_tower(T, induce(T, r.n, tau), a)]
        if len(times) < 3:
            continue
        M = cancellation_profile(T, phi, list(quasi_random(8) * float(T.total)), 2000)
        eta = choose_eta(phi.C_plus, phi.C_minus, case, M, perm)
        contrast = make_asymmetric_cocycle(T, (1.0,) * d, center=False)
        rows = []
        for rec in times:
            state = induce(T, rec.n, tau)
            Xi = build_Xi(T, state, a, eta)
            crit = run_criterion(T, phi, state, Xi, CRIT_KS, M, delta, derivative=False)
            ct, ce = tightness_integral(T, contrast, Xi)
            rows.append(dict(state=state, Xi=Xi, crit=crit, contrast=ct, contrast_err=ce))
        runs.append(dict(seed=seed - 1, T=T, tau=tau, rows=rows))
    return runs, time.perf_counter() - t0


def test_criterion_5_center_matching(criterion_runs):
    t0 = time.perf_counter()
    runs, _ = criterion_runs
    total = eq = cond = nonneg = 0
    for run in runs:
        for row in run["rows"]:
            cs = locate_center_shifts(run["T"], row["state"])
            total += 1
            eq += cs.set_equality
            if cs.forward_condition:
                cond += 1
                nonneg += bool(cs.nonnegative_ok)
    ok = total > 0 and eq == total and nonneg == cond
    report(5, "center matching", ok,
           f"set equality {eq}/{total} good times; nonnegative shifts {nonneg}/{cond} "
           "under the sign condition", time.perf_counter() - t0)
    assert ok


@pytest.mark.slow
def test_criterion_7_criterion_trend(criterion_runs):
    runs, elapsed = criterion_runs
    assert len(runs) >= 3
    tight_ok = osc_ok = incr_raw = incr_norm = 0
    times = 0
    Ks = []
    details = []
    for run in runs:
        rows = run["rows"]
        times += len(rows)
        for row in rows:
            c = row["crit"]
            tight_ok += c.tightness_ok()
            K = c.oscillation_ok(c.eta_used)
            Ks.append(K)
            osc_ok += K is not None
        raw = [r["contrast"] for r in rows]
        norm = [r["contrast"] / r["crit"].measure for r in rows]
        up_raw = all(b > a for a, b in zip(raw, raw[1:]))
        up_norm = all(b > a for a, b in zip(norm, norm[1:]))
        incr_raw += up_raw
        incr_norm += up_norm
        details.append(f"seed {run['seed']}: n={[r['state'].n for r in rows]} "
                       f"contrast {[round(v, 4) for v in raw]}")
    a_ok = tight_ok == times
    b_ok = osc_ok == times
    c_ok = incr_raw == len(runs)
    within = elapsed < 600
    report("7a", "tightness below D' + |anchor| + err", a_ok and within,
           f"{tight_ok}/{times} good times on {len(runs)} samples", elapsed)
    report("7b", "oscillation below Leb(Xi)(1 - eta/2) from some K <= 1000", b_ok and within,
           f"{osc_ok}/{times} good times, K = {Ks}", 0.0)
    report("7c", "contrast tightness strictly increasing", c_ok and within,
           f"{incr_raw}/{len(runs)} samples; " + "; ".join(details), 0.0)
    ACCEPTANCE_LINES.append(
        f"[INFO] criterion 7c (normalized): contrast mean |S_h| = tightness/Leb(Xi) strictly "
        f"increasing on {incr_norm}/{len(runs)} samples")
    assert a_ok and b_ok and within
    assert c_ok, details


# ---------------------------------------------------------------------------
# 6. stationary-phase bound
# ---------------------------------------------------------------------------

def synthetic_phases(count, seed):
    """``s (x + a log(1 + b x))``: monotone, ``|psi'|`` decreasing from ``1 + ab`` to ``1 + ab/(1+b)``."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        a, b = rng.uniform(0.0, 0.5), rng.uniform(0.5, 4.0)
        s = rng.choice([-1.0, 1.0])
        eta = rng.uniform(0.05, 1.0)
        rho = 1 + a * b / (1 + b * eta)
        var = a * b - a * b / (1 + b * eta)
        yield (lambda x, a=a, b=b, s=s: s * (x + a * np.log1p(b * x)),
               lambda x, a=a, b=b, s=s: s * (1 + a * b / (1 + b * x)), eta, rho, var)


def test_criterion_6_stationary_phase():
    t0 = time.perf_counter()
    ks = range(1, 1001)
    checked = violations = hyp_fail = 0
    lit_viol = 0
    for psi, dpsi, eta, rho, var in synthetic_phases(50, 66):
        for v in stationary_phase_sweep(psi, dpsi, eta, ks, rho, var):
            checked += 1
            hyp_fail += not v.hypothesis_ok
            violations += not v.conventional_ok
            lit_viol += not v.literal_ok
    selftest = linear_phase_selftest()
    ok = hyp_fail == 0 and violations == 0 and selftest <= 1e-12
    report(6, "stationary-phase bound", ok,
           f"50 phases x k=1..1000: {checked - violations}/{checked} below 1-eta+C/k "
           f"(integration-by-parts constant; literal constant violated {lit_viol}x); "
           f"self-test max {selftest:.2e}", time.perf_counter() - t0)
    assert ok


# ---------------------------------------------------------------------------
# 8. determinism of the pipeline
# ---------------------------------------------------------------------------

def test_criterion_8_determinism(tmp_path):
    t0 = time.perf_counter()
    cfg = {"schema_version": 1, "seed": 3, "d": 3, "samples": 4, "horizon": 30,
           "max_criterion_times": 2, "ks": [1, 10, 100]}
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    outs = []
    for name, workers in (("first", "1"), ("second", "2")):
        out = tmp_path / name
        assert main(["all", "--config", str(path), "--out", str(out), "--workers", workers]) == EXIT_OK
        outs.append({str(p.relative_to(out)): p.read_bytes() for p in sorted(out.rglob("*"))
                     if p.is_file() and p.name != "manifest.json"})
    same = outs[0] == outs[1]
    ok = same and len(outs[0]) > 0
    report(8, "determinism", ok,
           f"{len(outs[0])} output files byte-identical across two runs (1 and 2 workers)",
           time.perf_counter() - t0)
    assert ok
