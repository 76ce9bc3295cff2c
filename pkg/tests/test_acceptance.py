"""Acceptance suite: one test per criterion, at the stated sample sizes and tolerances.

Each test records a PASS or FAIL line that is printed in the pytest terminal
summary, then asserts. Reduction audits are computed once and shared by the
structural and determinism criteria.
"""

from __future__ import annotations

import functools
import math
import time

import numpy as np
import pytest
from scipy.stats import binom, norm as normal

from bruteforce import brute_cvp_key, brute_svp_key
from lpreduce import analysis
from lpreduce.core import Basis, CvpInstance, PNorm
from lpreduce.harness import ExperimentConfig, canonical_json, gen_lattice, gen_target, run_experiment, strip_timing
from lpreduce.oracles import distance_key, exact_cvp, exact_svp, lambda1, lambda1_key
from lpreduce.reductions import full_sample_count, gamma_bdd_to_usvp, gamma_cvp_to_usvp, gamma_svp_to_svp
from lpreduce.sparsify import isolation_bounds, isolation_count
from lpreduce.supergaussian import ExactDSS, SvpDSS, f_p_lattice

pytestmark = pytest.mark.acceptance

# Two-sided tail probability of a 4 sigma normal deviation.
FOUR_SIGMA_TAIL = 2 * normal.sf(4.0)


# ---------------------------------------------------------------------------
# 1. Exact oracles against the brute-force referee
# ---------------------------------------------------------------------------


def _integer_matrix(B: Basis) -> np.ndarray:
    return np.array(B.columns, dtype=np.int64).T


def _keys_match(ours, theirs, p) -> bool:
    """Exact equality for exact norms; for p = 1.5 our key is ``||x||^p`` and theirs the norm."""
    if p == 1.5:
        return math.isclose(float(ours) ** (1 / p), float(theirs), rel_tol=1e-9)
    return ours == theirs


def test_criterion_1_oracles_match_brute_force(acceptance):
    rng = np.random.default_rng(101)
    norms = (1, 2, "inf", 1.5)
    mismatches = []
    for i in range(200):
        n = int(rng.integers(1, 5))
        B = gen_lattice("uniform", n, n, 5, rng)
        t = gen_target(B, rng, 8)
        p = norms[i % 4]
        pn = PNorm.parse(p)
        E = _integer_matrix(B)
        assert B.denominator == 1
        v, _ = exact_svp(B, pn)
        svp_ok = _keys_match(lambda1_key(B, pn), brute_svp_key(E, p), p) and v.key(pn) == lambda1_key(B, pn)
        inst = CvpInstance(B, t, pn)
        w, _ = exact_cvp(inst)
        dk = distance_key(inst)
        err = pn.key([a - b for a, b in zip(w.embedding, t)])
        cvp_ok = _keys_match(dk, brute_cvp_key(E, list(t), p), p) and err == dk or math.isclose(float(err), float(dk), rel_tol=1e-9)
        cvp_ok = cvp_ok and B.contains(w.embedding) and B.contains(v.embedding) and not v.is_zero
        if not (svp_ok and cvp_ok):
            mismatches.append((i, p, svp_ok, cvp_ok))
    ok = not mismatches
    acceptance(1, ok, f"200 instances, {len(mismatches)} mismatches")
    assert ok, mismatches


# ---------------------------------------------------------------------------
# 2. Sparsification isolation frequencies
# ---------------------------------------------------------------------------


def _family(Q: int, N: int, n: int, rng, coset: bool):
    """x, N vectors v_i and (coset case) N further y_i, satisfying the preconditions."""
    while True:
        x = rng.integers(0, Q, n)
        vs = rng.integers(0, Q, (N, n))
        ys = rng.integers(0, Q, (N, n)) if coset else None
        if not x.any() or not vs.any(axis=1).all():
            continue
        # x must not be a scalar multiple of any v_i modulo Q.
        multiples = {tuple((k * v) % Q) for v in vs for k in range(Q)}
        if tuple(x) in multiples:
            continue
        if coset and any(np.array_equal(y, x) for y in ys):
            continue
        return x, vs, ys


def test_criterion_2_isolation_frequencies(acceptance):
    rng = np.random.default_rng(202)
    draws, n = 10**6, 4
    failures = []
    for Q in (11, 31):
        for N in (3, 8):
            for coset in (False, True):
                x, vs, ys = _family(Q, N, n, rng, coset)
                hits = isolation_count(Q, x, vs, draws, rng, ys=ys)
                lo, hi = isolation_bounds(Q, N, n, coset=coset)
                # Sigma is taken at each end of the window, clipped to a probability.
                plo, phi = min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0)
                sig_lo = math.sqrt(plo * (1 - plo) / draws)
                sig_hi = math.sqrt(phi * (1 - phi) / draws)
                freq = hits / draws
                if not lo - 4 * sig_lo <= freq <= hi + 4 * sig_hi:
                    failures.append((Q, N, coset, freq, lo, hi))
    ok = not failures
    acceptance(2, ok, f"8 cases x 10^6 draws, {len(failures)} outside the widened window")
    assert ok, failures


# ---------------------------------------------------------------------------
# 3. Covering lemma over the full grid
# ---------------------------------------------------------------------------


def test_criterion_3_covering_grid(acceptance):
    rng = np.random.default_rng(303)
    reports = [
        analysis.covering_check(g["m"], g["p"], g["q"], g["alpha"], 10_000, rng) for g in analysis.COVERING_GRID
    ]
    bad = [r.instance for r in reports if not r.holds]
    acceptance(3, not bad, f"{len(reports)} grid cells x 10^4 samples, {len(bad)} violations")
    assert not bad, bad


# ---------------------------------------------------------------------------
# 4. Counting lemma and the growth ladder
# ---------------------------------------------------------------------------


def _random_bases(count: int, seed: int, max_rank: int = 3):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, max_rank + 1))
        out.append(gen_lattice("uniform", n, n, 5, rng))
    return out, rng


def test_criterion_4_counting_and_growth(acceptance):
    bases, _ = _random_bases(50, 404)
    violations = []
    checks = 0
    for i, B in enumerate(bases):
        p = (1, 2, "inf")[i % 3]
        l1 = lambda1(B, p)
        for k in (2, 3):
            rep = analysis.counting_check(B, p, l1, k * l1)
            checks += 1
            if not rep.holds:
                violations.append(("counting", i, k))
        for c in (4, 6):
            _, ratio = analysis.growth_ladder(B, p, l1, c)
            checks += 1
            if ratio > analysis.growth_bound(B.m, c):
                violations.append(("growth", i, c))
    acceptance(4, not violations, f"50 lattices, {checks} checks, {len(violations)} violations")
    assert not violations, violations


# ---------------------------------------------------------------------------
# 5. Tail bound and shifted-mass sandwich with certified enclosures
# ---------------------------------------------------------------------------


def _interval_width(lo: float, hi: float) -> float:
    return (hi - lo) / lo


def test_criterion_5_supergaussian_inequalities(acceptance):
    bases, rng = _random_bases(50, 505)
    violations = []
    widest = 0.0
    checks = 0
    for p in (1, 1.5, 2):
        for i, B in enumerate(bases):
            for a in (1.0, 2.0):
                rep = analysis.tail_check(B, p, a)
                widest = max(widest, rep.details["rel_width"])
                checks += 1
                if not rep.holds or rep.details["rel_width"] >= 1e-9:
                    violations.append(("tail", p, i, a))
            rep = analysis.shifted_mass_check(B, gen_target(B, rng, 7), p)
            w = max(_interval_width(*rep.details["coset_mass"]), _interval_width(*rep.details["lattice_mass"]))
            widest = max(widest, w)
            checks += 1
            if not rep.holds or w >= 1e-9:
                violations.append(("shifted", p, i))
    acceptance(5, not violations, f"{checks} checks, widest enclosure {widest:.1e}, {len(violations)} violations")
    assert not violations, violations


# ---------------------------------------------------------------------------
# 6. Discrete supergaussian samplers
# ---------------------------------------------------------------------------


def _consistent(count: int, total: int, lo: float, hi: float) -> bool:
    """Is ``count`` out of ``total`` within 4 sigma of some probability in [lo, hi]?

    For well populated points this is the usual normal 4 sigma window; for
    rare points the exact binomial tail is compared with the same 4 sigma
    tail probability, since the normal approximation breaks down there.
    """
    f = count / total
    for P in (lo, hi):
        if abs(f - P) <= 4 * math.sqrt(P * (1 - P) / total):
            return True
    if lo <= f <= hi:
        return True
    P = lo if f < lo else hi
    tail = binom.cdf(count, total, P) if f < lo else binom.sf(count - 1, total, P)
    return 2 * tail >= FOUR_SIGMA_TAIL


def _point_table(X):
    pts, counts = np.unique(X, axis=0, return_counts=True)
    return {tuple(int(c) for c in row): int(k) for row, k in zip(pts, counts)}


def test_criterion_6_dss_frequencies(acceptance):
    M = 10**6
    bad = []
    cases = 0
    for m in (1, 2):
        for p in (1, 2):
            B = Basis.identity(m)
            rng = np.random.default_rng(600 + 10 * m + p)
            mass = f_p_lattice(B, p, 1e-12)

            def prob_range(point):
                w = math.exp(-sum(abs(c) ** p for c in point))
                return w / mass.upper, w / mass.lower

            exact = ExactDSS(B, p, 1e-6)
            seen = _point_table(exact.sample_coeffs(M, rng))
            for row in exact.points.coeffs:
                pt = tuple(int(c) for c in row)
                lo, hi = prob_range(pt)
                cases += 1
                if not _consistent(seen.get(pt, 0), M, lo, hi):
                    bad.append(("exact", m, p, pt, seen.get(pt, 0), lo))
            svp = SvpDSS(B, p, 10)
            assert svp.delta == pytest.approx(0.5 * math.log(1.1))
            seen = _point_table(svp.sample_coeffs(M, rng))
            ball = [pt for pt in map(tuple, exact.points.coeffs.tolist()) if sum(abs(c) ** p for c in pt) <= m]
            for pt in ball:
                lo, hi = prob_range(pt)
                cases += 1
                if not _consistent(seen.get(pt, 0), M, lo * math.exp(-svp.delta), hi * math.exp(svp.delta)):
                    bad.append(("svp", m, p, pt, seen.get(pt, 0), lo))
    acceptance(6, not bad, f"{cases} point checks over 10^6 samples each, {len(bad)} outside 4 sigma")
    assert not bad, bad[:10]


# ---------------------------------------------------------------------------
# 7. Reduction audits
# ---------------------------------------------------------------------------

AUDIT_COUNT = 100


def _audit_configs() -> dict[str, dict]:
    cfgs = {}
    for p, q in (("1", "2"), ("2", "inf"), ("2", "2")):
        for backend, g in (("exact", 1.0), ("adversarial", 1.0), ("adversarial", 1.5)):
            cfgs[f"svp {p}->{q} {backend} {g}"] = dict(
                reduction="svp_q_to_svp_p", p=p, q=q, backend=backend, oracle_gamma=g, Q_override=11, max_trials=20
            )
    for tau in (1, 2):
        cfgs[f"cvp->bdd tau={tau}"] = dict(reduction="cvp_to_bdd", p="2", tau=tau, backend="strict", max_trials=50)
    cfgs["bdd->usvp 2"] = dict(
        reduction="bdd_q_to_usvp_p", p="2", q="2", backend="strict", bdd_promise=2, max_trials=100, stop_factor=160
    )
    cfgs["cvp->usvp 2"] = dict(
        reduction="cvp_q_to_usvp_p", p="2", q="2", backend="strict", max_trials=10, inner_max_trials=100, stop_factor=240
    )
    for p, q in (("1", "2"), ("1", "inf"), ("2", "inf")):
        cfgs[f"cvp {p}->{q}"] = dict(reduction="cvp_p_to_cvp_q", p=p, q=q, max_trials=50)
    for name in ("cvp_to_dss", "cvp_to_svp_supergaussian"):
        for gamma in (4, 6):
            for p in ("1", "2"):
                cfgs[f"{name} gamma={gamma} p={p}"] = dict(reduction=name, p=p, gamma=gamma, max_trials=5)
    cfgs["cvp_to_dss full M"] = dict(reduction="cvp_to_dss", p="2", gamma=4, M="full", max_trials=5)
    return cfgs


def _config(entry: dict, count: int = AUDIT_COUNT, seed: int = 7) -> ExperimentConfig:
    return ExperimentConfig(count=count, rank=4, seed=seed, **entry)


@functools.cache
def _audit_reports() -> dict[str, dict]:
    reports = {}
    for name, entry in _audit_configs().items():
        t0 = time.perf_counter()
        reports[name] = run_experiment(_config(entry))
        reports[name]["_seconds"] = time.perf_counter() - t0
    return reports


def _expected_bound(entry: dict) -> float | None:
    """The stated guarantee for the configs whose bound is given in closed form."""
    p = PNorm.parse(entry.get("p", "2"))
    eps = 0.5
    if entry["reduction"] == "svp_q_to_svp_p":
        return gamma_svp_to_svp(eps, p, entry["oracle_gamma"])
    if entry["reduction"] == "cvp_to_bdd":
        return (1 + 1 / entry["tau"]) * 1.0
    if entry["reduction"] in ("bdd_q_to_usvp_p", "cvp_q_to_usvp_p"):
        return 120 / eps
    if entry["reduction"] == "cvp_p_to_cvp_q":
        return 100 * math.log(1 / eps) ** (1 / p.p) / eps ** (1 / p.p)
    return float(entry["gamma"])


def test_criterion_7_reduction_audits(acceptance):
    reports = _audit_reports()
    specs = _audit_configs()
    failures = []
    lines = []
    for name, rep in reports.items():
        entry = specs[name]
        bound = _expected_bound(entry)
        recs = rep["records"]
        within = sum(1 for r in recs if r["pass"] and r["achieved"] is not None and r["achieved"] <= bound * (1 + 1e-12))
        rate = within / len(recs)
        lines.append(f"{name}: {rate:.2f} ({rep['_seconds']:.0f}s)")
        if len(recs) != AUDIT_COUNT or rate < 0.95:
            failures.append((name, rate, rep["summary"]))
    # The composed reduction's inner bound and the desk ladder's bound are no looser than stated.
    assert gamma_bdd_to_usvp(0.5, 2, 2) <= 120 / 0.5
    assert gamma_cvp_to_usvp(0.5, 2, 2) <= 120 / 0.5
    full = reports["cvp_to_dss full M"]["records"]
    full_ok = all(r["info"]["M"] == full_sample_count(4, 1.0, 2.0, r["info"]["delta"]) for r in full if "info" in r)
    if not full_ok:
        failures.append(("full M", [r.get("info", {}).get("M") for r in full[:3]]))
    ok = not failures
    acceptance(7, ok, f"{len(reports)} configs x {AUDIT_COUNT} instances, {len(failures)} below 0.95")
    print("\n".join(lines))
    assert ok, failures


# ---------------------------------------------------------------------------
# 8. Structural audits across all runs above
# ---------------------------------------------------------------------------


def test_criterion_8_structural_audits(acceptance):
    reports = _audit_reports()
    violations = []
    records = 0
    for name, rep in reports.items():
        svp = rep["config"]["reduction"] == "svp_q_to_svp_p"
        for r in rep["records"]:
            records += 1
            if "error" in r:
                violations.append((name, r["instance_id"], r["error"]))
                continue
            if not (r["member"] and r["shapes_ok"]) or (svp and not r["sublattice_only"]):
                violations.append((name, r["instance_id"], "structure"))
    acceptance(8, not violations, f"{records} records, {len(violations)} violations")
    assert not violations, violations[:10]


# ---------------------------------------------------------------------------
# 9. Determinism
# ---------------------------------------------------------------------------


def test_criterion_9_determinism(acceptance):
    mismatched = []
    specs = _audit_configs()
    for name, entry in specs.items():
        a = run_experiment(_config(entry, count=5, seed=99))
        b = run_experiment(_config(entry, count=5, seed=99))
        if a["digest"] != b["digest"] or canonical_json(strip_timing(a)) != canonical_json(strip_timing(b)):
            mismatched.append(name)
    acceptance(9, not mismatched, f"{len(specs)} configs rerun, {len(mismatched)} differ")
    assert not mismatched, mismatched
