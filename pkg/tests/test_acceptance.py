"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

The lines are collected in ``RESULTS`` and echoed in the pytest terminal
summary (see conftest.py), so they show up without ``-s``.
"""

import itertools
import json
import time

import numpy as np
import pytest

from icek.chain import ChainModel, LowerTransitionOperator
from icek.cli import main
from icek.credal import CredalSet, lower_expectation, make_vacuous, upper_expectation
from icek.extension import (
    monotone_limit_nondecreasing,
    monotone_limit_nonincreasing,
    precise_reach_probability,
    precise_safety_probability,
    reach_sequence,
    safety_sequence,
    williams_nmeasurable,
)
from icek.fileformat import (
    parse_certificate,
    parse_gamble,
    parse_model,
    verify_certificate,
    write_certificate,
    write_gamble,
    write_model,
)
from icek.sampling import (
    extreme_member,
    random_almost_desirable_selection,
    random_credal_set,
    random_model,
    random_ngamble,
    random_selection,
)
from icek.tree import NGamble, capital, limsup_capital, situations
from icek.witness import (
    compute_cutoff,
    cutoff_selection,
    greedy_nonneg_path,
    is_almost_desirable,
    lp_witness_search,
    stitch_selection,
    truncate_selection,
)

from conftest import demo_chain

RESULTS = []
SEED = 514


def report(number, name, ok, detail):
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {name}: {detail}")
    print(RESULTS[-1])
    assert ok, detail


def lp_instances():
    rng = np.random.default_rng(SEED)
    out = []
    for i in range(200):
        X = 2 + i % 2
        m = random_model(rng, X, ["stationary", "time_varying", "general"][i % 3], max_extremes=3)
        n = int(rng.integers(0, 5))
        out.append((m, random_ngamble(rng, X, n)))
    return out


def test_01_lp_matches_recursion():
    t0 = time.perf_counter()
    worst = 0.0
    for m, f in lp_instances():
        worst = max(worst, abs(lp_witness_search(m, f, f.n).alpha - williams_nmeasurable(m, f)))
    dt = time.perf_counter() - t0
    report(1, "LP witness equals backward recursion", worst <= 1e-6 and dt < 60,
           f"200 instances, max |diff| {worst:.2e} (tol 1e-6), {dt:.1f} s (limit 60 s)")


def test_02_extra_depth_keeps_alpha():
    worst = 0.0
    for m, f in lp_instances():
        alphas = [lp_witness_search(m, f, f.n + d).alpha for d in range(4)]
        worst = max(worst, max(alphas) - min(alphas))
    report(2, "LP alpha constant over horizons n..n+3", worst <= 1e-6,
           f"200 instances, max spread {worst:.2e} (tol 1e-6)")


def test_03_truncation_identity():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(20):
        S = random_selection(rng, 2, 3)
        T = truncate_selection(S, 2)
        for w in situations(2, 5):
            worst = max(worst, abs(limsup_capital(T, w) - capital(S, w[:2])))
    report(3, "truncated selection limsup equals capital at cutoff", worst <= 1e-12,
           f"20 selections x 32 paths, max |diff| {worst:.2e} (tol 1e-12)")


def random_precise_chain(rng, X):
    return random_model(rng, X, max_extremes=1, zero_prob=0.3)


# A chain that lingers (say a 0.94 self-loop) is still far from its limit
# at horizon 64; such runs report converged=False. The oracle match is
# checked on converged runs, and unconverged traces must sit on the correct
# side of the oracle.


def test_04_reach_limits():
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    worst_mono = worst = 0.0
    unconverged = wrong_side = 0
    for i in range(50):
        X = 1 + i % 3
        m = random_precise_chain(rng, X)
        A = [x for x in range(X) if rng.random() < 0.5]
        res = monotone_limit_nondecreasing(m, reach_sequence(m, A, 64), tol=1e-9, max_horizon=64)
        worst_mono = max(worst_mono, -np.diff(res.trace).min(initial=0.0))
        init, P = m.precise_matrix()
        oracle = precise_reach_probability(P, init, A)
        if res.converged:
            worst = max(worst, abs(res.value - oracle))
        else:
            unconverged += 1
            wrong_side += res.value > oracle + 1e-9
    dt = time.perf_counter() - t0
    ok = worst_mono <= 1e-12 and worst <= 1e-3 and wrong_side == 0 and dt < 30
    report(4, "reach traces monotone and match precise oracle", ok,
           f"50 chains ({unconverged} unconverged at 64, {wrong_side} above oracle), "
           f"max decrease {worst_mono:.1e}, max |diff| {worst:.2e} (tol 1e-3), {dt:.1f} s (limit 30 s)")


def test_05_safety_limits():
    rng = np.random.default_rng(SEED + 1)
    worst_mono = worst = 0.0
    unconverged = wrong_side = outside = 0
    for i in range(50):
        X = 1 + i % 3
        B = [x for x in range(X) if rng.random() < 0.6]
        m = random_precise_chain(rng, X)
        res = monotone_limit_nonincreasing(m, safety_sequence(m, B, 64), tol=1e-9, max_horizon=64)
        worst_mono = max(worst_mono, np.diff(res.trace).max(initial=0.0))
        init, P = m.precise_matrix()
        oracle = precise_safety_probability(P, init, B)
        if res.converged:
            worst = max(worst, abs(res.value - oracle))
        else:
            unconverged += 1
            wrong_side += res.value < oracle - 1e-9

        mi = random_model(rng, X, max_extremes=3)
        seq = safety_sequence(mi, B, 64)
        res = monotone_limit_nonincreasing(mi, seq, tol=1e-9, max_horizon=64)
        worst_mono = max(worst_mono, np.diff(res.trace).max(initial=0.0))
        # bracket at the horizon the value was read off
        n = res.start + len(res.trace) - 1
        K = make_vacuous(X)
        vac = ChainModel.stationary(mi.states, K, LowerTransitionOperator([K] * X))
        low = seq.lower_value(vac, n)
        high = min(seq.lower_value(extreme_member(rng, mi), n) for _ in range(3))
        outside += not (res.vvs_only and low - 1e-12 <= res.value <= high + 1e-12)
    ok = worst_mono <= 1e-12 and worst <= 1e-3 and wrong_side == 0 and outside == 0
    report(5, "safety traces monotone, precise match, imprecise bracketed", ok,
           f"50 precise chains ({unconverged} unconverged at 64, {wrong_side} below oracle), "
           f"max increase {worst_mono:.1e}, max |diff| {worst:.2e} (tol 1e-3); "
           f"50 imprecise chains, {outside} outside [vacuous, extreme precise]")


def test_06_greedy_path():
    rng = np.random.default_rng(SEED)
    bad = 0
    for i in range(100):
        X = 2 + i % 2
        m = random_model(rng, X, ["stationary", "time_varying", "general"][i % 3])
        S = random_almost_desirable_selection(rng, m, 6)
        start = tuple(int(x) for x in rng.integers(0, X, size=i % 3))
        path = greedy_nonneg_path(m, S, start, 6)
        caps = [capital(S, path[:k]) for k in range(len(start), 7)]
        bad += any(b < a for a, b in zip(caps, caps[1:]))
    report(6, "greedy path keeps capital non-decreasing", bad == 0, f"100 selections, {bad} violations")


def test_07_cutoff_machinery():
    rng = np.random.default_rng(SEED)
    vac = ChainModel.stationary("ab", make_vacuous(2), LowerTransitionOperator([make_vacuous(2)] * 2))
    const_bad = ident_bad = checked = 0
    for _ in range(30):
        S = random_selection(rng, 2, 5, scale=0.5)
        fs = [NGamble(2, n, rng.uniform(-1, 1, 2**n)) for n in range(6)]
        # the last gamble lies far below any capital so every prefix resolves
        fs[5] = NGamble.constant(2, 1e6, 5)
        cd = compute_cutoff(vac, S, fs, 0.0, float(rng.uniform(-0.5, 0.5)), 5)
        const_bad += len(cd.constancy_violations())
        Sstar = cutoff_selection(S, cd)
        for w in situations(2, 5):
            checked += 1
            ident_bad += abs(limsup_capital(Sstar, w) - capital(S, w[: cd[w]])) > 1e-12
    ok = const_bad == 0 and ident_bad == 0
    report(7, "cutoff cylinder constancy and limsup identity", ok,
           f"30 instances x 32 paths: {const_bad} constancy, {ident_bad} identity violations of {checked}")


def test_08_stitching():
    m = demo_chain()
    seq = safety_sequence(m, [0], 6)
    gambles = [NGamble.constant(2, 1.0)] + list(seq)
    S_list = [lp_witness_search(m, f, f.n).selection for f in gambles]
    bad = 0
    for eps in (0.1, 0.01):
        S, F = stitch_selection(m, S_list, eps, 6)
        bad += not is_almost_desirable(m, S)
        for w in situations(2, 6):
            bad += any(capital(S, w[:k]) > F(w[:k]) + eps / 2 + 1e-12 for k in range(7))
    report(8, "stitched selection almost-desirable and below F + eps/2", bad == 0,
           f"eps in (0.1, 0.01), 64 paths, {bad} violations")


def test_09_credal_algebra():
    rng = np.random.default_rng(SEED)
    conj = sup = hom = 0
    for i in range(1000):
        X = 2 + i % 3
        K = random_credal_set(rng, X, max_extremes=4)
        f, g = rng.normal(size=X), rng.normal(size=X)
        lam = float(rng.uniform(0, 10))
        conj += upper_expectation(K, f) != -lower_expectation(K, -f)
        sup += lower_expectation(K, f + g) < lower_expectation(K, f) + lower_expectation(K, g) - 1e-9
        hom += abs(lower_expectation(K, lam * f) - lam * lower_expectation(K, f)) > 1e-9
    report(9, "credal algebra", conj + sup + hom == 0,
           f"1000 draws: {conj} conjugacy, {sup} superlinearity, {hom} homogeneity failures")


def test_10_serialization(tmp_path, capsys):
    rng = np.random.default_rng(SEED)
    mismatches = rejected = 0
    for i in range(100):
        X = 1 + i % 3
        m = random_model(rng, X, ["stationary", "time_varying", "general"][i % 3])
        f = random_ngamble(rng, X, i % 4)
        cert = lp_witness_search(m, f, f.n)
        paths = [tmp_path / f"{i}.{kind}.json" for kind in ("model", "gamble", "cert")]
        for p, text in zip(paths, (write_model(m), write_gamble(f), write_certificate(cert))):
            p.write_text(text)
        m2 = parse_model(paths[0].read_text())
        f2 = parse_gamble(paths[1].read_text(), m2)
        c2 = parse_certificate(paths[2].read_text(), X)
        mismatches += not (m2 == m and f2 == f and c2.alpha == cert.alpha
                           and c2.horizon == cert.horizon and c2.selection == cert.selection)
        rejected += not verify_certificate(m2, f2, paths[2].read_text())

    mp, gp, cp = (str(tmp_path / f"7.{k}.json") for k in ("model", "gamble", "cert"))
    tampered = json.loads(open(cp).read())
    tampered["alpha"] += 0.1
    tp = tmp_path / "tampered.json"
    tp.write_text(json.dumps(tampered))
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    codes = [main(["witness", "verify", mp, gp, p]) for p in (cp, str(tp), str(broken))]
    capsys.readouterr()
    ok = mismatches == 0 and rejected == 0 and codes == [0, 1, 2]
    report(10, "serialization round trip and verify exit codes", ok,
           f"100 file triples, {mismatches} mismatches, {rejected} rejected by verify; exit codes valid/tampered/malformed = {codes} (want [0, 1, 2])")
