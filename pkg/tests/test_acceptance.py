"""Acceptance checks; each prints one PASS/FAIL line."""

import math
import random
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from fqestimate import arithmetic_costs as ac
from fqestimate import cli
from fqestimate import interaction_picture as ip
from fqestimate import momentum_state as ms
from fqestimate import qubitization as qb
from fqestimate.scenario import NuclearSpecies, System, derive, from_rs

import oracles


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nacceptance {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def rel(a, b):
    return abs(a - b) / abs(b)


def test_01_golden_table(verdict):
    t0 = time.perf_counter()
    rows = cli.reproduce_molecules()
    elapsed = time.perf_counter() - t0
    parts = []
    for r in rows:
        parts.append(f"{r['system']}@2^{r['log2_n_table']}: T{r['toffoli_delta']:+.1%} "
                     f"Q{r['qubit_delta']:+.1%} (n_M={r['n_M']}, n_R={r['n_R']})")
    tof_ok = all(abs(r["toffoli_delta"]) <= cli.MOLECULE_TOFFOLI_TOL for r in rows)
    q_ok = all(abs(r["qubit_delta"]) <= cli.MOLECULE_QUBIT_TOL for r in rows)
    ok = tof_ok and q_ok and elapsed < 60
    verdict(1, ok, f"toffolis within 10%: {tof_ok}; qubits within 2%: {q_ok}; "
                   f"{elapsed:.1f}s; " + "; ".join(parts))


def test_02_crossover(verdict):
    doc = cli.reproduce_crossover()
    probes = ", ".join(f"(eta={p['eta']}, delta={p['delta']:g}) ratio {p['ratio']:.3g}" for p in doc["probes"])
    bounds = ", ".join(f"eta={b['eta']} spread {b['spread']:.1%}" for b in doc["boundary"])
    first_two = all(p["pass"] for p in doc["probes"][:2])
    ok = first_two and all(p["pass"] for p in doc["probes"]) and all(b["pass"] for b in doc["boundary"])
    verdict(2, ok, f"{probes}; boundary {bounds}")


def test_03_oracle_equivalence(verdict):
    worst = 0.0
    for n_p in range(1, 6):
        box = ms.MomentumBox(n_p)
        n_M = 3 + 2 * n_p
        alpha = 1 - 1.25 / 2 ** n_M
        pairs = [
            (ms.lambda_nu(box), oracles.brute_lambda_nu(n_p)),
            (ms.inv_norm_sum(box), oracles.brute_inv_norm(n_p)),
            (ms.p_nu_success(box, ms.NuPreparationSpec(n_M)), oracles.brute_p_suc(n_p, n_M)),
            (ms.lambda_nu_alpha(box, ms.NuPreparationSpec(n_M, alpha)),
             alpha * oracles.brute_ceiling_sum(n_p, n_M)),
            (ms.abs_deviation_sum(box, ms.NuPreparationSpec(n_M, alpha)),
             oracles.brute_abs_dev(n_p, n_M, alpha)),
        ]
        worst = max(worst, *(rel(a, b) for a, b in pairs))
    # the rational oracle is exactly 44/3 and the float sum rounds to the nearest double of it
    exact = (oracles.exact_lambda_nu_np1() == Fraction(44, 3)
             and ms.lambda_nu(ms.MomentumBox(1)) == float(Fraction(44, 3)))
    ok = worst <= 1e-12 and exact
    verdict(3, ok, f"max relative deviation over n_p=1..5: {worst:.2e}; lambda_nu(1) == 44/3: {exact}")


def test_04_equal_superposition_bound(verdict):
    rng = random.Random(4)
    worst = math.inf
    for _ in range(10_000):
        n = rng.randint(1, 10 ** 6)
        b_r = rng.randint(3, 12)
        margin = ac.equal_superposition_success(n, b_r) - ac.equal_superposition_lower_bound(b_r)
        worst = min(worst, margin)
    b8 = round(ac.equal_superposition_lower_bound(8), 6)
    ok = worst >= -1e-15 and b8 == 0.999661
    verdict(4, ok, f"min margin over 10^4 samples {worst:.3e}; b_r=8 bound {b8:.6f}")


def test_05_eps_M_sandwich(verdict):
    rng = random.Random(5)
    below = 0
    for _ in range(200):
        n_p = rng.randint(1, 6)
        n_M = rng.randint(1, 24)
        eta = rng.randint(2, 200)
        lz = rng.randint(0, 200)
        omega = 10 ** rng.uniform(1, 6)
        box = ms.MomentumBox(n_p)
        ex = ms.eps_M_exact(box, ms.NuPreparationSpec(n_M), eta, lz, omega)
        below += ex <= ms.eps_M_bound(box, n_M, eta, lz, omega) * (1 + 1e-12)
    r1, rt = [], []
    for n_p in (4, 5, 6):
        box = ms.MomentumBox(n_p)
        for n_M in (10, 13, 16):
            bound = ms.eps_M_bound(box, n_M, 46, 46, 1e5)
            r1.append(ms.eps_M_exact(box, ms.NuPreparationSpec(n_M), 46, 46, 1e5) / bound)
            a = ms.tune_alpha(box, n_M)
            rt.append(ms.eps_M_exact(box, ms.NuPreparationSpec(n_M, a), 46, 46, 1e5) / bound)
    ok = below == 200 and 0.3 <= min(r1) and max(r1) <= 0.7 and max(rt) <= 0.45
    verdict(5, ok, f"exact <= bound for {below}/200; alpha=1 ratio [{min(r1):.3f}, {max(r1):.3f}]; "
                   f"tuned ratio [{min(rt):.3f}, {max(rt):.3f}]")


def _random_system(rng):
    eta = rng.randint(2, 300)
    lz = rng.randint(0, 300)
    species = (NuclearSpecies(1, lz),) if lz else ()
    return System(eta, species, 10 ** rng.uniform(1, 6), 2 ** rng.randint(3, 27)), eta, lz


def test_06_brace_equality(verdict):
    rng = random.Random(6)
    hits1 = hits2 = 0
    for _ in range(100):
        s, eta, lz = _random_system(rng)
        g = derive(s)
        cfg = qb.QubitizationConfig(rng.randint(1, 40), rng.randint(1, 60), rng.randint(1, 60),
                                    rng.randint(3, 10), rng.random() < 0.5)
        got = sum(v for _, v in qb.step_cost(s, cfg))
        want = oracles.qubitization_brace(g.n_p, g.n_eta, g.n_etazeta, eta, lz, cfg.n_M, cfg.n_R, cfg.n_T,
                                      cfg.b_r, cfg.amplitude_amplification)
        hits1 += got == want
    for _ in range(100):
        s, eta, lz = _random_system(rng)
        g = derive(s)
        cfg = ip.InteractionConfig(rng.randint(2, 16), rng.randint(1, 30), rng.randint(1, 40),
                                   rng.randint(1, 60), 8, rng.randint(3, 10))
        b_grad = rng.randint(2, 40)
        got = sum(v for _, v in ip.step_cost(s, cfg, b_grad))
        want = oracles.interaction_brace(g.n_p, g.n_eta, g.n_etazeta, eta, lz, cfg.n_M, cfg.n_R, cfg.b_r,
                                      cfg.K, cfg.n_t, b_grad)
        hits2 += got == want
    verdict(6, hits1 == 100 and hits2 == 100, f"qubitization {hits1}/100, interaction {hits2}/100 exact")


def _slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def test_07_scaling(verdict):
    etas = list(range(20, 201, 20))
    q = [qb.optimize(from_rs(e, 10.0, 2 ** 18))[1].total_toffolis for e in etas]
    q_exp = _slope(etas, q)
    logs = [12, 15, 18, 21]
    i = [ip.optimize(from_rs(20, 10.0, 2 ** l))[1].total_toffolis for l in logs]
    i_exp = _slope([2.0 ** (l / 3) for l in logs], i)
    q_ok = 2.4 <= q_exp <= 2.8
    i_ok = 0.8 <= i_exp <= 1.3
    verdict(7, q_ok and i_ok, f"qubitization eta-exponent {q_exp:.3f} (band [2.4, 2.8]: {q_ok}); "
                              f"interaction N^(1/3)-exponent {i_exp:.3f} (band [0.8, 1.3]: {i_ok})")


def test_08_generic_cost_model(verdict):
    ratios = []
    linear = True
    for K in range(3, 9):
        spec = ip.GenericIPSpec(1.0, 9 / 13, 9, 13, K, 12, 24, 8, 40)
        one = ip.generic_cost(spec)
        ratios.append(one.amplitude_ratio)
        for r in (2, 3, 10, 64):
            linear &= ip.generic_cost(spec.with_reps(r)).toffolis == r * one.toffolis
    ok = min(ratios) >= 0.5 and linear
    verdict(8, ok, f"min Eq(Sigma(0),8)/e^(9/13) over K=3..8 = {min(ratios):.4f}; exactly linear in reps: {linear}")


def test_09_performance(verdict):
    box = ms.MomentumBox(8)
    spec = ms.NuPreparationSpec(20)

    def timed(threads):
        ms.clear_cache()
        t0 = time.perf_counter()
        vals = (ms.lambda_nu(box, threads), ms.p_nu_success(box, spec, threads))
        return time.perf_counter() - t0, vals

    t1, v1 = timed(1)
    t8, v8 = timed(8)
    workers = ms.effective_workers(8)
    ok = t1 < 2.0 and t8 < 0.5 and v1 == v8
    verdict(9, ok, f"single-threaded {t1:.3f}s; 8 requested workers ({workers} effective on this host) "
                   f"{t8:.3f}s; identical results: {v1 == v8}")


def test_10_determinism(verdict, tmp_path):
    cmds = [
        ["estimate", "--preset", "diamond", "--log2n", "12", "--format", "json"],
        ["sweep", "--eta", "10:30:10", "--rs", "2,10", "--log2n", "12", "--threads", "4"],
    ]
    same = []
    for c in cmds:
        outs = [subprocess.run([sys.executable, "-m", "fqestimate", *c], capture_output=True,
                               check=True).stdout for _ in range(2)]
        same.append(outs[0] == outs[1] and len(outs[0]) > 0)
    verdict(10, all(same), f"byte-identical reruns: estimate {same[0]}, sweep {same[1]}")
