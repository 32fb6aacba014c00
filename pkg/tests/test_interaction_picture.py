import math

import pytest
from hypothesis import given, settings, strategies as st

from fqestimate import interaction_picture as ip
from fqestimate import qubitization as qb
from fqestimate.arithmetic_costs import equal_superposition_success
from fqestimate.errors import Infeasible, InvalidInput, Unsupported
from fqestimate.scenario import NuclearSpecies, System, derive, get_preset

import oracles

EC = get_preset("ethylene_carbonate")


def test_sigma_examples():
    assert ip.sigma(0, 3) == 16
    assert ip.sigma(2, 4) == 17
    for K in range(1, 17):
        assert ip.sigma(K, K) == 1
        assert ip.sigma(0, K) < math.factorial(K) * math.e


@given(K=st.integers(1, 16), data=st.data())
def test_sigma_differences(K, data):
    k = data.draw(st.integers(0, K - 1))
    assert ip.sigma(k, K) - ip.sigma(k + 1, K) == math.factorial(K) // math.factorial(k)
    assert ip.sigma(k, K) > ip.sigma(k + 1, K)


def test_sigma_out_of_range():
    with pytest.raises(Unsupported):
        ip.sigma(0, 17)
    with pytest.raises(Unsupported):
        ip.InteractionConfig(17, 10, 10, 10)
    with pytest.raises(Unsupported):
        ip.InteractionConfig(1, 10, 10, 10)


def test_generic_sigma_example():
    want = sum(math.factorial(4) * 9 ** l * 13 ** (4 - l) // math.factorial(l) for l in range(5))
    assert ip.generic_sigma(0, 4, 9, 13) == want
    assert ip.generic_sigma(0, 4, 1, 1) == ip.sigma(0, 4)


def test_b_grad():
    base = ip.b_grad_of(8, 100.0, 1e5)
    assert ip.b_grad_of(8, 200.0, 1e5) == base + 1
    with pytest.raises(InvalidInput):
        ip.b_grad_of(1, 1e-6, 1.0)


def test_p_eq_factor_bound():
    p = ip.p_eq(EC, 5, 7, 8, 1.0)
    raw = (equal_superposition_success(ip.sigma(0, 5), 7)
           * equal_superposition_success(46 + 92, 7) * equal_superposition_success(46, 7) ** 2)
    assert raw / p <= 1 + 2.0 ** -17 + 1e-15
    cfg = ip.InteractionConfig(5, 10, 14, 30)
    lam = ip.lambdas(EC, cfg)
    assert lam.P_eq < lam.p_nu_amp


@settings(max_examples=100, deadline=None)
@given(eta=st.integers(2, 300), lz=st.integers(0, 300), logn=st.integers(3, 27),
       n_M=st.integers(1, 40), n_R=st.integers(1, 60), b_r=st.integers(3, 10),
       K=st.integers(2, 16), n_t=st.integers(1, 30), b_grad=st.integers(2, 40))
def test_step_cost_matches_brace(eta, lz, logn, n_M, n_R, b_r, K, n_t, b_grad):
    species = (NuclearSpecies(1, lz),) if lz else ()
    s = System(eta, species, 100.0, 2 ** logn)
    g = derive(s)
    cfg = ip.InteractionConfig(K, n_t, n_M, n_R, 8, b_r)
    got = sum(v for _, v in ip.step_cost(s, cfg, b_grad))
    want = oracles.interaction_brace(g.n_p, g.n_eta, g.n_etazeta, eta, lz, n_M, n_R, b_r, K, n_t, b_grad)
    assert got == want


def test_nu_prep_always_amplified():
    s = System(46, (NuclearSpecies(1, 46),), 1e5, 2 ** 12)
    items = dict(ip.step_cost(s, ip.InteractionConfig(2, 10, 12, 20), 10))
    n_p = 6
    assert items["K block encodings of U + V with kinetic updates"] >= 2 * 3 * (3 * n_p ** 2 + 15 * n_p - 7
                                                                             + 4 * 12 * (n_p + 1))


def test_sort_term():
    s = System(46, (NuclearSpecies(1, 46),), 1e5, 2 ** 12)
    items = dict(ip.step_cost(s, ip.InteractionConfig(16, 12, 12, 20), 10))
    assert items["sort of K times and inverse"] == 2880


def test_eps_K():
    assert ip.eps_K(1.0, 5) == pytest.approx(math.e - sum(1 / math.factorial(k) for k in range(6)), rel=1e-12)
    assert round(ip.eps_K(1.0, 5), 7) == pytest.approx(1.6152e-3, abs=1e-6)
    assert ip.eps_K(1.0, 16) < ip.eps_K(1.0, 15) < ip.eps_K(1.0, 2)


@given(n=st.integers(1, 50))
def test_eps_t_decreasing(n):
    assert 0 < ip.eps_t(3.0, 2.0, n + 1) < ip.eps_t(3.0, 2.0, n)


def test_eps_t_asymptotic_ratio():
    lt, luv = 5.0, 2.0
    ratios = [ip.eps_t(lt, luv, n) / ((2 * lt + lt ** 2 / luv) * 2.0 ** (-2 * n) / 6) for n in (4, 10, 20, 40)]
    assert all(abs(r - 1) < 2.0 ** -n for r, n in zip(ratios, (2, 8, 18, 38)))
    assert abs(ratios[-1] - 1) < 1e-11


def test_time_bracket_direct_formula():
    for n in (1, 2, 3, 5):
        h = 2.0 ** -n
        direct = 2 ** n * (math.exp(h) - 1) - (1 + h / 2)
        assert ip.time_bracket(n) == pytest.approx(direct, rel=1e-9)


def test_reps_halve():
    assert abs(2 * ip.reps_for(12345.6, 2e-3) - ip.reps_for(12345.6, 1e-3)) <= 2
    with pytest.raises(InvalidInput):
        ip.reps_for(1.0, 0.0)


def test_total_cost_and_ledger():
    cfg = ip.InteractionConfig(11, 13, 30, 37, 6)
    rep = ip.total_cost(EC, cfg)
    assert rep.budget.satisfied()
    assert rep.total_toffolis == rep.steps * rep.per_step_total
    assert rep.logical_qubits == sum(v for _, v in rep.qubit_ledger)
    led = dict(rep.qubit_ledger)
    g = derive(EC)
    assert led["K time registers"] == 11 * 13
    assert led["kinetic energy register"] == g.n_eta + 2 * g.n_p
    assert ip.REPS_NOTE in rep.notes


def test_infeasible_budget():
    with pytest.raises(Infeasible):
        ip.total_cost(EC, ip.InteractionConfig(2, 13, 30, 37, 6))


def test_optimize_feasible_and_minimal():
    s = System(20, (NuclearSpecies(2, 10),), 2000.0, 2 ** 12)
    cfg, rep = ip.optimize(s)
    assert rep.budget.satisfied()
    assert 3 <= cfg.K <= 10
    for dK in (-1, 1):
        try:
            other = ip.total_cost(s, ip.InteractionConfig(cfg.K + dK, cfg.n_t, cfg.n_M, cfg.n_R, cfg.b_T, cfg.b_r))
        except (Infeasible, Unsupported):
            continue
        assert other.total_toffolis >= rep.total_toffolis


def test_generic_cost_matches_oracle():
    spec = ip.GenericIPSpec(lambda_B=13.0, t=9.0 * 7 / 13 / 1.0, c=9, d=13, K=5, n_t=10, n_theta=20,
                            b_r=8, n_B=30)
    spec = spec.with_reps(7)
    out = ip.generic_cost(spec)
    assert out.toffolis == oracles.generic_toffolis(7, 5, 10, 20, 8, 30, 9, 13)
    assert out.controlled_expA_calls == 3 * (7 * 6 * 10 + 2)
    assert out.prep_B_calls == 6 * 7 * 5 and out.sel_B_calls == 3 * 7 * 5
    assert out.amplitude_ratio >= 0.5


def test_generic_linear_in_reps():
    base = ip.GenericIPSpec(1.0, 9 / 13, 9, 13, 6, 12, 24, 8, 40)
    one = ip.generic_cost(base).toffolis
    for r in (2, 5, 17):
        assert ip.generic_cost(base.with_reps(r)).toffolis == r * one


def test_generic_constraints():
    bad = ip.GenericIPSpec(1.0, 2.0, 2, 1, 4, 10, 20, 8, 10)
    with pytest.raises(Infeasible, match="amplitude"):
        ip.generic_cost(bad)
    tight = ip.GenericIPSpec(1.0, 9 / 13, 9, 13, 3, 10, 20, 8, 10, eps=1e-12)
    with pytest.raises(Infeasible, match="error"):
        ip.generic_cost(tight)
    with pytest.raises(InvalidInput):
        ip.GenericIPSpec(1.0, 1.0, 9, 13, 4, 10, 20, 8, 10)
    with pytest.raises(InvalidInput):
        ip.GenericIPSpec(1.0, 1.0, 2, 4, 4, 10, 20, 8, 10)


def test_generic_eps_theta_halves():
    a = ip.generic_cost(ip.GenericIPSpec(1.0, 9 / 13, 9, 13, 4, 10, 20, 8, 10)).eps_theta
    b = ip.generic_cost(ip.GenericIPSpec(1.0, 9 / 13, 9, 13, 4, 10, 21, 8, 10)).eps_theta
    assert a == 2 * b


def test_crossover_probes_signs():
    from fqestimate.cli import toffoli_ratio
    assert toffoli_ratio(20, 1e-3, 2 ** 18) < 1
    assert toffoli_ratio(100, 1e-2, 2 ** 18) > 1
