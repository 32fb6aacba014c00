"""Interaction-picture (truncated Dyson series) cost model.

The kinetic term is handled by phasing with a time register, so each step
block-encodes U + V a total of K times.  Also holds the generic
simulation cost for H = A + B with a block-encoded B.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from functools import lru_cache

from . import momentum_state as ms
from . import qubitization as qb
from .arithmetic_costs import (ceil_log2, equal_superposition_success, qrom_erase_cost,
                               sort_comparator_count)
from .errors import Infeasible, InvalidInput, Unsupported
from .qubitization import CostReport, ErrorBudget, EXCLUDED_TERM_NOTE
from .scenario import DerivedGeometry, System, derive

K_MAX = 16
REPS_NOTE = "O((lambda dE)^2) and O(1) corrections to the repetition count set to zero"
EPS_R_NOTE = "eps_R uses Omega^(1/3) for both algorithms"


@lru_cache(maxsize=None)
def _sigma_table(K: int, c: int = 1, d: int = 1) -> tuple[int, ...]:
    if not 0 <= K <= K_MAX:
        raise Unsupported(f"K={K} outside 0..{K_MAX}")
    fk = math.factorial(K)
    terms = [fk * c ** l * d ** (K - l) // math.factorial(l) for l in range(K + 1)]
    out = [0] * (K + 2)
    for k in range(K, -1, -1):
        out[k] = out[k + 1] + terms[k]
    return tuple(out[:K + 1])


def sigma(k: int, K: int) -> int:
    """Sum over l = k..K of K!/l!, as an exact integer."""
    if not 0 <= k <= K:
        raise InvalidInput(f"need 0 <= k <= K, got k={k}, K={K}")
    return _sigma_table(K)[k]


def generic_sigma(k: int, K: int, c: int, d: int) -> int:
    """Sum over l = k..K of K! c^l d^(K-l) / l!."""
    if not 0 <= k <= K:
        raise InvalidInput(f"need 0 <= k <= K, got k={k}, K={K}")
    return _sigma_table(K, c, d)[k]


@dataclass(frozen=True)
class DysonSeriesSpec:
    K: int

    def __post_init__(self):
        if not 1 <= self.K <= K_MAX:
            raise Unsupported(f"K={self.K} outside 1..{K_MAX}")

    def sigma(self, k: int) -> int:
        return sigma(k, self.K)

    @property
    def n_k(self) -> int:
        return ceil_log2(sigma(0, self.K))

    @property
    def log_sigma_sum(self) -> int:
        """sum over k = 2..K-1 of ceil(log2 Sigma(k))."""
        return sum(ceil_log2(sigma(k, self.K)) for k in range(2, self.K))


@dataclass(frozen=True)
class InteractionConfig:
    K: int
    n_t: int
    n_M: int
    n_R: int
    b_T: int = 8
    b_r: int = 7

    def __post_init__(self):
        if not 2 <= self.K <= K_MAX:
            raise Unsupported(f"K={self.K} outside the sort table range 2..{K_MAX}")
        for k in ("n_t", "n_M", "n_R", "b_T", "b_r"):
            if getattr(self, k) < 1:
                raise InvalidInput(f"{k} must be >= 1, got {getattr(self, k)}")


@dataclass(frozen=True)
class InteractionLambdas:
    lambda_T: float
    lambda_U: float
    lambda_V: float
    lambda_U_1: float
    lambda_V_1: float
    lambda_nu: float
    lambda_nu_1: float
    p_nu: float
    p_nu_amp: float
    P_eq: float
    b_grad: int
    # numerator of the repetition count before dividing by 2 eps_pha
    lambda_effective: float


def b_grad_of(b_T: int, lambda_UV: float, omega: float) -> int:
    if not lambda_UV > 0 or not omega > 0:
        raise InvalidInput("b_grad needs lambda_U + lambda_V > 0 and omega > 0")
    val = b_T - math.ceil(math.log2(math.pi / (lambda_UV * omega ** (2 / 3))))
    if val < 2:
        raise InvalidInput(f"b_grad = {val} < 2; increase b_T")
    return val


def _base_lambdas(system: System, n_M: int, g: DerivedGeometry):
    eta, lz, om, n_p = system.eta, g.lambda_zeta, system.omega, g.n_p
    lnu = qb.lattice_lambda_nu(n_p)
    lnu1 = qb.lattice_ceiling_sum(n_p, n_M)
    lam_T = 6 * eta * math.pi ** 2 * (2 ** (n_p - 1) - 1) ** 2 / om ** (2 / 3)
    lam_U = eta * lz * lnu / (math.pi * om ** (1 / 3))
    lam_V = eta * (eta - 1) * lnu / (2 * math.pi * om ** (1 / 3))
    return lam_T, lam_U, lam_V, lnu, lnu1


def p_eq(system: System, K: int, b_r: int, b_T: int, p_amp: float) -> float:
    lz = system.lambda_zeta
    return (p_amp * equal_superposition_success(sigma(0, K), b_r)
            * equal_superposition_success(system.eta + 2 * lz, b_r)
            * equal_superposition_success(system.eta, b_r) ** 2
            / (1.0 + 2.0 ** -(2 * b_T + 1)))


def lambdas(system: System, config: InteractionConfig,
            geom: DerivedGeometry | None = None) -> InteractionLambdas:
    qb._check_eta(system)
    g = geom or derive(system)
    lam_T, lam_U, lam_V, lnu, lnu1 = _base_lambdas(system, config.n_M, g)
    scale = lnu1 / lnu
    pn = qb.p_nu(g.n_p, config.n_M)
    pa = ms.amplify(pn)
    peq = p_eq(system, config.K, config.b_r, config.b_T, pa)
    bg = b_grad_of(config.b_T, lam_U + lam_V, system.omega)
    eff = math.e * (lam_U * scale + lam_V * scale / (1 - 1 / system.eta)) / peq
    return InteractionLambdas(lam_T, lam_U, lam_V, lam_U * scale, lam_V * scale, lnu, lnu1,
                              pn, pa, peq, bg, eff)


def step_cost(system: System, config: InteractionConfig, b_grad: int,
              geom: DerivedGeometry | None = None) -> list[tuple[str, int]]:
    """Labelled Toffoli terms of one step (Dyson series block encoding plus reflection)."""
    g = geom or derive(system)
    n_p, n_eta, n_ez, lz, eta = g.n_p, g.n_eta, g.n_etazeta, g.lambda_zeta, system.eta
    c = config
    K, n_t, b_r = c.K, c.n_t, c.b_r
    ds = DysonSeriesSpec(K)
    n_k = ds.n_k
    srt = sort_comparator_count(K)
    uv_block = (10 + 2 * (4 * n_ez + 2 * b_r - 9) + (14 * n_eta + 8 * b_r - 36)
                + 3 * (3 * n_p ** 2 + 15 * n_p - 7 + 4 * c.n_M * (n_p + 1))
                + (lz + qrom_erase_cost(lz) if lz > 0 else 0)
                + (12 * eta * n_p + 4 * eta - 4) + 24 * n_p + 6 * n_p * c.n_R
                + (12 * n_p ** 2 + 2 * n_p + 8 * n_eta))
    return [
        ("k superposition and inverse", 2 * (3 * n_k + 2 * b_r - 9)),
        ("k unary inequality tests", n_k + ds.log_sigma_sum),
        ("time superpositions by controlled Hadamards", 2 * K * n_t),
        ("sort of K times and inverse", 4 * n_t * srt),
        ("time differences", 2 * (K - 1) * (n_t - 1)),
        ("kinetic phasing", (K + 1) * (2 * n_t * (n_eta + 2 * n_p) - n_t + b_grad - 2)
         + 2 * (b_grad - 2)),
        ("K block encodings of U + V with kinetic updates", K * uv_block),
        ("zero checks and reflection",
         K * (n_ez + 2 * n_eta + 2 + 4 * n_p + c.n_M + n_t + 12) + n_k + 3),
    ]


def eps_K(lambda_UV: float, K: int) -> float:
    # e - sum_{k<=K} 1/k! as the tail sum, to avoid cancellation
    tail, term, k = 0.0, 1.0 / math.factorial(K + 1), K + 1
    while term > 1e-30 * max(tail, 1e-300):
        tail += term
        k += 1
        term /= k
    return lambda_UV * tail


def time_bracket(n_t: int) -> float:
    """2^n(e^(2^-n) - 1) - (1 + 2^-(n+1)) evaluated as sum_{j>=3} h^(j-1)/j!."""
    h = 2.0 ** -n_t
    total, term, j = 0.0, h * h / 6.0, 3
    while term > 1e-30 * max(total, 1e-300):
        total += term
        j += 1
        term *= h / j
    return total


def eps_t(lambda_T: float, lambda_UV: float, n_t: int) -> float:
    return (2 * lambda_T + lambda_T ** 2 / lambda_UV) * time_bracket(n_t)


def error_terms(system: System, config: InteractionConfig, eps: float | None = None,
                geom: DerivedGeometry | None = None) -> ErrorBudget:
    g = geom or derive(system)
    eps = system.eps if eps is None else eps
    lam_T, lam_U, lam_V, _, _ = _base_lambdas(system, config.n_M, g)
    luv = lam_U + lam_V
    e_K = eps_K(luv, config.K)
    e_M = qb.eps_M(system, config.n_M, False, g)
    e_R = qb.eps_R(system, config.n_R, g)
    e_t = eps_t(lam_T, luv, config.n_t)
    other = e_K + e_M + e_R + e_t
    if other >= eps:
        raise Infeasible(f"eps_K + eps_M + eps_R + eps_t = {other:.6g} >= eps = {eps:.6g}")
    return ErrorBudget(eps, math.sqrt(eps ** 2 - other ** 2), e_M, e_R, 0.0, e_K, e_t)


def reps_for(lambda_effective: float, eps_pha: float) -> int:
    if not eps_pha > 0:
        raise InvalidInput("eps_pha must be positive")
    return math.ceil(math.pi * lambda_effective / (2 * eps_pha))


def qubit_count(system: System, config: InteractionConfig, reps: int, b_grad: int,
                geom: DerivedGeometry | None = None) -> tuple[int, list[tuple[str, int]]]:
    g = geom or derive(system)
    n_p, n_eta, n_ez = g.n_p, g.n_eta, g.n_etazeta
    c = config
    ds = DysonSeriesSpec(c.K)
    n_k = ds.n_k
    nu_temp = ((3 * n_p + 2) + (2 * n_p + 1) + (3 * n_p ** 2 + n_p + 1 + 4 * c.n_M * (n_p + 1))
               + 1 + 2)
    t_main = max(2 * n_p ** 2 + 5 * n_p + n_eta, 2 * (c.n_R - 2)) + nu_temp + 3 + 2
    t_phase = 2 * c.n_t * (n_eta + 2 * n_p) + c.n_t + b_grad - 4
    t_check = (n_ez + 2 * n_eta + 4 * n_p + c.n_M + 12) - 1
    ledger = [
        ("k equal superposition", n_k + 2),
        ("k unary output and kept inequality ancillae", n_k + 1 + ds.log_sigma_sum),
        ("K time registers", c.K * c.n_t),
        ("sort comparator outputs", sort_comparator_count(c.K)),
        ("kinetic energy register", n_eta + 2 * n_p),
        ("kinetic phase gradient", b_grad),
        ("block-encoding success flags", c.K - 1),
        ("forward/reverse time control", 1),
        ("system momenta", 3 * system.eta * n_p),
        ("phase-estimation control and temporaries", 2 * ceil_log2(reps) - 1),
        ("phase gradient", c.n_R + 1),
        ("T state", 1),
        ("U/V equal superposition (kept)", n_ez + 1),
        ("i, j superpositions (kept)", 2 * (n_eta + 1)),
        ("nu, mu and M registers", 3 * (n_p + 1) + n_p + c.n_M),
        ("nuclear position output", 3 * c.n_R),
        ("overflow", 6),
        ("max(SEL/kinetic temporaries, kinetic phasing, zero check)",
         max(t_main, t_phase, t_check)),
    ]
    return sum(v for _, v in ledger), ledger


def total_cost(system: System, config: InteractionConfig, eps: float | None = None) -> CostReport:
    g = derive(system)
    lam = lambdas(system, config, g)
    budget = error_terms(system, config, eps, g)
    reps = reps_for(lam.lambda_effective, budget.eps_pha)
    items = step_cost(system, config, lam.b_grad, g)
    per_step = sum(v for _, v in items)
    qubits, ledger = qubit_count(system, config, reps, lam.b_grad, g)
    notes = [EXCLUDED_TERM_NOTE, REPS_NOTE, EPS_R_NOTE, *g.warnings]
    if g.lambda_zeta == 0:
        notes.append("no nuclei: U channel, nuclear QROM and eps_R vanish")
    return CostReport("interaction", reps, tuple(items), per_step, reps * per_step,
                      qubits, tuple(ledger), config, lam, budget,
                      valid=all(v >= 0 for _, v in items), notes=tuple(notes))


# parameter search ---------------------------------------------------------

def seed_n_t(lambda_T: float, lambda_UV: float, target: float) -> int:
    """n_t with (2 lambda_T + lambda_T^2/lambda_UV) 2^(-2 n_t)/6 <= target."""
    coef = (2 * lambda_T + lambda_T ** 2 / lambda_UV) / 6.0
    return max(1, math.ceil(0.5 * math.log2(coef / target)))


def optimize(system: System, eps: float | None = None, fixed: dict | None = None,
             width: int = 3, b_r_values=(6, 7, 8), b_T_values=range(6, 11),
             K_values=range(2, K_MAX + 1)) -> tuple[InteractionConfig, CostReport]:
    """Minimum-Toffoli config over K, n_t, n_M, n_R, b_T and b_r.

    ``fixed`` pins any config field.  Ties break on the config tuple.
    """
    fixed = dict(fixed or {})
    eps = system.eps if eps is None else eps
    qb._check_eta(system)
    g = derive(system)
    n_p, eta = g.n_p, system.eta
    pick = lambda key, default: [fixed[key]] if key in fixed else list(default)

    seed = qb.seed_config(system, eps, 7, True)
    lam_T, lam_U, lam_V, _, _ = _base_lambdas(system, seed.n_M, g)
    luv = lam_U + lam_V
    Ks = pick("K", K_values)
    nts = pick("n_t", qb._grid(seed_n_t(lam_T, luv, 0.1 * eps), width))
    nMs = pick("n_M", qb._grid(seed.n_M, width))
    nRs = pick("n_R", [1] if g.lambda_zeta == 0 else qb._grid(seed.n_R, width))
    bTs = pick("b_T", b_T_values)
    brs = pick("b_r", b_r_values)

    e_t = {n_t: eps_t(lam_T, luv, n_t) for n_t in nts}
    e_R = {n_R: qb.eps_R(system, n_R, g) for n_R in nRs}
    best = None
    for K in Ks:
        e_K = eps_K(luv, K)
        if e_K >= eps:
            continue
        for b_r, n_M in itertools.product(brs, nMs):
            e_M = qb.eps_M(system, n_M, False, g)
            if e_K + e_M >= eps:
                continue
            scale = qb.lattice_ceiling_sum(n_p, n_M) / qb.lattice_lambda_nu(n_p)
            num = math.e * scale * (lam_U + lam_V / (1 - 1 / eta))
            pa = ms.amplify(qb.p_nu(n_p, n_M))
            for b_T in bTs:
                try:
                    bg = b_grad_of(b_T, luv, system.omega)
                except InvalidInput:
                    continue
                eff = num / p_eq(system, K, b_r, b_T, pa)
                for n_t, n_R in itertools.product(nts, nRs):
                    other = e_K + e_M + e_R[n_R] + e_t[n_t]
                    if other >= eps:
                        continue
                    cfg = InteractionConfig(K, n_t, n_M, n_R, b_T, b_r)
                    reps = reps_for(eff, math.sqrt(eps ** 2 - other ** 2))
                    total = reps * sum(v for _, v in step_cost(system, cfg, bg, g))
                    key = (total, K, n_t, n_M, n_R, b_T, b_r)
                    if best is None or key < best[0]:
                        best = (key, cfg)
    if best is None:
        raise Infeasible(f"no feasible interaction-picture parameters for eps={eps:g}")
    cfg = best[1]
    return cfg, total_cost(system, cfg, eps)


# generic cost model for H = A + B ---------------------------------------

@dataclass(frozen=True)
class GenericIPSpec:
    lambda_B: float
    t: float
    c: int
    d: int
    K: int
    n_t: int
    n_theta: int
    b_r: int
    n_B: int
    norm_A: float = 0.0
    eps: float | None = None

    def __post_init__(self):
        if self.c < 1 or self.d < 1 or math.gcd(self.c, self.d) != 1:
            raise InvalidInput(f"c, d must be coprime positive integers, got {self.c}, {self.d}")
        if not 2 <= self.K <= K_MAX:
            raise Unsupported(f"K={self.K} outside 2..{K_MAX}")
        for k in ("n_t", "n_theta", "b_r", "n_B"):
            if getattr(self, k) < 1:
                raise InvalidInput(f"{k} must be >= 1")
        if not self.lambda_B > 0 or not self.t > 0:
            raise InvalidInput("lambda_B and t must be positive")
        _ = self.reps

    @property
    def tau(self) -> float:
        return self.c / (self.d * self.lambda_B)

    @property
    def reps(self) -> int:
        r = self.lambda_B * self.t * self.d / self.c
        n = round(r)
        if n < 1 or abs(r - n) > 1e-9 * max(1.0, r):
            raise InvalidInput(f"reps = lambda_B t d / c = {r} is not a positive integer")
        return n

    def with_reps(self, reps: int) -> "GenericIPSpec":
        return replace(self, t=reps * self.c / (self.d * self.lambda_B))


@dataclass(frozen=True)
class GenericCost:
    toffolis: int
    controlled_expA_calls: int
    prep_B_calls: int
    sel_B_calls: int
    eps_K: float
    eps_theta: float
    eps_t: float
    error_bound: float
    amplitude_ratio: float


def generic_eps_K(c: int, d: int, K: int) -> float:
    x = c / d
    tail, term, k = 0.0, x ** (K + 1) / math.factorial(K + 1), K + 1
    while term > 1e-30 * max(tail, 1e-300):
        tail += term
        k += 1
        term *= x / k
    return tail


def generic_eps_t(spec: GenericIPSpec) -> float:
    x = spec.lambda_B * spec.tau
    h = x / 2 ** spec.n_t
    # 2^n (e^h - 1) - x (1 + h/2) = x * sum_{j>=3} h^(j-1)/j!
    total, term, j = 0.0, h * h / 6.0, 3
    while term > 1e-30 * max(total, 1e-300):
        total += term
        j += 1
        term *= h / j
    ratio = spec.norm_A / spec.lambda_B
    return (2 * ratio + ratio ** 2) * x * total


def generic_cost(spec: GenericIPSpec, check: bool = True) -> GenericCost:
    K, n_t, reps = spec.K, spec.n_t, spec.reps
    sig = _sigma_table(K, spec.c, spec.d)
    n_k = ceil_log2(sig[0])
    log_sum = sum(ceil_log2(sig[k]) for k in range(K))
    srt = sort_comparator_count(K)
    per_rep = (6 * (3 * n_k + 2 * spec.b_r - 9) + 3 * (-1 + log_sum) + 6 * K * n_t
               + 12 * (n_t - 1) * srt + 6 * (K - 1) * (n_t - 1) + 2 * (spec.n_theta - 3)
               + 2 * (n_k + K * (n_t + spec.n_B)))
    e_K = generic_eps_K(spec.c, spec.d, K)
    e_th = math.pi / 2 ** spec.n_theta
    e_t = generic_eps_t(spec)
    s = e_K + e_th
    bound = reps * s * (s * s + 3 * s + 4) / 2 + reps * e_t
    ratio = equal_superposition_success(sig[0], spec.b_r) / math.exp(spec.c / spec.d)
    if check:
        if ratio < 0.5:
            raise Infeasible(f"amplitude constraint violated: Eq/exp(c/d) = {ratio:.6g} < 1/2")
        if spec.eps is not None and bound > spec.eps:
            raise Infeasible(f"error constraint violated: bound {bound:.6g} > eps {spec.eps:.6g}")
    return GenericCost(reps * per_rep, 3 * (reps * (K + 1) * n_t + 2), 6 * reps * K,
                       3 * reps * K, e_K, e_th, e_t, bound, ratio)
