"""Qubitization cost model: lambdas, per-step Toffolis, error budget,
phase-estimation step count, logical-qubit ledger and parameter search.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache

from . import momentum_state as ms
from .arithmetic_costs import ceil_log2, equal_superposition_success, qrom_erase_cost
from .errors import Infeasible, InvalidInput
from .scenario import DerivedGeometry, System, derive

EXCLUDED_TERM_NOTE = "O(log 1/eps) phase-estimation control preparation excluded (no constant available)"


# lattice quantities are pure functions of small integers, so cache them
@lru_cache(maxsize=None)
def lattice_lambda_nu(n_p: int) -> float:
    return ms.lambda_nu(ms.MomentumBox(n_p))


@lru_cache(maxsize=None)
def lattice_inv_norm_sum(n_p: int) -> float:
    return ms.inv_norm_sum(ms.MomentumBox(n_p))


@lru_cache(maxsize=None)
def lattice_ceiling_sum(n_p: int, n_M: int) -> float:
    return ms.ceiling_sum(ms.MomentumBox(n_p), n_M)


@lru_cache(maxsize=None)
def lattice_tuned_alpha(n_p: int, n_M: int) -> float:
    return ms.tune_alpha(ms.MomentumBox(n_p), n_M)


@lru_cache(maxsize=None)
def lattice_abs_deviation(n_p: int, n_M: int, alpha: float) -> float:
    return ms.abs_deviation_sum(ms.MomentumBox(n_p), ms.NuPreparationSpec(n_M, alpha))


def p_nu(n_p: int, n_M: int) -> float:
    # p_suc = lambda_nu^1 / 2^(n_p+6) exactly (both are the same ceiling sum)
    return lattice_ceiling_sum(n_p, n_M) / 2.0 ** (n_p + 6)


@dataclass(frozen=True)
class QubitizationConfig:
    n_M: int
    n_R: int
    n_T: int
    b_r: int = 7
    amplitude_amplification: bool = True
    # eps_M from the exact sum with tuned alpha instead of the closed-form bound
    refined: bool = False
    # use the sharper phasing count for exp(-i k.R) instead of 6 n_p n_R
    refined_phasing: bool = False

    def __post_init__(self):
        for k in ("n_M", "n_R", "n_T", "b_r"):
            if getattr(self, k) < 1:
                raise InvalidInput(f"{k} must be >= 1, got {getattr(self, k)}")

    @property
    def A_amp(self) -> int:
        return 3 if self.amplitude_amplification else 1


@dataclass(frozen=True)
class LambdaSet:
    lambda_T: float
    lambda_T_prime: float
    lambda_U: float
    lambda_V: float
    lambda_U_1: float
    lambda_V_1: float
    lambda_nu: float
    lambda_nu_1: float
    p_nu: float
    p_nu_used: float
    P_eq: float
    lambda_effective: float


@dataclass(frozen=True)
class ErrorBudget:
    eps_total: float
    eps_pha: float
    eps_M: float = 0.0
    eps_R: float = 0.0
    eps_T: float = 0.0
    eps_K: float = 0.0
    eps_t: float = 0.0

    @property
    def eps_other(self) -> float:
        return self.eps_M + self.eps_R + self.eps_T + self.eps_K + self.eps_t

    def satisfied(self, slack: float = 1e-12) -> bool:
        return self.eps_pha ** 2 + self.eps_other ** 2 <= self.eps_total ** 2 * (1 + slack)


@dataclass(frozen=True)
class CostReport:
    algorithm: str
    steps: int
    per_step_breakdown: tuple[tuple[str, int], ...]
    per_step_total: int
    total_toffolis: int
    logical_qubits: int
    qubit_ledger: tuple[tuple[str, int], ...]
    config: object
    lambdas: object
    budget: ErrorBudget
    valid: bool = True
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "steps": self.steps,
            "per_step_total": self.per_step_total,
            "total_toffolis": self.total_toffolis,
            "logical_qubits": self.logical_qubits,
            "valid": self.valid,
            "config": asdict(self.config),
            "lambdas": asdict(self.lambdas),
            "budget": asdict(self.budget),
            "per_step_breakdown": [list(x) for x in self.per_step_breakdown],
            "qubit_ledger": [list(x) for x in self.qubit_ledger],
            "notes": list(self.notes),
        }


def _check_eta(system: System) -> None:
    if system.eta < 2:
        raise InvalidInput("eta = 1 makes the V-channel factor 1/(1 - 1/eta) singular")


def p_eq(system: System, b_r: int) -> float:
    """Joint success of the w, U/V-selection and i, j equal superpositions."""
    lz = system.lambda_zeta
    return (equal_superposition_success(3, 8)
            * equal_superposition_success(system.eta + 2 * lz, b_r)
            * equal_superposition_success(system.eta, b_r) ** 2)


def effective_lambda(lam_T_prime: float, lam_U_1: float, lam_V_1: float, eta: int,
                     p: float, peq: float) -> float:
    if eta < 2:
        raise InvalidInput("eta = 1 makes the V-channel factor singular")
    if not 0 < p <= 1:
        raise InvalidInput(f"success probability must be in (0, 1], got {p}")
    first = lam_T_prime + lam_U_1 + lam_V_1
    second = (lam_U_1 + lam_V_1 / (1.0 - 1.0 / eta)) / p
    return max(first, second) / peq


def lambdas(system: System, n_M: int, b_r: int = 7, amplified: bool = True,
            geom: DerivedGeometry | None = None) -> LambdaSet:
    _check_eta(system)
    g = geom or derive(system)
    eta, lz, om = system.eta, g.lambda_zeta, system.omega
    n_p = g.n_p
    lnu = lattice_lambda_nu(n_p)
    lnu1 = lattice_ceiling_sum(n_p, n_M)
    lam_T = 6 * eta * math.pi ** 2 * (2 ** (n_p - 1) - 1) ** 2 / om ** (2 / 3)
    lam_Tp = 6 * eta * math.pi ** 2 * 2 ** (2 * (n_p - 1)) / om ** (2 / 3)
    lam_U = eta * lz * lnu / (math.pi * om ** (1 / 3))
    lam_V = eta * (eta - 1) * lnu / (2 * math.pi * om ** (1 / 3))
    pn = p_nu(n_p, n_M)
    used = ms.amplify(pn) if amplified else pn
    peq = p_eq(system, b_r)
    scale = lnu1 / lnu
    lam = effective_lambda(lam_Tp, lam_U * scale, lam_V * scale, eta, used, peq)
    return LambdaSet(lam_T, lam_Tp, lam_U, lam_V, lam_U * scale, lam_V * scale,
                     lnu, lnu1, pn, used, peq, lam)


def phasing_cost(n_p: int, n_R: int, refined: bool = False) -> int:
    """Toffolis for the phase exp(-i k_nu . R_l)."""
    if not refined:
        return 6 * n_p * n_R
    if n_R > n_p:
        return 3 * (2 * n_p * n_R - n_p * (n_p + 1) - 1)
    return 3 * n_R * (n_R - 1)


def step_cost(system: System, config: QubitizationConfig,
              geom: DerivedGeometry | None = None) -> list[tuple[str, int]]:
    """Labelled Toffoli terms of one qubitization step (block encoding plus reflection)."""
    g = geom or derive(system)
    n_p, n_eta, n_ez, lz = g.n_p, g.n_eta, g.n_etazeta, g.lambda_zeta
    c = config
    return [
        ("T/UV select rotation and U/V equal superposition (x2)", 2 * (c.n_T + 4 * n_ez + 2 * c.b_r - 12)),
        ("i, j superpositions with i != j test", 14 * n_eta + 8 * c.b_r - 36),
        ("nu amplitude preparation and inverse", c.A_amp * (3 * n_p ** 2 + 15 * n_p - 7 + 4 * c.n_M * (n_p + 1))),
        ("nuclear-position QROM and erasure", lz + qrom_erase_cost(lz) if lz > 0 else 0),
        ("w, r, s superpositions for T", 2 * (2 * n_p + 2 * c.b_r - 7)),
        ("controlled momentum swaps", 12 * system.eta * n_p),
        ("T block encoding", 5 * (n_p - 1) + 2),
        ("nu add/subtract into momenta", 24 * n_p),
        ("phase exp(-i k.R)", phasing_cost(n_p, c.n_R, c.refined_phasing)),
        ("sign conversions and controls", 18),
        ("reflection", n_ez + 2 * n_eta + 6 * n_p + c.n_M + 16),
    ]


def eps_R(system: System, n_R: int, geom: DerivedGeometry | None = None) -> float:
    g = geom or derive(system)
    if g.lambda_zeta == 0:
        return 0.0
    return (system.eta * g.lambda_zeta * lattice_inv_norm_sum(g.n_p)
            / (2 ** n_R * system.omega ** (1 / 3)))


def eps_M(system: System, n_M: int, refined: bool = False,
          geom: DerivedGeometry | None = None) -> float:
    g = geom or derive(system)
    box = ms.MomentumBox(g.n_p)
    if not refined:
        return ms.eps_M_bound(box, n_M, system.eta, g.lambda_zeta, system.omega)
    alpha = lattice_tuned_alpha(g.n_p, n_M)
    pref = system.eta * (system.eta - 1 + 2 * g.lambda_zeta) / (2 * math.pi * system.omega ** (1 / 3))
    return pref * lattice_abs_deviation(g.n_p, n_M, alpha)


def refined_n_T(n_M: int) -> int:
    # alpha in [1 - 3/(2M), 1 - 1/M] needs roughly n_M + 4..8 rotation bits
    return n_M + 8


def error_terms(system: System, config: QubitizationConfig, lambda_effective: float,
                eps: float | None = None, geom: DerivedGeometry | None = None) -> ErrorBudget:
    g = geom or derive(system)
    eps = system.eps if eps is None else eps
    e_M = eps_M(system, config.n_M, config.refined, g)
    e_R = eps_R(system, config.n_R, g)
    e_T = 0.0 if config.refined else math.pi * lambda_effective / 2 ** config.n_T
    other = e_M + e_R + e_T
    if other >= eps:
        raise Infeasible(f"eps_M + eps_R + eps_T = {other:.6g} >= eps = {eps:.6g}")
    return ErrorBudget(eps, math.sqrt(eps ** 2 - other ** 2), e_M, e_R, e_T)


def qubit_count(system: System, config: QubitizationConfig, steps: int,
                geom: DerivedGeometry | None = None) -> tuple[int, list[tuple[str, int]]]:
    g = geom or derive(system)
    n_p, n_eta, n_ez = g.n_p, g.n_eta, g.n_etazeta
    c = config
    nu_prep = (3 * (n_p + 1) + n_p + c.n_M + (3 * n_p + 2) + (2 * n_p + 1)
               + (3 * n_p ** 2 + n_p + 1 + 4 * c.n_M * (n_p + 1)) + 1 + 2)
    ledger = [
        ("system momenta", 3 * system.eta * n_p),
        ("phase-estimation control and temporaries", 2 * ceil_log2(steps) - 1),
        ("phase gradient", max(c.n_R + 1, c.n_T)),
        ("T state", 1),
        ("T vs U+V rotated qubit", 1),
        ("U/V equal superposition", n_ez + 3),
        ("T, U, V select flags", 3),
        ("i, j superpositions", 2 * n_eta + 5),
        ("nu preparation", nu_prep),
        ("w superposition", 4),
        ("r, s registers", 2 * n_p),
        ("max(arithmetic temporaries, R output + phasing temporaries)",
         max(5 * n_p + 1, 3 * c.n_R + 2 * (c.n_R - 2))),
        ("overflow", 6),
        ("add/subtract control", 1),
    ]
    return sum(v for _, v in ledger), ledger


def steps_for(lambda_effective: float, eps_pha: float) -> int:
    return math.ceil(math.pi * lambda_effective / (2 * eps_pha))


def total_cost(system: System, config: QubitizationConfig, eps: float | None = None) -> CostReport:
    g = derive(system)
    if config.refined and config.n_T != refined_n_T(config.n_M):
        config = replace(config, n_T=refined_n_T(config.n_M))
    lam = lambdas(system, config.n_M, config.b_r, config.amplitude_amplification, g)
    budget = error_terms(system, config, lam.lambda_effective, eps, g)
    steps = steps_for(lam.lambda_effective, budget.eps_pha)
    items = step_cost(system, config, g)
    per_step = sum(v for _, v in items)
    qubits, ledger = qubit_count(system, config, steps, g)
    notes = [EXCLUDED_TERM_NOTE, *g.warnings]
    if g.lambda_zeta == 0:
        notes.append("no nuclei: U channel, nuclear QROM and eps_R vanish")
    return CostReport("qubitization", steps, tuple(items), per_step, steps * per_step,
                      qubits, tuple(ledger), config, lam, budget,
                      valid=all(v >= 0 for _, v in items), notes=tuple(notes))


# parameter search ---------------------------------------------------------

def seed_config(system: System, eps: float | None = None, b_r: int = 7,
                amplified: bool = True, share: float = 0.1) -> QubitizationConfig:
    """Smallest n_M, n_R, n_T meeting eps_M, eps_R, eps_T <= share * eps."""
    g = derive(system)
    eps = system.eps if eps is None else eps
    target = share * eps
    box = ms.MomentumBox(g.n_p)
    m1 = ms.eps_M_bound(box, 0, system.eta, g.lambda_zeta, system.omega)
    n_M = max(1, math.ceil(math.log2(m1 / target))) if m1 > 0 else 1
    r1 = eps_R(system, 0, g)
    n_R = max(1, math.ceil(math.log2(r1 / target))) if r1 > 0 else 1
    lam = lambdas(system, n_M, b_r, amplified, g).lambda_effective
    n_T = max(1, math.ceil(math.log2(math.pi * lam / target)))
    return QubitizationConfig(n_M, n_R, n_T, b_r, amplified)


def _grid(seed: int, width: int, floor: int = 1) -> list[int]:
    return [v for v in range(seed - width, seed + width + 1) if v >= floor]


def optimize(system: System, eps: float | None = None, fixed: dict | None = None,
             width: int = 4, b_r_values=(6, 7, 8), amp_values=(False, True),
             refined: bool = False) -> tuple[QubitizationConfig, CostReport]:
    """Minimum-Toffoli config within +-width bits of the eps/10 seed.

    ``fixed`` pins any config field.  Ties break on the config tuple.
    """
    fixed = dict(fixed or {})
    eps = system.eps if eps is None else eps
    g = derive(system)
    b_rs = [fixed["b_r"]] if "b_r" in fixed else list(b_r_values)
    amps = [bool(fixed["amplitude_amplification"])] if "amplitude_amplification" in fixed else list(amp_values)
    refined = bool(fixed.get("refined", refined))
    refined_phasing = bool(fixed.get("refined_phasing", False))

    seed = seed_config(system, eps, 7, True)
    nMs = [fixed["n_M"]] if "n_M" in fixed else _grid(seed.n_M, width)
    nRs = [fixed["n_R"]] if "n_R" in fixed else ([1] if g.lambda_zeta == 0 else _grid(seed.n_R, width))
    if "n_T" in fixed:
        nTs = [fixed["n_T"]]
    else:
        nTs = _grid(seed.n_T, width)

    best = None
    for b_r, amp, n_M in itertools.product(b_rs, amps, nMs):
        try:
            lam = lambdas(system, n_M, b_r, amp, g)
        except InvalidInput:
            continue
        e_M = eps_M(system, n_M, refined, g)
        if e_M >= eps:
            continue
        for n_R in nRs:
            e_R = eps_R(system, n_R, g)
            t_list = [refined_n_T(n_M)] if refined else nTs
            for n_T in t_list:
                e_T = 0.0 if refined else math.pi * lam.lambda_effective / 2 ** n_T
                other = e_M + e_R + e_T
                if other >= eps:
                    continue
                cfg = QubitizationConfig(n_M, n_R, n_T, b_r, amp, refined, refined_phasing)
                steps = steps_for(lam.lambda_effective, math.sqrt(eps ** 2 - other ** 2))
                per_step = sum(v for _, v in step_cost(system, cfg, g))
                key = (steps * per_step, b_r, int(amp), n_M, n_R, n_T)
                if best is None or key < best[0]:
                    best = (key, cfg)
    if best is None:
        raise Infeasible(f"no feasible qubitization parameters for eps={eps:g} around seed {seed}")
    cfg = best[1]
    return cfg, total_cost(system, cfg, eps)
