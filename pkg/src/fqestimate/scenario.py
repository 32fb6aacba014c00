"""System definitions, derived geometry and named presets.

Units are atomic: lengths in Bohr, volumes in Bohr^3, energies in Hartree.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .arithmetic_costs import ceil_log2
from .errors import InvalidInput

DEFAULT_EPS = 0.0016
DEFAULT_N = 2 ** 18


@dataclass(frozen=True)
class NuclearSpecies:
    zeta: int
    count: int

    def __post_init__(self):
        if self.zeta < 1 or self.count < 1:
            raise InvalidInput(f"species needs zeta >= 1 and count >= 1, got {self}")


@dataclass(frozen=True)
class System:
    eta: int
    species: tuple[NuclearSpecies, ...]
    omega: float
    n_requested: int
    eps: float = DEFAULT_EPS
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        if self.eta < 2:
            raise InvalidInput(f"eta must be >= 2 (single-electron systems are not modelled), got {self.eta}")
        if not self.omega > 0:
            raise InvalidInput(f"omega must be positive, got {self.omega}")
        if self.n_requested < 8:
            raise InvalidInput(f"need at least 8 plane waves, got {self.n_requested}")
        if not self.eps > 0:
            raise InvalidInput(f"target error must be positive, got {self.eps}")

    @property
    def lambda_zeta(self) -> int:
        return sum(s.zeta * s.count for s in self.species)

    @property
    def num_nuclei(self) -> int:
        return sum(s.count for s in self.species)

    @property
    def is_jellium(self) -> bool:
        return not self.species

    def replace(self, **kw) -> "System":
        d = dict(eta=self.eta, species=self.species, omega=self.omega,
                 n_requested=self.n_requested, eps=self.eps, name=self.name)
        d.update(kw)
        return System(**d)


@dataclass(frozen=True)
class DerivedGeometry:
    n_p: int
    n_eff_cuberoot: int
    n_eta: int
    n_etazeta: int
    lambda_zeta: int
    r_s: float
    delta: float
    n_s: int
    warnings: tuple[str, ...] = field(default=())


def cube_root(n: int) -> float:
    """Exact integer cube root when n is a perfect cube, else the real root."""
    r = round(n ** (1.0 / 3.0))
    for c in (r - 1, r, r + 1):
        if c ** 3 == n:
            return float(c)
    return n ** (1.0 / 3.0)


def n_p_for(n_requested: int) -> int:
    """Bits per signed momentum component: ceil(log2(N^(1/3) + 1))."""
    root = cube_root(n_requested)
    if root.is_integer():
        return ceil_log2(int(root) + 1)
    return math.ceil(math.log2(root + 1.0))


def wigner_seitz_radius(omega: float, eta: int) -> float:
    return (3.0 * omega / (4.0 * math.pi * eta)) ** (1.0 / 3.0)


def derive(system: System) -> DerivedGeometry:
    n_p = n_p_for(system.n_requested)
    lz = system.lambda_zeta
    notes = []
    if system.species and lz != system.eta:
        notes.append(f"not charge neutral: lambda_zeta={lz}, eta={system.eta}")
    return DerivedGeometry(
        n_p=n_p,
        n_eff_cuberoot=(1 << n_p) - 1,
        n_eta=ceil_log2(system.eta),
        n_etazeta=ceil_log2(system.eta + 2 * lz),
        lambda_zeta=lz,
        r_s=wigner_seitz_radius(system.omega, system.eta),
        delta=(system.omega / system.n_requested) ** (1.0 / 3.0),
        n_s=3 * system.eta * n_p,
        warnings=tuple(notes),
    )


def from_rs(eta: int, r_s: float, n_requested: int, eps: float = DEFAULT_EPS,
            species=(), name: str = "") -> System:
    """System whose cell volume gives Wigner-Seitz radius r_s."""
    if not r_s > 0:
        raise InvalidInput(f"r_s must be positive, got {r_s}")
    omega = 4.0 * math.pi / 3.0 * r_s ** 3 * eta
    return System(eta, tuple(species), omega, n_requested, eps, name)


def from_delta(eta: int, delta: float, n_requested: int,
               eps: float = DEFAULT_EPS, species=(), name: str = "") -> System:
    """System with grid resolution delta = (omega/N)^(1/3), i.e. omega = N delta^3."""
    if not delta > 0:
        raise InvalidInput(f"delta must be positive, got {delta}")
    return System(eta, tuple(species), n_requested * delta ** 3, n_requested, eps, name)


def _sp(*pairs) -> tuple[NuclearSpecies, ...]:
    return tuple(NuclearSpecies(z, c) for z, c in pairs)


# (name, omega, eta_total, r_s_total, eta_valence, r_s_valence, total species, valence species)
# Valence species use the ionic pseudo-charges that reproduce the tabulated valence count.
MATERIALS = [
    ("li", 284.94, 6, 2.25, 2, 3.24, _sp((3, 2)), _sp((1, 2))),
    ("k", 961.67, 38, 1.82, 2, 4.86, _sp((19, 2)), _sp((1, 2))),
    ("diamond", 307.04, 48, 1.15, 32, 1.32, _sp((6, 8)), _sp((4, 8))),
    ("si", 1080.43, 112, 1.32, 32, 2.01, _sp((14, 8)), _sp((4, 8))),
    ("feo", 539.84, 136, 0.98, 52, 1.35, _sp((26, 4), (8, 4)), _sp((7, 4), (6, 4))),
    ("coo", 522.81, 140, 0.96, 60, 1.28, _sp((27, 4), (8, 4)), _sp((9, 4), (6, 4))),
    ("alas", 1197.86, 184, 1.16, 32, 2.08, _sp((13, 4), (33, 4)), _sp((3, 4), (5, 4))),
    ("inp", 1364.93, 256, 1.08, 32, 2.17, _sp((49, 4), (15, 4)), _sp((3, 4), (5, 4))),
]

# tabulated r_s per preset, for comparison against the recomputed value
TABULATED_RS = {m[0]: m[3] for m in MATERIALS} | {m[0] + "_valence": m[5] for m in MATERIALS}


def presets() -> dict[str, System]:
    out: dict[str, System] = {}
    for name, omega, et, _, ev, _, sp_t, sp_v in MATERIALS:
        out[name] = System(et, sp_t, omega, DEFAULT_N, DEFAULT_EPS, name)
        out[name + "_valence"] = System(ev, sp_v, omega, DEFAULT_N, DEFAULT_EPS, name + "_valence")
    # C3H4O3 and LiPF6 in a 10^5 Bohr^3 cell
    out["ethylene_carbonate"] = System(46, _sp((6, 3), (1, 4), (8, 3)), 1e5, DEFAULT_N,
                                       DEFAULT_EPS, "ethylene_carbonate")
    out["lipf6"] = System(72, _sp((3, 1), (15, 1), (9, 6)), 1e5, DEFAULT_N, DEFAULT_EPS, "lipf6")
    out["jellium"] = from_rs(54, 10.0, DEFAULT_N, DEFAULT_EPS, (), "jellium")
    return out


def get_preset(name: str) -> System:
    table = presets()
    key = name.lower().replace("-", "_")
    if key not in table:
        raise InvalidInput(f"unknown preset {name!r}; known: {', '.join(sorted(table))}")
    return table[key]


def check_neutrality(system: System) -> None:
    for note in derive(system).warnings:
        warnings.warn(note, stacklevel=2)
