"""Exact lattice sums over the momentum-transfer grid G0.

The grid is every integer vector with components in [-(2^n_p - 1), 2^n_p - 1]
except the origin.  Sums are taken over the wedge a >= b >= c >= 0 of the
positive octant, with each point weighted by its number of images under
sign flips and coordinate permutations.  That is 1/48 of the work and the
weights are exact small integers.

Accumulation is compensated: each chunk is summed by Neumaier's algorithm
running in parallel lanes, lanes and corrections are combined with
``math.fsum``, and chunk results are combined with ``math.fsum`` again.  The
chunk partition and lane width depend only on n_p, so results are bitwise
identical for any number of worker threads.
"""

from __future__ import annotations

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidInput, Unsupported

# wedge chunks per box; fixed so the reduction tree never depends on threads
N_CHUNKS = 16
# Neumaier lanes per chunk
_LANES = 4096
# r2 < 2^31 keeps the modular products in int64
_MAX_NP = 14
# keeps 2^-(n_M + 2 n_p) well inside the float64 exponent range
_MAX_NM = 900


@dataclass(frozen=True)
class MomentumBox:
    n_p: int

    def __post_init__(self):
        if self.n_p < 1:
            raise InvalidInput(f"n_p must be >= 1, got {self.n_p}")

    @property
    def n_mu(self) -> int:
        return self.n_p + 1

    @property
    def half_width(self) -> int:
        return (1 << self.n_p) - 1

    @property
    def num_points(self) -> int:
        return (2 * self.half_width + 1) ** 3 - 1


@dataclass(frozen=True)
class NuPreparationSpec:
    n_M: int
    alpha: float = 1.0

    def __post_init__(self):
        if self.n_M < 1:
            raise InvalidInput(f"n_M must be >= 1, got {self.n_M}")
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidInput(f"alpha must lie in (0, 1], got {self.alpha}")

    @property
    def M(self) -> int:
        return 1 << self.n_M


def mu_of(nu) -> int:
    """Smallest mu with every |nu_w| < 2^(mu-1)."""
    m = max(abs(int(v)) for v in nu)
    if m == 0:
        raise InvalidInput("mu is undefined for the zero vector")
    return m.bit_length() + 1


def b_mu_size(mu: int) -> int:
    return ((1 << mu) - 1) ** 3 - ((1 << (mu - 1)) - 1) ** 3


@dataclass(frozen=True)
class _Chunk:
    r2: np.ndarray         # int64 squared norms
    weight: np.ndarray     # float64 image counts (1..48)
    mu: np.ndarray         # int64
    w_inv_r2: np.ndarray   # weight / r2
    lam: float             # compensated sum of w_inv_r2


@lru_cache(maxsize=8)
def _triangle(n: int) -> tuple[np.ndarray, np.ndarray]:
    b, c = np.tril_indices(n)
    return b.astype(np.int64), c.astype(np.int64)


def _wedge(a_values: range) -> _Chunk:
    """Points a >= b >= c >= 0 with a in a_values, a > 0."""
    a_arr = np.arange(max(a_values.start, 1), a_values.stop, dtype=np.int64)
    if a_arr.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        fe = empty.astype(np.float64)
        return _Chunk(empty, fe, empty, fe, 0.0)
    # the first T(a+1) entries of the lower triangle are the (b, c) with c <= b <= a
    counts = (a_arr + 1) * (a_arr + 2) // 2
    total = int(counts.sum())
    rows = np.repeat(np.arange(a_arr.size), counts)
    local = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(counts) - counts, counts)
    # one shared triangle per power-of-two bound; any prefix of it is valid
    tri_b, tri_c = _triangle(1 << int(a_arr[-1]).bit_length())
    b = tri_b[local]
    c = tri_c[local]
    a = a_arr[rows]
    perms = np.where(b == c, np.where(b == a, 1, 3), np.where(b == a, 3, 6))
    signs = 2 * np.where(b > 0, 2, 1) * np.where(c > 0, 2, 1)
    r2 = a * a + b * b + c * c
    w = (perms * signs).astype(np.float64)
    mu = np.zeros_like(a)
    for m in range(1, int(a_arr[-1]).bit_length() + 1):
        mu[a >= (1 << (m - 1))] = m + 1
    w_inv = w / r2
    return _Chunk(r2, w, mu, w_inv, csum(w_inv))


_CACHE: dict[int, tuple[_Chunk, ...]] = {}
_CACHE_LOCK = threading.Lock()


def effective_workers(threads: int | None) -> int:
    """Requested worker count capped at the CPU count (0 or None means all CPUs)."""
    cpus = os.cpu_count() or 1
    if not threads:
        return cpus
    return max(1, min(int(threads), cpus))


def _chunks(n_p: int, threads: int = 1) -> tuple[_Chunk, ...]:
    """Wedge chunks for a box, built once per n_p and then reused."""
    with _CACHE_LOCK:
        hit = _CACHE.get(n_p)
        if hit is None:
            hit = _CACHE[n_p] = _build(n_p, effective_workers(threads))
        return hit


def clear_cache() -> None:
    with _CACHE_LOCK:
        _CACHE.clear()


def _build(n_p: int, threads: int) -> tuple[_Chunk, ...]:
    """Split a = 1..2^n_p - 1 into N_CHUNKS contiguous runs of similar size."""
    top = (1 << n_p) - 1
    sizes = np.array([(a + 1) * (a + 2) // 2 for a in range(1, top + 1)], dtype=np.float64)
    cum = np.cumsum(sizes)
    edges = [1]
    for j in range(1, N_CHUNKS):
        cut = int(np.searchsorted(cum, cum[-1] * j / N_CHUNKS)) + 2
        edges.append(max(edges[-1], min(cut, top + 1)))
    edges.append(top + 1)
    spans = [range(lo, hi) for lo, hi in zip(edges, edges[1:])]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return tuple(pool.map(_wedge, spans))
    return tuple(_wedge(sp) for sp in spans)


def csum(x: np.ndarray) -> float:
    """Compensated sum of a float64 vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.size <= _LANES:
        return math.fsum(x)
    pad = (-x.size) % _LANES
    rows = np.concatenate([x, np.zeros(pad)]).reshape(-1, _LANES)
    s = rows[0].copy()
    c = np.zeros(_LANES)
    for row in rows[1:]:
        t = s + row
        big = np.abs(s) >= np.abs(row)
        c += np.where(big, (s - t) + row, (row - t) + s)
        s = t
    return math.fsum(np.concatenate([s, c]))


def _reduce(box: MomentumBox, fn, threads: int = 1) -> float:
    threads = effective_workers(threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(fn, _chunks(box.n_p, threads)))
    else:
        parts = [fn(ch) for ch in _chunks(box.n_p)]
    return math.fsum(parts)


def _pow2_mod(s: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """2^s mod r2 elementwise, by square-and-multiply (r2 < 2^31 keeps products in int64)."""
    rem = np.ones_like(r2) % r2
    base = np.full_like(r2, 2) % r2
    s = s.copy()
    while np.any(s):
        odd = (s & 1).astype(bool)
        rem = np.where(odd, rem * base % r2, rem)
        base = base * base % r2
        s >>= 1
    return rem


def _excess(ch: _Chunk, n_M: int) -> np.ndarray:
    """ceil(M 4^(mu-2)/r2) / (M 4^(mu-2)) - 1/r2, which lies in [0, 1/(M 4^(mu-2))).

    With s = n_M + 2(mu-2) and rem = 2^s mod r2 the excess is (r2 - rem)/(r2 2^s)
    when rem > 0 and zero otherwise, so no integer wider than r2^2 is formed.
    """
    s = n_M + 2 * (ch.mu - 2)
    if s.size and int(s.max()) <= 62:
        rem = np.left_shift(np.int64(1), s) % ch.r2
    else:
        rem = _pow2_mod(s, ch.r2)
    num = np.where(rem > 0, ch.r2 - rem, 0).astype(np.float64)
    return np.ldexp(num / ch.r2, -s.astype(np.int32))


def _check_n_M(box: MomentumBox, n_M: int) -> None:
    if box.n_p > _MAX_NP:
        raise Unsupported(f"n_p={box.n_p} exceeds the supported {_MAX_NP}")
    if n_M < 1:
        raise InvalidInput(f"n_M must be >= 1, got {n_M}")
    if n_M > _MAX_NM:
        raise Unsupported(f"n_M={n_M} exceeds the supported {_MAX_NM}")


def lambda_nu(box: MomentumBox, threads: int = 1) -> float:
    """Sum of 1/|nu|^2 over the box."""
    return math.fsum(ch.lam for ch in _chunks(box.n_p, threads))


def inv_norm_sum(box: MomentumBox, threads: int = 1) -> float:
    """Sum of 1/|nu| over the box."""
    return _reduce(box, lambda ch: csum(ch.weight / np.sqrt(ch.r2)), threads)


def ceiling_sum(box: MomentumBox, n_M: int, threads: int = 1) -> float:
    """Sum of ceil(M 4^(mu-2)/|nu|^2) / (M 4^(mu-2)); this is lambda_nu^1."""
    _check_n_M(box, n_M)

    def part(ch):
        return ch.lam + csum(ch.weight * _excess(ch, n_M))

    return _reduce(box, part, threads)


def lambda_nu_alpha(box: MomentumBox, spec: NuPreparationSpec, threads: int = 1) -> float:
    return spec.alpha * ceiling_sum(box, spec.n_M, threads)


def p_nu_success(box: MomentumBox, spec: NuPreparationSpec, threads: int = 1) -> float:
    """Success probability of the 1/|nu| amplitude preparation (before amplification)."""
    # M 2^(2 mu) 2^(n_p+2) = M 4^(mu-2) 2^(n_p+6), so this is lambda_nu^1 / 2^(n_p+6)
    return ceiling_sum(box, spec.n_M, threads) / float(1 << (box.n_p + 6))


def amplify(p: float) -> float:
    """Probability after one round of amplitude amplification."""
    if not 0.0 <= p <= 1.0:
        raise InvalidInput(f"probability out of range: {p}")
    return math.sin(3.0 * math.asin(math.sqrt(p))) ** 2


def _uv_prefactor(eta: int, lambda_zeta: float, omega: float) -> float:
    if eta < 1 or lambda_zeta < 0 or omega <= 0:
        raise InvalidInput("need eta >= 1, lambda_zeta >= 0, omega > 0")
    return eta * (eta - 1 + 2 * lambda_zeta) / (2.0 * math.pi * omega ** (1.0 / 3.0))


def abs_deviation_sum(box: MomentumBox, spec: NuPreparationSpec, threads: int = 1) -> float:
    """Sum over the box of |1/|nu'|^2 - 1/|nu|^2| for the rounded weights nu'."""
    _check_n_M(box, spec.n_M)
    alpha = spec.alpha

    def part(ch):
        return csum(np.abs((alpha - 1.0) * ch.w_inv_r2 + alpha * ch.weight * _excess(ch, spec.n_M)))

    return _reduce(box, part, threads)


def eps_M_exact(box: MomentumBox, spec: NuPreparationSpec, eta: int, lambda_zeta: float,
                omega: float, threads: int = 1) -> float:
    """Energy error from the finite-M amplitude preparation, summed exactly."""
    return _uv_prefactor(eta, lambda_zeta, omega) * abs_deviation_sum(box, spec, threads)


def eps_M_bound(box: MomentumBox, n_M: int, eta: int, lambda_zeta: float, omega: float) -> float:
    """Closed-form upper bound on eps_M_exact at alpha = 1."""
    n_p = box.n_p
    shape = 7 * 2 ** (n_p + 1) - 9 * n_p - 11 - 3 * 2.0 ** (-n_p)
    return 4.0 * _uv_prefactor(eta, lambda_zeta, omega) * shape / 2.0 ** n_M


def tune_alpha(box: MomentumBox, n_M: int) -> float:
    """Alpha in [1 - 3/(2M), 1 - 1/M] minimising eps_M_exact.

    The deviation sum is sum_i w_i q_i |alpha - t_i| with q_i the rounded
    weight and t_i = (1/r2_i) / q_i, so the unconstrained minimiser is the
    weighted median of t_i; convexity makes clamping it exact.
    """
    _check_n_M(box, n_M)
    ts, ws = [], []
    for ch in _chunks(box.n_p):
        ex = _excess(ch, n_M)
        ts.append(1.0 / (1.0 + ch.r2 * ex))
        ws.append(ch.weight * (1.0 / ch.r2 + ex))
    t = np.concatenate(ts)
    w = np.concatenate(ws)
    order = np.argsort(t, kind="stable")
    cw = np.cumsum(w[order])
    med = float(t[order][np.searchsorted(cw, 0.5 * cw[-1])])
    M = float(1 << n_M)
    return min(max(med, 1.0 - 1.5 / M), 1.0 - 1.0 / M)
