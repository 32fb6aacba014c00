"""Independent reference implementations used only by the tests.

Lattice sums here loop over the full cube with no symmetry reduction, and the
brace formulas are transcribed directly as single expressions.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

SRT = {2: 1, 3: 3, 4: 5, 5: 9, 6: 12, 7: 16, 8: 19, 9: 25,
       10: 29, 11: 35, 12: 39, 13: 45, 14: 51, 15: 56, 16: 60}


def clog2(x: int) -> int:
    return math.ceil(math.log2(x)) if x & (x - 1) else x.bit_length() - 1


def full_grid(n_p: int):
    h = 2 ** n_p - 1
    ax = np.arange(-h, h + 1, dtype=np.int64)
    x, y, z = np.meshgrid(ax, ax, ax, indexing="ij")
    x, y, z = x.ravel(), y.ravel(), z.ravel()
    keep = (x != 0) | (y != 0) | (z != 0)
    x, y, z = x[keep], y[keep], z[keep]
    r2 = x * x + y * y + z * z
    m = np.maximum(np.maximum(np.abs(x), np.abs(y)), np.abs(z))
    mu = np.floor(np.log2(m)).astype(np.int64) + 2
    return r2, mu


def brute_lambda_nu(n_p):
    r2, _ = full_grid(n_p)
    return math.fsum(1.0 / r2)


def brute_inv_norm(n_p):
    r2, _ = full_grid(n_p)
    return math.fsum(1.0 / np.sqrt(r2))


def brute_ceiling_terms(n_p, n_M):
    r2, mu = full_grid(n_p)
    num = np.array([2 ** (n_M + 2 * (int(m) - 2)) for m in mu], dtype=object)
    cnt = np.array([-(-int(a) // int(b)) for a, b in zip(num, r2)], dtype=object)
    return r2, mu, cnt, num


def brute_ceiling_sum(n_p, n_M):
    r2, mu, cnt, num = brute_ceiling_terms(n_p, n_M)
    return math.fsum(float(Fraction(int(c), int(d))) for c, d in zip(cnt, num))


def brute_p_suc(n_p, n_M):
    r2, mu, cnt, num = brute_ceiling_terms(n_p, n_M)
    M = 2 ** n_M
    return math.fsum(float(Fraction(int(c), M * 2 ** (2 * int(m)) * 2 ** (n_p + 2)))
                     for c, m in zip(cnt, mu))


def brute_abs_dev(n_p, n_M, alpha=1.0):
    r2, mu, cnt, num = brute_ceiling_terms(n_p, n_M)
    a = Fraction(alpha)
    return math.fsum(float(abs(a * Fraction(int(c), int(d)) - Fraction(1, int(r))))
                     for c, d, r in zip(cnt, num, r2))


def exact_lambda_nu_np1() -> Fraction:
    tot = Fraction(0)
    for x in (-1, 0, 1):
        for y in (-1, 0, 1):
            for z in (-1, 0, 1):
                if (x, y, z) != (0, 0, 0):
                    tot += Fraction(1, x * x + y * y + z * z)
    return tot


def erase(x: int) -> int:
    return min(2 ** k + -(-x // 2 ** k) for k in range(x.bit_length() + 2))


def qubitization_brace(n_p, n_eta, n_ez, eta, lz, n_M, n_R, n_T, b_r, amp=True):
    A = 3 if amp else 1
    return (2 * (n_T + 4 * n_ez + 2 * b_r - 12) + 14 * n_eta + 8 * b_r - 36
            + A * (3 * n_p ** 2 + 15 * n_p - 7 + 4 * n_M * (n_p + 1))
            + (lz + erase(lz) if lz else 0) + 2 * (2 * n_p + 2 * b_r - 7) + 12 * eta * n_p
            + 5 * (n_p - 1) + 2 + 24 * n_p + 6 * n_p * n_R + 18
            + n_ez + 2 * n_eta + 6 * n_p + n_M + 16)


def sigma_list(K):
    return [sum(math.factorial(K) // math.factorial(l) for l in range(k, K + 1))
            for k in range(K + 1)]


def interaction_brace(n_p, n_eta, n_ez, eta, lz, n_M, n_R, b_r, K, n_t, b_grad):
    sig = sigma_list(K)
    n_k = clog2(sig[0])
    return (2 * (3 * n_k + 2 * b_r - 9)
            + n_k + sum(clog2(sig[k]) for k in range(2, K))
            + 2 * K * n_t + 4 * n_t * SRT[K]
            + 2 * (K - 1) * (n_t - 1)
            + (K + 1) * (2 * n_t * (n_eta + 2 * n_p) - n_t + b_grad - 2) + 2 * (b_grad - 2)
            + K * (10 + 2 * (4 * n_ez + 2 * b_r - 9) + (14 * n_eta + 8 * b_r - 36)
                   + 3 * (3 * n_p ** 2 + 15 * n_p - 7 + 4 * n_M * (n_p + 1))
                   + (lz + erase(lz) if lz else 0)
                   + (12 * eta * n_p + 4 * eta - 4) + 24 * n_p + 6 * n_p * n_R
                   + (12 * n_p ** 2 + 2 * n_p + 8 * n_eta))
            + K * (n_ez + 2 * n_eta + 2 + 4 * n_p + n_M + n_t + 12) + n_k + 3)


def generic_toffolis(reps, K, n_t, n_theta, b_r, n_B, c, d):
    sig = [sum(math.factorial(K) * c ** l * d ** (K - l) // math.factorial(l)
               for l in range(k, K + 1)) for k in range(K + 1)]
    n_k = clog2(sig[0])
    return (6 * reps * (3 * n_k + 2 * b_r - 9)
            + 3 * reps * (-1 + sum(clog2(sig[k]) for k in range(K)))
            + 6 * reps * K * n_t + 12 * reps * (n_t - 1) * SRT[K]
            + 6 * reps * (K - 1) * (n_t - 1) + 2 * reps * (n_theta - 3)
            + 2 * reps * (n_k + K * (n_t + n_B)))
