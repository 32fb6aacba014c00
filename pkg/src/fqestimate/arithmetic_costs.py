"""Toffoli-cost primitives for reversible arithmetic and state preparation.

Every cost function returns a plain ``int``.  Logs are base 2 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInput, Unsupported

# comparators for an in-place reversible sort of K items, K = 2..16
SORT_COMPARATORS = {
    2: 1, 3: 3, 4: 5, 5: 9, 6: 12, 7: 16, 8: 19, 9: 25,
    10: 29, 11: 35, 12: 39, 13: 45, 14: 51, 15: 56, 16: 60,
}


def ceil_log2(x: int) -> int:
    """Exact ceil(log2(x)) for a positive integer."""
    if x < 1:
        raise InvalidInput(f"ceil_log2 needs x >= 1, got {x}")
    return (int(x) - 1).bit_length()


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidInput(msg)


def square_cost_simple(n: int) -> int:
    """Squaring an n-bit number by repeated addition: n^2 - 2."""
    _need(n >= 2, f"square_cost_simple needs n >= 2, got {n}")
    return n * n - 2


def square_cost(n: int) -> int:
    """Improved squaring: n(n-1)."""
    _need(n >= 1, f"square_cost needs n >= 1, got {n}")
    return n * (n - 1)


def sum_three_squares_cost(n: int) -> int:
    """Sum of squares of three n-bit numbers: 3n^2 - n - 1."""
    _need(n >= 1, f"sum_three_squares_cost needs n >= 1, got {n}")
    return 3 * n * n - n - 1


def sum_k_squares_cost(k: int, n: int) -> int:
    """Proven upper bound k n^2 for summing k squares of n-bit numbers.

    Numerically the count is kn^2 - n (kn^2 - n - 1 when 3 | k); that
    tighter figure is not proven, so it is not used anywhere.
    """
    _need(k >= 1 and n >= 1, f"sum_k_squares_cost needs k, n >= 1, got {k}, {n}")
    return k * n * n


def product_cost(n: int, m: int) -> int:
    """Product of an n-bit and an m-bit number: 2ab - a with a >= b."""
    _need(n >= 1 and m >= 1, f"product_cost needs widths >= 1, got {n}, {m}")
    a, b = max(n, m), min(n, m)
    return 2 * a * b - a


def qrom_erase_terms(x: int) -> dict[int, int]:
    """All candidate values 2^k + ceil(x / 2^k), keyed by k."""
    _need(x >= 1, f"qrom_erase_cost needs x >= 1, got {x}")
    out = {}
    for k in range(x.bit_length() + 2):
        out[k] = (1 << k) + -(-x // (1 << k))
    return out


def qrom_erase_cost(x: int) -> int:
    """Cost of erasing a QROM output over x items by measurement."""
    return min(qrom_erase_terms(x).values())


def qrom_erase_cost_pow2k(x: int) -> int:
    """Variant restricting k itself to powers of two (debug comparison only)."""
    terms = qrom_erase_terms(x)
    return min(v for k, v in terms.items() if k & (k - 1) == 0 and k > 0)


def sort_comparator_count(K: int) -> int:
    if K not in SORT_COMPARATORS:
        raise Unsupported(f"no comparator count tabulated for K={K} (need 2..16)")
    return SORT_COMPARATORS[K]


@dataclass(frozen=True)
class EqualSuperpositionSpec:
    n: int
    b_r: int

    def __post_init__(self):
        _need(self.n >= 1, f"n must be >= 1, got {self.n}")
        _need(self.b_r >= 1, f"b_r must be >= 1, got {self.b_r}")


def _round_half_away(x: float) -> float:
    return math.copysign(math.floor(abs(x) + 0.5), x)


def rotation_angle(n: int, b_r: int) -> float:
    """Rotation angle on b_r bits for the equal superposition over n states."""
    x = n / (1 << ceil_log2(n))
    theta0 = math.asin(1.0 / (2.0 * math.sqrt(x)))
    step = 2.0 * math.pi / (1 << b_r)
    shift = (math.pi / (1 << b_r)) ** 2 * (2.0 * x - 1.0) / math.sqrt(4.0 * x - 1.0)
    return step * _round_half_away((theta0 - shift) / step)


def success_at_angle(n: int, theta: float) -> float:
    x = n / (1 << ceil_log2(n))
    s2 = math.sin(theta) ** 2
    return x * ((1.0 + (2.0 - 4.0 * x) * s2) ** 2 + math.sin(2.0 * theta) ** 2)


def equal_superposition_success(spec: EqualSuperpositionSpec | int, b_r: int | None = None) -> float:
    """Success probability of the equal-superposition preparation.

    Accepts either a spec or ``(n, b_r)``.  Powers of two give exactly 1.
    """
    if not isinstance(spec, EqualSuperpositionSpec):
        spec = EqualSuperpositionSpec(int(spec), int(b_r))
    n = spec.n
    if n & (n - 1) == 0:
        return 1.0
    return success_at_angle(n, rotation_angle(n, spec.b_r))


def equal_superposition_lower_bound(b_r: int) -> float:
    _need(b_r >= 1, f"b_r must be >= 1, got {b_r}")
    return 1.0 - 2.25 * (math.pi / (1 << b_r)) ** 2
