"""Closed-form dynamics of parity-class measures on the n-cube.

The measures that are constant on each parity class (even / odd coordinate
sum) form a one-parameter family mu_t, and the self-median operator acts on
the parameter through an explicit cubic phi.  This module evaluates that
cubic, the triple counts behind it (by brute force, by the transfer-matrix
recurrence, and in closed form), and the exact fixed points of phi in [0,1].
Everything here is integer or rational arithmetic; no floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import InternalCheckError, OutOfRangeError, TooLargeError
from .generators import hypercube
from .measures import Measure, phi

BRUTE_FORCE_DIM_LIMIT = 8
EXACT_OPERATOR_DIM_LIMIT = 6

# lift counts: entry [i][j] is the number of ways a majority-zero triple over
# n-1 coordinates with j odd entries extends to one over n coordinates with i
# odd entries (4 of the 8 bit-triples have majority 0)
TRANSFER_MATRIX = (
    (1, 1, 0, 0),
    (3, 1, 2, 0),
    (0, 2, 1, 3),
    (0, 0, 1, 1),
)
INITIAL_COUNTS = (1, 3, 0, 0)

RationalLike = Union[Fraction, int, str]


@dataclass(frozen=True)
class XiCounts:
    """Majority-zero triples on the n-cube, bucketed by odd-parity entries."""

    n: int
    a: tuple

    def __post_init__(self):
        if sum(self.a) != 4**self.n:
            raise InternalCheckError(
                f"counts {self.a} for n={self.n} do not sum to 4^{self.n}"
            )


def _check_n(n: int) -> None:
    if n < 1:
        raise OutOfRangeError("cube dimension must be at least 1")


def _check_t(t: RationalLike) -> Fraction:
    value = Fraction(t)
    if not 0 <= value <= 1:
        raise OutOfRangeError(f"parameter t={value} outside [0, 1]")
    return value


def parity_classes(n: int) -> tuple:
    """Point ids of the even-sum and odd-sum vertices of hypercube(n)."""
    cube = hypercube(n)
    even = frozenset(i for i, m in enumerate(cube.masks) if bin(m).count("1") % 2 == 0)
    odd = frozenset(range(len(cube))) - even
    return cube, even, odd


def mu_t(n: int, t: RationalLike) -> Measure:
    """Mass t/2^(n-1) on each even-parity vertex, (1-t)/2^(n-1) on each odd one."""
    _check_n(n)
    value = _check_t(t)
    cube, even, _ = parity_classes(n)
    on_even = value / 2 ** (n - 1)
    on_odd = (1 - value) / 2 ** (n - 1)
    return Measure(cube, [on_even if i in even else on_odd for i in range(len(cube))])


def phi_poly(n: int, t: RationalLike) -> Fraction:
    """The cubic driving the parameter: phi(t) with Phi(mu_t) = mu_phi(t)."""
    _check_n(n)
    value = Fraction(t)
    sign = -1 if n % 2 else 1
    c = Fraction(1, 4) + sign * Fraction(3, 4) - sign * Fraction(2) ** (n - 2)
    return value + sign * Fraction(2) ** (2 - n) * (value - Fraction(1, 2)) * (
        value * value - value + c
    )


def phi_conjugation_check(n: int, t: RationalLike) -> bool:
    """Exact check that the operator on mu_t matches the cubic on t."""
    _check_n(n)
    if n > EXACT_OPERATOR_DIM_LIMIT:
        raise TooLargeError(
            f"exact full-cube operator capped at n={EXACT_OPERATOR_DIM_LIMIT}"
        )
    value = _check_t(t)
    lhs = phi(mu_t(n, value))
    rhs = mu_t(n, phi_poly(n, value))
    return lhs == rhs


def count_xi_bruteforce(n: int) -> XiCounts:
    """Enumerate all 8^n coordinate triples with majority zero, bucketed by parity."""
    _check_n(n)
    if n > BRUTE_FORCE_DIM_LIMIT:
        raise TooLargeError(f"triple enumeration capped at n={BRUTE_FORCE_DIM_LIMIT}")
    size = 2**n
    pts = np.arange(size, dtype=np.int64)
    parity = np.array([bin(i).count("1") & 1 for i in range(size)], dtype=np.int64)
    counts = np.zeros(4, dtype=np.int64)
    y = pts[:, None]
    z = pts[None, :]
    pair_or = y | z
    pair_and = y & z
    psum_yz = parity[:, None] + parity[None, :]
    for x in range(size):
        maj = (x & pair_or) | pair_and
        zero = maj == 0
        if not zero.any():
            continue
        buckets = parity[x] + psum_yz[zero]
        counts += np.bincount(buckets, minlength=4)
    return XiCounts(n=n, a=tuple(int(v) for v in counts))


def ai_recurrence(n: int) -> XiCounts:
    """Apply the transfer matrix n-1 times to the one-coordinate counts."""
    _check_n(n)
    v = list(INITIAL_COUNTS)
    for _ in range(n - 1):
        v = [sum(TRANSFER_MATRIX[i][j] * v[j] for j in range(4)) for i in range(4)]
    return XiCounts(n=n, a=tuple(v))


def ai_closed_form(n: int) -> XiCounts:
    """Evaluate the explicit formulas for the four counts."""
    _check_n(n)
    sign = -1 if n % 2 else 1
    scale = 2**n
    terms = (
        Fraction(3, 8) + sign * Fraction(1, 8) + scale * Fraction(1, 8),
        Fraction(3, 8) - sign * Fraction(3, 8) + scale * Fraction(3, 8),
        Fraction(-3, 8) + sign * Fraction(3, 8) + scale * Fraction(3, 8),
        Fraction(-3, 8) - sign * Fraction(1, 8) + scale * Fraction(1, 8),
    )
    values = []
    for term in terms:
        value = scale * term
        if value.denominator != 1:
            raise InternalCheckError(f"closed form produced a non-integer: {value}")
        values.append(int(value))
    return XiCounts(n=n, a=tuple(values))


def mu3_mass_identity_check(n: int, t: RationalLike) -> bool:
    """Exactly compare the three expressions for the mass of the majority-zero triples.

    Direct operator evaluation at the zero vertex, the count-weighted
    polynomial, and the cubic all divided by 2^(n-1) must agree.
    """
    _check_n(n)
    if n > EXACT_OPERATOR_DIM_LIMIT:
        raise TooLargeError(
            f"exact full-cube operator capped at n={EXACT_OPERATOR_DIM_LIMIT}"
        )
    value = _check_t(t)
    measure = mu_t(n, value)
    direct = phi(measure).weights[0]  # the all-zeros vertex has rank 0
    a = ai_closed_form(n).a
    polynomial = sum(
        a[i] * value ** (3 - i) * (1 - value) ** i for i in range(4)
    ) / Fraction(8) ** (n - 1)
    cubic = phi_poly(n, value) / 2 ** (n - 1)
    return direct == polynomial == cubic


def _sqrt_exact(value: Fraction):
    """Exact square root of a non-negative rational, or None if irrational."""
    if value < 0:
        return None
    num = math.isqrt(value.numerator)
    den = math.isqrt(value.denominator)
    if num * num == value.numerator and den * den == value.denominator:
        return Fraction(num, den)
    return None


def phi_fixed_points(n: int) -> list:
    """All exact solutions of phi(t) = t within [0, 1], with multiplicity.

    phi(t) - t factors as a scalar times (t - 1/2)(t^2 - t + c); 1/2 is
    always a fixed point and the quadratic contributes roots in [0, 1] only
    when 0 <= c <= 1/4, which happens exactly at c = 0 (n = 1 and n = 2,
    giving 0 and 1).  For every other n the constant is negative or at
    least 3/2, so no further roots land in the interval.
    """
    _check_n(n)
    sign = -1 if n % 2 else 1
    c = Fraction(1, 4) + sign * Fraction(3, 4) - sign * Fraction(2) ** (n - 2)
    roots = [Fraction(1, 2)]
    disc = 1 - 4 * c
    if disc >= 0:
        root = _sqrt_exact(disc)
        if root is None:
            if 0 < c <= Fraction(1, 4):
                raise InternalCheckError(
                    "irrational fixed point inside [0,1]; impossible for this family"
                )
        else:
            for candidate in ((1 - root) / 2, (1 + root) / 2):
                if 0 <= candidate <= 1:
                    roots.append(candidate)
    return sorted(roots)
