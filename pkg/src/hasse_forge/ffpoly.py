"""Polynomials modulo an integer, the Schinzel condition, and exact densities
of Schinzel tuples modulo a prime.

Densities are :class:`fractions.Fraction` values throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as cartesian
from typing import Sequence

import numpy as np

from .errors import DomainError, ResourceError
from .intmath import IntPoly, factor, is_prime, primes_up_to

__all__ = [
    "ModPoly",
    "SchinzelWitness",
    "schinzel_witness",
    "is_schinzel",
    "zero_mask_histogram",
    "delta_exact",
    "delta_closed_large",
    "delta_closed_small",
    "delta2_lower",
    "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = 1 << 30


@dataclass(frozen=True)
class ModPoly:
    """Polynomial over Z/modulus, coefficients zero-padded to a nominal degree bound."""

    modulus: int
    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.modulus < 2:
            raise DomainError(f"modulus must be >= 2, got {self.modulus}")
        object.__setattr__(self, "coeffs", tuple(c % self.modulus for c in self.coeffs))

    @classmethod
    def reduce(cls, P: IntPoly, modulus: int, degree_bound: int | None = None) -> "ModPoly":
        n = len(P.coeffs) if degree_bound is None else degree_bound + 1
        if len(P.coeffs) > n:
            raise DomainError("degree bound below the polynomial's degree")
        return cls(modulus, P.coeffs + (0,) * (n - len(P.coeffs)))

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % self.modulus
        return acc


@dataclass(frozen=True)
class SchinzelWitness:
    """Why a tuple fails to be Schinzel: a prime with a fixed divisor, or a
    polynomial (by index) whose leading coefficient is not positive."""

    reason: str
    prime: int | None = None
    index: int | None = None


def _smallest_prime_factor_above(n: int, bound: int) -> int | None:
    n = abs(n)
    if n <= 1:
        return None
    big = [p for p in factor(n) if p > bound]
    return min(big) if big else None


def schinzel_witness(polys: Sequence[IntPoly]) -> SchinzelWitness | None:
    """Return None if ``polys`` is a Schinzel tuple, else a witness of failure.

    A prime ``l`` fails when the product of the polynomials vanishes at every
    point of F_l. For ``l`` above the total degree that can only happen when
    ``l`` divides the content of one factor, so only those primes are examined
    beyond exhaustive evaluation at small ``l``.
    """
    if not polys:
        raise DomainError("empty tuple")
    for i, P in enumerate(polys):
        if P.is_zero or P.degree < 1:
            raise DomainError(f"polynomial {i} is constant")
    for i, P in enumerate(polys):
        if P.lc <= 0:
            return SchinzelWitness(f"leading coefficient of polynomial {i} is {P.lc}", index=i)
    total = sum(P.degree for P in polys)
    for ell in primes_up_to(total):
        if all(any(P(r) % ell == 0 for P in polys) for r in range(ell)):
            return SchinzelWitness(f"product vanishes identically on F_{ell}", prime=ell)
    best: tuple[int, int] | None = None
    for i, P in enumerate(polys):
        q = _smallest_prime_factor_above(P.content(), total)
        if q is not None and (best is None or q < best[0]):
            best = (q, i)
    if best is not None:
        q, i = best
        return SchinzelWitness(f"{q} divides every coefficient of polynomial {i}", prime=q, index=i)
    return None


def is_schinzel(polys: Sequence[IntPoly]) -> bool:
    return schinzel_witness(polys) is None


# ---------------------------------------------------------------------------
# densities modulo a prime

def _check_prime(ell: int) -> None:
    if not is_prime(ell):
        raise DomainError(f"{ell} is not prime")


def zero_mask_histogram(ell: int, degree: int) -> np.ndarray:
    """Histogram over subsets S of F_ell (as bitmasks) of the number of
    polynomials of degree <= ``degree`` whose zero set in F_ell is exactly S.

    Every coefficient vector is enumerated; the zero polynomial lands in the
    full mask.
    """
    n = degree + 1
    grid = np.array(list(cartesian(range(ell), repeat=n)), dtype=np.int64)
    powers = np.array([[pow(r, k, ell) for r in range(ell)] for k in range(n)], dtype=np.int64)
    values = grid @ powers % ell
    weights = np.left_shift(np.int64(1), np.arange(ell, dtype=np.int64))
    masks = (values == 0).astype(np.int64) @ weights
    return np.bincount(masks, minlength=1 << ell)


def _subset_sums(h: np.ndarray, ell: int) -> np.ndarray:
    out = h.astype(np.int64).copy()
    for bit in range(ell):
        step = 1 << bit
        view = out.reshape(-1, 2 * step)
        view[:, step:] += view[:, :step]
    return out


def delta_exact(ell: int, degrees: Sequence[int], budget: int = DEFAULT_BUDGET) -> Fraction:
    """Exact density of tuples over F_ell (deg P_i <= d_i) whose product does
    not vanish at every point of F_ell.

    Each factor's polynomials are enumerated once and bucketed by zero set; the
    tuple count then follows from a union-over-subsets transform. ``budget``
    caps the work, measured as evaluations plus transform size.
    """
    _check_prime(ell)
    if not degrees or any(d < 0 for d in degrees):
        raise DomainError("degrees must be a nonempty sequence of nonnegative ints")
    work = sum(ell ** (d + 1) * ell for d in degrees) + len(degrees) * ell * (1 << ell)
    if work > budget:
        raise ResourceError(f"enumeration needs ~{work} steps, budget is {budget}")
    transforms = {d: _subset_sums(zero_mask_histogram(ell, d), ell) for d in set(degrees)}
    full = (1 << ell) - 1
    vanishing = 0
    for S in range(full + 1):
        term = 1
        for d in degrees:
            term *= int(transforms[d][S])
        if (ell - S.bit_count()) % 2:
            vanishing -= term
        else:
            vanishing += term
    total = ell ** (len(degrees) + sum(degrees))
    return 1 - Fraction(vanishing, total)


def delta_closed_large(ell: int, degrees: Sequence[int]) -> Fraction:
    """prod (1 - ell^-(d_i+1)), valid when ell exceeds the total degree."""
    _check_prime(ell)
    if ell <= sum(degrees):
        raise DomainError(f"closed form needs ell > sum of degrees ({ell} <= {sum(degrees)})")
    out = Fraction(1)
    for d in degrees:
        out *= 1 - Fraction(1, ell ** (d + 1))
    return out


def delta_closed_small(ell: int, n: int) -> Fraction:
    """1 - (1 - (1 - 1/ell)^n)^ell; the caller guarantees ell <= 1 + min d_i."""
    q = 1 - (1 - Fraction(1, ell)) ** n
    return 1 - q**ell


def delta2_lower(ell: int, d1: int, d2: int) -> Fraction:
    """Lower bound for the pair density, clamped at 0."""
    value = (1 - Fraction(1, ell ** (1 + d1))) * (1 - Fraction(1, ell ** (1 + d2))) - Fraction(2**ell, ell**ell)
    return max(Fraction(0), value)
