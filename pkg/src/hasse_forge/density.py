"""Density constants for the conic bundle P1(t) x^2 + P2(t) y^2 = z^2.

All constants are exact rationals or intervals with rational endpoints;
decimals appear only as outward-rounded renderings.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as cartesian
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError, InvariantViolation, ResourceError
from .ffpoly import delta2_lower, delta_closed_small
from .intmath import IntPoly, is_prime, primes_up_to
from .rational import RationalInterval, decimal_string

__all__ = [
    "SIGMA2",
    "sigma2",
    "count_T_vectors",
    "product_lower_bound",
    "P0_exact",
    "tail_product",
    "tight_enclosure",
    "limit_constant",
    "LimitConstant",
    "Check",
    "McEstimate",
    "sample_pair",
    "monte_carlo",
]

SIGMA2 = Fraction(1743, 4096)
DEFAULT_PAIR_BUDGET = 1 << 24


# ---------------------------------------------------------------------------
# sigma_2 and the T-vectors

def _values_mod4(d: int) -> np.ndarray:
    """Values at 0,1,2,3 (mod 4) of every polynomial of degree <= d over Z/4."""
    coeffs = np.array(list(cartesian(range(4), repeat=d + 1)), dtype=np.int64)
    powers = np.array([[pow(x, k, 4) for x in range(4)] for k in range(d + 1)], dtype=np.int64)
    return coeffs @ powers % 4


def _sigma2_count(v1: np.ndarray, v2: np.ndarray, w1: np.ndarray | None = None, w2: np.ndarray | None = None) -> int:
    """Weighted count of pairs satisfying (a) and (b).

    (a): both values odd at 0, or both odd at 1.
    (b): some value of either polynomial is 1 mod 4.
    """
    w1 = np.ones(len(v1), dtype=np.int64) if w1 is None else w1
    w2 = np.ones(len(v2), dtype=np.int64) if w2 is None else w2
    odd0_1, odd1_1 = v1[:, 0] % 2 == 1, v1[:, 1] % 2 == 1
    odd0_2, odd1_2 = v2[:, 0] % 2 == 1, v2[:, 1] % 2 == 1
    one_1 = (v1 == 1).any(axis=1)
    one_2 = (v2 == 1).any(axis=1)
    cond_a = (odd0_1[:, None] & odd0_2[None, :]) | (odd1_1[:, None] & odd1_2[None, :])
    cond_b = one_1[:, None] | one_2[None, :]
    good = cond_a & cond_b
    return int(w1 @ good.astype(np.int64) @ w2)


def _compatible_vectors() -> np.ndarray:
    """Value vectors (v0..v3) over Z/4 with v0 = v2 and v1 = v3 mod 2."""
    return np.array([v for v in cartesian(range(4), repeat=4) if (v[0] - v[2]) % 2 == 0 and (v[1] - v[3]) % 2 == 0])


def sigma2(d1: int, d2: int, budget: int = DEFAULT_PAIR_BUDGET) -> Fraction:
    """Density of pairs over Z/4 (deg P_i <= d_i) satisfying (a) and (b).

    Enumerates every pair when 4^(d1+1) * 4^(d2+1) <= budget. Otherwise, for
    d_i >= 3, each compatible value vector is hit by exactly 4^(d-2)
    polynomials and the count runs over value vectors.
    """
    if d1 < 0 or d2 < 0:
        raise DomainError("degrees must be nonnegative")
    total = 4 ** (d1 + 1) * 4 ** (d2 + 1)
    if total <= budget:
        return Fraction(_sigma2_count(_values_mod4(d1), _values_mod4(d2)), total)
    if min(d1, d2) < 3:
        raise ResourceError(f"{total} pairs exceed the budget and value vectors are not uniform below degree 3")
    vecs = _compatible_vectors()
    return Fraction(_sigma2_count(vecs, vecs), len(vecs) ** 2)


def count_T_vectors(restrict: str | None = None) -> int:
    """Pairs of value vectors in {0,2,3}^4 with v0 = v2, v1 = v3 mod 2 and
    condition (a).

    ``restrict`` is None, ``"first"`` (v0 v0' odd), ``"second"`` (v1 v1' odd)
    or ``"both"``.
    """
    if restrict not in (None, "first", "second", "both"):
        raise DomainError(f"unknown restriction {restrict!r}")
    vecs = [v for v in cartesian((0, 2, 3), repeat=4) if (v[0] - v[2]) % 2 == 0 and (v[1] - v[3]) % 2 == 0]
    count = 0
    for v in vecs:
        for w in vecs:
            first = v[0] * w[0] % 2 == 1
            second = v[1] * w[1] % 2 == 1
            ok = {
                None: first or second,
                "first": first,
                "second": second,
                "both": first and second,
            }[restrict]
            count += ok
    return count


# ---------------------------------------------------------------------------
# product lower bound

def _tail_deficit(cut: int, m: int) -> Fraction:
    """Upper bound for sum over primes l > cut of 2 l^-(1+m) + (2/l)^l.

    Uses integral comparison for the first part, (2/l)^l <= l^-4 for l >= 7
    and the exact (2/5)^5 when 5 lies above the cut.
    """
    first = Fraction(2, m * cut**m)
    extra = Fraction(0)
    if cut < 5:
        extra += Fraction(2, 5) ** 5
    N = max(cut + 1, 7)
    extra += Fraction(1, 3 * (N - 1) ** 3)
    return first + extra


def product_lower_bound(d1: int, d2: int, ell_cut: int = 13) -> RationalInterval:
    """Enclosure of sigma_2 * prod_{3<=l<=1+min d}(1 - ((2l-1)/l^2)^l)
    * prod_{l>1+min d} max(0, delta2_lower(l, d1, d2)).

    Factors with l <= ``ell_cut`` are exact; the rest lie in
    [1 - deficit, 1].
    """
    if ell_cut < 3:
        raise DomainError("cut must be at least 3")
    if min(d1, d2) < 1:
        raise DomainError("degrees must be positive")
    m = min(d1, d2)
    head = sigma2(d1, d2) if min(d1, d2) < 3 else SIGMA2
    for ell in primes_up_to(ell_cut):
        if ell == 2:
            continue
        if ell <= 1 + m:
            head *= delta_closed_small(ell, 2)
        else:
            head *= delta2_lower(ell, d1, d2)
    low_tail = max(Fraction(0), 1 - _tail_deficit(ell_cut, m))
    return RationalInterval(head * low_tail, head)


# ---------------------------------------------------------------------------
# the limit constant

def _small_factor(ell: int) -> Fraction:
    return 1 - (Fraction(2, ell) - Fraction(1, ell * ell)) ** ell


def P0_exact() -> Fraction:
    out = SIGMA2
    for ell in (3, 5, 7, 11, 13):
        out *= _small_factor(ell)
    return out


_GRID = 40  # decimal grid for outward-rounded endpoints


def tail_product(cutoff: int = 1000) -> RationalInterval:
    """Enclosure of prod over primes l >= 17 of (1 - l^-4).

    Exact up to ``cutoff``; beyond it the product over all integers n > cutoff
    is at least 1 - 1/(3 cutoff^3).
    """
    exact = Fraction(1)
    for ell in primes_up_to(cutoff):
        if ell >= 17:
            exact *= 1 - Fraction(1, ell**4)
    lo = exact * (1 - Fraction(1, 3 * cutoff**3))
    return RationalInterval(Fraction(decimal_string(lo, _GRID, up=False)), min(Fraction(1), Fraction(decimal_string(exact, _GRID, up=True))))


def tight_enclosure(cutoff: int = 61) -> RationalInterval:
    """Enclosure of the limit constant itself, with factors exact below ``cutoff``
    and sum_{n>cutoff} (2/n)^n bounded by a geometric series."""
    exact = P0_exact()
    for ell in primes_up_to(cutoff):
        if ell >= 17:
            exact *= _small_factor(ell)
    N = cutoff + 1
    rest = Fraction(2, N) ** N / (1 - Fraction(2, N))
    return RationalInterval(exact * (1 - rest), exact)


@dataclass(frozen=True)
class Check:
    name: str
    statement: str
    holds: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "statement": self.statement, "holds": self.holds, "detail": self.detail}


@dataclass(frozen=True)
class LimitConstant:
    P0: RationalInterval
    tail: RationalInterval
    P: RationalInterval
    P_tight: RationalInterval
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.holds for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "P0": self.P0.to_dict(12),
            "tail": self.tail.to_dict(12),
            "P_bracket": self.P.to_dict(12),
            "P_tight": self.P_tight.to_dict(16),
            "checks": [c.to_dict() for c in self.checks],
        }


def _open(x: RationalInterval, lo: str, hi: str) -> bool:
    return Fraction(lo) < x.lo and x.hi < Fraction(hi)


def limit_constant(cutoff: int = 1000, strict: bool = False) -> LimitConstant:
    """P0, the tail product, the bracket [P0 * tail.lo, P0] and their checks.

    ``P_tight`` encloses the constant directly. With ``strict`` a failed check
    raises :class:`InvariantViolation`.
    """
    p0 = P0_exact()
    P0 = RationalInterval.point(p0)
    tail = tail_product(cutoff)
    P = RationalInterval(Fraction(decimal_string(p0 * tail.lo, _GRID, up=False)), p0)
    tight = tight_enclosure()
    checks = (
        Check("P0_range", "0.3504 < P0 < 0.3505", _open(P0, "0.3504", "0.3505"), " .. ".join(P0.decimal(12))),
        Check("P0_width", "width(P0) <= 1e-6", P0.width <= Fraction(1, 10**6), str(P0.width)),
        Check("tail_range", "0.9999723 < tail < 0.9999724", _open(tail, "0.9999723", "0.9999724"),
              " .. ".join(tail.decimal(12))),
        Check("tail_width", "width(tail) <= 1e-7", tail.width <= Fraction(1, 10**7),
              decimal_string(tail.width, 15, up=True)),
        Check("bracket_lower", "0.3503 < P.lo", P.lo > Fraction("0.3503"), P.decimal(12)[0]),
        Check("bracket_upper", "P.hi < 0.3504", P.hi < Fraction("0.3504"), P.decimal(12)[1]),
        Check("tight_inside_bracket", "P_tight within [P0 * tail.lo, P0]", P.contains(tight),
              " .. ".join(tight.decimal(16))),
    )
    result = LimitConstant(P0, tail, P, tight, checks)
    if strict and not result.ok:
        failed = ", ".join(c.name for c in checks if not c.holds)
        raise InvariantViolation(f"limit constant checks failed: {failed}")
    return result


# ---------------------------------------------------------------------------
# Monte Carlo

@dataclass(frozen=True)
class McEstimate:
    samples: int
    successes: int
    seed: int
    estimate: Fraction
    stderr: Fraction
    lower_bound: Fraction | None = None
    exhaustive: bool = False
    outcomes: dict = field(default_factory=dict)

    @property
    def gap(self) -> Fraction | None:
        return None if self.lower_bound is None else self.estimate - self.lower_bound

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "successes": self.successes,
            "seed": self.seed,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "exhaustive": self.exhaustive,
            "product_lower_bound": self.lower_bound,
            "gap": self.gap,
            "decimal": {
                "estimate": decimal_string(self.estimate, 6, up=False),
                "product_lower_bound": None if self.lower_bound is None else decimal_string(self.lower_bound, 6, up=False),
                "gap": None if self.gap is None else decimal_string(self.gap, 6, up=False),
            },
            "outcomes": dict(sorted(self.outcomes.items())),
        }


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), index]))


def _random_poly(gen: np.random.Generator, d: int, H: int) -> IntPoly:
    c = gen.integers(-H, H, size=d, endpoint=True).tolist()
    lead = int(gen.integers(1, H, endpoint=True))
    return IntPoly(tuple(int(x) for x in c) + (lead,))


def sample_pair(seed: int, index: int, d1: int, d2: int, H: int) -> tuple[IntPoly, IntPoly]:
    """The pair for sample ``index``: a pure function of (seed, index)."""
    gen = _rng(seed, index)
    return _random_poly(gen, d1, H), _random_poly(gen, d2, H)


def _box(d: int, H: int) -> Iterator[IntPoly]:
    for lead in range(1, H + 1):
        for low in cartesian(range(-H, H + 1), repeat=d):
            yield IntPoly(tuple(low) + (lead,))


def _outcome(P1: IntPoly, P2: IntPoly, m_max: int | None) -> str:
    from .bundle import ConicBundleProblem, ConicSolution, Obstruction, solve_conic_bundle

    try:
        res = solve_conic_bundle(ConicBundleProblem((1, 1, -1), ((P1,), (P2,), ())), m_max)
    except DomainError:
        return "not_schinzel"
    if isinstance(res, ConicSolution):
        return "solved"
    if isinstance(res, Obstruction):
        return "obstructed"
    return "exhausted"


def _tally(pairs: Sequence[tuple[IntPoly, IntPoly]], m_max: int | None) -> dict[str, int]:
    out: dict[str, int] = {}
    for P1, P2 in pairs:
        k = _outcome(P1, P2, m_max)
        out[k] = out.get(k, 0) + 1
    return out


def monte_carlo(
    d1: int,
    d2: int,
    H: int,
    samples: int,
    seed: int = 0,
    m_max: int | None = 2000,
    threads: int = 1,
    exhaustive: bool = False,
    ell_cut: int = 13,
) -> McEstimate:
    """Fraction of pairs (degrees exactly d1, d2, coefficients in [-H, H],
    positive leading coefficients) for which the conic bundle pipeline finds
    a verified solution.

    With ``exhaustive`` every pair in the box is tried and ``samples`` is
    ignored. The result is independent of ``threads``.
    """
    if H < 1:
        raise DomainError("H must be >= 1")
    if d1 < 1 or d2 < 1:
        raise DomainError("degrees must be positive")
    if exhaustive:
        pairs = [(P1, P2) for P1 in _box(d1, H) for P2 in _box(d2, H)]
    else:
        if samples < 1:
            raise DomainError("samples must be >= 1")
        pairs = [sample_pair(seed, i, d1, d2, H) for i in range(samples)]
    threads = max(1, threads)
    chunks = [pairs[k::threads] for k in range(threads)]
    if threads == 1:
        parts = [_tally(pairs, m_max)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ch: _tally(ch, m_max), chunks))
    outcomes: dict[str, int] = {}
    for part in parts:
        for k, v in part.items():
            outcomes[k] = outcomes.get(k, 0) + v
    n = len(pairs)
    hits = outcomes.get("solved", 0)
    est = Fraction(hits, n)
    var = float(est * (1 - est)) / n
    stderr = Fraction(math.sqrt(var)).limit_denominator(10**12)
    bound = product_lower_bound(d1, d2, ell_cut).lo
    return McEstimate(n, hits, seed, est, stderr, bound, exhaustive, outcomes)
