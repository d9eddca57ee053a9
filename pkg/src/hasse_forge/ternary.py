"""Diagonal ternary and quaternary quadratic forms over Z.

Local solubility is decided with Hilbert symbols; global solubility of a
ternary form is the conjunction over the places where a symbol can be
nontrivial. Integral zeros of soluble ternary forms are found by exhausting
the box of side ``40 * max|f_i|``, which (Cassels) always contains one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from sympy.ntheory import sqrt_mod

from .errors import DomainError, InvariantViolation
from .intmath import INF, Place, factor, hilbert, is_padic_square, prime_divisors

__all__ = [
    "TernaryForm",
    "QuaternaryForm",
    "TernarySolution",
    "Insoluble",
    "QuaternarySolution",
    "CASSELS_FACTOR",
    "cassels_bound",
    "reduce_squarefree",
    "lift_reduced_solution",
    "ternary_locally_soluble",
    "ternary_failing_places",
    "ternary_soluble",
    "ternary_solve",
    "quaternary_locally_isotropic",
    "quaternary_failing_places",
    "quaternary_soluble",
    "quaternary_solve",
]

CASSELS_FACTOR = 40


@dataclass(frozen=True)
class TernaryForm:
    f1: int
    f2: int
    f3: int

    def __post_init__(self) -> None:
        if 0 in self.coeffs:
            raise DomainError(f"form coefficients must be nonzero: {self.coeffs}")

    @property
    def coeffs(self) -> tuple[int, int, int]:
        return (self.f1, self.f2, self.f3)

    def __call__(self, x1: int, x2: int, x3: int) -> int:
        return self.f1 * x1 * x1 + self.f2 * x2 * x2 + self.f3 * x3 * x3


@dataclass(frozen=True)
class QuaternaryForm:
    g0: int
    g1: int
    g2: int
    g3: int

    def __post_init__(self) -> None:
        if 0 in self.coeffs:
            raise DomainError(f"form coefficients must be nonzero: {self.coeffs}")

    @property
    def coeffs(self) -> tuple[int, int, int, int]:
        return (self.g0, self.g1, self.g2, self.g3)

    def __call__(self, *x: int) -> int:
        return sum(g * v * v for g, v in zip(self.coeffs, x))


@dataclass(frozen=True)
class TernarySolution:
    x: tuple[int, int, int]

    @property
    def height(self) -> int:
        return max(self.x)


@dataclass(frozen=True)
class QuaternarySolution:
    x: tuple[int, int, int, int]
    bound: int
    heuristic: bool = True

    @property
    def within_bound(self) -> bool:
        return max(abs(v) for v in self.x) <= self.bound


@dataclass(frozen=True)
class Insoluble:
    """Certificate of insolubility: the reported place and every failing place."""

    place: Place
    failing: tuple[Place, ...]


def cassels_bound(form: TernaryForm) -> int:
    return CASSELS_FACTOR * max(abs(f) for f in form.coeffs)


# ---------------------------------------------------------------------------
# reduction

def reduce_squarefree(form: TernaryForm) -> tuple[TernaryForm, tuple[int, int, int]]:
    """Strip square factors: ``f_i = s_i^2 * r_i`` with ``r_i`` squarefree.

    Returns the reduced form and the multipliers ``s_i``; see
    :func:`lift_reduced_solution` for mapping solutions back.
    """
    from .intmath import squarefree_decomposition

    parts = [squarefree_decomposition(f) for f in form.coeffs]
    reduced = TernaryForm(*(core for core, _ in parts))
    return reduced, tuple(root for _, root in parts)  # type: ignore[return-value]


def lift_reduced_solution(y: Sequence[int], scaling: Sequence[int]) -> tuple[int, ...]:
    """Map a zero of the reduced form to a primitive zero of the original."""
    L = math.lcm(*scaling)
    x = [v * (L // s) for v, s in zip(y, scaling)]
    g = math.gcd(*x)
    if g == 0:
        raise DomainError("trivial solution")
    return tuple(v // g for v in x)


# ---------------------------------------------------------------------------
# local and global solubility

def ternary_locally_soluble(form: TernaryForm, v: Place) -> bool:
    f1, f2, f3 = form.coeffs
    return hilbert(-f1 * f3, -f2 * f3, v) == 1


def _bad_primes(coeffs: Sequence[int], primes: Iterable[int] | None) -> list[int]:
    """Primes dividing ``2 * prod(coeffs)``; ``primes`` may supply a known factor
    base. Anything it fails to account for is factored."""
    found = {2}
    if primes is not None:
        for c in coeffs:
            rest = abs(c)
            for p in primes:
                if rest % p == 0:
                    found.add(p)
                    while rest % p == 0:
                        rest //= p
            if rest > 1:
                found.update(prime_divisors(rest))
    else:
        for c in coeffs:
            found.update(prime_divisors(c))
    return sorted(found)


def _check_order(primes: list[int]) -> list[Place]:
    # odd primes carry residue-level certificates, so 2 is reported last
    return [INF, *(p for p in primes if p != 2), 2]


def ternary_failing_places(form: TernaryForm, primes: Iterable[int] | None = None) -> list[Place]:
    """Places where the form has no nontrivial zero, in reporting order
    (real place, odd primes ascending, then 2)."""
    places = _check_order(_bad_primes(form.coeffs, primes))
    return [v for v in places if not ternary_locally_soluble(form, v)]


def ternary_soluble(form: TernaryForm, primes: Iterable[int] | None = None) -> bool:
    return not ternary_failing_places(form, primes)


# ---------------------------------------------------------------------------
# bounded search

def _root(num: int, den: int) -> int | None:
    if num % den:
        return None
    q = num // den
    if q < 0:
        return None
    r = math.isqrt(q)
    return r if r * r == q else None


def _shell(f1: int, f2: int, f3: int, R: int) -> tuple[int, int, int] | None:
    """Least (x1, x2) zero with max coordinate exactly R."""
    cands = []
    RR = R * R
    for x2 in range(R + 1):
        x3 = _root(-(f1 * RR + f2 * x2 * x2), f3)
        if x3 is not None and x3 <= R:
            cands.append((R, x2, x3))
    for x1 in range(R):
        x3 = _root(-(f1 * x1 * x1 + f2 * RR), f3)
        if x3 is not None and x3 <= R:
            cands.append((x1, R, x3))
        x2 = _root(-(f1 * x1 * x1 + f3 * RR), f2)
        if x2 is not None and x2 < R:
            cands.append((x1, x2, R))
    cands = [c for c in cands if math.gcd(*c) == 1]
    return min(cands) if cands else None


_PY_SHELLS = 16
_CHUNK = 1 << 22


def _filter(f: Sequence[int], k: int) -> tuple[int, list[int]]:
    """Modulus F and residues S with x_j = s * x_l (mod F), s in S, for every
    primitive zero, where k is the coordinate solved for and (j, l) the others.

    Uses primes q with q || f_k and q coprime to f_j f_l: a primitive zero has
    q coprime to x_l, so x_j / x_l is a square root of -f_l / f_j mod q.
    """
    j, l = [i for i in range(3) if i != k]
    F, S = 1, [0]
    for q, e in factor(f[k]).items():
        if e != 1 or f[j] % q == 0 or f[l] % q == 0:
            continue
        target = (-f[l] * pow(f[j], -1, q)) % q
        roots = sorted(set(sqrt_mod(target, q, all_roots=True) or []))
        if not roots:
            return 1, []
        # combine residue sets by CRT
        S = sorted({(s * q * pow(q, -1, F) + r * F * pow(F, -1, q)) % (F * q) if F > 1 else r
                    for s in S for r in roots})
        F *= q
    return F, S


def _plan(f: Sequence[int]) -> tuple[int, int, list[int]]:
    """Coordinate to solve for, with its congruence filter; picks the best cut."""
    best = None
    for k in range(3):
        F, S = _filter(f, k)
        gain = Fraction(F, max(1, len(S)))
        if best is None or gain > best[0]:
            best = (gain, k, F, S)
    return best[1], best[2], best[3]


def _box_search(f: Sequence[int], L: int, plan: tuple[int, int, list[int]]) -> tuple[int, int, int] | None:
    """Least zero in [0, L]^3 under (max, x1, x2); the caller checks int64 safety."""
    k, F, S = plan
    if not S:
        return None
    j, l = [i for i in range(3) if i != k]
    fk, fj, fl = f[k], f[j], f[l]
    best = None
    xl_all = np.arange(L + 1, dtype=np.int64)
    S_arr = np.array(S, dtype=np.int64)
    K = L // F + 1
    steps = np.arange(K, dtype=np.int64) * F
    rows = max(1, _CHUNK // max(1, len(S) * K))
    for start in range(0, L + 1, rows):
        xl = xl_all[start : start + rows]
        base = (S_arr[:, None] * xl[None, :]) % F if F > 1 else np.zeros((1, len(xl)), dtype=np.int64)
        xj = base[:, :, None] + steps[None, None, :]
        XL = np.broadcast_to(xl[None, :, None], xj.shape)
        ok = xj <= L
        num = -(fj * xj * xj + fl * XL * XL)
        ok &= (num % fk == 0) & (num * np.sign(fk) >= 0)
        N = np.where(ok, num // fk, 0)
        xk = np.rint(np.sqrt(N.astype(np.float64))).astype(np.int64)
        ok &= (xk * xk == N) & (xk <= L)
        for idx in zip(*np.nonzero(ok)):
            x = [0, 0, 0]
            x[k], x[j], x[l] = int(xk[idx]), int(xj[idx]), int(XL[idx])
            if x == [0, 0, 0]:
                continue
            g = math.gcd(*x)
            x = [v // g for v in x]
            key = (max(x), x[0], x[1])
            if best is None or key < best[0]:
                best = (key, tuple(x))
    return None if best is None else best[1]


def _vector_safe(f: Sequence[int], L: int) -> bool:
    return 2 * max(abs(x) for x in f) * (L + 1) ** 2 < 1 << 52


def _first_zero(f1: int, f2: int, f3: int, bound: int) -> tuple[int, int, int] | None:
    f = (f1, f2, f3)
    for R in range(1, min(bound, _PY_SHELLS) + 1):
        hit = _shell(f1, f2, f3, R)
        if hit is not None:
            return hit
    if bound <= _PY_SHELLS:
        return None
    plan = _plan(f)
    a, b, c = sorted(abs(x) for x in f)
    L = max(2 * _PY_SHELLS, math.isqrt(c * b) + 1)
    while True:
        L = min(L, bound)
        if not _vector_safe(f, L):
            break
        hit = _box_search(f, L, plan)
        if hit is not None:
            return hit
        if L == bound:
            return None
        L *= 2
    # too large for int64 grids: exact shells in Python
    for R in range(_PY_SHELLS + 1, bound + 1):
        hit = _shell(f1, f2, f3, R)
        if hit is not None:
            return hit
    return None


def ternary_solve(form: TernaryForm, primes: Iterable[int] | None = None) -> TernarySolution | Insoluble:
    """A primitive nonnegative zero with max coordinate <= 40*max|f_i|, or an
    insolubility certificate.

    The zero returned is the least one under the order (max coordinate, x1, x2),
    so the output is deterministic.
    """
    failing = ternary_failing_places(form, primes)
    if failing:
        return Insoluble(failing[0], tuple(failing))
    bound = cassels_bound(form)
    hit = _first_zero(*form.coeffs, bound)
    if hit is None:
        raise InvariantViolation(f"locally soluble form {form.coeffs} has no zero within {bound}")
    if form(*hit) != 0:
        raise InvariantViolation(f"bad zero {hit} for {form.coeffs}")
    return TernarySolution(hit)


# ---------------------------------------------------------------------------
# quaternary forms

def quaternary_locally_isotropic(form: QuaternaryForm, p: int) -> bool:
    """Isotropy over Q_p from the discriminant square class and the Hasse invariant.

    A rank-4 form is anisotropic exactly when its discriminant is a square
    and its Hasse invariant differs from (-1, -1)_p.
    """
    g = form.coeffs
    if not is_padic_square(math.prod(g), p):
        return True
    hasse = 1
    for a, b in combinations(g, 2):
        hasse *= hilbert(a, b, p)
    return hasse == hilbert(-1, -1, p)


def quaternary_failing_places(form: QuaternaryForm, primes: Iterable[int] | None = None) -> list[Place]:
    g = form.coeffs
    out: list[Place] = []
    if all(x > 0 for x in g) or all(x < 0 for x in g):
        out.append(INF)
    for p in _check_order(_bad_primes(g, primes))[1:]:
        if not quaternary_locally_isotropic(form, p):
            out.append(p)
    return out


def quaternary_soluble(form: QuaternaryForm, primes: Iterable[int] | None = None) -> bool:
    return not quaternary_failing_places(form, primes)


def _binary_zero(g2: int, g3: int) -> tuple[int, int] | None:
    s = _root(-g2 * g3, 1)
    if s is None:
        return None
    g = math.gcd(s, g2)
    return s // g, abs(g2) // g


def quaternary_solve(
    form: QuaternaryForm,
    bound: int | None = None,
    scan_limit: int | None = None,
) -> QuaternarySolution | None:
    """Find a nontrivial integral zero of a diagonal quaternary form.

    Pairs (u, v) are scanned in order (max(u, v), u, v); for each, the ternary
    form (g0 u^2 + g1 v^2, g2, g3) is solved if soluble, giving the zero
    (u w, v w, x2, x3). ``bound`` defaults to ``40 * max|g_i|`` and is only a
    heuristic radius: the result records whether it was met. Returns None if
    the scan up to ``scan_limit`` finds nothing (isotropic forms always succeed
    for a large enough limit).
    """
    g0, g1, g2, g3 = form.coeffs
    if bound is None:
        bound = CASSELS_FACTOR * max(abs(v) for v in form.coeffs)
    if scan_limit is None:
        scan_limit = bound
    if not quaternary_soluble(form):
        return None
    b = _binary_zero(g2, g3)
    if b is not None:
        return QuaternarySolution((0, 0, *b), bound)
    for R in range(1, scan_limit + 1):
        pairs = [(R, v) for v in range(R + 1)] + [(u, R) for u in range(R)]
        for u, v in sorted(pairs):
            if math.gcd(u, v) != 1:
                continue
            c = g0 * u * u + g1 * v * v
            if c == 0:
                return QuaternarySolution((u, v, 0, 0), bound)
            tern = TernaryForm(c, g2, g3)
            if not ternary_soluble(tern):
                continue
            sol = ternary_solve(tern)
            assert isinstance(sol, TernarySolution)
            w, x2, x3 = sol.x
            x = (u * w, v * w, x2, x3)
            h = math.gcd(*x)
            x = tuple(t // h for t in x)
            if form(*x) != 0:
                raise InvariantViolation(f"bad quaternary zero {x} for {form.coeffs}")
            return QuaternarySolution(x, bound)  # type: ignore[arg-type]
    return None
