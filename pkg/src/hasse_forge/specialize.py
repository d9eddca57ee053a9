"""Prime specializations of polynomial tuples with prescribed Legendre symbols.

Given polynomials P_1..P_n, a modulus M and residue m0, :func:`search` finds
the least m >= 1 with m = m0 (mod M) such that the values P_i(m) are distinct
primes and (P_i(m) / P_j(m)) equals a target sign for every i < j. Size
conditions relating m and min P_i(m) to the height are evaluated with interval
arithmetic and recorded, but never decide success.

Indices are 0-based throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import mpmath

from .errors import DomainError
from .ffpoly import schinzel_witness
from .intmath import IntPoly, is_prime, legendre, primality_is_proven
from .rational import RationalInterval, iv_to_interval

__all__ = [
    "SymbolTargets",
    "SearchSpec",
    "BoundRecord",
    "Certificate",
    "Exhausted",
    "tuple_height",
    "default_m_max",
    "bound_records",
    "log_power_verdict",
    "explain",
    "search",
    "verify",
    "certificate_to_json",
    "targets_from_list",
]

SymbolTargets = Mapping[tuple[int, int], int]


def tuple_height(polys: Sequence[IntPoly]) -> int:
    return max(P.height for P in polys)


def _pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


# ---------------------------------------------------------------------------
# interval verdicts on real-valued bounds

_PRECISIONS = (64, 128, 256, 512, 1024)
_DIGITS = 15


def _log_power(H: int, exponent: Fraction, prec: int) -> mpmath.ctx_iv.ivmpf:
    ctx = mpmath.iv
    ctx.prec = prec
    if H == 1:
        # log 1 = 0 exactly
        return ctx.mpf(0) if exponent > 0 else ctx.mpf(1)
    e = ctx.mpf(exponent.numerator) / exponent.denominator
    return ctx.exp(e * ctx.log(ctx.log(ctx.mpf(H))))


def _enclose(H: int, exponent: Fraction, scale: int, prec: int) -> RationalInterval:
    """Outward-rounded enclosure of scale * (log H)^exponent."""
    return iv_to_interval(_log_power(H, exponent, prec) * scale)


def log_power_verdict(lhs: int, H: int, exponent: Fraction, scale: int) -> tuple[str, RationalInterval]:
    """Decide lhs > scale*(log H)^exponent. Returns the verdict (``"gt"``,
    ``"le"`` or ``"undecided"``) and the final enclosure of the right side."""
    for prec in _PRECISIONS:
        box = _enclose(H, exponent, scale, prec)
        if lhs > box.hi:
            return "gt", box
        if lhs <= box.lo:
            return "le", box
    return "undecided", box


@dataclass(frozen=True)
class BoundRecord:
    """One size condition evaluated at a found m.

    ``lhs`` is the integer side; ``rhs_lo``/``rhs_hi`` enclose the real side.
    """

    name: str
    statement: str
    lhs: int
    rhs_lo: str
    rhs_hi: str
    holds: bool | None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statement": self.statement,
            "lhs": self.lhs,
            "rhs_decimal": [self.rhs_lo, self.rhs_hi],
            "holds": self.holds,
        }


def bound_records(polys: Sequence[IntPoly], m: int, epsilon: Fraction) -> tuple[BoundRecord, BoundRecord]:
    H = tuple_height(polys)
    n = len(polys)
    low = min(P(m) for P in polys)
    v1, box1 = log_power_verdict(low, H, epsilon / 2, H)
    v2, box2 = log_power_verdict(m, H, n + epsilon, 1)
    return (
        BoundRecord(
            "min_value", f"min P_i(m) > |P| (log |P|)^({epsilon / 2})", low,
            *box1.decimal(_DIGITS), None if v1 == "undecided" else v1 == "gt",
        ),
        BoundRecord(
            "m_size", f"m <= (log |P|)^({n + epsilon})", m,
            *box2.decimal(_DIGITS), None if v2 == "undecided" else v2 == "le",
        ),
    )


def default_m_max(polys: Sequence[IntPoly], M: int) -> int:
    """max(ceil((log|P|)^(n+1)), 10^4 * M)."""
    H = tuple_height(polys)
    n = len(polys)
    hi = _enclose(H, Fraction(n + 1), 1, 128).hi
    return max(math.ceil(hi), 10**4 * M)


# ---------------------------------------------------------------------------
# specification, results

@dataclass(frozen=True)
class SearchSpec:
    polys: tuple[IntPoly, ...]
    M: int
    m0: int
    targets: Mapping[tuple[int, int], int]
    m_max: int | None = None
    epsilon: Fraction = Fraction(1, 2)

    def __post_init__(self) -> None:
        object.__setattr__(self, "polys", tuple(self.polys))
        object.__setattr__(self, "m0", self.m0 % self.M if self.M >= 1 else self.m0)
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        object.__setattr__(self, "targets", dict(self.targets))
        if not self.polys:
            raise DomainError("empty polynomial tuple")
        if self.M < 1:
            raise DomainError(f"M must be >= 1, got {self.M}")
        if self.epsilon <= 0:
            raise DomainError("epsilon must be positive")
        if self.m_max is not None and self.m_max < 1:
            raise DomainError("m_max must be >= 1")
        need = set(_pairs(len(self.polys)))
        if set(self.targets) != need:
            raise DomainError(f"targets must cover exactly the pairs {sorted(need)}")
        if any(s not in (1, -1) for s in self.targets.values()):
            raise DomainError("targets must be +1 or -1")

    @property
    def n(self) -> int:
        return len(self.polys)

    @property
    def limit(self) -> int:
        return self.m_max if self.m_max is not None else default_m_max(self.polys, self.M)


@dataclass(frozen=True)
class Certificate:
    m: int
    primes: tuple[int, ...]
    symbols: dict[tuple[int, int], int]
    bounds: tuple[BoundRecord, ...]
    primality: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "primes": list(self.primes),
            "primality": list(self.primality),
            "symbols": {f"{i},{j}": s for (i, j), s in sorted(self.symbols.items())},
            "bounds": [b.to_dict() for b in self.bounds],
        }


@dataclass(frozen=True)
class Exhausted:
    """No qualifying m up to ``m_max``; ``diagnostics`` names any residue-class
    obstruction (a fixed common factor of P_i(m) and M)."""

    m_max: int
    scanned: int
    diagnostics: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {"exhausted": True, "m_max": self.m_max, "scanned": self.scanned,
                "diagnostics": list(self.diagnostics)}


def _jsonable(x):
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    raise TypeError(f"cannot serialise {type(x).__name__}")


def certificate_to_json(cert: Certificate) -> str:
    """Canonical JSON: sorted keys, integers as decimal strings."""
    return json.dumps(_jsonable(cert.to_dict()), sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# the scan

def explain(spec: SearchSpec, m: int) -> str | None:
    """Reason why ``m`` fails the conditions, or None if it qualifies."""
    if m < 1:
        return "m must be a positive integer"
    if (m - spec.m0) % spec.M:
        return f"m = {m} is not {spec.m0} mod {spec.M}"
    values = [P(m) for P in spec.polys]
    for i, v in enumerate(values):
        if not is_prime(v):
            return f"P_{i}({m}) = {v} is not prime"
    if len(set(values)) < len(values):
        return f"values {values} are not distinct"
    for i, j in _pairs(spec.n):
        if values[j] == 2:
            return f"P_{j}({m}) = 2 has no Legendre symbol"
        s = legendre(values[i], values[j])
        if s != spec.targets[(i, j)]:
            return f"({values[i]}/{values[j]}) = {s}, target {spec.targets[(i, j)]}"
    return None


def _residue_diagnostics(spec: SearchSpec) -> list[str]:
    out = []
    for i, P in enumerate(spec.polys):
        g = math.gcd(P(spec.m0), spec.M)
        if g > 1:
            out.append(f"gcd(P_{i}(m0), M) = {g}: P_{i}(m) is divisible by {g} on the whole class")
    return out


def _certify(spec: SearchSpec, m: int) -> Certificate:
    values = tuple(P(m) for P in spec.polys)
    symbols = {(i, j): legendre(values[i], values[j]) for i, j in _pairs(spec.n)}
    kinds = tuple("deterministic" if primality_is_proven(v) else "probable" for v in values)
    return Certificate(m, values, symbols, bound_records(spec.polys, m, spec.epsilon), kinds)


def search(spec: SearchSpec) -> Certificate | Exhausted:
    w = schinzel_witness(spec.polys)
    if w is not None:
        raise DomainError(f"not a Schinzel tuple: {w.reason}")
    limit = spec.limit
    first = spec.m0 if spec.m0 >= 1 else spec.M
    scanned = 0
    for m in range(first, limit + 1, spec.M):
        scanned += 1
        if explain(spec, m) is None:
            return _certify(spec, m)
    return Exhausted(limit, scanned, tuple(_residue_diagnostics(spec)))


def verify(cert: Certificate, spec: SearchSpec) -> bool:
    """Re-check every field of ``cert`` against ``spec``."""
    try:
        if explain(spec, cert.m) is not None:
            return False
        if tuple(cert.primes) != tuple(P(cert.m) for P in spec.polys):
            return False
        expected = _certify(spec, cert.m)
    except DomainError:
        return False
    return (
        dict(cert.symbols) == expected.symbols
        and tuple(cert.bounds) == expected.bounds
        and tuple(cert.primality) == expected.primality
    )


def targets_from_list(n: int, signs: Iterable[int]) -> dict[tuple[int, int], int]:
    """Targets from signs listed in lexicographic pair order."""
    signs = list(signs)
    pairs = _pairs(n)
    if len(signs) != len(pairs):
        raise DomainError(f"need {len(pairs)} target signs, got {len(signs)}")
    return dict(zip(pairs, signs))

