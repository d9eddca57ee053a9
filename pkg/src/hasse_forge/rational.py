"""Closed intervals with exact rational endpoints, and outward decimal rounding."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import DomainError

__all__ = ["RationalInterval", "decimal_string", "mpf_to_fraction", "iv_to_interval"]


def decimal_string(x: Fraction, digits: int, up: bool) -> str:
    """``x`` rounded to ``digits`` decimals, toward +inf if ``up`` else toward -inf."""
    x = Fraction(x)
    scale = 10**digits
    num = x * scale
    k = math.ceil(num) if up else math.floor(num)
    sign = "-" if k < 0 else ""
    k = abs(k)
    whole, frac = divmod(k, scale)
    return f"{sign}{whole}.{frac:0{digits}d}" if digits else f"{sign}{whole}"


def mpf_to_fraction(x) -> Fraction:
    """Exact value of a finite mpmath float or raw mpf tuple, at its own precision."""
    raw = x if isinstance(x, tuple) else x._mpf_
    sign, man, exp, _ = raw
    if man == 0 and exp != 0:
        raise DomainError("infinite or NaN endpoint")
    value = Fraction(int(man)) * (Fraction(2) ** int(exp))
    return -value if sign else value


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: Fraction) -> "RationalInterval":
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Fraction | "RationalInterval") -> bool:
        if isinstance(x, RationalInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def __mul__(self, other: "RationalInterval") -> "RationalInterval":
        ends = [a * b for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
        return RationalInterval(min(ends), max(ends))

    def outward(self, digits: int) -> "RationalInterval":
        """Wider interval with endpoints on the grid 10^-digits."""
        return RationalInterval(Fraction(decimal_string(self.lo, digits, up=False)),
                                Fraction(decimal_string(self.hi, digits, up=True)))

    def decimal(self, digits: int = 12) -> tuple[str, str]:
        """Outward-rounded decimal enclosure."""
        return decimal_string(self.lo, digits, up=False), decimal_string(self.hi, digits, up=True)

    def to_dict(self, digits: int = 12) -> dict:
        lo, hi = self.decimal(digits)
        return {
            "lo": f"{self.lo.numerator}/{self.lo.denominator}",
            "hi": f"{self.hi.numerator}/{self.hi.denominator}",
            "decimal": [lo, hi],
        }


def iv_to_interval(x) -> RationalInterval:
    """Exact rational version of an mpmath ``iv`` interval."""
    lo, hi = x._mpi_
    return RationalInterval(mpf_to_fraction(lo), mpf_to_fraction(hi))
