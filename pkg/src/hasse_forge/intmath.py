"""Exact integer arithmetic: primality, quadratic symbols, Hilbert symbols and
integer polynomials (resultants, discriminants, heights).

Everything here is a pure function of its arguments and works on Python's
arbitrary-precision ``int``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Union

from sympy import factorint

from .errors import DomainError

__all__ = [
    "INF",
    "Place",
    "IntPoly",
    "is_prime",
    "primality_is_proven",
    "jacobi",
    "legendre",
    "hilbert",
    "hilbert_places",
    "valuation",
    "factor",
    "prime_divisors",
    "squarefree_decomposition",
    "is_padic_square",
    "resultant",
    "discriminant",
    "height",
    "primes_up_to",
]

INF = "inf"
"""The real place of Q."""

Place = Union[int, str]


# ---------------------------------------------------------------------------
# primality

def primes_up_to(n: int) -> list[int]:
    """All primes ``<= n`` by the sieve of Eratosthenes."""
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, n + 1, i)))
    return [i for i, flag in enumerate(sieve) if flag]


_SMALL_PRIMES = primes_up_to(1000)
_SMALL_LIMIT = 1000 * 1000
# Jaeschke / Sorenson-Webster: these bases decide every n < 3.3e24 > 2**64.
_DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_EXTRA_ROUNDS = 64  # 4**-64 = 2**-128 on top of Baillie-PSW


def _strong_probable_prime(n: int, base: int, d: int, s: int) -> bool:
    x = pow(base, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def _strong_lucas_probable_prime(n: int) -> bool:
    # Selfridge's method A for the parameters.
    if math.isqrt(n) ** 2 == n:
        return False
    D = 5
    while True:
        j = jacobi(D, n)
        if j == -1:
            break
        if j == 0 and abs(D) != n:
            return False
        D = -D - 2 if D > 0 else -D + 2
    P, Q = 1, (1 - D) // 4

    d, s = n + 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1

    def half(x: int) -> int:
        return (x + n if x & 1 else x) // 2 % n

    U, V, Qk = 1, P, Q % n
    for bit in bin(d)[3:]:
        U, V = U * V % n, (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if bit == "1":
            U, V = half(P * U + V), half(D * U + P * V)
            Qk = Qk * Q % n
    if U == 0 or V == 0:
        return True
    for _ in range(s - 1):
        V = (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if V == 0:
            return True
    return False


def is_prime(n: int) -> bool:
    """Return True iff ``n`` is a prime number (negative numbers are never prime).

    The answer is proven for ``n < 2**64`` (deterministic Miller-Rabin bases).
    Above that the test is Baillie-PSW followed by 64 extra Miller-Rabin rounds
    with bases derived from ``n``; the error probability is below ``2**-128``.
    Use :func:`primality_is_proven` to know which regime applied.
    """
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n < _SMALL_LIMIT:
        return True
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < 1 << 64:
        return all(_strong_probable_prime(n, b, d, s) for b in _DETERMINISTIC_BASES)
    if not _strong_probable_prime(n, 2, d, s):
        return False
    if not _strong_lucas_probable_prime(n):
        return False
    # bases from a fixed LCG seeded by n keep the verdict reproducible
    state = n % (1 << 61) or 1
    for _ in range(_EXTRA_ROUNDS):
        state = (state * 6364136223846793005 + 1442695040888963407) % (1 << 64)
        base = 2 + state % (n - 3)
        if not _strong_probable_prime(n, base, d, s):
            return False
    return True


def primality_is_proven(n: int) -> bool:
    """Whether :func:`is_prime` gives a proof (not a probable-prime verdict) for ``n``."""
    return n < 1 << 64


# ---------------------------------------------------------------------------
# quadratic symbols

def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd positive ``n``."""
    if n <= 0 or n % 2 == 0:
        raise DomainError(f"Jacobi symbol needs an odd positive modulus, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p): 0 if p | a, +1 for a nonzero square mod p, else -1.

    Raises :class:`DomainError` unless ``p`` is an odd prime.
    """
    if p == 2 or not is_prime(p):
        raise DomainError(f"Legendre symbol needs an odd prime, got {p}")
    return jacobi(a, p)


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise DomainError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _split(n: int, p: int) -> tuple[int, int]:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def _check_place(v: Place) -> None:
    if v == INF:
        return
    if not isinstance(v, int) or not is_prime(v):
        raise DomainError(f"not a place of Q: {v!r}")


def hilbert(a: int, b: int, v: Place) -> int:
    """Hilbert symbol (a, b)_v for nonzero integers at a place ``v``.

    ``v`` is a prime number or :data:`INF`. The result is +1 exactly when
    ``z^2 = a x^2 + b y^2`` has a nonzero solution over the completion of Q at v.
    """
    if a == 0 or b == 0:
        raise DomainError("Hilbert symbol needs nonzero arguments")
    _check_place(v)
    if v == INF:
        return -1 if a < 0 and b < 0 else 1
    p = v
    alpha, u = _split(a, p)
    beta, w = _split(b, p)
    if p == 2:
        u8, w8 = u % 8, w % 8
        eps_u, eps_w = (u8 - 1) // 2 % 2, (w8 - 1) // 2 % 2
        omega_u, omega_w = (u8 * u8 - 1) // 8 % 2, (w8 * w8 - 1) // 8 % 2
        e = eps_u * eps_w + alpha * omega_w + beta * omega_u
        return -1 if e % 2 else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    if beta % 2:
        sign *= jacobi(u, p)
    if alpha % 2:
        sign *= jacobi(w, p)
    return sign


def hilbert_places(*values: int) -> list[Place]:
    """Places where a Hilbert symbol of the given integers can be nontrivial:
    the real place first, then the primes dividing ``2 * prod(values)``."""
    primes = {2}
    for n in values:
        primes.update(prime_divisors(n))
    return [INF, *sorted(primes)]


def is_padic_square(n: int, v: Place) -> bool:
    """Whether the nonzero integer ``n`` is a square in Q_v."""
    if n == 0:
        raise DomainError("0 has no square class")
    _check_place(v)
    if v == INF:
        return n > 0
    e, u = _split(n, v)
    if e % 2:
        return False
    if v == 2:
        return u % 8 == 1
    return jacobi(u, v) == 1


# ---------------------------------------------------------------------------
# factoring helpers (small inputs; not meant for cryptographic sizes)

@lru_cache(maxsize=4096)
def _factor_cached(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(factorint(n).items()))


def factor(n: int) -> dict[int, int]:
    """Prime factorization of ``|n|`` as ``{prime: exponent}``."""
    if n == 0:
        raise DomainError("cannot factor 0")
    return dict(_factor_cached(abs(n)))


def prime_divisors(n: int) -> list[int]:
    return sorted(factor(n))


def squarefree_decomposition(n: int) -> tuple[int, int]:
    """Write ``n = core * root**2`` with ``core`` squarefree (sign kept) and ``root > 0``."""
    if n == 0:
        raise DomainError("0 has no squarefree part")
    core, root = (1 if n > 0 else -1), 1
    for p, e in factor(n).items():
        root *= p ** (e // 2)
        if e % 2:
            core *= p
    return core, root


# ---------------------------------------------------------------------------
# integer polynomials

_TERM = re.compile(r"([+-]?)(\d*)(t?)(?:\^(\d+))?")


@dataclass(frozen=True)
class IntPoly:
    """Dense polynomial in ``t`` with integer coefficients, constant term first."""

    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        c = list(int(x) for x in self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def of(cls, *coeffs: int) -> "IntPoly":
        return cls(tuple(coeffs))

    @classmethod
    def parse(cls, text: str) -> "IntPoly":
        """Parse ``"c0,c1,..."`` (constant first) or a human form like ``"t^2+3t+1"``."""
        s = text.replace(" ", "").replace("*", "")
        if not s:
            raise DomainError("empty polynomial")
        if "," in s or re.fullmatch(r"[+-]?\d+", s):
            try:
                return cls(tuple(int(x) for x in s.split(",")))
            except ValueError as exc:
                raise DomainError(f"bad coefficient list {text!r}") from exc
        coeffs: dict[int, int] = {}
        pos = 0
        while pos < len(s):
            m = _TERM.match(s, pos)
            if m is None or m.end() == pos or (not m.group(2) and not m.group(3)):
                raise DomainError(f"cannot parse polynomial {text!r}")
            sign, num, var, exp = m.groups()
            if exp and not var:
                raise DomainError(f"cannot parse polynomial {text!r}")
            c = int(num) if num else 1
            if sign == "-":
                c = -c
            k = (int(exp) if exp else 1) if var else 0
            coeffs[k] = coeffs.get(k, 0) + c
            pos = m.end()
        top = max(coeffs)
        return cls(tuple(coeffs.get(k, 0) for k in range(top + 1)))

    # -- basic structure ---------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        if not self.coeffs:
            raise DomainError("the zero polynomial has no degree")
        return len(self.coeffs) - 1

    @property
    def lc(self) -> int:
        if not self.coeffs:
            raise DomainError("the zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    @property
    def height(self) -> int:
        return height(self)

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = math.gcd(g, c)
        return g

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "IntPoly":
        return IntPoly(tuple(k * c for k, c in enumerate(self.coeffs))[1:])

    def __add__(self, other: "IntPoly") -> "IntPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return IntPoly(tuple(x + y for x, y in zip(a, b)))

    def __neg__(self) -> "IntPoly":
        return IntPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "IntPoly") -> "IntPoly":
        return self + (-other)

    def __mul__(self, other: Union["IntPoly", int]) -> "IntPoly":
        if isinstance(other, int):
            return IntPoly(tuple(other * c for c in self.coeffs))
        if self.is_zero or other.is_zero:
            return IntPoly(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    out[i + j] += x * y
        return IntPoly(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "IntPoly":
        out = IntPoly((1,))
        for _ in range(k):
            out = out * self
        return out

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            mag = abs(c)
            body = f"{mag}{mono}" if (mag != 1 or not mono) else mono
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


def product(polys: Iterable[IntPoly]) -> IntPoly:
    out = IntPoly((1,))
    for p in polys:
        out = out * p
    return out


def height(P: IntPoly) -> int:
    """Maximum absolute value of the coefficients."""
    if P.is_zero:
        raise DomainError("height of the zero polynomial is undefined here")
    return max(abs(c) for c in P.coeffs)


def _trim(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _prem(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Pseudo-remainder: lc(b)^(deg a - deg b + 1) * a mod b."""
    db = len(b) - 1
    lb = b[-1]
    r = list(a)
    e = len(a) - len(b) + 1
    while r and len(r) - 1 >= db:
        lr = r[-1]
        shift = len(r) - 1 - db
        r = [lb * c for c in r]
        for i, c in enumerate(b):
            r[i + shift] -= lr * c
        _trim(r)
        e -= 1
    f = lb**e
    return [f * c for c in r]


def _content(c: Sequence[int]) -> int:
    g = 0
    for x in c:
        g = math.gcd(g, x)
    return g


def resultant(P: IntPoly, Q: IntPoly) -> int:
    """Res(P, Q) = lc(P)^deg(Q) * prod Q(alpha) over the roots alpha of P.

    Computed exactly with the subresultant pseudo-remainder sequence.
    """
    if P.is_zero or Q.is_zero:
        raise DomainError("resultant of the zero polynomial")
    A, B = list(P.coeffs), list(Q.coeffs)
    if len(A) == 1:
        return A[0] ** (len(B) - 1)
    if len(B) == 1:
        return B[0] ** (len(A) - 1)
    s = 1
    if len(A) < len(B):
        A, B = B, A
        if (len(A) - 1) % 2 and (len(B) - 1) % 2:
            s = -1
    a, b = _content(A), _content(B)
    A = [x // a for x in A]
    B = [x // b for x in B]
    t = a ** (len(B) - 1) * b ** (len(A) - 1)
    g = h = 1
    while True:
        dA, dB = len(A) - 1, len(B) - 1
        delta = dA - dB
        if dA % 2 and dB % 2:
            s = -s
        R = _prem(A, B)
        if not R:
            return 0
        A = B
        div = g * h**delta
        B = [x // div for x in R]
        g = A[-1]
        if delta:
            h = g**delta // h ** (delta - 1)
        if len(B) == 1:
            dA = len(A) - 1
            h = B[0] ** dA // h ** (dA - 1)
            return s * t * h


def discriminant(P: IntPoly) -> int:
    """disc(P) = (-1)^(d(d-1)/2) Res(P, P') / lc(P)."""
    d = P.degree
    if d < 1:
        raise DomainError("discriminant of a constant polynomial")
    r = resultant(P, P.derivative())
    sign = -1 if (d * (d - 1) // 2) % 2 else 1
    q, rem = divmod(sign * r, P.lc)
    assert rem == 0
    return q
