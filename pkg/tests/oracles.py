"""Independent reference implementations used to derive expected values.

Each oracle takes the slow, obvious route (direct enumeration, dense
determinants) and shares no code with the package beyond :class:`IntPoly`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import product as cartesian

import numpy as np
from scipy.fft import irfft, next_fast_len, rfft


# ---------------------------------------------------------------------------
# primality and symbols by definition

def is_prime_naive(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def legendre_naive(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if any(x * x % p == a for x in range(1, p)) else -1


def squarefree_part(n: int) -> int:
    """Signed squarefree kernel, by trial division."""
    sign = -1 if n < 0 else 1
    n = abs(n)
    out, d = 1, 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e % 2:
            out *= d
        d += 1
    return sign * out * n


# ---------------------------------------------------------------------------
# p-adic isotropy of diagonal forms by counting zeros mod p^k

def _modulus(p: int) -> int:
    # with squarefree coefficients a primitive zero mod p^3 (p odd) or 2^6
    # lifts by Hensel's lemma, and any p-adic zero reduces to one
    return p**3 if p > 2 else 2**6


def _indicator(values: np.ndarray, N: int) -> np.ndarray:
    out = np.zeros(N)
    out[values] = 1.0
    return out


def _group(coeffs: tuple[int, ...], p: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Residues sum g x^2 over the group's coordinates (one or two), split by
    whether some coordinate is a p-adic unit. Sumsets are linear convolutions
    at a smooth FFT length, folded back mod N."""
    xs = np.arange(N, dtype=np.int64)
    unit = xs % p != 0
    parts = []
    for g in coeffs:
        vals = g * xs % N * xs % N
        parts.append((_indicator(vals[~unit], N), _indicator(vals[unit], N)))
    if len(parts) == 1:
        sn, su = parts[0]
        return sn > 0.5, su > 0.5
    (n1, u1), (n2, u2) = parts
    L = next_fast_len(2 * N - 1, real=True)
    F = {k: rfft(v, L) for k, v in (("n1", n1), ("u1", u1), ("n2", n2), ("u2", u2))}
    plain = irfft(F["n1"] * F["n2"], L)
    prim = irfft(F["n1"] * F["u2"] + F["u1"] * (F["u2"] + F["n2"]), L)

    def fold(c):
        c = c[: 2 * N]
        c = np.pad(c, (0, 2 * N - len(c)))
        return (c[:N] + c[N:]) > 0.5

    return fold(plain), fold(prim)


def _scaled_group(coeffs: tuple[int, ...], p: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    if not all(g % p == 0 for g in coeffs):
        return _group(coeffs, p, N)
    small = N // p
    plain, prim = _group(tuple(g // p for g in coeffs), p, small)
    up = lambda v: np.bincount(np.flatnonzero(v) * p, minlength=N) > 0
    return up(plain), up(prim)


def _unit_pair_on_pZ(g1: int, g2: int, p: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Like :func:`_group` for two unit coefficients, but only correct on the
    multiples of p. Both summands then lie in opposite cosets of pZ, so each
    coset pair is a sumset over Z/(N/p)."""
    xs = np.arange(N, dtype=np.int64)
    unit = xs % p != 0
    small = N // p
    v1 = np.unique(g1 * xs[unit] % N * xs[unit] % N)
    v2 = np.unique(g2 * xs[unit] % N * xs[unit] % N)
    L = next_fast_len(2 * small - 1, real=True)
    rows1 = np.zeros((p, L))
    rows2 = np.zeros((p, L))
    rows1[v1 % p, v1 // p] = 1.0
    rows2[(-(v2 % p)) % p, v2 // p] = 1.0  # indexed by the class it pairs with
    c = irfft(rfft(rows1[1:], axis=1) * rfft(rows2[1:], axis=1), L, axis=1) > 0.5
    prim = np.zeros(N, dtype=bool)
    for r in range(1, p):
        w = np.flatnonzero(c[r - 1])
        # (r + p w1) + (r2 + p w2) with r + r2 = p
        prim[(p * (1 + w)) % N] = True
    nonunit = xs[~unit]
    n1 = _indicator(g1 * nonunit % N * nonunit % N, N) > 0.5
    n2 = _indicator(g2 * nonunit % N * nonunit % N, N) > 0.5
    supp1, supp2 = np.flatnonzero(n1), np.flatnonzero(n2)
    plain = np.zeros(N, dtype=bool)
    plain[np.unique((supp1[:, None] + supp2[None, :]) % N)] = True
    return plain, prim


@lru_cache(maxsize=None)
def _isotropic_key(key: tuple[int, ...], p: int) -> bool:
    """Primitive zero of sum g x^2 mod p^k, by exhaustive residues."""
    N = _modulus(p)
    # coefficients divisible by p go together: p g' x^2 mod N only depends on
    # g' x^2 mod N/p, so that group is enumerated over the smaller ring
    key = tuple(sorted(key, key=lambda g: g % p != 0))
    half = (len(key) + 1) // 2
    pa, qa = _scaled_group(key[:half], p, N)
    if half == 2 and key[0] % p == 0 and key[1] % p == 0 and all(g % p for g in key[2:]) and len(key) == 4:
        pb, qb = _unit_pair_on_pZ(key[2], key[3], p, N)
    else:
        pb, qb = _scaled_group(key[half:], p, N)
    # 0 in A + B  <=>  A meets -B
    neg = lambda v: np.roll(v[::-1], 1)
    return bool((qa & neg(pb | qb)).any() or (pa & neg(qb)).any())


def padic_isotropic(coeffs, p: int) -> bool:
    """Whether sum g_i x_i^2 has a nontrivial zero over Q_p."""
    return _isotropic_key(tuple(sorted(_square_class(g, p) for g in coeffs)), p)


def _square_class(g: int, p: int) -> int:
    """Small representative of the Q_p square class of g."""
    g = squarefree_part(g)
    v = 1 if g % p == 0 else 0
    u = g // p if v else g
    if p == 2:
        rep = u % 8
    else:
        rep = 1 if legendre_naive(u, p) == 1 else next(n for n in range(2, p) if legendre_naive(n, p) == -1)
    return rep * p**v


def real_isotropic(coeffs) -> bool:
    return min(coeffs) < 0 < max(coeffs)


def hilbert_naive(a: int, b: int, v) -> int:
    """(a, b)_v from isotropy of <a, b, -1>."""
    form = (a, b, -1)
    ok = real_isotropic(form) if v == "inf" else padic_isotropic(form, v)
    return 1 if ok else -1


# ---------------------------------------------------------------------------
# ternary forms by exhaustive search

def ternary_min_height(f, bound: int) -> int | None:
    """Least max|x_i| of a primitive zero with max|x_i| <= bound, or None."""
    f1, f2, f3 = f
    x = np.arange(bound + 1, dtype=np.int64)
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    num = -(f1 * X1 * X1 + f2 * X2 * X2)
    ok = num % f3 == 0
    z2 = np.where(ok, num // f3, -1)
    z = np.rint(np.sqrt(np.maximum(z2, 0))).astype(np.int64)
    hit = (z2 >= 0) & (z * z == z2) & (z <= bound)
    hit[0, 0] = False
    if not hit.any():
        return None
    i, j = np.nonzero(hit)
    zs = z[i, j]
    g = np.gcd(np.gcd(i, j), zs)
    keep = g == 1
    if not keep.any():
        return None
    return int(np.max(np.stack([i[keep], j[keep], zs[keep]]), axis=0).min())


# ---------------------------------------------------------------------------
# polynomials

def sylvester_resultant(p: list[int], q: list[int]) -> int:
    """Res(p, q) as the Sylvester determinant; coefficient lists low to high."""
    m, n = len(p) - 1, len(q) - 1
    size = m + n
    if size == 0:
        return 1
    rows = []
    hp, hq = p[::-1], q[::-1]
    for i in range(n):
        rows.append([0] * i + [Fraction(c) for c in hp] + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + [Fraction(c) for c in hq] + [0] * (size - n - 1 - i))
    det = Fraction(1)
    for c in range(size):
        piv = next((r for r in range(c, size) if rows[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            det = -det
        det *= rows[c][c]
        for r in range(c + 1, size):
            if rows[r][c]:
                k = rows[r][c] / rows[c][c]
                rows[r] = [a - k * b for a, b in zip(rows[r], rows[c])]
    return int(det)


def delta_naive(ell: int, degrees) -> Fraction:
    """Density of tuples (deg P_i <= d_i over F_ell) whose product is not
    identically zero as a function on F_ell, by listing every tuple."""
    polys = {d: list(cartesian(range(ell), repeat=d + 1)) for d in set(degrees)}

    def values(c):
        return tuple(sum(ci * pow(x, k, ell) for k, ci in enumerate(c)) % ell for x in range(ell))

    vals = {d: [values(c) for c in polys[d]] for d in polys}
    good = total = 0
    for tup in cartesian(*(vals[d] for d in degrees)):
        total += 1
        if any(all(v[x] != 0 for v in tup) for x in range(ell)):
            good += 1
    return Fraction(good, total)


def schinzel_naive(polys, limit: int = 60) -> bool:
    """Prime-by-prime: the product is not identically 0 on F_ell for ell <= limit
    (enough for the small degrees used in tests)."""
    for ell in range(2, limit + 1):
        if not is_prime_naive(ell):
            continue
        if all(any(P(x) % ell == 0 for P in polys) for x in range(ell)):
            return False
    return True


# ---------------------------------------------------------------------------
# the conic bundle z^2 = P1(t) x^2 + P2(t) y^2 by scanning t

def _fibre_locally_soluble(f, p: int) -> bool:
    if p < 50:
        return padic_isotropic(f, p)
    units = [x for x in f if x % p]
    return legendre_naive(-units[0] * units[1], p) == 1


def conic_bundle_solvable(P1, P2, limit: int = 2000) -> bool:
    """Some t <= limit has distinct prime values and a fibre soluble at 2, P1(t), P2(t)."""
    if not schinzel_naive([P1, P2]):
        return False
    for t in range(1, limit + 1):
        a, b = P1(t), P2(t)
        if a != b and is_prime_naive(a) and is_prime_naive(b):
            f = (a, b, -1)
            if all(_fibre_locally_soluble(f, p) for p in {2, a, b}):
                return True
    return False
