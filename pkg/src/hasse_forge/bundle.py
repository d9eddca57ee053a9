"""Diagonal conic and quadric bundles over the affine line.

The conic pipeline solves

    a1 prod_j P_1j(t) x1^2 + a2 prod_k P_2k(t) x2^2 + a3 prod_l P_3l(t) x3^2 = 0

by choosing local data (a residue m0 modulo M = 8|a1 a2 a3|), solving a
linear system over F_2 for the Legendre symbols that make every fibre prime
locally soluble, finding a prime specialization t = m with those symbols,
and then solving the resulting ternary form. The quadric pipeline does the
same for four coefficients, with a single prescribed symbol per doubly
occurring polynomial.

Block and polynomial indices are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from sympy import Poly, symbols

from .errors import DomainError, InvariantViolation
from .ffpoly import ModPoly, schinzel_witness
from .intmath import (
    INF,
    IntPoly,
    Place,
    discriminant,
    hilbert,
    legendre,
    prime_divisors,
    resultant,
    squarefree_decomposition,
)
from .specialize import (
    BoundRecord,
    Certificate,
    Exhausted,
    SearchSpec,
    log_power_verdict,
    search,
    tuple_height,
    verify,
)
from .ternary import (
    QuaternaryForm,
    TernaryForm,
    TernarySolution,
    quaternary_locally_isotropic,
    quaternary_solve,
    ternary_locally_soluble,
    ternary_solve,
)

__all__ = [
    "ConicBundleProblem",
    "QuadricBundleProblem",
    "NormalizedConic",
    "NormalizedQuadric",
    "LocalData",
    "F2System",
    "Obstruction",
    "SearchExhausted",
    "Unsupported",
    "ConicSolution",
    "QuadricSolution",
    "Genericity",
    "normalize_conic",
    "normalize_quadric",
    "conic_admissible",
    "local_data_from_values",
    "iter_local_data",
    "enumerate_local_data",
    "compute_lambda",
    "compute_lambda_tilde",
    "conic_system",
    "solve_targets",
    "search_targets",
    "solve_conic_bundle",
    "genericity_check",
    "classify_delta",
    "quadric_order",
    "quadric_targets",
    "quadric_local_data",
    "solve_quadric_bundle",
    "q2_locally_soluble",
]


def _bit(sign: int) -> int:
    return 0 if sign == 1 else 1


def _places_of(M: int) -> list[int]:
    return prime_divisors(M)


def _residue_modulus(p: int) -> int:
    # unit-valued local solubility depends on values mod p, or mod 8 at 2
    return 8 if p == 2 else p


# ---------------------------------------------------------------------------
# results shared by both pipelines

@dataclass(frozen=True)
class Obstruction:
    place: Place
    reason: str

    def to_dict(self) -> dict:
        return {"status": "obstruction", "place": self.place, "reason": self.reason}


@dataclass(frozen=True)
class SearchExhausted:
    m_max: int
    residues_tried: tuple[int, ...]
    diagnostics: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"status": "exhausted", "m_max": self.m_max,
                "residues_tried": list(self.residues_tried), "diagnostics": list(self.diagnostics)}


@dataclass(frozen=True)
class Unsupported:
    reason: str

    def to_dict(self) -> dict:
        return {"status": "unsupported", "reason": self.reason}


# ---------------------------------------------------------------------------
# conic bundles

@dataclass(frozen=True)
class ConicBundleProblem:
    """Coefficients ``a`` and three blocks of polynomials; the third may be empty.

    The sign condition on ``a`` is checked by the pipelines, which report an
    obstruction at the real place instead of rejecting the problem.
    """

    a: tuple[int, int, int]
    blocks: tuple[tuple[IntPoly, ...], tuple[IntPoly, ...], tuple[IntPoly, ...]]

    def __post_init__(self) -> None:
        a = tuple(int(x) for x in self.a)
        blocks = tuple(tuple(b) for b in self.blocks)
        if len(a) != 3 or 0 in a:
            raise DomainError(f"need three nonzero coefficients, got {self.a}")
        if len(blocks) != 3:
            raise DomainError("need exactly three blocks")
        if not blocks[0] or not blocks[1]:
            raise DomainError("the first two blocks must be nonempty")
        for b in blocks:
            for P in b:
                if P.is_zero or P.degree < 1:
                    raise DomainError(f"block polynomial {P} is constant")
                if P.lc <= 0:
                    raise DomainError(f"block polynomial {P} has nonpositive leading coefficient")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "blocks", blocks)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return tuple(len(b) for b in self.blocks)  # type: ignore[return-value]

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def flat(self) -> tuple[IntPoly, ...]:
        """The polynomials in lexicographic (block, position) order."""
        return tuple(P for b in self.blocks for P in b)

    @property
    def same_sign(self) -> bool:
        return all(x > 0 for x in self.a) or all(x < 0 for x in self.a)

    def fibre(self, t: int) -> tuple[int, int, int]:
        return tuple(ai * math.prod(P(t) for P in b) for ai, b in zip(self.a, self.blocks))  # type: ignore[return-value]


@dataclass(frozen=True)
class NormalizedConic:
    """Squarefree coefficients with squarefree product, and the rational
    multipliers: a zero y of the normalized form gives the zero
    ``x_i = mult_i * y_i`` of the original (up to clearing denominators)."""

    a: tuple[int, int, int]
    mult: tuple[Fraction, Fraction, Fraction]

    @property
    def M(self) -> int:
        return 8 * abs(math.prod(self.a))

    def lift(self, y: Sequence[int]) -> tuple[int, ...]:
        return _clear(tuple(m * v for m, v in zip(self.mult, y)))


def _clear(x: Sequence[Fraction]) -> tuple[int, ...]:
    den = math.lcm(*(Fraction(v).denominator for v in x))
    ints = [int(Fraction(v) * den) for v in x]
    g = math.gcd(*ints)
    if g == 0:
        raise DomainError("trivial vector")
    return tuple(v // g for v in ints)


def _normalize_coefficients(a: Sequence[int], limit: int) -> tuple[list[int], list[Fraction]]:
    """Absorb squares, divide out primes common to all, and move primes that
    divide more than ``limit`` coefficients onto the others."""
    a = list(a)
    mult = [Fraction(1)] * len(a)
    for i, ai in enumerate(a):
        core, root = squarefree_decomposition(ai)
        a[i] = core
        mult[i] /= root
    changed = True
    while changed:
        changed = False
        primes = sorted({p for ai in a for p in prime_divisors(ai)})
        for p in primes:
            hit = [i for i, ai in enumerate(a) if ai % p == 0]
            if len(hit) == len(a):
                a = [ai // p for ai in a]
                changed = True
            elif len(hit) > limit:
                # multiply through by p and absorb p^2 into the hit coordinates
                for i in range(len(a)):
                    if i in hit:
                        a[i] //= p
                        mult[i] /= p
                    else:
                        a[i] *= p
                changed = True
            if changed:
                break
    return a, mult


def normalize_conic(a: Sequence[int]) -> NormalizedConic:
    reduced, mult = _normalize_coefficients(a, 1)
    return NormalizedConic(tuple(reduced), tuple(mult))  # type: ignore[arg-type]


@dataclass(frozen=True)
class LocalData:
    """Admissible residue data: ``values`` are the block values at m0, reduced
    into [1, M). ``lam`` and ``lam_tilde`` are per-block bit lists (conics only)."""

    M: int
    m0: int
    values: tuple[tuple[int, ...], ...]
    Q: tuple[tuple[ModPoly, ...], ...] | None = None
    lam: tuple[tuple[int, ...], ...] | None = None
    lam_tilde: tuple[tuple[int, ...], ...] | None = None

    def to_dict(self) -> dict:
        out = {"M": self.M, "m0": self.m0, "values": [list(v) for v in self.values]}
        if self.lam is not None:
            out["lambda"] = [list(v) for v in self.lam]
            out["lambda_tilde"] = [list(v) for v in self.lam_tilde]
        return out


def conic_admissible(a: Sequence[int], values: Sequence[Sequence[int]], p: int) -> bool:
    """Local solubility at p with unit block values ``values``."""
    if any(v % p == 0 for b in values for v in b):
        return False
    c = [ai * math.prod(b) for ai, b in zip(a, values)]
    return ternary_locally_soluble(TernaryForm(*c), p)


def compute_lambda(data: LocalData, a: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    """lambda_ij from prod over p | M of (q_ij, -a_i' a_i'')_p, q_ij the residues."""
    places = _places_of(data.M)
    out = []
    for i, block in enumerate(data.values):
        other = -math.prod(a[k] for k in range(3) if k != i)
        row = []
        for q in block:
            s = math.prod(hilbert(q, other, p) for p in places)
            row.append(_bit(s))
        out.append(tuple(row))
    return tuple(out)


def compute_lambda_tilde(lam: Sequence[Sequence[int]], data: LocalData) -> tuple[tuple[int, ...], ...]:
    pi1 = math.prod(data.values[0])
    pi12 = pi1 * math.prod(data.values[1])
    out = [tuple(lam[0])]
    out.append(tuple((x + _bit(hilbert(pi1, q, 2))) % 2 for x, q in zip(lam[1], data.values[1])))
    out.append(tuple((x + _bit(hilbert(pi12, q, 2))) % 2 for x, q in zip(lam[2], data.values[2])))
    return tuple(out)


def local_data_from_values(
    a: Sequence[int], M: int, values: Sequence[Sequence[int]], m0: int = 0, Q=None
) -> LocalData | None:
    """LocalData for given block residues, or None if they are not admissible.
    Raises InvariantViolation if the lambda-tilde bits fail to sum to zero."""
    vals = tuple(tuple(v % M for v in b) for b in values)
    if len(vals) == 2:
        vals = vals + ((),)
    if any(math.gcd(v, M) != 1 for b in vals for v in b):
        return None
    for p in _places_of(M):
        if not conic_admissible(a, vals, p):
            return None
    base = LocalData(M, m0, vals, Q)
    lam = compute_lambda(base, a)
    lt = compute_lambda_tilde(lam, base)
    if sum(sum(r) for r in lt) % 2:
        raise InvariantViolation(f"lambda-tilde has odd sum for a={tuple(a)}, values={vals}")
    return LocalData(M, m0, vals, Q, lam, lt)


def _per_prime_tables(
    polys_by_block: Sequence[Sequence[IntPoly]],
    M: int,
    ok,
) -> dict[int, set[int]]:
    """For each p | M the residues r mod p (mod 8 at 2) with ok(p, values) true."""
    tables = {}
    for p in _places_of(M):
        mod = _residue_modulus(p)
        good = set()
        for r in range(mod):
            vals = [[P(r) % mod for P in b] for b in polys_by_block]
            if ok(p, vals):
                good.add(r)
        tables[p] = good
    return tables


def _conic_tables(problem: ConicBundleProblem, norm: NormalizedConic) -> dict[int, set[int]]:
    return _per_prime_tables(problem.blocks, norm.M, lambda p, vals: conic_admissible(norm.a, vals, p))


def iter_local_data(problem: ConicBundleProblem) -> Iterator[LocalData]:
    """Admissible local data in increasing m0."""
    if problem.same_sign:
        raise DomainError("coefficients all have the same sign")
    norm = normalize_conic(problem.a)
    M = norm.M
    tables = _conic_tables(problem, norm)
    Q = tuple(tuple(ModPoly.reduce(P, M) for P in b) for b in problem.blocks)
    for m0 in range(M):
        if all(m0 % _residue_modulus(p) in good for p, good in tables.items()):
            vals = [[P(m0) for P in b] for b in problem.blocks]
            data = local_data_from_values(norm.a, M, vals, m0, Q)
            if data is None:
                raise InvariantViolation(f"per-prime tables admit m0={m0} but the data is not admissible")
            yield data


def enumerate_local_data(problem: ConicBundleProblem) -> list[LocalData]:
    return list(iter_local_data(problem))


def _local_obstruction(tables: Mapping[int, set[int]]) -> Obstruction | None:
    for p in sorted(tables, key=lambda p: (p == 2, p)):
        if not tables[p]:
            return Obstruction(p, f"no residue mod {_residue_modulus(p)} gives unit values and local solubility at {p}")
    return None


# ---------------------------------------------------------------------------
# the F_2 system

def _cross_pairs(sizes: Sequence[int]) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    idx = [(i, j) for i in range(3) for j in range(sizes[i])]
    return [(u, v) for u in idx for v in idx if u[0] < v[0]]


@dataclass(frozen=True)
class F2System:
    """Rows are bitmasks over ``variables``; ``rhs`` the right-hand bits."""

    variables: tuple[tuple[tuple[int, int], tuple[int, int]], ...]
    rows: tuple[int, ...]
    rhs: tuple[int, ...]

    def rank(self) -> int:
        return _eliminate(list(self.rows), [0] * len(self.rows))[0]

    def row_sum(self) -> int:
        acc = 0
        for r in self.rows:
            acc ^= r
        return acc

    def solve(self) -> tuple[int, ...] | None:
        """Canonical solution (free variables 0), or None if inconsistent."""
        rank, rows, rhs, pivots = _eliminate(list(self.rows), list(self.rhs))
        if any(r == 0 and b for r, b in zip(rows, rhs)):
            return None
        x = [0] * len(self.variables)
        for r, b, piv in zip(rows, rhs, pivots):
            if piv is not None:
                x[piv] = b
        return tuple(x)


def _eliminate(rows: list[int], rhs: list[int]):
    """Reduced row echelon form over F_2, pivoting on the lowest variable."""
    pivots: list[int | None] = [None] * len(rows)
    rank = 0
    width = max((r.bit_length() for r in rows), default=0)
    for col in range(width):
        bit = 1 << col
        sel = next((k for k in range(rank, len(rows)) if rows[k] & bit), None)
        if sel is None:
            continue
        rows[rank], rows[sel] = rows[sel], rows[rank]
        rhs[rank], rhs[sel] = rhs[sel], rhs[rank]
        for k in range(len(rows)):
            if k != rank and rows[k] & bit:
                rows[k] ^= rows[rank]
                rhs[k] ^= rhs[rank]
        pivots[rank] = col
        rank += 1
    return rank, rows, rhs, pivots


def conic_system(sizes: Sequence[int], lam_tilde: Sequence[Sequence[int]] | None = None) -> F2System:
    sizes = tuple(sizes) + (0,) * (3 - len(sizes))
    variables = _cross_pairs(sizes)
    rows, rhs = [], []
    for i in range(3):
        for j in range(sizes[i]):
            mask = 0
            for k, (u, v) in enumerate(variables):
                if (i, j) in (u, v):
                    mask |= 1 << k
            rows.append(mask)
            rhs.append(lam_tilde[i][j] % 2 if lam_tilde is not None else 0)
    return F2System(tuple(variables), tuple(rows), tuple(rhs))


def solve_targets(
    lam_tilde: Sequence[Sequence[int]], sizes: Sequence[int]
) -> dict[tuple[tuple[int, int], tuple[int, int]], int]:
    """Signs (P_i'j'(m) / P_ij(m)) for cross-block pairs (ij, i'j'), i < i'."""
    sizes = tuple(sizes) + (0,) * (3 - len(sizes))
    if sizes[0] < 1 or sizes[1] < 1:
        raise DomainError("the first two blocks must be nonempty")
    lt = list(lam_tilde) + [()] * (3 - len(lam_tilde))
    if tuple(len(r) for r in lt) != sizes:
        raise DomainError("lambda-tilde shape does not match block sizes")
    system = conic_system(sizes, lt)
    x = system.solve()
    if x is None:
        raise InvariantViolation(f"F_2 system inconsistent for lambda-tilde {lam_tilde} (odd sum)")
    return {var: (-1) ** b for var, b in zip(system.variables, x)}


def search_targets(
    cross: Mapping[tuple[tuple[int, int], tuple[int, int]], int],
    sizes: Sequence[int],
    values: Sequence[Sequence[int]],
) -> dict[tuple[int, int], int]:
    """Flattened targets (P_a / P_b), a < b, for the specialization search.

    Cross-block signs are flipped by reciprocity when both residues are 3 mod 4;
    pairs within a block get +1.
    """
    idx = [(i, j) for i in range(3) for j in range(sizes[i])]
    out = {}
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            u, v = idx[a], idx[b]
            if u[0] == v[0]:
                out[(a, b)] = 1
                continue
            s = cross[(u, v)]
            qu, qv = values[u[0]][u[1]], values[v[0]][v[1]]
            if qu % 4 == 3 and qv % 4 == 3:
                s = -s
            out[(a, b)] = s
    return out


# ---------------------------------------------------------------------------
# conic pipeline

@dataclass(frozen=True)
class ConicSolution:
    t: int
    x: tuple[int, int, int]
    local: LocalData
    targets: dict
    certificate: Certificate
    height_bound: BoundRecord
    fibre: tuple[int, int, int]

    def to_dict(self) -> dict:
        return {
            "status": "solved",
            "t": self.t,
            "x": list(self.x),
            "fibre": list(self.fibre),
            "local_data": self.local.to_dict(),
            "cross_targets": {f"{u[0]},{u[1]}|{v[0]},{v[1]}": s for (u, v), s in sorted(self.targets.items())},
            "certificate": self.certificate.to_dict(),
            "height_bound": self.height_bound.to_dict(),
        }


def conic_height_bound(problem: ConicBundleProblem, t: int, x: Sequence[int]) -> BoundRecord:
    """max(x1, x2, x3, t) <= max|a_i| (log|P|)^((n+1) max d_i) |P|^(max n_i)."""
    H = tuple_height(problem.flat)
    d = max(sum(P.degree for P in b) for b in problem.blocks)
    nmax = max(problem.sizes)
    scale = max(abs(v) for v in problem.a) * H**nmax
    exponent = Fraction((problem.n + 1) * d)
    lhs = max(*x, t)
    verdict, box = log_power_verdict(lhs, H, exponent, scale)
    lo, hi = box.decimal(15)
    return BoundRecord(
        "height",
        f"max(x1,x2,x3,t) <= max|a_i| (log |P|)^{exponent} |P|^{nmax}",
        lhs, lo, hi, None if verdict == "undecided" else verdict == "le",
    )


def solve_conic_bundle(
    problem: ConicBundleProblem, m_max: int | None = None
) -> ConicSolution | Obstruction | SearchExhausted:
    if problem.same_sign:
        return Obstruction(INF, "all coefficients have the same sign")
    w = schinzel_witness(problem.flat)
    if w is not None:
        raise DomainError(f"not a Schinzel tuple: {w.reason}")
    norm = normalize_conic(problem.a)
    tables = _conic_tables(problem, norm)
    obstruction = _local_obstruction(tables)
    if obstruction is not None:
        return obstruction
    tried = []
    diagnostics: list[str] = []
    limit = None
    for data in iter_local_data(problem):
        tried.append(data.m0)
        cross = solve_targets(data.lam_tilde, problem.sizes)
        targets = search_targets(cross, problem.sizes, data.values)
        spec = SearchSpec(problem.flat, data.M, data.m0, targets, m_max)
        limit = spec.limit
        found = search(spec)
        if isinstance(found, Exhausted):
            diagnostics.extend(found.diagnostics)
            continue
        return _finish_conic(problem, data, cross, spec, found)
    return SearchExhausted(limit or 0, tuple(tried), tuple(dict.fromkeys(diagnostics)))


def _finish_conic(problem, data, cross, spec, cert) -> ConicSolution:
    if not verify(cert, spec):
        raise InvariantViolation("specialization certificate fails verification")
    m = cert.m
    sizes = problem.sizes
    idx = [(i, j) for i in range(3) for j in range(sizes[i])]
    p = {ij: cert.primes[k] for k, ij in enumerate(idx)}
    for (u, v), s in cross.items():
        if legendre(p[v], p[u]) != s:
            raise InvariantViolation(f"target ({p[v]}/{p[u]}) = {s} not realised")
    fibre = problem.fibre(m)
    form = TernaryForm(*fibre)
    for q in cert.primes:
        if not ternary_locally_soluble(form, q):
            raise InvariantViolation(f"specialised conic not soluble at {q}")
    known = sorted(set(cert.primes) | {q for ai in problem.a for q in prime_divisors(ai)})
    sol = ternary_solve(form, known)
    if not isinstance(sol, TernarySolution):
        raise InvariantViolation(f"specialised conic {fibre} insoluble at {sol.place}")
    if form(*sol.x) != 0:
        raise InvariantViolation("solution does not satisfy the fibre")
    return ConicSolution(m, sol.x, data, cross, cert, conic_height_bound(problem, m, sol.x), fibre)


# ---------------------------------------------------------------------------
# genericity

@dataclass(frozen=True)
class Genericity:
    in_U: bool
    witness: str | None = None

    def to_dict(self) -> dict:
        return {"in_U": self.in_U, "witness": self.witness}


def genericity_check(problem: ConicBundleProblem) -> Genericity:
    polys = problem.flat
    for k, P in enumerate(polys):
        if P.lc == 0:
            return Genericity(False, f"leading coefficient of polynomial {k} vanishes")
        if discriminant(P) == 0:
            return Genericity(False, f"discriminant of polynomial {k} ({P}) vanishes")
    for k in range(len(polys)):
        for l in range(k + 1, len(polys)):
            if resultant(polys[k], polys[l]) == 0:
                return Genericity(False, f"resultant of polynomials {k} and {l} vanishes")
    return Genericity(True)


# ---------------------------------------------------------------------------
# quadric bundles

@dataclass(frozen=True)
class QuadricBundleProblem:
    """sum_j a_j prod_{i in S_j} P_i(t) x_j^2 = 0 with 0-based index sets."""

    a: tuple[int, int, int, int]
    polys: tuple[IntPoly, ...]
    sets: tuple[frozenset[int], frozenset[int], frozenset[int], frozenset[int]]

    def __post_init__(self) -> None:
        a = tuple(int(x) for x in self.a)
        sets = tuple(frozenset(s) for s in self.sets)
        polys = tuple(self.polys)
        if len(a) != 4 or 0 in a:
            raise DomainError(f"need four nonzero coefficients, got {self.a}")
        if len(sets) != 4:
            raise DomainError("need four index sets")
        for s in sets:
            if any(not 0 <= i < len(polys) for i in s):
                raise DomainError(f"index set {sorted(s)} out of range")
        for P in polys:
            if P.is_zero or P.degree < 1:
                raise DomainError(f"polynomial {P} is constant")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "polys", polys)

    @property
    def same_sign(self) -> bool:
        return all(x > 0 for x in self.a) or all(x < 0 for x in self.a)

    def fibre(self, t: int) -> tuple[int, int, int, int]:
        vals = [P(t) for P in self.polys]
        return tuple(aj * math.prod(vals[i] for i in s) for aj, s in zip(self.a, self.sets))  # type: ignore[return-value]

    def occurrences(self, i: int) -> int:
        return sum(i in s for s in self.sets)


@dataclass(frozen=True)
class NormalizedQuadric:
    """A normalized problem and the multipliers back to the original:
    ``x_j = kappa_j * prod_i P_i(t)^exps[j][i] * y_j``."""

    problem: QuadricBundleProblem
    kappa: tuple[Fraction, ...]
    exps: tuple[tuple[int, ...], ...]

    def lift(self, t: int, y: Sequence[int]) -> tuple[int, ...]:
        vals = [P(t) for P in self.problem.polys]
        x = []
        for j, v in enumerate(y):
            f = self.kappa[j] * v
            for i, e in enumerate(self.exps[j]):
                f *= Fraction(vals[i]) ** e
            x.append(f)
        return _clear(x)


def normalize_quadric(problem: QuadricBundleProblem) -> NormalizedQuadric:
    """Squarefree a_j with no prime in more than two of them, and no index in
    more than two sets."""
    a, kappa = _normalize_coefficients(problem.a, 2)
    n = len(problem.polys)
    sets = [set(s) for s in problem.sets]
    exps = [[0] * n for _ in range(4)]
    for i in range(n):
        hit = [j for j in range(4) if i in sets[j]]
        if len(hit) == 4:
            for s in sets:
                s.discard(i)
        elif len(hit) == 3:
            (k,) = [j for j in range(4) if j not in hit]
            for j in hit:
                sets[j].discard(i)
                exps[j][i] -= 1
            sets[k].add(i)
    norm = QuadricBundleProblem(tuple(a), problem.polys, tuple(frozenset(s) for s in sets))  # type: ignore[arg-type]
    return NormalizedQuadric(norm, tuple(kappa), tuple(tuple(e) for e in exps))


def _delta_poly(problem: QuadricBundleProblem) -> IntPoly:
    out = IntPoly.of(math.prod(problem.a))
    for s in problem.sets:
        for i in s:
            out = out * problem.polys[i]
    return out


def classify_delta(problem: QuadricBundleProblem) -> str:
    """``"nonsquare"``, ``"square-in-base"`` or ``"square-only-over-closure"``."""
    delta = _delta_poly(problem)
    t = symbols("t")
    c, parts = Poly(list(reversed(delta.coeffs)), t).sqf_list()
    if any(e % 2 for _, e in parts):
        return "nonsquare"
    core, _ = squarefree_decomposition(int(c))
    return "square-in-base" if core == 1 else "square-only-over-closure"


def quadric_order(problem: QuadricBundleProblem) -> list[int]:
    """Specialization order: pivot single-set index, other singles, then doubles."""
    n = len(problem.polys)
    singles = [i for i in range(n) if problem.occurrences(i) == 1]
    doubles = [i for i in range(n) if problem.occurrences(i) == 2]
    if not singles:
        raise DomainError("no polynomial occurs in exactly one set")
    if len(singles) + len(doubles) != n:
        raise DomainError("every polynomial must occur in one or two sets")
    return singles + doubles


def quadric_targets(problem: QuadricBundleProblem, data: LocalData) -> dict[tuple[int, int], int]:
    """Targets in the order of :func:`quadric_order`; ``data.values[0]`` holds
    the residues of all polynomials in their original order."""
    order = quadric_order(problem)
    r = sum(1 for i in order if problem.occurrences(i) == 1)
    a = math.prod(problem.a)
    places = _places_of(data.M)
    out = {}
    for k in range(len(order)):
        for l in range(k + 1, len(order)):
            if k == 0 and l >= r:
                q = data.values[0][order[l]]
                out[(k, l)] = -math.prod(hilbert(a, q, p) for p in places)
            else:
                out[(k, l)] = 1
    return out


def _quadric_admissible(problem: QuadricBundleProblem, p: int, vals: Sequence[int]) -> bool:
    if any(v % p == 0 for v in vals):
        return False
    g = [aj * math.prod(vals[i] for i in s) for aj, s in zip(problem.a, problem.sets)]
    return quaternary_locally_isotropic(QuaternaryForm(*g), p)


def _quadric_tables(problem: QuadricBundleProblem, M: int) -> dict[int, set[int]]:
    return _per_prime_tables(
        [problem.polys], M, lambda p, vals: _quadric_admissible(problem, p, vals[0])
    )


def quadric_local_data(problem: QuadricBundleProblem) -> Iterator[LocalData]:
    """Admissible m0 for a normalized problem, increasing."""
    M = 8 * abs(math.prod(problem.a))
    tables = _quadric_tables(problem, M)
    for m0 in range(M):
        if all(m0 % _residue_modulus(p) in good for p, good in tables.items()):
            vals = tuple(P(m0) % M for P in problem.polys)
            yield LocalData(M, m0, (vals,))


@dataclass(frozen=True)
class QuadricSolution:
    t: int
    x: tuple[int, int, int, int]
    fibre: tuple[int, int, int, int]
    route: str
    heuristic_bound: int
    within_bound: bool
    certificate: Certificate | None = None
    local: LocalData | None = None
    conic: ConicSolution | None = None
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "status": "solved",
            "route": self.route,
            "t": self.t,
            "x": list(self.x),
            "fibre": list(self.fibre),
            "heuristic_bound": self.heuristic_bound,
            "within_bound": self.within_bound,
            "bound_is_heuristic": True,
            "checks": self.checks,
        }
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_dict()
        if self.local is not None:
            out["local_data"] = self.local.to_dict()
        if self.conic is not None:
            out["conic"] = self.conic.to_dict()
        return out


def _check_original(problem: QuadricBundleProblem, t: int, x: Sequence[int]) -> tuple[int, ...]:
    g = problem.fibre(t)
    if sum(c * v * v for c, v in zip(g, x)) != 0 or not any(x):
        raise InvariantViolation(f"{x} is not a nontrivial zero of the fibre {g} at t={t}")
    return g


def _presearch(problem: QuadricBundleProblem, ts: Iterable[int]) -> QuadricSolution | None:
    for t in ts:
        g = problem.fibre(t)
        if 0 in g:
            continue
        sol = quaternary_solve(QuaternaryForm(*g))
        if sol is not None:
            _check_original(problem, t, sol.x)
            return QuadricSolution(t, sol.x, g, "presearch", sol.bound, sol.within_bound)
    return None


def _conic_route(
    original: QuadricBundleProblem, norm: NormalizedQuadric, m_max: int | None
) -> QuadricSolution | Obstruction | SearchExhausted | Unsupported:
    """Solve the conic obtained by setting x0 = 0 in the normalized form."""
    prob = norm.problem
    a = list(prob.a[1:])
    sets = [set(s) for s in prob.sets[1:]]
    exps = [[0] * len(prob.polys) for _ in range(3)]
    for i in range(len(prob.polys)):
        hit = [j for j in range(3) if i in sets[j]]
        if len(hit) == 3:
            for s in sets:
                s.discard(i)
        elif len(hit) == 2:
            (k,) = [j for j in range(3) if j not in hit]
            for j in hit:
                sets[j].discard(i)
                exps[j][i] -= 1
            sets[k].add(i)
    order = sorted(range(3), key=lambda j: -len(sets[j]))
    if len(sets[order[1]]) == 0:
        return Unsupported("conic with x0 = 0 has fewer than two nonconstant coefficients")
    blocks = tuple(tuple(prob.polys[i] for i in sorted(sets[j])) for j in order)
    conic = ConicBundleProblem(tuple(a[j] for j in order), blocks)  # type: ignore[arg-type]
    res = solve_conic_bundle(conic, m_max)
    if not isinstance(res, ConicSolution):
        return res
    t = res.t
    vals = [P(t) for P in prob.polys]
    y = [Fraction(0)] * 4
    for pos, j in enumerate(order):
        f = Fraction(res.x[pos])
        for i, e in enumerate(exps[j]):
            f *= Fraction(vals[i]) ** e
        y[j + 1] = f
    y_int = _clear(y)
    x = norm.lift(t, y_int)
    g = _check_original(original, t, x)
    bound = 40 * max(abs(c) for c in g)
    within = max(abs(v) for v in x) <= bound
    return QuadricSolution(t, x, g, "conic", bound, within, res.certificate, res.local, res)  # type: ignore[arg-type]


def solve_quadric_bundle(
    problem: QuadricBundleProblem,
    m_max: int | None = None,
    presearch: Iterable[int] = range(9),
) -> QuadricSolution | Obstruction | SearchExhausted | Unsupported:
    if problem.same_sign:
        return Obstruction(INF, "all coefficients have the same sign")
    norm = normalize_quadric(problem)
    prob = norm.problem
    kind = classify_delta(prob)
    if kind == "square-only-over-closure":
        return Unsupported("delta is a square only over the algebraic closure; prime values do not suffice")
    w = schinzel_witness(prob.polys) if prob.polys else None
    if w is not None:
        raise DomainError(f"not a Schinzel tuple: {w.reason}")
    early = _presearch(problem, presearch)
    if early is not None:
        return early
    if kind == "square-in-base":
        return _conic_route(problem, norm, m_max)
    try:
        order = quadric_order(prob)
    except DomainError as exc:
        return Unsupported(str(exc))
    M = 8 * abs(math.prod(prob.a))
    obstruction = _local_obstruction(_quadric_tables(prob, M))
    if obstruction is not None:
        return obstruction
    polys = tuple(prob.polys[i] for i in order)
    r = sum(1 for i in order if prob.occurrences(i) == 1)
    tried: list[int] = []
    diagnostics: list[str] = []
    limit = 0
    for data in quadric_local_data(prob):
        tried.append(data.m0)
        targets = quadric_targets(prob, data)
        spec = SearchSpec(polys, M, data.m0, targets, m_max)
        limit = spec.limit
        found = search(spec)
        if isinstance(found, Exhausted):
            diagnostics.extend(found.diagnostics)
            continue
        return _finish_quadric(problem, norm, order, r, data, spec, found)
    return SearchExhausted(limit, tuple(tried), tuple(dict.fromkeys(diagnostics)))


def _finish_quadric(problem, norm, order, r, data, spec, cert) -> QuadricSolution:
    if not verify(cert, spec):
        raise InvariantViolation("specialization certificate fails verification")
    m = cert.m
    g = QuaternaryForm(*norm.problem.fibre(m))
    checks = {}
    for k in range(r, len(order)):
        p = cert.primes[k]
        ok = quaternary_locally_isotropic(g, p)
        checks[str(p)] = ok
        if not ok:
            raise InvariantViolation(f"specialised quadric not isotropic at {p}")
    sol = quaternary_solve(g)
    if sol is None:
        raise InvariantViolation(f"no zero found for the specialised quadric {g.coeffs}")
    x = norm.lift(m, sol.x)
    fib = _check_original(problem, m, x)
    return QuadricSolution(m, x, fib, "specialization", sol.bound, sol.within_bound, cert, data, None, checks)  # type: ignore[arg-type]


def q2_locally_soluble(p: int) -> bool:
    """Local solubility at a prime value p of P(t)(x0^2 + x1^2) + x2^2 - 2 x3^2."""
    if p == 2 or p < 2:
        raise DomainError(f"need an odd prime, got {p}")
    return legendre(-1, p) == 1 or legendre(2, p) == 1
