from __future__ import annotations

import dataclasses
import json
from fractions import Fraction

import pytest

from hasse_forge.errors import DomainError
from hasse_forge.intmath import IntPoly
from hasse_forge.specialize import (
    Certificate,
    Exhausted,
    SearchSpec,
    certificate_to_json,
    default_m_max,
    explain,
    log_power_verdict,
    search,
    targets_from_list,
    verify,
)

from oracles import is_prime_naive, legendre_naive

P = IntPoly.parse
PAIR = (P("t+4"), P("t+10"))


def spec(polys, M, m0, signs, m_max=None):
    return SearchSpec(polys, M, m0, targets_from_list(len(polys), signs), m_max)


def test_plus_target():
    cert = search(spec(PAIR, 2, 1, [1]))
    assert cert.m == 1 and cert.primes == (5, 11) and cert.symbols == {(0, 1): 1}


def test_minus_target():
    cert = search(spec(PAIR, 2, 1, [-1]))
    assert cert.m == 3 and cert.primes == (7, 13) and cert.symbols == {(0, 1): -1}


def brute_first(polys, M, m0, signs, limit):
    for m in range(1, limit + 1):
        if m % M != m0 % M:
            continue
        vals = [Q(m) for Q in polys]
        if not all(is_prime_naive(v) for v in vals) or len(set(vals)) < len(vals):
            continue
        pairs = [(i, j) for i in range(len(vals)) for j in range(i + 1, len(vals))]
        if all(vals[j] != 2 and legendre_naive(vals[i], vals[j]) == s for (i, j), s in zip(pairs, signs)):
            return m
    return None


@pytest.mark.parametrize("polys, M, m0, signs", [
    ((P("t+4"), P("t+10")), 6, 1, [1]),
    ((P("t+4"), P("t+10")), 6, 3, [-1]),
    ((P("2t+1"), P("2t+3"), P("4t+3")), 1, 0, [1, -1, 1]),
    ((P("t^2+1"), P("t+3")), 2, 0, [-1]),
    ((P("t^2+t+1"), P("2t+1")), 4, 1, [1]),
])
def test_search_is_least_qualifying(polys, M, m0, signs):
    res = search(spec(polys, M, m0, signs, 3000))
    expected = brute_first(polys, M, m0, signs, 3000)
    if expected is None:
        assert isinstance(res, Exhausted)
    else:
        assert res.m == expected


def test_no_paired_primes_exhausts_with_reasons():
    s = spec((P("t+1"), P("t+3")), 2, 1, [1], m_max=20000)
    res = search(s)
    assert isinstance(res, Exhausted) and res.m_max == 20000
    assert all(explain(s, m) is not None for m in range(1, 60))
    assert explain(s, 2) is not None


def test_class_obstruction_diagnostic():
    res = search(spec((P("2t+1"), P("2t+3")), 3, 1, [1], m_max=300))
    assert isinstance(res, Exhausted)
    assert any("divisible by 3" in d for d in res.diagnostics)


def test_non_schinzel_is_domain_error():
    with pytest.raises(DomainError):
        search(spec((P("t"), P("t+1")), 1, 0, [1]))


def test_targets_must_cover_pairs():
    with pytest.raises(DomainError):
        SearchSpec(PAIR, 2, 1, {})
    with pytest.raises(DomainError):
        SearchSpec(PAIR, 2, 1, {(0, 1): 0})
    with pytest.raises(DomainError):
        targets_from_list(3, [1])


def test_verify_round_trip_and_tampering():
    s = spec(PAIR, 2, 1, [1])
    cert = search(s)
    assert verify(cert, s)
    assert not verify(dataclasses.replace(cert, primes=(5, 15)), s)
    assert not verify(dataclasses.replace(cert, m=2), s)
    assert not verify(dataclasses.replace(cert, symbols={(0, 1): -1}), s)


def test_certificate_json_canonical():
    cert = search(spec(PAIR, 2, 1, [1]))
    text = certificate_to_json(cert)
    assert text == certificate_to_json(cert)
    doc = json.loads(text)
    assert doc["primes"] == ["5", "11"] and doc["m"] == "1"
    assert {b["name"] for b in doc["bounds"]} == {"min_value", "m_size"}


def test_bound_records_enclose():
    cert = search(spec(PAIR, 2, 1, [1]))
    for b in cert.bounds:
        assert Fraction(b.rhs_lo) <= Fraction(b.rhs_hi)
    # |P| = 10: 5 > 10 (log 10)^(1/4) fails, 1 <= (log 10)^(5/2) holds
    assert [b.holds for b in cert.bounds] == [False, True]


def test_log_power_verdict():
    verdict, box = log_power_verdict(3, 3, Fraction(1), 1)  # log 3 = 1.0986...
    assert verdict == "gt" and Fraction(10986122, 10**7) < box.lo <= box.hi < Fraction(10986123, 10**7)
    assert log_power_verdict(1, 3, Fraction(1), 1)[0] == "le"
    assert log_power_verdict(1, 1, Fraction(1, 2), 5)[0] == "gt"


def test_default_m_max():
    assert default_m_max(PAIR, 2) == 20000
    big = (P("t+1000000000"), P("t+3"))
    assert default_m_max(big, 1) >= 10**4
