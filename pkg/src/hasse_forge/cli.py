"""Command-line front end.

Every command writes one canonical JSON report (sorted keys, integers as
decimal strings, fractions as "num/den") to stdout or ``--out``.

Exit codes: 0 success, 1 usage or domain error, 2 certified obstruction,
3 exhausted search.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .errors import DomainError, InvariantViolation, ResourceError

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_ERROR, EXIT_OBSTRUCTION, EXIT_EXHAUSTED = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# reports

def _plain(x: Any) -> Any:
    from .rational import RationalInterval

    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, RationalInterval):
        return _plain(x.to_dict())
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [_plain(v) for v in items]
    if hasattr(x, "to_dict"):
        return _plain(x.to_dict())
    if dataclasses.is_dataclass(x):
        return _plain({f.name: getattr(x, f.name) for f in dataclasses.fields(x)})
    raise TypeError(f"cannot report a {type(x).__name__}")


def emit_report(result: Any, command: str | None = None, request: dict | None = None) -> str:
    """Canonical JSON text; identical input gives identical bytes."""
    doc = {"schema_version": SCHEMA_VERSION, "result": result}
    if command is not None:
        doc["command"] = command
    if request is not None:
        doc["request"] = request
    return json.dumps(_plain(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# argument helpers

def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise DomainError(f"expected comma-separated integers, got {text!r}") from exc


def _polys(text: str):
    from .intmath import IntPoly

    return tuple(IntPoly.parse(p) for p in text.split(";") if p.strip())


def _blocks(text: str):
    parts = text.split("|")
    if len(parts) == 2:
        parts.append("")
    if len(parts) != 3:
        raise DomainError("blocks must be three '|'-separated groups (the last may be empty)")
    return tuple(_polys(p) for p in parts)


def _signs(text: str) -> list[int]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok in ("+", "+1", "1"):
            out.append(1)
        elif tok in ("-", "-1"):
            out.append(-1)
        else:
            raise DomainError(f"bad sign {tok!r}")
    return out


def _place(text: str):
    from .intmath import INF

    return INF if text.lower() in ("inf", "infinity", "oo", "r") else int(text)


# ---------------------------------------------------------------------------
# commands; each returns (exit code, result)

def cmd_symbols(args) -> tuple[int, Any]:
    from .intmath import hilbert, hilbert_places, jacobi, legendre

    if args.kind == "legendre":
        a, p = int(args.values[0]), int(args.values[1])
        return EXIT_OK, {"legendre": legendre(a, p), "a": a, "p": p}
    if args.kind == "jacobi":
        a, n = int(args.values[0]), int(args.values[1])
        return EXIT_OK, {"jacobi": jacobi(a, n), "a": a, "n": n}
    a, b = int(args.values[0]), int(args.values[1])
    if len(args.values) > 2:
        v = _place(args.values[2])
        return EXIT_OK, {"hilbert": hilbert(a, b, v), "a": a, "b": b, "place": v}
    table = {str(v): hilbert(a, b, v) for v in hilbert_places(a, b)}
    prod = 1
    for s in table.values():
        prod *= s
    return EXIT_OK, {"a": a, "b": b, "symbols": table, "product": prod}


def cmd_density(args) -> tuple[int, Any]:
    from . import density as dn
    from . import ffpoly

    if args.kind == "delta":
        ell, degs = int(args.values[0]), [int(x) for x in args.values[1:]]
        return EXIT_OK, {"ell": ell, "degrees": degs, "delta": ffpoly.delta_exact(ell, degs, args.budget)}
    if args.kind == "sigma2":
        d1, d2 = (int(x) for x in args.values[:2])
        value = dn.sigma2(d1, d2)
        return EXIT_OK, {"d": [d1, d2], "sigma2": value, "decimal": _dec(value, 12)}
    if args.kind == "T":
        return EXIT_OK, {r or "all": dn.count_T_vectors(r) for r in (None, "first", "second", "both")}
    if args.kind == "bound":
        d1, d2 = (int(x) for x in args.values[:2])
        return EXIT_OK, {"d": [d1, d2], "cut": args.cut, "bound": dn.product_lower_bound(d1, d2, args.cut)}
    if args.kind == "constant":
        res = dn.limit_constant()
        return (EXIT_OK if res.ok else EXIT_ERROR), res
    raise DomainError(f"unknown density quantity {args.kind}")


def _dec(x: Fraction, digits: int) -> list[str]:
    from .rational import decimal_string

    return [decimal_string(x, digits, up=False), decimal_string(x, digits, up=True)]


def cmd_ternary(args) -> tuple[int, Any]:
    from . import ternary as tn

    coeffs = [int(x) for x in args.coeffs]
    if args.kind == "quaternary":
        if len(coeffs) != 4:
            raise DomainError("quaternary needs four coefficients")
        q = tn.QuaternaryForm(*coeffs)
        failing = tn.quaternary_failing_places(q)
        if failing:
            return EXIT_OBSTRUCTION, {"status": "insoluble", "form": coeffs, "place": failing[0], "failing": failing}
        sol = tn.quaternary_solve(q)
        if sol is None:
            return EXIT_EXHAUSTED, {"status": "exhausted", "form": coeffs}
        return EXIT_OK, {"status": "solved", "form": coeffs, "x": sol.x, "bound": sol.bound,
                         "within_bound": sol.within_bound, "bound_is_heuristic": True}
    if len(coeffs) != 3:
        raise DomainError("ternary forms need three coefficients")
    form = tn.TernaryForm(*coeffs)
    if args.kind == "local":
        v = _place(args.place) if args.place else None
        places = [v] if v is not None else None
        if places is None:
            from .intmath import hilbert_places
            places = hilbert_places(*coeffs)
        return EXIT_OK, {"form": coeffs, "local": {str(p): tn.ternary_locally_soluble(form, p) for p in places}}
    if args.kind == "reduce":
        red, scale = tn.reduce_squarefree(form)
        return EXIT_OK, {"form": coeffs, "reduced": red.coeffs, "multipliers": scale}
    res = tn.ternary_solve(form)
    if isinstance(res, tn.Insoluble):
        return EXIT_OBSTRUCTION, {"status": "insoluble", "form": coeffs, "place": res.place, "failing": res.failing}
    return EXIT_OK, {"status": "solved", "form": coeffs, "x": res.x, "bound": tn.cassels_bound(form)}


def cmd_specialize(args) -> tuple[int, Any]:
    from . import specialize as sp

    polys = _polys(args.polys.replace("|", ";"))
    signs = _signs(args.targets) if args.targets else [1] * (len(polys) * (len(polys) - 1) // 2)
    spec = sp.SearchSpec(polys, args.M, args.m0, sp.targets_from_list(len(polys), signs), args.m_max,
                         Fraction(args.epsilon))
    res = sp.search(spec)
    if isinstance(res, sp.Exhausted):
        return EXIT_EXHAUSTED, res
    return EXIT_OK, {"status": "found", "certificate": res, "verified": sp.verify(res, spec)}


def _status_code(res) -> int:
    from .bundle import Obstruction, SearchExhausted, Unsupported

    if isinstance(res, Obstruction):
        return EXIT_OBSTRUCTION
    if isinstance(res, SearchExhausted):
        return EXIT_EXHAUSTED
    if isinstance(res, Unsupported):
        return EXIT_ERROR
    return EXIT_OK


def cmd_conic(args) -> tuple[int, Any]:
    from . import bundle as bd

    a = _ints(args.a)
    if len(a) != 3:
        raise DomainError("--a needs three coefficients")
    problem = bd.ConicBundleProblem(tuple(a), _blocks(args.blocks))
    if args.kind == "local":
        if problem.same_sign:
            return EXIT_OBSTRUCTION, bd.Obstruction("inf", "all coefficients have the same sign")
        data = bd.enumerate_local_data(problem)
        return EXIT_OK, {"M": bd.normalize_conic(problem.a).M, "local_data": data}
    if args.kind == "genericity":
        return EXIT_OK, bd.genericity_check(problem)
    res = bd.solve_conic_bundle(problem, args.m_max)
    return _status_code(res), res


def _sets(text: str, count: int = 4) -> tuple[frozenset[int], ...]:
    parts = text.split("|")
    if len(parts) != count:
        raise DomainError(f"--sets needs {count} '|'-separated index lists")
    return tuple(frozenset(_ints(p)) for p in parts)


def cmd_quadric(args) -> tuple[int, Any]:
    from . import bundle as bd

    if args.kind == "q2":
        p = int(args.p)
        return EXIT_OK, {"p": p, "locally_soluble": bd.q2_locally_soluble(p), "p_mod_8": p % 8}
    a = _ints(args.a)
    if len(a) != 4:
        raise DomainError("--a needs four coefficients")
    problem = bd.QuadricBundleProblem(tuple(a), _polys(args.polys), _sets(args.sets))
    if args.kind == "classify":
        norm = bd.normalize_quadric(problem)
        return EXIT_OK, {"delta": bd.classify_delta(norm.problem)}
    res = bd.solve_quadric_bundle(problem, args.m_max, range(args.presearch))
    return _status_code(res), res


def cmd_montecarlo(args) -> tuple[int, Any]:
    from .density import monte_carlo

    d = _ints(args.d)
    if len(d) != 2:
        raise DomainError("--d needs two degrees")
    est = monte_carlo(d[0], d[1], args.H, args.samples, args.seed, args.m_max, args.threads, args.exhaustive)
    return EXIT_OK, est


def verify_paper() -> tuple[bool, list[dict]]:
    """Recompute every published constant; returns (all passed, records)."""
    from . import bundle as bd
    from . import density as dn
    from . import ffpoly
    from .intmath import IntPoly

    rec: list[dict] = []

    def check(name: str, expected: Any, got: Any) -> None:
        rec.append({"name": name, "expected": expected, "got": got, "holds": expected == got})

    check("sigma2(3,3)", Fraction(1743, 4096), dn.sigma2(3, 3))
    check("#T", 49, dn.count_T_vectors())
    check("#T first odd", 25, dn.count_T_vectors("first"))
    check("#T second odd", 25, dn.count_T_vectors("second"))
    check("#T both odd", 1, dn.count_T_vectors("both"))
    for n in (1, 2, 3):
        check(f"delta_n(2) n={n}", Fraction(1, 2 ** (n - 1)) - Fraction(1, 4**n), ffpoly.delta_exact(2, [1] * n))
    check("q2 at p=3", False, bd.q2_locally_soluble(3))
    q2 = bd.QuadricBundleProblem((1, 1, 1, -2), (IntPoly.of(3, 1),), ({0}, {0}, frozenset(), frozenset()))
    check("q2 shape", "square-only-over-closure", bd.classify_delta(q2))
    lc = dn.limit_constant()
    for c in lc.checks:
        rec.append({"name": c.name, "expected": c.statement, "got": c.detail, "holds": c.holds})
    rec.append({"name": "constants", "expected": "", "got": lc.to_dict(), "holds": lc.ok})
    return all(r["holds"] for r in rec), rec


def cmd_verify_paper(args) -> tuple[int, Any]:
    ok, rec = verify_paper()
    return (EXIT_OK if ok else EXIT_ERROR), {"all_passed": ok, "checks": rec}


COMMANDS = {
    "symbols": cmd_symbols,
    "density": cmd_density,
    "ternary": cmd_ternary,
    "specialize": cmd_specialize,
    "conic": cmd_conic,
    "quadric": cmd_quadric,
    "montecarlo": cmd_montecarlo,
    "verify-paper": cmd_verify_paper,
}


# ---------------------------------------------------------------------------
# parser

class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hasse-forge", description="Prime specialization solver for diagonal conic and quadric bundles.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--cache-dir", help="replay cached reports (overrides HASSE_FORGE_CACHE)")
    p.add_argument("--threads", type=int, default=1, help="worker cap for parallel stages")
    p.add_argument("--seed", type=int, default=0, help="seed for sampling (default 0)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("symbols", help="Legendre, Jacobi and Hilbert symbols")
    s.add_argument("kind", choices=["legendre", "jacobi", "hilbert"])
    s.add_argument("values", nargs="+", help="a p | a n | a b [place]")

    s = sub.add_parser("density", help="Schinzel densities and constants")
    s.add_argument("kind", choices=["delta", "sigma2", "T", "bound", "constant"])
    s.add_argument("values", nargs="*", help="delta: ell d1 d2 ...; sigma2/bound: d1 d2")
    s.add_argument("--cut", type=int, default=13)
    s.add_argument("--budget", type=int, default=1 << 30)

    s = sub.add_parser("ternary", help="diagonal ternary and quaternary forms")
    s.add_argument("kind", choices=["solve", "local", "reduce", "quaternary"])
    s.add_argument("coeffs", nargs="+")
    s.add_argument("--place")

    s = sub.add_parser("specialize", help="prime specialization search")
    s.add_argument("--polys", required=True, help="polynomials separated by ';' or '|'")
    s.add_argument("--M", type=int, required=True)
    s.add_argument("--m0", type=int, required=True)
    s.add_argument("--targets", help="signs for pairs i<j in lexicographic order, e.g. +1,-1")
    s.add_argument("--m-max", type=int)
    s.add_argument("--epsilon", default="1/2")

    s = sub.add_parser("conic", help="conic bundle pipeline")
    s.add_argument("kind", choices=["solve", "local", "genericity"])
    s.add_argument("--a", required=True, help="a1,a2,a3 (use --a=-1,2,3 for a leading minus)")
    s.add_argument("--blocks", required=True, help="three '|'-separated blocks of ';'-separated polynomials")
    s.add_argument("--m-max", type=int)

    s = sub.add_parser("quadric", help="quadric bundle pipeline")
    s.add_argument("kind", choices=["solve", "classify", "q2"])
    s.add_argument("--a", help="a0,a1,a2,a3")
    s.add_argument("--polys", default="", help="';'-separated polynomials")
    s.add_argument("--sets", default="|||", help="four '|'-separated 0-based index lists")
    s.add_argument("--m-max", type=int)
    s.add_argument("--presearch", type=int, default=9, help="try t = 0..N-1 before specializing")
    s.add_argument("--p", help="prime value for q2")

    s = sub.add_parser("montecarlo", help="estimate the solvable density")
    s.add_argument("--d", required=True, help="d1,d2")
    s.add_argument("--H", type=int, required=True)
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--m-max", type=int, default=2000)
    s.add_argument("--exhaustive", action="store_true")

    sub.add_parser("verify-paper", help="recompute every published constant")
    return p


def _request(args) -> dict:
    skip = {"out", "cache_dir"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def _cache_dir(args) -> Path | None:
    d = args.cache_dir or os.environ.get("HASSE_FORGE_CACHE")
    return Path(d) if d else None


def run(argv: Sequence[str] | None = None) -> tuple[int, str]:
    """Parse and execute; returns (exit code, report text)."""
    args = build_parser().parse_args(argv)
    request = _request(args)
    key_text = json.dumps(_plain({"version": __version__, "request": request}), sort_keys=True)
    key = hashlib.sha256(key_text.encode()).hexdigest()
    cache = _cache_dir(args)
    if cache is not None:
        hit = cache / f"{key}.json"
        if hit.exists():
            stored = json.loads(hit.read_text())
            return int(stored["exit"]), stored["report"]
    try:
        code, result = COMMANDS[args.command](args)
    except (DomainError, ResourceError, ValueError) as exc:
        code, result = EXIT_ERROR, {"status": "error", "error": type(exc).__name__, "message": str(exc)}
    except InvariantViolation as exc:
        code, result = EXIT_ERROR, {"status": "invariant_violation", "message": str(exc)}
    text = emit_report(result, args.command, request)
    if cache is not None and code != EXIT_ERROR:
        cache.mkdir(parents=True, exist_ok=True)
        (cache / f"{key}.json").write_text(json.dumps({"exit": code, "report": text}, sort_keys=True))
    return code, text


def main(argv: Sequence[str] | None = None) -> int:
    args_list = list(sys.argv[1:] if argv is None else argv)
    code, text = run(args_list)
    out = build_parser().parse_known_args(args_list)[0].out
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
