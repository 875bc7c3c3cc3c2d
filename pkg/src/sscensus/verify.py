"""Quick invariant suite behind ``sscensus verify``; runs in a few seconds."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction

from .arith import character_class_sum, character_class_sum_closed_form, phi_quotient_identity
from .census import CurveBox, census_direct, census_fast, cross_identity_check
from .classnum import class_number, hurwitz, l1_from_class_number, l1_series, prime_discriminant_table
from .constants import PrimeSet, k_constant, k_constant_single
from .curves import weighted_trace_count
from .heuristic import bias_ratio, trace_fraction


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str


def _character_sums() -> tuple[bool, str]:
    bad = [
        (n, m, c)
        for n in range(1, 46, 2)
        for m in range(1, 19)
        for c in range(m)
        if math.gcd(c, m) == 1 and character_class_sum(n, m, c) != character_class_sum_closed_form(n, m, c)
    ]
    bad += [(n, m) for n in range(1, 40) for m in range(1, 40) if len(set(phi_quotient_identity(n, m))) != 1]
    return not bad, f"{len(bad)} mismatches"


def _class_numbers() -> tuple[bool, str]:
    fixture = {-3: 1, -4: 1, -7: 1, -20: 2, -23: 3, -47: 5, -163: 1}
    got = {d: class_number(d) for d in fixture}
    worst = max(abs(l1_series(d, 1e-6) - l1_from_class_number(d)) for d in (-3, -4, -20, -23, -163, -1000))
    return got == fixture and worst < 2e-6, f"max |series - formula| = {worst:.2e}"


def _deuring() -> tuple[bool, str]:
    bad = []
    for p in (5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47):
        R = math.isqrt(4 * p)
        total = Fraction(0)
        for r in range(-R, R + 1):
            w = weighted_trace_count(p, r)
            total += w
            if r * r < 4 * p and w != hurwitz(r * r - 4 * p).value:
                bad.append((p, r))
        if total != 2 * p:
            bad.append((p, "mass"))
    return not bad, f"{len(bad)} mismatches"


def _hurwitz_table() -> tuple[bool, str]:
    t = prime_discriminant_table(3000)
    bad = [n for n in range(1, 3001) if t.hurwitz(n) != hurwitz(-4 * n).value]
    return not bad, f"{len(bad)} mismatches"


def _census() -> tuple[bool, str]:
    cases = [
        (PrimeSet.of(3, 1), CurveBox(10, 10), 50),
        (PrimeSet.all_primes(), CurveBox(7, 13), 100),
        (PrimeSet.of(4, 3), CurveBox(9, 6, True), 80),
    ]
    pairs = [(census_fast(ps, box, x, workers=1), census_direct(ps, box, x)) for ps, box, x in cases]
    return all(f == d for f, d in pairs), ", ".join(f"{f}={d}" for f, d in pairs)


def _cross() -> tuple[bool, str]:
    worst = 0.0
    for ps in (PrimeSet.all_primes(), PrimeSet.of(3, 1), PrimeSet.of(4, 3)):
        lhs, rhs = cross_identity_check(ps, 2000)
        worst = max(worst, abs(lhs - rhs) / max(1.0, lhs))
    return worst <= 1e-9, f"max relative gap {worst:.2e}"


def _constants() -> tuple[bool, str]:
    gaps = [
        abs(k_constant(PrimeSet.of(3, 1)).C / (math.pi / 9) - 1),
        abs(k_constant(PrimeSet.of(3, 2)).C / (2 * math.pi / 9) - 1),
        abs(k_constant_single(1, 15) / (math.pi**2 / 60) - 1),
    ]
    for m in (3, 4, 5, 8, 12, 15, 20):
        units = [c for c in range(m) if math.gcd(c, m) == 1]
        gaps.append(abs(k_constant(PrimeSet(m, frozenset(units))).C / (math.pi / 3) - 1))
    worst = max(gaps)
    return worst < 1e-12, f"max relative gap {worst:.1e}"


def _heuristic() -> tuple[bool, str]:
    ok = all(trace_fraction(l, 0) == Fraction(l * l, l * l - 1) for l in (2, 3, 5, 7, 11, 13))
    r = bias_ratio(PrimeSet.of(3, 1))
    return ok and abs(r - 2 / 3) < 1e-12, f"bias(1 mod 3) = {r:.12g}"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "character sums and totient identity": _character_sums,
    "class numbers and L(1) series": _class_numbers,
    "Deuring trace counts": _deuring,
    "batched Hurwitz table": _hurwitz_table,
    "fast census vs direct": _census,
    "Hurwitz / L-value cross identity": _cross,
    "congruence-class constants": _constants,
    "trace fractions and bias": _heuristic,
}


def run_checks() -> list[Check]:
    out = []
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn()
        except Exception as exc:  # report, do not abort the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(Check(name, ok, detail))
    return out
