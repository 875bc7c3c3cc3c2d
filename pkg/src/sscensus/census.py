"""Censuses of supersingular primes over the family E_{a,b}, |a| <= A, |b| <= B.

Two exact counts of sum_{a,b} pi_0(P, E_{a,b}, x):

* :func:`census_direct` point-counts every integer pair at every prime;
* :func:`census_fast` works one prime at a time, enumerating the
  supersingular residue pairs (a mod p, b mod p) and weighting each by the
  number of box points reducing to it.

Pairs are tested for singularity prime by prime: a pair contributes at p only
if 4a^3 + 27b^2 is nonzero mod p. The family average is normalised by 4AB.

The Hurwitz-number side (:func:`hurwitz_average`, :func:`lfunc_prime_sum`,
:func:`cross_identity_check`) only involves r = 0, so the admissible
conductors are f = 1 (d = -4p, every p > 3) and f = 2 (d = -p, p = 3 mod 4).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import zeta

from .arith import factorize, kronecker, sieve_primes
from .classnum import hurwitz, l1_from_class_number, prime_discriminant_table
from .constants import PrimeSet, k_constant
from .curves import is_nonsingular, supersingular_pairs, trace_mod, trace_table

ZETA10 = math.pi**10 / 93555
# Box density of M: a pair fails at q with probability q^-2 * q^-3, so the
# limit is prod_q (1 - q^-5) = 1/zeta(5).
MINIMAL_DENSITY_LIMIT = 1 / float(zeta(5))

# (CM discriminant, j, c, d): every integral E_{a,b} with that j is (c t^2, d t^3), t != 0,
# except j = 0 (pairs (0, b)) and j = 1728 (pairs (a, 0)).
CM_CURVES: tuple[tuple[int, int, int, int], ...] = (
    (-3, 0, 0, 1),
    (-4, 1728, 1, 0),
    (-7, -3375, -35, -98),
    (-8, 8000, -30, 56),
    (-11, -32768, -264, -1694),
    (-12, 54000, -15, 22),
    (-16, 287496, -11, 14),
    (-19, -884736, -152, -722),
    (-27, -12288000, -120, -506),
    (-28, 16581375, -595, 5586),
    (-43, -884736000, -3440, -77658),
    (-67, -147197952000, -29480, -1948226),
    (-163, -262537412640768000, -8697680, -9873093538),
)


@dataclass(frozen=True)
class CurveBox:
    A: int
    B: int
    minimal_only: bool = False

    def __post_init__(self):
        if self.A < 1 or self.B < 1:
            raise ValueError(f"box bounds must be >= 1, got A={self.A}, B={self.B}")

    @property
    def normalizer(self) -> int:
        return 4 * self.A * self.B


@dataclass(frozen=True)
class DeltaClass:
    """Conductor f of d = -4p/f^2 in the r = 0 Hurwitz sum."""

    f: int

    def __post_init__(self):
        if self.f not in (1, 2):
            raise ValueError("only f = 1, 2 occur for trace 0")

    def admits(self, p: int) -> bool:
        return p > 3 and (self.f == 1 or p % 4 == 3)

    def discriminant(self, p: int) -> int:
        return -4 * p // (self.f * self.f)


DELTA = (DeltaClass(1), DeltaClass(2))


@dataclass
class CensusReport:
    x: int
    box: CurveBox
    prime_set: PrimeSet
    empirical_avg: float
    hurwitz_avg: float
    lsum_over_x: float
    predicted: float
    ratio_emp_pred: float
    ratio_hur_pred: float
    cm_count: int | None = None

    def row(self) -> dict:
        out = {
            "x": self.x,
            "A": self.box.A,
            "B": self.box.B,
            "prime_set": self.prime_set.label,
            "empirical_avg": self.empirical_avg,
            "hurwitz_avg": self.hurwitz_avg,
            "lsum_over_x": self.lsum_over_x,
            "predicted": self.predicted,
            "ratio_emp_pred": self.ratio_emp_pred,
            "ratio_hur_pred": self.ratio_hur_pred,
        }
        if self.cm_count is not None:
            out["cm_count"] = self.cm_count
        return out


def census_primes(ps: PrimeSet, x: int) -> list[int]:
    return [p for p in sieve_primes(x) if p > 3 and p in ps]


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get("CENSUS_WORKERS")
        workers = int(env) if env else (os.cpu_count() or 1)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    return workers


# -- minimality ---------------------------------------------------------------


def minimality_filter(a: int, b: int) -> bool:
    """(a, b) in M: no prime q with q^2 | a and q^3 | b."""
    if a == 0:
        if b == 0:
            return False
        return all(e < 3 for _, e in factorize(abs(b)).factors)
    for q, e in factorize(abs(a)).factors:
        if e >= 2 and b % q**3 == 0:
            return False
    return True


def _icbrt(n: int) -> int:
    r = round(n ** (1 / 3))
    while r**3 > n:
        r -= 1
    while (r + 1) ** 3 <= n:
        r += 1
    return r


@lru_cache(maxsize=8)
def _a_profiles(A: int, B: int) -> dict[tuple[int, bool], np.ndarray]:
    """Group a in [-A, A] by (product of primes q with q^2 | a and q^3 <= B, a has a square factor).

    a = 0 gets the product of every q with q^3 <= B and the square flag.
    """
    qmax = _icbrt(B)
    n = np.arange(A + 1, dtype=np.int64)
    key = np.ones(A + 1, dtype=np.int64)
    has_sq = np.zeros(A + 1, dtype=bool)
    for q in sieve_primes(math.isqrt(A)):
        has_sq[q * q :: q * q] = True
        if q <= qmax:
            key[q * q :: q * q] *= q
    groups: dict[tuple[int, bool], list[np.ndarray]] = {}
    pos = n[1:]
    for (k, s) in {(int(k), bool(s)) for k, s in zip(key[1:].tolist(), has_sq[1:].tolist())}:
        sel = pos[(key[1:] == k) & (has_sq[1:] == s)]
        groups.setdefault((k, s), []).append(np.concatenate([sel, -sel]))
    zero_key = math.prod(sieve_primes(qmax)) if qmax >= 2 else 1
    groups.setdefault((zero_key, True), []).append(np.zeros(1, dtype=np.int64))
    return {k: np.concatenate(v) for k, v in groups.items()}


def _squarefree_divisors_upto(n: int, limit: int) -> list[tuple[int, int]]:
    """(e, mu(e)) for squarefree e | n with e <= limit."""
    out = [(1, 1)]
    for q in factorize(n).primes if n > 1 else []:
        out += [(e * q, -mu) for e, mu in out if e * q <= limit]
    return out


def _residue_counts(bound: int, p: int) -> np.ndarray:
    """#{t in [-bound, bound]: t = r mod p} for r = 0..p-1."""
    r = np.arange(p, dtype=np.int64)
    return (bound - r) // p - (-bound - 1 - r) // p


def _minimal_b_counts(key: int, has_sq: bool, B: int, p: int) -> np.ndarray:
    """#{|b| <= B: b = r mod p, (a, b) in M} for any a with this profile."""
    out = np.zeros(p, dtype=np.int64)
    qmax = _icbrt(B)
    r = np.arange(p, dtype=np.int64)
    for e, mu in _squarefree_divisors_upto(key, qmax):
        e3 = e**3
        S = B // e3
        if e % p == 0:
            out[0] += mu * 2 * S
            continue
        ns = _residue_counts(S, p)
        ns[0] -= 1  # b = 0 handled below
        out += mu * ns[r * pow(e3, -1, p) % p]
    if not has_sq:
        out[0] += 1  # (a, 0) is minimal iff a has no square factor
    return out


# -- per-prime census ------------------------------------------------------------


def _prime_count(p: int, A: int, B: int, minimal_only: bool) -> int:
    abar, bbar = supersingular_pairs(p)
    if abar.size == 0:
        return 0
    if not minimal_only:
        NA = _residue_counts(A, p)
        NB = _residue_counts(B, p)
        return int(np.dot(NA[abar], NB[bbar]))
    total = 0
    for (key, has_sq), avals in _a_profiles(A, B).items():
        NA = np.bincount(avals % p, minlength=p)
        NB = _minimal_b_counts(key, has_sq, B, p)
        total += int(np.dot(NA[abar], NB[bbar]))
    return total


def _prime_count_task(args) -> int:
    return _prime_count(*args)


def prime_census_counts(ps: PrimeSet, box: CurveBox, x: int, workers: int | None = None) -> list[tuple[int, int]]:
    """[(p, #pairs in box supersingular at p)] for primes 3 < p <= x in ps, ascending."""
    primes = census_primes(ps, x)
    tasks = [(p, box.A, box.B, box.minimal_only) for p in primes]
    n = resolve_workers(workers)
    if n == 1 or len(tasks) < 2:
        counts = [_prime_count(*t) for t in tasks]
    else:
        # map preserves order, so the reduction below is deterministic
        with ProcessPoolExecutor(max_workers=n) as pool:
            counts = list(pool.map(_prime_count_task, tasks, chunksize=max(1, len(tasks) // (8 * n))))
    return list(zip(primes, counts))


def census_fast(ps: PrimeSet, box: CurveBox, x: int, workers: int | None = None) -> int:
    return sum(c for _, c in prime_census_counts(ps, box, x, workers))


@lru_cache(maxsize=64)
def _trace_table(p: int) -> np.ndarray:
    return trace_table(p)


def census_direct(ps: PrimeSet, box: CurveBox, x: int) -> int:
    """Brute force: every pair, every prime, one point count per residue pair."""
    total = 0
    pairs = [
        (a, b)
        for a in range(-box.A, box.A + 1)
        for b in range(-box.B, box.B + 1)
        if not box.minimal_only or minimality_filter(a, b)
    ]
    for p in census_primes(ps, x):
        traces = _trace_table(p)
        for a, b in pairs:
            if is_nonsingular(a, b, p) and traces[a % p, b % p] == 0:
                total += 1
    return total


def family_average(total: int, box: CurveBox) -> float:
    return total / box.normalizer


def minimality_density(A: int, B: int) -> float:
    """Fraction of the box pairs other than (0, 0) lying in M."""
    if A < 1 or B < 1:
        raise ValueError("A, B must be >= 1")
    qmax = _icbrt(B)
    good = 0
    for (key, has_sq), avals in _a_profiles(A, B).items():
        per_a = sum(mu * 2 * (B // e**3) for e, mu in _squarefree_divisors_upto(key, qmax))
        per_a += 0 if has_sq else 1
        good += per_a * avals.size
    return good / ((2 * A + 1) * (2 * B + 1) - 1)


# -- Hurwitz / L-function sums ---------------------------------------------------


@lru_cache(maxsize=2)
def _table(N: int):
    return prime_discriminant_table(N)


def _table_for(x: int):
    # round up so that nearby bounds share one sieve
    N = max(1000, 1 << max(0, (x - 1).bit_length()))
    return _table(N)


def _hurwitz_values(primes: np.ndarray, x: int) -> np.ndarray:
    """H(-4p) for primes p > 3 (integers: no weighted forms occur)."""
    return _table_for(x).forms[primes]


def hurwitz_average(ps: PrimeSet, x: int) -> float:
    """(1/2) sum_{3 < p <= x, p in P} H(-4p)/p."""
    primes = np.array(census_primes(ps, x), dtype=np.int64)
    if primes.size == 0:
        return 0.0
    H = _hurwitz_values(primes, x)
    return 0.5 * math.fsum((H / primes).tolist())


def _l_values(primes: np.ndarray, x: int) -> tuple[np.ndarray, np.ndarray]:
    """L(1, chi_{-4p}) and L(1, chi_{-p}) (the latter 0 off delta_2) from class numbers."""
    t = _table_for(x)
    h4 = t.forms[primes] - t.even[primes]
    h1 = t.even[primes]
    root = np.sqrt(primes.astype(np.float64))
    # w = 2 for every discriminant here since p > 3
    L4 = 2 * math.pi * h4 / (2 * 2 * root)
    L1 = np.where(primes % 4 == 3, 2 * math.pi * h1 / (2 * root), 0.0)
    return L4, L1


def lfunc_prime_sum(ps: PrimeSet, x: int) -> float:
    """sum_{f=1,2} (1/f) sum_{p in delta_f(x) cap P} L(1, chi_{-4p/f^2}) log p."""
    primes = np.array(census_primes(ps, x), dtype=np.int64)
    if primes.size == 0:
        return 0.0
    L4, L1 = _l_values(primes, x)
    logs = np.log(primes)
    return math.fsum((L4 * logs).tolist()) + 0.5 * math.fsum((L1 * logs).tolist())


def cross_identity_check(ps: PrimeSet, x: int) -> tuple[float, float]:
    """Both sides of (1/2) sum H(-4p)/p = (1/pi) sum_f (1/f) sum L(1, chi_d)/sqrt(p).

    Evaluated per discriminant: the left side from Hurwitz numbers, the right
    side from L-values via the class number formula.
    """
    lhs_terms, rhs_terms = [], []
    for p in census_primes(ps, x):
        H = hurwitz(-4 * p).value
        lhs_terms.append(H.numerator / (H.denominator * p))
        for delta in DELTA:
            if delta.admits(p):
                rhs_terms.append(l1_from_class_number(delta.discriminant(p)) / (delta.f * math.sqrt(p)))
    return 0.5 * math.fsum(lhs_terms), math.fsum(rhs_terms) / math.pi


# -- CM diagnostic --------------------------------------------------------------


def cm_pairs(box: CurveBox) -> list[tuple[int, int, int]]:
    """(a, b, CM discriminant) for box pairs with CM j-invariant, excluding the j = 0, 1728 lines."""
    out = []
    for D, _, c, d in CM_CURVES:
        if c == 0 or d == 0:
            continue
        t = 1
        while abs(c) * t * t <= box.A and abs(d) * t**3 <= box.B:
            for s in (t, -t):
                a, b = c * s * s, d * s**3
                if not box.minimal_only or minimality_filter(a, b):
                    out.append((a, b, D))
            t += 1
    return out


def cm_subcount(ps: PrimeSet, box: CurveBox, x: int) -> int:
    """Part of the census contributed by CM curves.

    On (a, 0) the supersingular good primes are p = 3 mod 4, on (0, b) they
    are p = 2 mod 3; the remaining CM pairs are few and point-counted.
    """
    primes = census_primes(ps, x)
    A, B = box.A, box.B
    total = 0
    if box.minimal_only:
        sqfree_a = _squarefree_mask(A)
        cubefree_b = _cubefree_mask(B)
    for p in primes:
        if p % 4 == 3:
            if box.minimal_only:
                n = int(sqfree_a[1:].sum() - sqfree_a[p::p].sum())
            else:
                n = A - A // p
            total += 2 * n
        if p % 3 == 2:
            if box.minimal_only:
                n = int(cubefree_b[1:].sum() - cubefree_b[p::p].sum())
            else:
                n = B - B // p
            total += 2 * n
    for a, b, _ in cm_pairs(box):
        for p in primes:
            if is_nonsingular(a, b, p) and trace_mod(a, b, p) == 0:
                total += 1
    return total


def _squarefree_mask(n: int) -> np.ndarray:
    m = np.ones(n + 1, dtype=bool)
    m[0] = False
    for q in sieve_primes(math.isqrt(n)):
        m[q * q :: q * q] = False
    return m


def _cubefree_mask(n: int) -> np.ndarray:
    m = np.ones(n + 1, dtype=bool)
    m[0] = False
    for q in sieve_primes(_icbrt(n)):
        m[q**3 :: q**3] = False
    return m


def cm_supersingular_rule(D: int, p: int) -> bool:
    """For p of good reduction not dividing D: a_p = 0 iff p is inert in Q(sqrt(D))."""
    return kronecker(D, p) == -1


# -- reports ------------------------------------------------------------------------


def predicted(C: float, x: int) -> float:
    return C * math.sqrt(x) / math.log(x)


def predicted_integral(C: float, x: int) -> float:
    """(C/2) * integral_2^x dt / (sqrt(t) log t).

    Same leading term as :func:`predicted`, but keeps the 1 + 2/log x + ...
    corrections that partial summation of K_P x produces.
    """
    return C / 2 * quad(lambda t: 1 / (math.sqrt(t) * math.log(t)), 2, x, limit=200)[0]


def convergence_report(
    ps: PrimeSet,
    box: CurveBox,
    x_grid: list[int],
    workers: int | None = None,
    with_cm: bool = False,
) -> list[CensusReport]:
    if list(x_grid) != sorted(x_grid):
        raise ValueError("x_grid must be ascending")
    if not x_grid:
        return []
    if x_grid[0] < 5:
        raise ValueError("grid points must be >= 5")
    result = k_constant(ps)
    per_prime = prime_census_counts(ps, box, x_grid[-1], workers)
    reports = []
    for x in x_grid:
        total = sum(c for p, c in per_prime if p <= x)
        emp = family_average(total, box)
        hav = hurwitz_average(ps, x)
        lsum = lfunc_prime_sum(ps, x) / x
        pred = predicted(result.C, x)
        reports.append(
            CensusReport(
                x=x,
                box=box,
                prime_set=ps,
                empirical_avg=emp,
                hurwitz_avg=hav,
                lsum_over_x=lsum,
                predicted=pred,
                ratio_emp_pred=emp / pred,
                ratio_hur_pred=hav / pred,
                cm_count=cm_subcount(ps, box, x) if with_cm else None,
            )
        )
    return reports
