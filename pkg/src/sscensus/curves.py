"""Short Weierstrass curves Y^2 = X^3 + aX + b over F_p (p > 3).

Point counts use the quadratic-character sum. Supersingular j-invariants
are located with a vectorised x-only Montgomery ladder (every x in F_p lies
on E or its twist, and both have p + 1 points when E is supersingular),
then confirmed with an exact point count.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import sieve_primes


class CurveError(ValueError):
    pass


def _check_prime(p: int) -> None:
    if p <= 3:
        raise CurveError(f"p must be a prime > 3, got {p}")


@dataclass(frozen=True)
class FpCurve:
    a: int
    b: int
    p: int

    def __post_init__(self):
        _check_prime(self.p)
        object.__setattr__(self, "a", self.a % self.p)
        object.__setattr__(self, "b", self.b % self.p)
        if self.discriminant == 0:
            raise CurveError(f"singular curve (a, b) = ({self.a}, {self.b}) mod {self.p}")

    @property
    def discriminant(self) -> int:
        return (4 * self.a**3 + 27 * self.b**2) % self.p


def is_nonsingular(a: int, b: int, p: int) -> bool:
    return (4 * a**3 + 27 * b**2) % p != 0


@lru_cache(maxsize=64)
def quadratic_character_table(p: int) -> np.ndarray:
    """chi[v] for v in 0..p-1 (0 at 0, +1 on nonzero squares, -1 otherwise)."""
    chi = -np.ones(p, dtype=np.int64)
    x = np.arange(1, p, dtype=np.int64)
    chi[(x * x) % p] = 1
    chi[0] = 0
    return chi


@lru_cache(maxsize=64)
def _cubes(p: int) -> np.ndarray:
    x = np.arange(p, dtype=np.int64)
    return (x * x % p) * x % p


def trace_mod(a: int, b: int, p: int) -> int:
    """a_p = -sum_x chi(x^3 + ax + b), no singularity check."""
    x = np.arange(p, dtype=np.int64)
    vals = (_cubes(p) + (a % p) * x + (b % p)) % p
    return -int(quadratic_character_table(p)[vals].sum())


def trace_of_frobenius(E: FpCurve) -> int:
    return trace_mod(E.a, E.b, E.p)


def is_supersingular(E: FpCurve) -> bool:
    return trace_of_frobenius(E) == 0


def j_invariant(E: FpCurve) -> int:
    p = E.p
    a3 = 4 * E.a**3 % p
    return 1728 * a3 * pow(E.discriminant, -1, p) % p


def automorphism_count(E: FpCurve) -> int:
    """#{u in F_p^*: u^4 a = a and u^6 b = b}."""
    p = E.p
    u = np.arange(1, E.p, dtype=np.int64)
    u2 = u * u % p
    u4 = u2 * u2 % p
    u6 = u4 * u2 % p
    return int(np.count_nonzero((u4 * E.a % p == E.a) & (u6 * E.b % p == E.b)))


def trace_table(p: int) -> np.ndarray:
    """Traces of all (a, b) in F_p^2, indexed [a, b]; singular entries are meaningless.

    With n[a, v] = #{x : x^3 + ax = v}, the trace is -sum_v n[a, v] chi(v + b),
    one matrix product against the circulant of chi (exact in float64).
    """
    _check_prime(p)
    chi = quadratic_character_table(p)
    x = np.arange(p, dtype=np.int64)
    a = np.arange(p, dtype=np.int64)[:, None]
    vals = (_cubes(p)[None, :] + a * x[None, :]) % p
    counts = np.zeros((p, p), dtype=np.float64)
    np.add.at(counts, (np.repeat(np.arange(p), p), vals.ravel()), 1.0)
    circ = chi[(x[:, None] + x[None, :]) % p].astype(np.float64)
    return -np.rint(counts @ circ).astype(np.int64)


@dataclass(frozen=True)
class TraceSpectrum:
    p: int
    counts: dict[int, Fraction] = field(default_factory=dict)

    @property
    def mass(self) -> Fraction:
        return sum(self.counts.values(), Fraction(0))


@lru_cache(maxsize=256)
def trace_spectrum(p: int) -> TraceSpectrum:
    """Isomorphism classes of E/F_p bucketed by trace, class weight 2/#Aut.

    Classes are orbits of (a, b) -> (u^4 a, u^6 b); each orbit is labelled by
    its minimal code a*p + b.
    """
    _check_prime(p)
    traces = trace_table(p)
    u = np.arange(1, p, dtype=np.int64)
    u2 = u * u % p
    u4 = u2 * u2 % p
    u6 = u4 * u2 % p
    A, B = np.meshgrid(np.arange(p, dtype=np.int64), np.arange(p, dtype=np.int64), indexing="ij")
    A, B = A.ravel(), B.ravel()
    good = (4 * A**3 + 27 * B**2) % p != 0
    A, B = A[good], B[good]
    canon = np.full(A.shape, p * p, dtype=np.int64)
    for s4, s6 in zip(u4.tolist(), u6.tolist()):
        np.minimum(canon, (s4 * A % p) * p + (s6 * B % p), out=canon)
    reps = np.unique(canon)
    counts: dict[int, Fraction] = defaultdict(Fraction)
    for code in reps.tolist():
        a, b = divmod(code, p)
        E = FpCurve(a, b, p)
        counts[int(traces[a, b])] += Fraction(2, automorphism_count(E))
    return TraceSpectrum(p, dict(sorted(counts.items())))


def weighted_trace_count(p: int, r: int) -> Fraction:
    """Weighted number of F_p-isomorphism classes with trace r (equals H(r^2 - 4p))."""
    _check_prime(p)
    if r * r >= 4 * p:
        raise CurveError(f"trace {r} outside the open Hasse interval for p = {p}")
    return trace_spectrum(p).counts.get(r, Fraction(0))


# -- supersingular j-invariants ------------------------------------------------


def _ladder_is_identity(a, b, x0: int, n: int, p: int):
    """Vectorised x-only ladder: does [n](x0) vanish on y^2 = x^3 + ax + b? (p < 2^31)

    ``a`` and ``b`` are arrays over a family of curves; x0 != 0 is shared.
    Returns a boolean array (True also when the ladder degenerates, which can
    only happen if some multiple of the point is already the identity).
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    X1 = np.full(a.shape, x0 % p, dtype=a.dtype)
    Z1 = np.ones(a.shape, dtype=a.dtype)
    # R1 = 2P
    X2, Z2 = _xdbl(X1, Z1, a, b, p)
    for bit in bin(n)[3:]:
        Xs, Zs = _xadd(X1, Z1, X2, Z2, x0, a, b, p)
        if bit == "1":
            X1, Z1 = Xs, Zs
            X2, Z2 = _xdbl(X2, Z2, a, b, p)
        else:
            X2, Z2 = Xs, Zs
            X1, Z1 = _xdbl(X1, Z1, a, b, p)
    return Z1 % p == 0


def _xdbl(X, Z, a, b, p):
    XX = X * X % p
    ZZ = Z * Z % p
    t = (XX - a * ZZ) % p
    X2 = (t * t - 8 * b % p * (X * ZZ % p) % p * Z) % p
    Z2 = 4 * Z % p * ((XX * X + a * X % p * ZZ + b * ZZ % p * Z) % p) % p
    return X2, Z2


def _xadd(X1, Z1, X2, Z2, x0, a, b, p):
    """x(P + Q) from x(P), x(Q) and x(P - Q) = x0 (affine)."""
    XX = X1 * X2 % p
    ZZ = Z1 * Z2 % p
    t = (XX - a * ZZ) % p
    cross = (X1 * Z2 + X2 * Z1) % p
    X3 = (t * t - 4 * b % p * ZZ % p * cross) % p
    d = (X1 * Z2 - X2 * Z1) % p
    Z3 = x0 * (d * d % p) % p
    return X3, Z3


def j_representative(j: int, p: int) -> tuple[int, int]:
    """A curve (a, b) mod p with j-invariant j: (3jt, 2jt^2), t = 1728 - j."""
    j %= p
    if j == 0:
        return 0, 1
    if j == 1728 % p:
        return 1, 0
    t = (1728 - j) % p
    return 3 * j * t % p, 2 * j * t % p * t % p


@lru_cache(maxsize=2048)
def supersingular_j_set(p: int) -> frozenset[int]:
    """All j in F_p whose curves have trace 0."""
    _check_prime(p)
    j = np.arange(1, p, dtype=np.int64)
    j = j[j != 1728 % p]
    t = (1728 - j) % p
    a, b = 3 * j * t % p, 2 * j * t % p * t % p
    for x0 in (1, 2, 3):
        keep = _ladder_is_identity(a, b, x0, p + 1, p)
        j, a, b = j[keep], a[keep], b[keep]
    result = {int(jj) for jj, aa, bb in zip(j, a, b) if trace_mod(int(aa), int(bb), p) == 0}
    for special in (0, 1728 % p):
        if trace_mod(*j_representative(special, p), p) == 0:
            result.add(special)
    return frozenset(result)


def supersingular_pairs(p: int) -> tuple[np.ndarray, np.ndarray]:
    """All nonsingular (a, b) in F_p^2 with trace 0, as two index arrays.

    For j not in {0, 1728} the curves with invariant j are exactly
    (s^2 a0, s^3 b0), s in F_p^*, one pair per s.
    """
    s = np.arange(1, p, dtype=np.int64)
    s2 = s * s % p
    s3 = s2 * s % p
    zeros = np.zeros(p - 1, dtype=np.int64)
    avals, bvals = [], []
    for j in sorted(supersingular_j_set(p)):
        if j == 0:
            avals.append(zeros)
            bvals.append(s)
        elif j == 1728 % p:
            avals.append(s)
            bvals.append(zeros)
        else:
            a0, b0 = j_representative(j, p)
            avals.append(s2 * a0 % p)
            bvals.append(s3 * b0 % p)
    if not avals:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(avals), np.concatenate(bvals)


# -- curves over Q: ladder scan of a single curve, 4-torsion -----------------


def _scalar_ladder_vanishes(a: int, b: int, x0: int, n: int, p: int) -> bool:
    X1, Z1 = x0 % p, 1
    X2, Z2 = _xdbl(X1, Z1, a, b, p)
    for bit in bin(n)[3:]:
        Xs, Zs = _xadd(X1, Z1, X2, Z2, x0, a, b, p)
        if bit == "1":
            X1, Z1 = Xs, Zs
            X2, Z2 = _xdbl(X2, Z2, a, b, p)
        else:
            X2, Z2 = Xs, Zs
            X1, Z1 = _xdbl(X1, Z1, a, b, p)
    return Z1 % p == 0


def supersingular_primes(a: int, b: int, x: int, start: int = 5) -> list[int]:
    """Primes start <= p <= x (p > 3) of good reduction where E_{a,b} has a_p = 0."""
    out = []
    for p in sieve_primes(x):
        if p < max(start, 5) or not is_nonsingular(a, b, p):
            continue
        am, bm = a % p, b % p
        if all(_scalar_ladder_vanishes(am, bm, x0, p + 1, p) for x0 in (1, 2, 3)):
            if trace_mod(am, bm, p) == 0:
                out.append(p)
    return out


Point = tuple[Fraction, Fraction] | None


def _add(P: Point, Q: Point, a: int) -> Point:
    """Group law on Y^2 = X^3 + aX + b over Q (None is the identity)."""
    if P is None:
        return Q
    if Q is None:
        return P
    (x1, y1), (x2, y2) = P, Q
    if x1 == x2 and y1 == -y2:
        return None
    if P == Q:
        lam = (3 * x1 * x1 + a) / (2 * y1)
    else:
        lam = (y2 - y1) / (x2 - x1)
    x3 = lam * lam - x1 - x2
    return x3, lam * (x1 - x3) - y1


def point_order(P: Point, a: int, limit: int = 12) -> int | None:
    """Order of P if it is at most ``limit`` (Mazur: torsion orders are <= 12)."""
    Q = P
    for n in range(1, limit + 1):
        if Q is None:
            return n
        Q = _add(Q, P, a)
        if Q is None:
            return n + 1
    return None


def four_torsion_point(a: int, b: int) -> Point:
    """An integral point of exact order 4 on E_{a,b}/Q, or None.

    Nagell-Lutz: torsion points have integer coordinates with y = 0 or
    y^2 | 4a^3 + 27b^2, so a finite search over divisors is exhaustive.
    """
    disc = 4 * a**3 + 27 * b**2
    if disc == 0:
        return None
    for y in range(1, math.isqrt(abs(disc)) + 1):
        if disc % (y * y):
            continue
        rhs = y * y
        for x in _integer_roots_cubic(a, b - rhs):
            P = (Fraction(x), Fraction(y))
            if point_order(P, a) == 4:
                return P
    return None


def _integer_roots_cubic(a: int, c: int) -> list[int]:
    """Integer roots of x^3 + a x + c."""
    if c == 0:
        roots = [0]
        r = math.isqrt(-a) if a < 0 else None
        if r is not None and r * r == -a:
            roots += [r, -r]
        return roots
    roots = []
    n = abs(c)
    d = 1
    while d * d <= n:
        if n % d == 0:
            for t in {d, n // d}:
                for x in (t, -t):
                    if x**3 + a * x + c == 0:
                        roots.append(x)
        d += 1
    return sorted(set(roots))


def find_four_torsion_curve(bound: int = 20) -> tuple[int, int, Point]:
    """First (a, b) with |a|, |b| <= bound (ordered by max(|a|,|b|), then a, b) carrying a rational point of order 4."""
    pairs = [(a, b) for a in range(-bound, bound + 1) for b in range(-bound, bound + 1)]
    pairs.sort(key=lambda ab: (max(abs(ab[0]), abs(ab[1])), ab[0], ab[1]))
    for a, b in pairs:
        P = four_torsion_point(a, b)
        if P is not None:
            return a, b, P
    raise LookupError(f"no 4-torsion curve with |a|, |b| <= {bound}")


def torsion_order_bound(a: int, b: int, x: int = 200) -> int:
    """gcd of #E(F_p) over good primes 5 <= p <= x: a multiple of #E(Q)_tors up to 2,3-parts.

    Reduction is injective on prime-to-p torsion, so this gcd is divisible by
    the prime-to-p part of the torsion order for every good p used.
    """
    g = 0
    for p in sieve_primes(x):
        if p < 5 or not is_nonsingular(a, b, p):
            continue
        g = math.gcd(g, p + 1 - trace_mod(a, b, p))
    return g


@dataclass(frozen=True)
class TorsionDemo:
    a: int
    b: int
    point: Point
    primes: list[tuple[int, int]]  # (p, p mod 4)


def torsion_4_obstruction_demo(a: int, b: int, x: int) -> TorsionDemo:
    """Supersingular primes <= x of a curve with a rational 4-torsion point."""
    P = four_torsion_point(a, b)
    if P is None:
        raise CurveError(f"E_({a},{b}) has no rational point of order 4")
    return TorsionDemo(a, b, P, [(p, p % 4) for p in supersingular_primes(a, b, x)])
