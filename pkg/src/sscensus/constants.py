"""Predicted constants K_P and C_P = (2/pi) K_P for unions of congruence classes.

For one class p = c (mod m):

* m odd::

    K = zeta(2)/phi(m) * prod_{q|m} (1 - q^-2)
        * sum_{k|m} (-c/k)/k * prod_{q|k, q∤m/k} (1 - (-c/q)/q)^-1

* 4 | m: the odd-k sum above (first term) plus, when c = 3 (mod 4)::

    zeta(2)/(2 phi(m)) * prod_{q|m/4} (1 - q^-2)
        * sum_{k|m/4} (-c/k)/k * prod_{q|k, q∤m/4k} (1 - (-c/q)/q)^-1

  with (-c/k) a Kronecker symbol, so even k is allowed.

* m = 2 (mod 4): the class is the same set of odd primes as c mod m/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .arith import divisors, euler_phi, factorize, kronecker

ZETA2 = math.pi**2 / 6


class PrimeSetError(ValueError):
    pass


@dataclass(frozen=True)
class PrimeSet:
    """Primes p with p mod m in ``residues``."""

    m: int
    residues: frozenset[int]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.m < 1:
            raise PrimeSetError(f"modulus must be positive, got {self.m}")
        res = frozenset(int(c) % self.m for c in self.residues)
        bad = sorted(c for c in res if math.gcd(c, self.m) != 1)
        if bad:
            raise PrimeSetError(f"residues {bad} are not coprime to {self.m}")
        object.__setattr__(self, "residues", res)
        if not self.label:
            object.__setattr__(self, "label", self._default_label())

    @classmethod
    def all_primes(cls) -> PrimeSet:
        return cls(1, frozenset({0}), "all")

    @classmethod
    def of(cls, m: int, *residues: int) -> PrimeSet:
        return cls(m, frozenset(residues))

    def _default_label(self) -> str:
        if self.m == 1:
            return "all"
        return f"{','.join(map(str, sorted(self.residues)))} mod {self.m}"

    def __contains__(self, p: int) -> bool:
        return p % self.m in self.residues

    @property
    def density(self) -> Fraction:
        return Fraction(len(self.residues), euler_phi(self.m))

    def select(self, primes):
        return [p for p in primes if p % self.m in self.residues]


@dataclass(frozen=True)
class ConstantResult:
    K: float
    C: float
    per_class: dict[int, float]
    density: Fraction


def _prime_factors(n: int) -> list[int]:
    return factorize(n).primes


def _class_sum(c: int, modulus: int, ks) -> float:
    """sum over k of (-c/k)/k * prod_{q|k, q∤modulus/k} (1 - (-c/q)/q)^-1."""
    total = 0.0
    for k in ks:
        term = kronecker(-c, k) / k
        if term == 0:
            continue
        for q in _prime_factors(k):
            if (modulus // k) % q:
                term /= 1 - kronecker(-c, q) / q
        total += term
    return total


def _euler(n: int) -> float:
    out = 1.0
    for q in _prime_factors(n):
        out *= 1 - 1 / q**2
    return out


def k_constant_single(c: int, m: int) -> float:
    if m < 1:
        raise PrimeSetError(f"modulus must be positive, got {m}")
    if math.gcd(c, m) != 1:
        raise PrimeSetError(f"gcd({c}, {m}) != 1")
    if m % 4 == 2:
        m //= 2
    c %= m
    phi = euler_phi(m)
    divs = divisors(m)
    if m % 2:
        return ZETA2 / phi * _euler(m) * _class_sum(c, m, divs)
    first = ZETA2 / phi * _euler(m) * _class_sum(c, m, [k for k in divs if k % 2])
    if c % 4 != 3:
        return first
    m4 = m // 4
    second = ZETA2 / (2 * phi) * _euler(m4) * _class_sum(c, m4, divisors(m4))
    return first + second


def k_constant(ps: PrimeSet) -> ConstantResult:
    per_class = {c: k_constant_single(c, ps.m) for c in sorted(ps.residues)}
    K = math.fsum(per_class.values())
    return ConstantResult(K=K, C=2 / math.pi * K, per_class=per_class, density=ps.density)


def c_constant(ps: PrimeSet) -> float:
    return k_constant(ps).C


# -- split primes of abelian fields ------------------------------------------


@dataclass(frozen=True)
class Quadratic:
    D: int  # squarefree, != 0, 1


@dataclass(frozen=True)
class Cyclotomic:
    m: int


def _squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(abs(n)).factors)


def field_discriminant(D: int) -> int:
    if D in (0, 1) or not _squarefree(D):
        raise PrimeSetError(f"Q(sqrt({D})) needs squarefree D != 0, 1")
    return D if D % 4 == 1 else 4 * D


def split_prime_set(fld: Quadratic | Cyclotomic) -> PrimeSet:
    """Rational primes (up to finitely many) splitting completely in the field."""
    if isinstance(fld, Quadratic):
        disc = field_discriminant(fld.D)
        n = abs(disc)
        res = frozenset(c for c in range(n) if math.gcd(c, n) == 1 and kronecker(disc, c) == 1)
        return PrimeSet(n, res, f"split:Q(sqrt:{fld.D})")
    if isinstance(fld, Cyclotomic):
        if fld.m < 1:
            raise PrimeSetError(f"cyclotomic level must be positive, got {fld.m}")
        return PrimeSet(fld.m, frozenset({1 % fld.m}), f"split:Q(zeta:{fld.m})")
    raise PrimeSetError(f"unsupported field descriptor {fld!r}")


def _is_prime(n: int) -> bool:
    return n > 1 and factorize(n).factors == ((n, 1),)


def quadratic_closed_form(q: int, sign: int) -> float:
    """C_L for L = Q(sqrt(sign * q)), q an odd prime, sign = +1 or -1."""
    if q == 2 or not _is_prime(q):
        raise PrimeSetError(f"q must be an odd prime, got {q}")
    if sign not in (1, -1):
        raise PrimeSetError("sign must be +1 or -1")
    if sign < 0:
        factor = (q - 1) / q if q % 4 == 3 else (q - 0.25) / q
    else:
        factor = (q + 0.25) / q if q % 4 == 3 else (q + 1) / q
    return math.pi / 3 * 0.5 * factor


def exact_pi_hint(C: float, max_den: int = 1000, tol: float = 1e-12) -> str | None:
    """Render C as 'r*pi/s' when C/pi is (numerically) a small rational."""
    r = Fraction(C / math.pi).limit_denominator(max_den)
    if r == 0 or abs(C - math.pi * r.numerator / r.denominator) > tol * abs(C):
        return None
    num = "pi" if r.numerator == 1 else f"{r.numerator}*pi"
    return num if r.denominator == 1 else f"{num}/{r.denominator}"
