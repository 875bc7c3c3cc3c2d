"""Exact integer arithmetic: primes, Kronecker symbols, totients and the
two character-sum identities behind the congruence-class constants.

Everything here is integer-valued; no floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class ResidueClass:
    c: int
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"modulus must be positive, got {self.m}")
        if not 0 <= self.c < self.m:
            raise ValueError(f"residue {self.c} not reduced mod {self.m}")

    @property
    def is_prime_class(self) -> bool:
        return math.gcd(self.c, self.m) == 1


@dataclass(frozen=True)
class FactoredInteger:
    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for q, e in self.factors:
            if q <= last or e < 1:
                raise ValueError(f"bad factorisation {self.factors}")
            last = q
            prod *= q**e
        if prod != self.n:
            raise ValueError(f"factors {self.factors} do not multiply to {self.n}")

    @property
    def primes(self) -> list[int]:
        return [q for q, _ in self.factors]

    def split(self, k: int) -> tuple[int, int]:
        """Return ``(n_k, n_s)``: the part of n supported on primes dividing k,
        and the complementary part."""
        n_k = 1
        for q, e in self.factors:
            if k % q == 0:
                n_k *= q**e
        return n_k, self.n // n_k


def prime_mask(x: int) -> np.ndarray:
    """Boolean array ``is_prime[0..x]``."""
    if x < 2:
        return np.zeros(max(x + 1, 0), dtype=bool)
    is_prime = np.ones(x + 1, dtype=bool)
    is_prime[:2] = False
    is_prime[4::2] = False
    for q in range(3, math.isqrt(x) + 1, 2):
        if is_prime[q]:
            is_prime[q * q :: 2 * q] = False
    return is_prime


def sieve_primes(x: int) -> list[int]:
    """All primes <= x in ascending order."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    return np.flatnonzero(prime_mask(x)).tolist()


@lru_cache(maxsize=4096)
def factorize(n: int) -> FactoredInteger:
    """Trial division; inputs in this package stay below ~10^8."""
    if n < 1:
        raise ValueError(f"can only factor positive integers, got {n}")
    factors = []
    rest = n
    for q in (2, 3):
        if rest % q == 0:
            e = 0
            while rest % q == 0:
                rest //= q
                e += 1
            factors.append((q, e))
    q, step = 5, 2
    while q * q <= rest:
        if rest % q == 0:
            e = 0
            while rest % q == 0:
                rest //= q
                e += 1
            factors.append((q, e))
        q += step
        step = 6 - step
    if rest > 1:
        factors.append((rest, 1))
    return FactoredInteger(n, tuple(factors))


def divisors(n: int) -> list[int]:
    divs = [1]
    for q, e in factorize(n).factors:
        divs = [d * q**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def euler_phi(n: int) -> int:
    if n < 1:
        raise ValueError("euler_phi needs n >= 1")
    out = n
    for q, _ in factorize(n).factors:
        out = out // q * (q - 1)
    return out


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd positive n."""
    if n < 1 or n % 2 == 0:
        raise ValueError(f"Jacobi symbol needs odd positive n, got {n}")
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


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for arbitrary integers a, n."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = (n & -n).bit_length() - 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
        n >>= v
    return result * jacobi(a, n)


def phi_quotient_identity(n: int, m: int) -> tuple[int, int]:
    """Both sides of phi(nm/k) = phi(n)phi(m)/phi(k), k = gcd(n, m)."""
    if n < 1 or m < 1:
        raise ValueError("n, m must be positive")
    k = math.gcd(n, m)
    lhs = euler_phi(n * m // k)
    num = euler_phi(n) * euler_phi(m)
    rhs, rem = divmod(num, euler_phi(k))
    if rem:
        raise ArithmeticError(f"phi({k}) does not divide phi({n})phi({m})")
    return lhs, rhs


def character_class_sum(n: int, m: int, c: int) -> int:
    """Sum of (b/n) over units b mod n with b = -c (mod gcd(n, m)), by direct summation."""
    if n < 1 or n % 2 == 0:
        raise ValueError(f"n must be odd and positive, got {n}")
    k = math.gcd(n, m)
    target = (-c) % k
    total = 0
    for b in range(n):
        if b % k == target and math.gcd(b, n) == 1:
            total += jacobi(b, n)
    return total


def character_class_sum_closed_form(n: int, m: int, c: int) -> int:
    """Closed form of :func:`character_class_sum`.

    With k = gcd(n, m) and l = n/k split as l_k * l_s (l_k supported on the
    primes of k), the sum is (-c / k l_k) * phi(n)/phi(k) when l_s is a
    perfect square and 0 otherwise.
    """
    if n < 1 or n % 2 == 0:
        raise ValueError(f"n must be odd and positive, got {n}")
    k = math.gcd(n, m)
    l_k, l_s = factorize(n // k).split(k)
    if not is_square(l_s):
        return 0
    return kronecker(-c, k * l_k) * (euler_phi(n) // euler_phi(k))
