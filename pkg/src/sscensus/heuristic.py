"""The probabilistic model behind the predicted constants.

The chance that a_p = t is modelled as

    f_M(t, p, k) = c_p * g(t / 2 sqrt p) * F_M(t mod M) * h(t, p, k),

where g is the semicircle density of the Sato-Tate law, F_M the Chebotarev
trace fraction in GL_2(Z/M), and h the factor forced by a rational point of
order k. The image of Galois mod M is assumed to be all of GL_2(Z/M).
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.stats import kstest

from .arith import euler_phi, factorize, sieve_primes
from .census import CM_CURVES, resolve_workers
from .constants import ZETA2, PrimeSet, k_constant
from .curves import is_nonsingular, trace_mod

TRACE_FRACTION_MAX_M = 60


class IncompatibleCongruences(ValueError):
    """No trace t has nonzero weight under the given congruence conditions."""


@dataclass(frozen=True)
class SatoTateAngle:
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"angle {self.theta} outside [0, pi]")

    @classmethod
    def from_trace(cls, t: int, p: int) -> SatoTateAngle:
        return cls(math.acos(max(-1.0, min(1.0, t / (2 * math.sqrt(p))))))

    @property
    def xi(self) -> float:
        return math.cos(self.theta)


@dataclass(frozen=True)
class HeuristicParams:
    M: int = 1  # level where the Galois image splits and stabilizes
    k: int = 1  # order of the rational torsion
    n: int = 1  # degree of the field

    def __post_init__(self):
        if min(self.M, self.k, self.n) < 1:
            raise ValueError(f"M, k, n must be >= 1, got {self}")


# -- densities ------------------------------------------------------------------


def sato_tate_density(theta: float) -> float:
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta = {theta} outside [0, pi]")
    return 2 / math.pi * math.sin(theta) ** 2


def semicircle_density(xi: float) -> float:
    if not -1.0 <= xi <= 1.0:
        raise ValueError(f"xi = {xi} outside [-1, 1]")
    return 2 / math.pi * math.sqrt(1 - xi * xi)


def sato_tate_cdf(theta):
    """Sato-Tate mass of [0, theta]."""
    theta = np.asarray(theta, dtype=np.float64)
    return (theta - np.sin(theta) * np.cos(theta)) / math.pi


# -- trace fractions in GL_2(Z/M) ---------------------------------------------------


@lru_cache(maxsize=128)
def trace_counts(M: int) -> tuple[int, ...]:
    """#{g in GL_2(Z/M) : tr g = t} for t = 0..M-1.

    Writing g = [[a, b], [c, d]], the number of (b, c) making ad - bc a unit
    depends only on ad, so the count is a sum over (a, d) of one table lookup.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if M > TRACE_FRACTION_MAX_M:
        raise ValueError(f"trace fractions are enumerated only for M <= {TRACE_FRACTION_MAX_M}, got {M}")
    r = np.arange(M)
    prod = np.bincount((np.outer(r, r) % M).ravel(), minlength=M)  # #{(b, c): bc = u}
    unit = np.array([math.gcd(int(v), M) == 1 for v in r])
    # good[w] = #{(b, c): w - bc is a unit}
    good = np.array([int(prod[(w - r[unit]) % M].sum()) for w in range(M)], dtype=np.int64)
    a = r[:, None]
    t = r[None, :]
    d = (t - a) % M
    per = good[(a * d) % M]  # [a, t]
    return tuple(int(v) for v in per.sum(axis=0))


def gl2_order(M: int) -> int:
    out = 1
    for q, e in factorize(M).factors if M > 1 else []:
        out *= q ** (4 * (e - 1)) * (q * q - 1) * (q * q - q)
    return out


def trace_fraction(M: int, t: int) -> Fraction:
    """F_M(t) = M |{g : tr g = t}| / |GL_2(Z/M)|."""
    counts = trace_counts(M)
    return Fraction(M * counts[t % M], sum(counts))


# -- torsion and normalisation ------------------------------------------------------


def torsion_indicator(t: int, p: int, k: int) -> int:
    """k when t = p + 1 (mod k), else 0: a point of order k divides #E(F_p) = p + 1 - t."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return k if (t - p - 1) % k == 0 else 0


def model_weights(p: int, M: int = 1, k: int = 1, image_traces: Iterable[int] | None = None):
    """(t, unnormalised weight) over |t| <= floor(2 sqrt p).

    ``image_traces`` restricts the traces mod M that the Galois image can
    realise; by default every class carries its full-image fraction F_M.
    """
    T = math.isqrt(4 * p)
    t = np.arange(-T, T + 1)
    g = 2 / math.pi * np.sqrt(np.clip(1 - (t / (2 * math.sqrt(p))) ** 2, 0.0, None))
    counts = np.array(trace_counts(M), dtype=np.float64)
    F = M * counts / counts.sum()
    if image_traces is not None:
        allowed = np.zeros(M, dtype=bool)
        allowed[[int(s) % M for s in image_traces]] = True
        F = np.where(allowed, F, 0.0)
    h = np.where((t - p - 1) % k == 0, float(k), 0.0)
    return t, g * F[t % M] * h


def model_normalizer(p: int, M: int = 1, k: int = 1, image_traces: Iterable[int] | None = None) -> float:
    """c_p making the model weights over |t| <= 2 sqrt p sum to 1."""
    _, w = model_weights(p, M, k, image_traces)
    total = math.fsum(w.tolist())
    if total == 0:
        raise IncompatibleCongruences(f"no trace survives at p={p} with M={M}, k={k}, image traces {image_traces}")
    return 1 / total


def model_supersingular_probability(p: int, M: int = 1, k: int = 1, image_traces=None) -> float:
    t, w = model_weights(p, M, k, image_traces)
    total = math.fsum(w.tolist())
    if total == 0:
        raise IncompatibleCongruences(f"no trace survives at p={p}")
    return float(w[t == 0][0]) / total


# -- predicted constants ----------------------------------------------------------------


def predicted_constant(params: HeuristicParams) -> float:
    """(2/pi) F_M(0) zeta(2) prod_{l | M}(1 - 1/l^2) / n."""
    M = params.M
    euler = 1.0
    for q in factorize(M).primes if M > 1 else []:
        euler *= 1 - 1 / q**2
    return 2 / math.pi * float(trace_fraction(M, 0)) * ZETA2 * euler / params.n


def bias_ratio(ps: PrimeSet) -> float:
    """C_P over the density-scaled generic constant (pi/3) * delta(P)."""
    return k_constant(ps).C / (math.pi / 3 * float(ps.density))


def partition_bias_mean(m: int) -> float:
    """Average of bias_ratio over all classes mod m (equals 1)."""
    units = [c for c in range(m) if math.gcd(c, m) == 1]
    return math.fsum(bias_ratio(PrimeSet.of(m, c)) for c in units) / euler_phi(m)


# -- Sato-Tate histogram ------------------------------------------------------------------


@dataclass(frozen=True)
class SatoTateHistogram:
    a: int
    b: int
    x: int
    edges: np.ndarray
    mass: np.ndarray  # fraction of primes per bin, sums to 1
    expected: np.ndarray  # Sato-Tate mass per bin
    distance: float  # sup-norm distance between empirical and Sato-Tate CDFs
    count: int


def rational_j(a: int, b: int) -> Fraction:
    den = 4 * a**3 + 27 * b**2
    if den == 0:
        raise ValueError(f"E_({a},{b}) is singular")
    return Fraction(1728 * 4 * a**3, den)


def is_cm(a: int, b: int) -> bool:
    return rational_j(a, b) in {Fraction(j) for _, j, _, _ in CM_CURVES}


def _traces_chunk(args) -> list[int]:
    a, b, primes = args
    return [trace_mod(a, b, p) for p in primes]


def frobenius_angles(a: int, b: int, x: int, workers: int | None = 1) -> tuple[np.ndarray, np.ndarray]:
    """(primes, theta_p) for good primes 3 < p <= x."""
    primes = [p for p in sieve_primes(x) if p > 3 and is_nonsingular(a, b, p)]
    n = resolve_workers(workers)
    if n == 1 or len(primes) < 64:
        traces = _traces_chunk((a, b, primes))
    else:
        chunks = [primes[i::n] for i in range(n)]
        with ProcessPoolExecutor(max_workers=n) as pool:
            parts = list(pool.map(_traces_chunk, [(a, b, c) for c in chunks]))
        traces = [0] * len(primes)
        for i, part in enumerate(parts):
            traces[i::n] = part
    ps = np.array(primes, dtype=np.int64)
    xi = np.clip(np.array(traces, dtype=np.float64) / (2 * np.sqrt(ps)), -1.0, 1.0)
    return ps, np.arccos(xi)


def sato_tate_histogram(a: int, b: int, x: int, bins: int = 20, workers: int | None = 1) -> SatoTateHistogram:
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if is_cm(a, b):
        raise ValueError(f"E_({a},{b}) has CM (j = {rational_j(a, b)}); Sato-Tate does not apply")
    _, theta = frobenius_angles(a, b, x, workers)
    if theta.size == 0:
        raise ValueError(f"no good primes up to {x}")
    edges = np.linspace(0.0, math.pi, bins + 1)
    counts, _ = np.histogram(theta, bins=edges)
    distance = float(kstest(theta, sato_tate_cdf).statistic)
    return SatoTateHistogram(
        a=a,
        b=b,
        x=x,
        edges=edges,
        mass=counts / theta.size,
        expected=np.diff(sato_tate_cdf(edges)),
        distance=distance,
        count=int(theta.size),
    )
