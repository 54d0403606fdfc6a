"""Integer helpers: Euclid-style floor sums, Moebius sieve and window counts of reduced fractions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache


def ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def floor_sum(n: int, m: int, a: int, b: int) -> int:
    """Sum of floor((a*i + b) / m) for i in [0, n), any signs of a and b, m > 0."""
    if n <= 0:
        return 0
    ans = 0
    if a < 0 or a >= m:
        a2 = a % m
        ans += n * (n - 1) // 2 * ((a - a2) // m)
        a = a2
    if b < 0 or b >= m:
        b2 = b % m
        ans += n * ((b - b2) // m)
        b = b2
    while True:
        if a >= m:
            ans += n * (n - 1) // 2 * (a // m)
            a %= m
        if b >= m:
            ans += n * (b // m)
            b %= m
        y_max = a * n + b
        if y_max < m:
            return ans
        n, b = divmod(y_max, m)
        m, a = a, m


def floor_sum_range(j0: int, j1: int, a: int, b: int, m: int) -> int:
    """Sum of floor((a*j + b) / m) for j in [j0, j1]."""
    if j1 < j0:
        return 0
    return floor_sum(j1 - j0 + 1, m, a, a * j0 + b)


@lru_cache(maxsize=8)
def mobius_table(n: int) -> tuple[int, ...]:
    mu = [1] * (n + 1)
    is_comp = bytearray(n + 1)
    primes: list[int] = []
    mu[0] = 0
    for i in range(2, n + 1):
        if not is_comp[i]:
            primes.append(i)
            mu[i] = -1
        for p in primes:
            if i * p > n:
                break
            is_comp[i * p] = 1
            if i % p == 0:
                mu[i * p] = 0
                break
            mu[i * p] = -mu[i]
    return tuple(mu)


def squarefree_divisors(n: int) -> list[tuple[int, int]]:
    """(d, mu(d)) for squarefree d dividing n; n must be small enough to factor by trial division."""
    n = abs(n)
    primes = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            primes.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        primes.append(n)
    out = [(1, 1)]
    for p in primes:
        out += [(d * p, -s) for d, s in out]
    return out


def count_coprime_in_range(lo: int, hi: int, k: int) -> int:
    """Number of integers m in [lo, hi] with gcd(m, k) = 1."""
    if hi < lo:
        return 0
    return sum(s * (hi // d - (lo - 1) // d) for d, s in squarefree_divisors(k))


@dataclass(frozen=True)
class WindowCount:
    lower: int
    upper: int

    @property
    def exact(self) -> bool:
        return self.lower == self.upper


def _lattice_count(a_lo: int, a_hi: int, Q: int, Qs: int, u: int, v: int) -> int:
    """#{(q, k): q in [a_lo, a_hi], 1 <= |k| <= (u/v) q, q = Qs*k mod Q}."""
    if a_lo < 1:
        a_lo = 1
    if a_hi < a_lo:
        return 0
    total = 0
    ja = (u * a_lo) // v
    jb = (u * a_hi) // v
    for s in (1, -1):
        r = s * Qs
        # part A: every q in [a_lo, a_hi] admissible
        total += floor_sum_range(1, ja, -r, a_hi, Q) - floor_sum_range(1, ja, -r, a_lo - 1, Q)
        # part B: q >= ceil(j v / u)
        j0 = max(ja + 1, 1)
        total += floor_sum_range(j0, jb, -r, a_hi, Q)
        total -= floor_sum_range(j0, jb, v - u * r, -1, u * Q)
    return total


def count_near_fractions(
    P: int, Q: int, Ps: int, Qs: int, q_lo: int, q_hi: int, R: Fraction, d_max: int = 256
) -> WindowCount:
    """Count reduced p/q with q in [q_lo, q_hi] and 0 < |p/q - P/Q| <= R.

    ``(P Ps; Q Qs)`` must be unimodular with ``P*Qs - Ps*Q = 1``.  Writing
    ``(p, q) = (P m + Ps k, Q m + Qs k)`` turns the window into a lattice
    region in ``(q, k)`` with ``|k| <= R Q q``; coprimality of ``(m, k)`` is
    handled by Moebius inversion truncated at ``d_max`` and the tail is bounded
    explicitly, so the result is an interval that is exact for small windows.
    """
    if P * Qs - Ps * Q != 1:
        raise ValueError("matrix is not unimodular")
    if q_hi < q_lo or R <= 0:
        return WindowCount(0, 0)
    rho = Fraction(R) * Q
    u, v = rho.numerator, rho.denominator
    K = (u * q_hi) // v
    if K < 1:
        return WindowCount(0, 0)
    D = min(K, d_max)
    mu = mobius_table(D)
    S = 0
    for d in range(1, D + 1):
        if mu[d]:
            S += mu[d] * _lattice_count(ceil_div(q_lo, d), q_hi // d, Q, Qs, u, v)
    if D >= K:
        return WindowCount(S, S)
    log_ratio = int(math.log(K) - math.log(D)) + 1
    err = 2 * K * q_hi // (Q * D) + 1 + 2 * K * log_ratio + 2
    return WindowCount(max(S - err, 0), S + err)


def iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0, exact for integers of any size."""
    if n < 0 or k < 1:
        raise ValueError("iroot needs n >= 0 and k >= 1")
    if n < 2 or k == 1:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def iroot_ceil(n: int, k: int) -> int:
    r = iroot(n, k)
    return r if r ** k == n else r + 1
