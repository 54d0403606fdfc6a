"""Exact cusps of the modular group PSL(2, Z) acting on H^2.

A cusp is a reduced fraction p/q with q > 0 (infinity is 1/0).  Its height is
the integer q^2.  Everything here is integer arithmetic.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .geometry import INFINITY, BoundaryPoint, Finite, Moebius


@dataclass(frozen=True, order=False)
class Cusp:
    num: int
    den: int

    @property
    def is_infinity(self) -> bool:
        return self.den == 0

    @property
    def height(self) -> int:
        return 1 if self.den == 0 else self.den * self.den

    @property
    def value(self) -> Fraction:
        if self.den == 0:
            raise ValueError("cusp at infinity has no finite value")
        return Fraction(self.num, self.den)

    @property
    def location(self) -> BoundaryPoint:
        return INFINITY if self.den == 0 else Finite((self.num / self.den,))

    def __lt__(self, other: "Cusp") -> bool:
        return self.value < other.value

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"

    @classmethod
    def parse(cls, text: str) -> "Cusp":
        p, _, q = text.strip().partition("/")
        return canonical(int(p), int(q) if q else 1)


CUSP_INFINITY = Cusp(1, 0)


class BudgetError(RuntimeError):
    """A requested enumeration exceeds its configured budget."""


def canonical(p: int, q: int) -> Cusp:
    if p == 0 and q == 0:
        raise ValueError("(0, 0) is not a cusp")
    if q == 0:
        return CUSP_INFINITY
    g = math.gcd(p, q)
    p, q = p // g, q // g
    if q < 0:
        p, q = -p, -q
    return Cusp(p, q)


def from_fraction(x: Fraction) -> Cusp:
    return Cusp(x.numerator, x.denominator)


def realize(c: Cusp) -> Moebius:
    """Integer matrix (p p*; q q*) of determinant 1.

    q* is the inverse of p mod q taken in (-q/2, q/2]; integer cusps n/1 use
    q* = 1 (so 1/1 -> (1 0; 1 1)) except 0/1, which is realized by sigma.
    """
    if c.is_infinity:
        return Moebius(1, 0, 0, 1)
    p, q = c.num, c.den
    if q == 1:
        qs = 0 if p == 0 else 1
    else:
        qs = pow(p % q, -1, q)
        if 2 * qs > q:
            qs -= q
    ps = (p * qs - 1) // q
    return Moebius(p, ps, q, qs)


def cusp_gap(a: Cusp, b: Cusp) -> Fraction:
    if a.is_infinity or b.is_infinity:
        raise ValueError("cusp_gap needs finite cusps")
    if a == b:
        raise ValueError("cusp_gap needs distinct cusps")
    return abs(a.value - b.value)


def neighbor_step(a: Cusp, prev: Cusp, m: int) -> Cusp:
    """Continued-fraction successor (m p_a + p_prev) / (m q_a + q_prev)."""
    if m < 1:
        raise ValueError("partial quotient must be >= 1")
    return canonical(m * a.num + prev.num, m * a.den + prev.den)


def farey_neighbors(a: Cusp, b: Cusp) -> bool:
    return abs(a.num * b.den - b.num * a.den) == 1


# -- enumeration ---------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction
    right_closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.hi < self.lo:
            raise ValueError("empty interval")

    def __contains__(self, x: Fraction) -> bool:
        return self.lo <= x and (x <= self.hi if self.right_closed else x < self.hi)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}{']' if self.right_closed else ')'}"

    def split(self, parts: int) -> list["Interval"]:
        step = self.length / parts
        cuts = [self.lo + i * step for i in range(parts)] + [self.hi]
        return [
            Interval(cuts[i], cuts[i + 1], self.right_closed and i == parts - 1)
            for i in range(parts)
        ]


DEFAULT_REGION = Interval(-2, 2, right_closed=True)


def farey_bracket(x: Fraction, Q: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Consecutive Farey fractions a/b <= x < c/d of order Q, by batched Stern-Brocot descent."""
    X, Y = x.numerator, x.denominator
    n = X // Y
    a, b, c, d = n, 1, n + 1, 1
    while True:
        # move the left end towards x: (a + k c)/(b + k d) <= x
        num = X * b - Y * a
        den = Y * c - X * d
        k = num // den if den > 0 else 0
        k = min(k, (Q - b) // d)
        if k > 0:
            a, b = a + k * c, b + k * d
            continue
        # move the right end: (c + k a)/(d + k b) > x
        num = Y * c - X * d
        den = X * b - Y * a
        k = (num - 1) // den if den > 0 else (Q - d) // b
        k = min(k, (Q - d) // b)
        if k > 0:
            c, d = c + k * a, d + k * b
            continue
        return (a, b), (c, d)


def iter_farey(lo: Fraction, hi: Fraction, Q: int, right_closed: bool = True) -> Iterator[Cusp]:
    """Reduced fractions p/q in [lo, hi] (or [lo, hi)) with 1 <= q <= Q, increasing."""
    lo = Fraction(lo)
    (a, b), (c, d) = farey_bracket(lo, Q)
    if Fraction(a, b) < lo:
        k = (Q + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
    while True:
        x = Fraction(a, b)
        if x > hi or (x == hi and not right_closed):
            return
        yield Cusp(a, b)
        k = (Q + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b


def enumerate_cusps(region: Interval, h_max: int) -> list[Cusp]:
    if h_max < 1:
        raise ValueError("h_max must be >= 1")
    return list(iter_farey(region.lo, region.hi, math.isqrt(h_max), region.right_closed))


def _enumerate_job(args):
    lo, hi, closed, h_max = args
    return enumerate_cusps(Interval(lo, hi, closed), h_max)


def worker_count(default: Optional[int] = None) -> int:
    env = os.environ.get("CUSPFLOW_WORKERS")
    if env:
        return max(1, int(env))
    return default or 1


def enumerate_cusps_parallel(region: Interval, h_max: int, workers: Optional[int] = None) -> list[Cusp]:
    """Split the region into half-open pieces, enumerate each, concatenate in order."""
    workers = worker_count(workers)
    if workers <= 1:
        return enumerate_cusps(region, h_max)
    jobs = [(p.lo, p.hi, p.right_closed, h_max) for p in region.split(workers)]
    with ProcessPoolExecutor(workers) as ex:
        parts = list(ex.map(_enumerate_job, jobs))
    return [c for part in parts for c in part]


@dataclass(frozen=True)
class ModularModel:
    """PSL(2, Z) acting on H^2 with its single cusp class and default ball [-2, 2]."""

    region: Interval = DEFAULT_REGION
    workers: int = 1

    n = 2
    name = "modular"

    def canonical(self, p: int, q: int) -> Cusp:
        return canonical(p, q)

    def height(self, c: Cusp) -> int:
        return c.height

    def distance(self, a: Cusp, b: Cusp) -> Fraction:
        return abs(a.value - b.value)

    def realize(self, c: Cusp) -> Moebius:
        return realize(c)

    def enumerate(self, h_max: int, region: Optional[Interval] = None) -> list[Cusp]:
        return enumerate_cusps_parallel(region or self.region, h_max, self.workers)


MODELS = {"modular": ModularModel}


def get_model(name: str, **kw) -> ModularModel:
    if name not in MODELS:
        raise ValueError(f"unsupported lattice model {name!r} (available: {', '.join(MODELS)})")
    return MODELS[name](**kw)
