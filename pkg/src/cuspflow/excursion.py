"""Cusp excursions of the geodesic from infinity to a boundary point x.

For a cusp a of height h at Euclidean distance d from x the geodesic's height
in the horoball coordinates of a is

    W_a(x, t) = e^{-t} / (h (d^2 + e^{-2t}))

which peaks at e^{-t} = d with value 1/(2 h d).  The excursion above a
threshold theta is the interval between the two roots in u = e^{-t} of
theta h u^2 - u + theta h d^2 = 0.

Directions are stored as rational intervals so quadratic irrationals and
constants like pi are handled with certified comparisons; an exact rational
direction is the degenerate interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Union

from .lattice import Cusp, canonical

PRECISION_BITS = 256


def flog(x: Union[int, Fraction]) -> float:
    """Natural log of a positive int or Fraction of any size."""
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


def _isqrt_bracket(n: int, bits: int) -> tuple[Fraction, Fraction]:
    s = 1 << bits
    r = math.isqrt(n * s * s)
    return Fraction(r, s), Fraction(r + 1, s) if r * r != n * s * s else Fraction(r, s)


# -- directions ---------------------------------------------------------------


@dataclass(frozen=True)
class Direction:
    """A boundary point known to lie in the rational interval [lo, hi]."""

    lo: Fraction
    hi: Fraction
    label: str = ""

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError("direction interval is empty")

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        return float(self.mid)

    def __str__(self) -> str:
        if self.label:
            return self.label
        x = self.mid
        return f"{x.numerator}/{x.denominator}"

    @classmethod
    def exact(cls, x, label: str = "") -> "Direction":
        x = Fraction(x)
        return cls(x, x, label)

    @classmethod
    def from_cf(cls, quotients: Sequence[int]) -> "Direction":
        """Exact rational [a0; a1, ..., an]."""
        if not quotients:
            raise ValueError("empty continued fraction")
        x = Fraction(quotients[-1])
        for a in reversed(quotients[:-1]):
            x = a + 1 / x
        return cls.exact(x)

    @classmethod
    def from_mpf(cls, value, label: str = "", bits: int = PRECISION_BITS) -> "Direction":
        """Bracket an mpmath number evaluated at bits + 64 precision by +-2^-bits."""
        import mpmath

        with mpmath.workprec(bits + 64):
            m, e = mpmath.mpf(value).man_exp
        x = Fraction(int(m)) * (Fraction(2) ** int(e))
        eps = Fraction(1, 1 << bits)
        return cls(x - eps, x + eps, label)

    @classmethod
    def named(cls, name: str, bits: int = PRECISION_BITS) -> "Direction":
        if name == "golden":
            lo, hi = _isqrt_bracket(5, bits)
            return cls((lo - 1) / 2, (hi - 1) / 2, name)
        if name == "sqrt2-1":
            lo, hi = _isqrt_bracket(2, bits)
            return cls(lo - 1, hi - 1, name)
        import mpmath

        with mpmath.workprec(bits + 64):
            consts = {"pi-3": lambda: mpmath.pi - 3, "e-2": lambda: mpmath.e - 2}
            if name not in consts:
                raise ValueError(f"unknown named direction {name!r}")
            return cls.from_mpf(consts[name](), name, bits)

    @classmethod
    def parse(cls, text: str) -> "Direction":
        """Accepts p/q, decimals, cf:a0,a1,... and the named constants."""
        text = text.strip()
        if text.startswith("cf:"):
            return cls.from_cf([int(a) for a in text[3:].replace(";", ",").split(",") if a])
        try:
            return cls.exact(Fraction(text))
        except ValueError:
            return cls.named(text)


DirectionLike = Union[Direction, Fraction, int, str, Cusp]


def as_direction(x: DirectionLike) -> Direction:
    if isinstance(x, Direction):
        return x
    if isinstance(x, str):
        return Direction.parse(x)
    if isinstance(x, Cusp):
        return Direction.exact(x.value)
    return Direction.exact(Fraction(x))


class UncertifiedComparison(ArithmeticError):
    """The direction interval straddles a threshold."""


# -- continued fractions ------------------------------------------------------


@dataclass
class CFExpansion:
    quotients: list[int]
    convergents: list[Cusp]
    terminated: bool = False  # rational input fully expanded
    truncated: bool = False  # interval endpoints disagree beyond this point


def cf_expand(x: DirectionLike, depth: int = 64) -> CFExpansion:
    """Partial quotients and convergents, certified for interval directions."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    x = as_direction(x)
    lo, hi = x.lo, x.hi
    out = CFExpansion([], [])
    p0, q0, p1, q1 = 0, 1, 1, 0
    while len(out.quotients) < depth:
        a = math.floor(lo)
        if math.floor(hi) != a:
            out.truncated = True
            break
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.quotients.append(a)
        out.convergents.append(Cusp(p1, q1))
        flo, fhi = lo - a, hi - a
        if flo == 0 and fhi == 0:
            out.terminated = True
            break
        if flo == 0:
            # interval touches a rational endpoint of the expansion
            out.truncated = True
            break
        # reciprocal reverses orientation
        lo, hi = 1 / fhi, 1 / flo
    return out


# -- single-cusp profiles -----------------------------------------------------


class DivergentDirection(ValueError):
    """The direction is the cusp itself, so the excursion never ends."""


def _dist(x: Direction, a: Cusp) -> Fraction:
    return abs(x.mid - a.value)


def log_profile(log_dist: float, h: Union[int, Fraction], t: float) -> float:
    """log W for a cusp of height h at distance e^{log_dist}; log_dist = -inf allowed."""
    if log_dist == -math.inf:
        return t - flog(h)
    a, b = 2.0 * log_dist, -2.0 * t
    m = max(a, b)
    return -t - flog(h) - (m + math.log1p(math.exp(-abs(a - b))))


def profile_value(x: DirectionLike, a: Cusp, t: float) -> float:
    x = as_direction(x)
    d = _dist(x, a)
    ld = flog(d) if d else -math.inf
    return math.exp(log_profile(ld, a.height, t))


def peak(x: DirectionLike, a: Cusp) -> tuple[float, float]:
    """(t_peak, value) with e^{-t_peak} = dist and value = 1/(2 h dist)."""
    x = as_direction(x)
    d = _dist(x, a)
    if d == 0:
        raise DivergentDirection(f"direction hits the cusp {a}")
    log_value = -math.log(2) - flog(a.height) - flog(d)
    return -flog(d), math.exp(log_value) if log_value < 700 else math.inf


def _crossings(d: Fraction, h: int, theta: Fraction) -> Optional[tuple[float, float, bool]]:
    k = 2 * theta * h * d
    if k > 1:
        return None
    disc = 1 - k * k
    log_ubig = math.log1p(math.sqrt(disc)) - flog(2 * theta * h)
    t_enter = -log_ubig
    if d == 0:
        return t_enter, math.inf, False
    t_exit = -2.0 * flog(d) - t_enter
    return t_enter, t_exit, k == 1


def crossing_times(x: DirectionLike, a: Cusp, theta=1) -> Optional[tuple[float, float]]:
    """Times the geodesic enters and leaves the theta-horoball at a, or None."""
    theta = Fraction(theta)
    if theta <= 0:
        raise ValueError("theta must be positive")
    x = as_direction(x)
    r = _crossings(_dist(x, a), a.height, theta)
    return None if r is None else (r[0], r[1])


# -- spectra ------------------------------------------------------------------


@dataclass(frozen=True)
class ExcursionRecord:
    cusp: Cusp
    dist: Fraction
    t_enter: float
    t_peak: float
    t_exit: float
    peak: float
    marginal: bool = False

    @property
    def h(self) -> int:
        return self.cusp.height

    @property
    def log_dist(self) -> float:
        return flog(self.dist) if self.dist else -math.inf

    @property
    def log_peak(self) -> float:
        return -math.log(2) - flog(self.h) - self.log_dist

    def log_profile(self, t: float) -> float:
        return log_profile(self.log_dist, self.h, t)


def make_record(x: Direction, a: Cusp, theta: Fraction) -> Optional[ExcursionRecord]:
    d = _dist(x, a)
    r = _crossings(d, a.height, theta)
    if r is None:
        return None
    t_enter, t_exit, marginal = r
    if d == 0:
        return ExcursionRecord(a, d, t_enter, math.inf, math.inf, math.inf, False)
    log_peak = -math.log(2) - flog(a.height) - flog(d)
    pk = math.exp(log_peak) if log_peak < 700 else math.inf
    return ExcursionRecord(a, d, t_enter, -flog(d), t_exit, pk, marginal)


@dataclass
class Spectrum:
    direction: Direction
    theta: Fraction
    records: list[ExcursionRecord] = field(default_factory=list)
    truncated: bool = False  # precision ran out before the height budget

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ExcursionRecord]:
        return iter(self.records)

    @property
    def cusps(self) -> list[Cusp]:
        return [r.cusp for r in self.records]


def _qualifies(x: Direction, a: Cusp, theta: Fraction) -> bool:
    """Certified test of 2 theta h |x - a| <= 1."""
    r = Fraction(1) / (2 * theta * a.height)
    v = a.value
    # inside iff x in [v - r, v + r]; both interval ends must agree
    ins_lo = v - r <= x.lo <= v + r
    ins_hi = v - r <= x.hi <= v + r
    if ins_lo != ins_hi:
        raise UncertifiedComparison
    if ins_lo:
        return True
    # both ends outside: they must be on the same side
    if (x.lo < v - r) != (x.hi < v - r):
        raise UncertifiedComparison
    return False


def _candidates_cf(x: Direction, h_max: Optional[int], depth: Optional[int]) -> tuple[list[Cusp], bool]:
    cf = cf_expand(x, depth or 10**6)
    cands = [c for c in cf.convergents if h_max is None or c.height <= h_max]
    if len(cands) < len(cf.convergents):
        return cands, False
    if cf.terminated:
        # tangency candidate from the other expansion [..., a_n - 1, 1]
        conv = [Cusp(1, 0)] + cf.convergents
        a, b = conv[-1], conv[-2]
        extra = canonical(a.num - b.num, a.den - b.den)
        if h_max is None or extra.height <= h_max:
            cands.append(extra)
    return cands, cf.truncated


def spectrum(
    x: DirectionLike, theta=1, h_max: Optional[int] = None, depth: Optional[int] = None, method: str = "cf"
) -> Spectrum:
    """Cusps with peak >= theta, ordered by entry time.

    ``method="cf"`` reads candidates off the continued fraction (complete for
    theta >= 1 by Legendre's theorem plus the tangency candidates of rational
    x); ``method="enumerate"`` scans every denominator up to sqrt(h_max).
    """
    x = as_direction(x)
    theta = Fraction(theta)
    if theta <= 0:
        raise ValueError("theta must be positive")
    if method == "cf" and theta < 1:
        method = "enumerate"
    spec = Spectrum(x, theta)
    if method == "cf":
        cands, spec.truncated = _candidates_cf(x, h_max, depth)
    elif method == "enumerate":
        if h_max is None:
            raise ValueError("enumeration needs h_max")
        cands = _candidates_enum(x, theta, h_max)
    else:
        raise ValueError(f"unknown spectrum method {method!r}")
    seen = set()
    for c in cands:
        if c in seen:
            continue
        seen.add(c)
        try:
            ok = _qualifies(x, c, theta)
        except UncertifiedComparison:
            spec.truncated = True
            break
        if ok:
            rec = make_record(x, c, theta)
            if rec is not None:
                spec.records.append(rec)
    spec.records.sort(key=lambda r: (r.t_enter, r.cusp.den))
    return spec


def _candidates_enum(x: Direction, theta: Fraction, h_max: int) -> list[Cusp]:
    out = []
    for q in range(1, math.isqrt(h_max) + 1):
        r = Fraction(1) / (2 * theta * q * q)
        p_lo = math.ceil((x.lo - r) * q)
        p_hi = math.floor((x.hi + r) * q)
        for p in range(p_lo, p_hi + 1):
            if math.gcd(p, q) == 1:
                out.append(Cusp(p, q))
    return out


@dataclass
class GapReport:
    ratios: list[float]
    gaps: list[float]
    ok: bool

    @property
    def worst(self) -> float:
        return max((max(r, 1 / r) for r in self.ratios if r > 0), default=1.0)


def consecutive_gap_check(s: Spectrum, lo: Fraction = Fraction(1, 2), hi: Fraction = Fraction(2)) -> GapReport:
    """Check dist_p * sqrt(h_p h_{p+1}) in [lo, hi] exactly, and report the time gaps."""
    if len(s) < 2:
        raise ValueError("need at least two records")
    ratios, gaps, ok = [], [], True
    for r0, r1 in zip(s.records, s.records[1:]):
        sq = r0.dist * r0.dist * r0.h * r1.h
        ok &= lo * lo <= sq <= hi * hi
        ratios.append(math.sqrt(sq) if sq < 10**300 else math.inf)
        gaps.append(r1.t_enter - r0.t_exit)
    return GapReport(ratios, gaps, ok)


def cf_direction(quotients: Sequence[int]) -> Direction:
    return Direction.from_cf(list(quotients))


def convergent_cusps(quotients: Sequence[int]) -> list[Cusp]:
    p0, q0, p1, q1 = 0, 1, 1, 0
    out = []
    for a in quotients:
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append(canonical(p1, q1))
    return out
