"""Exact cusp counts on the modular lattice: annuli, Dirichlet witnesses,
weighted height sums and well-spaced nets of cusps."""
from __future__ import annotations

import bisect
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .arith import count_coprime_in_range
from .excursion import DirectionLike, as_direction, cf_expand, UncertifiedComparison
from .lattice import BudgetError, Cusp, Interval, enumerate_cusps, worker_count

DEFAULT_BUDGET = 10**7


def _snap(x: float, tol: float = 1e-9) -> float:
    """Round values within relative tol of an integer, so e^{log 4} counts as 4."""
    r = round(x)
    return float(r) if r and abs(x - r) <= tol * abs(x) else x


def _q_range(h_lo: float, h_hi: float) -> tuple[int, int]:
    h_lo, h_hi = _snap(h_lo), _snap(h_hi)
    q_lo = math.isqrt(math.ceil(h_lo))
    if q_lo * q_lo < h_lo:
        q_lo += 1
    q_hi = math.isqrt(math.floor(h_hi))
    return max(q_lo, 1), q_hi


def _annulus_job(args) -> int:
    a, R, q0, q1 = args
    center = a.value
    total = 0
    for q in range(q0, q1 + 1):
        lo = math.ceil((center - R) * q)
        hi = math.floor((center + R) * q)
        total += count_coprime_in_range(lo, hi, q)
    return total


def count_annulus(
    a: Cusp, A1, A2, A3, t: float, budget: int = DEFAULT_BUDGET, workers: Optional[int] = None
) -> int:
    """Number of cusps a' with |a' - a| <= A3/h(a) and A1 e^t h(a) <= h(a') <= A2 e^t h(a)."""
    if a.is_infinity:
        raise ValueError("annulus needs a finite center")
    h = a.height
    scale = math.exp(t) * h
    q_lo, q_hi = _q_range(float(A1) * scale, float(A2) * scale)
    if q_hi < q_lo:
        return 0
    if q_hi - q_lo + 1 > budget:
        raise BudgetError(f"annulus spans {q_hi - q_lo + 1} denominators, budget {budget}")
    R = Fraction(A3) / h
    workers = worker_count(workers)
    if workers <= 1 or q_hi - q_lo < 10_000:
        return _annulus_job((a, R, q_lo, q_hi))
    cuts = np.linspace(q_lo, q_hi + 1, workers + 1).astype(int)
    jobs = [(a, R, int(cuts[i]), int(cuts[i + 1]) - 1) for i in range(workers)]
    with ProcessPoolExecutor(workers) as ex:
        return sum(ex.map(_annulus_job, jobs))


@dataclass
class GrowthFit:
    slope: float
    intercept: float
    ts: list[float]
    counts: list[int]
    residuals: list[float]
    dropped: list[float] = field(default_factory=list)

    @property
    def upsilon(self) -> float:
        """Smallest observed count / e^t."""
        return min(c / math.exp(t) for t, c in zip(self.ts, self.counts))


def _growth_job(args):
    a, A1, A2, A3, t, budget = args
    return count_annulus(a, A1, A2, A3, t, budget, workers=1)


def growth_exponent(
    a: Cusp, A1, A2, A3, t_grid: Sequence[float], min_count: int = 5,
    budget: int = DEFAULT_BUDGET, workers: Optional[int] = None,
) -> GrowthFit:
    """Least-squares slope of log count_annulus against t."""
    if len(t_grid) < 5:
        raise ValueError("need at least 5 grid points")
    jobs = [(a, A1, A2, A3, float(t), budget) for t in t_grid]
    workers = worker_count(workers)
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            counts = list(ex.map(_growth_job, jobs))
    else:
        counts = [_growth_job(j) for j in jobs]
    ts, cs, dropped = [], [], []
    for t, c in zip(t_grid, counts):
        if c < min_count:
            dropped.append(float(t))
        else:
            ts.append(float(t))
            cs.append(c)
    if dropped:
        warnings.warn(f"dropped {len(dropped)} grid points with count < {min_count}")
    if len(ts) < 2:
        raise ValueError("fewer than two usable grid points")
    y = np.log(np.asarray(cs, dtype=float))
    slope, intercept = np.polyfit(np.asarray(ts), y, 1)
    resid = y - (slope * np.asarray(ts) + intercept)
    return GrowthFit(float(slope), float(intercept), ts, cs, [float(r) for r in resid], dropped)


def dirichlet_witness(x: DirectionLike, X: int) -> Cusp:
    """A cusp a with h(a) <= X and |x - a| <= 1/sqrt(X), checked before returning."""
    if X < 4:
        raise ValueError("X must be at least 4")
    x = as_direction(x)
    best = None
    for c in cf_expand(x, 10**6).convergents:
        if c.height > X:
            break
        best = c
    if best is None:
        raise ArithmeticError("no convergent within the height bound")
    v = best.value
    d = max(abs(x.lo - v), abs(x.hi - v))
    if d * d * X > 1:
        if x.is_exact:
            raise ArithmeticError(f"witness {best} fails for {x}")
        raise UncertifiedComparison(f"precision too low to certify a witness for {x}")
    return best


@dataclass
class WeightedSum:
    total: Fraction
    X: int
    volume: Fraction

    @property
    def ratio(self) -> float:
        """total / (sqrt(X) * volume)."""
        return float(self.total) / (math.sqrt(self.X) * float(self.volume))


def weighted_height_sum(region: Interval, X: int, budget: int = DEFAULT_BUDGET) -> WeightedSum:
    """Exact sum of 1/q over reduced p/q in the region with q^2 <= X."""
    Q = math.isqrt(X)
    if Q > budget:
        raise BudgetError(f"{Q} denominators exceed budget {budget}")
    total = Fraction(0)
    for q in range(1, Q + 1):
        lo = math.ceil(region.lo * q)
        hi_exact = region.hi * q
        hi = math.floor(hi_exact)
        if hi == hi_exact and not region.right_closed:
            hi -= 1
        total += Fraction(count_coprime_in_range(lo, hi, q), q)
    return WeightedSum(total, X, region.length)


# -- nets -----------------------------------------------------------------


class NetCoverageError(ArithmeticError):
    def __init__(self, point: Fraction):
        super().__init__(f"grid point {point} is not covered")
        self.point = point


@dataclass
class NetE:
    N: int
    region: Interval
    members: list[Cusp]
    c: Fraction
    c_pack: Fraction

    @property
    def covering_radius(self) -> float:
        return float(self.c) / math.sqrt(self.N)

    @property
    def packing_radius(self) -> float:
        return float(self.c_pack) / math.sqrt(self.N)

    def __contains__(self, a: Cusp) -> bool:
        return a in self._set

    def __post_init__(self):
        self.members.sort()
        self._set = set(self.members)
        self._locs = [m.value for m in self.members]

    def nearest(self, x: Fraction) -> Cusp:
        i = bisect.bisect_left(self._locs, x)
        cands = [j for j in (i - 1, i) if 0 <= j < len(self._locs)]
        return self.members[min(cands, key=lambda j: abs(self._locs[j] - x))]


def _within(d: Fraction, c: Fraction, N: int) -> bool:
    """d <= c / sqrt(N), exactly."""
    return d * d * N <= c * c


def verify_net(net: NetE) -> None:
    """Check heights, packing and covering on a grid of spacing c/(4 sqrt N)."""
    N = net.N
    for m in net.members:
        if m.height > N:
            raise ArithmeticError(f"member {m} exceeds height {N}")
    for a, b in zip(net._locs, net._locs[1:]):
        if _within(b - a, net.c_pack, N):
            raise ArithmeticError("packing violated")
    # rational grid step no larger than c/(4 sqrt N)
    step = Fraction(net.c) / (4 * (math.isqrt(N) + 1))
    n_pts = int(net.region.length / step) + 1
    for k in range(n_pts + 1):
        x = min(net.region.lo + k * step, net.region.hi)
        if not _within(abs(net.nearest(x).value - x), net.c, N):
            raise NetCoverageError(x)


def build_net(region: Interval, N: int, c=1, c_pack=Fraction(1, 4), verify: bool = True) -> NetE:
    """Greedy well-spaced cusps of height <= N, lowest heights first."""
    if N < 4:
        raise ValueError("N must be at least 4")
    c, c_pack = Fraction(c), Fraction(c_pack)
    cands = sorted(enumerate_cusps(region, N), key=lambda a: (a.den, a.value))
    locs: list[Fraction] = []
    members: list[Cusp] = []
    for a in cands:
        v = a.value
        i = bisect.bisect_left(locs, v)
        if any(0 <= j < len(locs) and _within(abs(locs[j] - v), c_pack, N) for j in (i - 1, i)):
            continue
        locs.insert(i, v)
        members.insert(i, a)
    net = NetE(N, region, members, c, c_pack)
    if verify:
        verify_net(net)
    return net
