import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspflow.counting import (
    NetCoverageError, NetE, build_net, count_annulus, dirichlet_witness, growth_exponent, verify_net,
    weighted_height_sum,
)
from cuspflow.excursion import Direction
from cuspflow.lattice import BudgetError, Cusp, Interval


def brute_annulus(a, A1, A2, A3, t):
    """Double loop over p, q with exact distance checks."""
    h = a.height
    lo, hi = A1 * math.exp(t) * h, A2 * math.exp(t) * h
    n = 0
    for q in range(1, math.isqrt(int(hi) + 1) + 1):
        if not (lo * (1 - 1e-12) <= q * q <= hi * (1 + 1e-12)):
            continue
        for p in range(math.floor((a.value - A3) * q) - 1, math.ceil((a.value + A3) * q) + 2):
            if math.gcd(p, q) == 1 and abs(Fraction(p, q) - a.value) <= Fraction(A3) / h:
                n += 1
    return n


def test_annulus_example():
    # q^2 in [4, 16] and |p/q| <= 1
    n = count_annulus(Cusp(0, 1), 1, 4, 1, math.log(4))
    assert n == brute_annulus(Cusp(0, 1), 1, 4, 1, math.log(4)) == 10


@pytest.mark.parametrize("a", [Cusp(0, 1), Cusp(1, 2), Cusp(2, 3), Cusp(-3, 7)])
@pytest.mark.parametrize("t", [0.3, 1.0, 2.5, 4.0])
def test_annulus_matches_brute_force(a, t):
    assert count_annulus(a, 1, 4, 1, t) == brute_annulus(a, 1, 4, 1, t)


def test_annulus_empty_and_monotone():
    assert count_annulus(Cusp(0, 1), math.sqrt(2), math.sqrt(2), 1, 3.0) <= 1
    for t in (2.0, 5.0, 8.0):
        assert count_annulus(Cusp(0, 1), 1, 8, 1, t) >= count_annulus(Cusp(0, 1), 1, 4, 1, t)
    with pytest.raises(BudgetError):
        count_annulus(Cusp(0, 1), 1, 4, 1, 30.0, budget=1000)
    with pytest.raises(ValueError):
        count_annulus(Cusp(1, 0), 1, 4, 1, 1.0)


def test_annulus_parallel_matches_serial():
    t = 18.0  # wide enough in q to take the parallel branch
    assert count_annulus(Cusp(1, 2), 1, 4, 1, t, workers=3) == count_annulus(Cusp(1, 2), 1, 4, 1, t, workers=1)


def test_growth_fit():
    fit = growth_exponent(Cusp(0, 1), 1, 4, 1, [4 + i for i in range(11)])
    assert 0.9 <= fit.slope <= 1.1
    assert fit.counts[0] == count_annulus(Cusp(0, 1), 1, 4, 1, 4.0)
    assert fit.upsilon == pytest.approx(1.685, abs=1e-3)
    assert len(fit.residuals) == len(fit.ts) == 11


def test_growth_fit_drops_sparse_points():
    with pytest.warns(UserWarning):
        fit = growth_exponent(Cusp(0, 1), 1, 4, 1, [0.0, 0.5, 4, 5, 6, 7])
    # t = 0 already has 5 cusps (q = 1, 2); t = 0.5 has fewer and is dropped
    assert fit.dropped == [0.5] and fit.ts == [0.0, 4.0, 5.0, 6.0, 7.0]
    with pytest.raises(ValueError):
        growth_exponent(Cusp(0, 1), 1, 4, 1, [1, 2, 3])


def test_growth_constant_counts_give_zero_slope():
    # the annulus shell q^2 = 4 is hit for every t in the narrow window, one count each time
    ts = [math.log(4) - 1e-3 * k for k in range(6)]
    fit = growth_exponent(Cusp(0, 1), 1, 1.01, 1, ts, min_count=1)
    assert len(set(fit.counts)) == 1 and abs(fit.slope) < 1e-9


def test_witness_examples():
    a = dirichlet_witness("pi-3", 10**4)
    assert a == Cusp(1, 7) and a.den <= 100 and abs(float(a.value) - (math.pi - 3)) <= 1e-2
    assert dirichlet_witness(Fraction(1, 2), 4) == Cusp(1, 2)
    assert dirichlet_witness(Fraction(1, 2), 10**6) == Cusp(1, 2)
    fib = [1, 1]
    while len(fib) < 20:
        fib.append(fib[-1] + fib[-2])
    for k in range(4, 19):
        assert dirichlet_witness("golden", fib[k] ** 2) == Cusp(fib[k - 1], fib[k])
    with pytest.raises(ValueError):
        dirichlet_witness(Fraction(1, 3), 3)


@given(st.fractions(min_value=-3, max_value=3, max_denominator=10**12), st.integers(4, 10**8))
def test_witness_property(x, X):
    a = dirichlet_witness(x, X)
    d = x - a.value
    assert a.height <= X and d * d * X <= 1


def test_weighted_examples():
    w = weighted_height_sum(Interval(0, 1), 25)
    assert w.total == 1 + Fraction(1, 2) + Fraction(2, 3) + Fraction(2, 4) + Fraction(4, 5)
    assert weighted_height_sum(Interval(0, 1), 1).total == 1
    assert weighted_height_sum(Interval(0, 1, True), 1).total == 2
    for X in (10**4, 10**5):
        r1, r4 = weighted_height_sum(Interval(0, 1), X).ratio, weighted_height_sum(Interval(0, 1), 4 * X).ratio
        assert 0.5 <= r1 / r4 <= 2
    with pytest.raises(BudgetError):
        weighted_height_sum(Interval(0, 1), 10**6, budget=10)


@given(st.fractions(min_value=-2, max_value=2, max_denominator=20), st.fractions(min_value=0, max_value=2, max_denominator=20),
       st.integers(1, 900))
@settings(max_examples=40)
def test_weighted_matches_enumeration(lo, width, X):
    from cuspflow.lattice import enumerate_cusps
    region = Interval(lo, lo + width)
    if width == 0:
        return
    w = weighted_height_sum(region, X)
    assert w.total == sum(Fraction(1, c.den) for c in enumerate_cusps(region, X))


def test_net_example():
    net = build_net(Interval(0, 1, True), 25, c=1, c_pack=Fraction(1, 4))
    small = {Cusp(0, 1), Cusp(1, 2), Cusp(1, 1)}
    assert small <= set(net.members)
    assert all(m.height <= 25 for m in net.members)


@pytest.mark.parametrize("N", [10**4, 10**5])
def test_net_size_matches_packing_volume(N):
    net = build_net(Interval(0, 1, True), N)
    expected = math.sqrt(N) / 0.25
    assert expected / 4 <= len(net.members) <= 4 * expected


def test_net_tiny_region_has_one_member():
    net = build_net(Interval(Fraction(1, 3), Fraction(1, 3) + Fraction(1, 1000), True), 25)
    assert net.members == [Cusp(1, 3)]


def test_net_verification_catches_gaps():
    net = build_net(Interval(0, 1, True), 400)
    holes = NetE(400, net.region, [m for m in net.members if not (Fraction(1, 4) < m.value < Fraction(3, 4))],
                 net.c, net.c_pack)
    with pytest.raises(NetCoverageError):
        verify_net(holes)
    with pytest.raises(ValueError):
        build_net(Interval(0, 1), 2)


@given(st.fractions(min_value=0, max_value=1, max_denominator=10**6))
@settings(max_examples=40)
def test_net_nearest_covers(x):
    net = build_net(Interval(0, 1, True), 900)
    m = net.nearest(x)
    assert (m.value - x) ** 2 * 900 <= 1
