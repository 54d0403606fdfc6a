import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cuspflow.excursion import (
    CFExpansion, Direction, DivergentDirection, UncertifiedComparison, as_direction, cf_expand,
    consecutive_gap_check, convergent_cusps, crossing_times, make_record, peak, profile_value, spectrum,
)
from cuspflow.lattice import Cusp

unit = st.fractions(min_value=0, max_value=1, max_denominator=10**9)


def test_profile_examples():
    # x = a: W = e^t / h, increasing
    vals = [profile_value(Fraction(1, 2), Cusp(1, 2), t) for t in (0, 1, 2)]
    assert [math.isclose(v, math.exp(t) / 4) for v, t in zip(vals, (0, 1, 2))] == [True] * 3
    assert math.isclose(profile_value(Fraction(1, 10), Cusp(0, 1), math.log(10)), 5)
    assert math.isclose(profile_value(Fraction(51, 100), Cusp(1, 2), 0), 1 / (4 * (1e-4 + 1)))


def test_peak_examples():
    t, v = peak(Fraction(1, 10), Cusp(0, 1))
    assert math.isclose(t, math.log(10)) and math.isclose(v, 5)
    t, v = peak(Fraction(1, 24), Cusp(0, 1))
    assert math.isclose(t, math.log(24)) and math.isclose(v, 12)
    # h = 4 at distance 1/24: the cusp 1/2 seen from 1/2 + 1/24
    t, v = peak(Fraction(1, 2) + Fraction(1, 24), Cusp(1, 2))
    assert math.isclose(t, math.log(24)) and math.isclose(v, 3)
    with pytest.raises(DivergentDirection):
        peak(Fraction(1, 2), Cusp(1, 2))


@given(st.fractions(min_value=Fraction(1, 10**6), max_value=10, max_denominator=10**6), st.integers(1, 50))
def test_peak_homogeneity(d, q):
    a = Cusp(0, 1) if q == 1 else Cusp(1, q)
    t1, v1 = peak(a.value + d, a)
    t2, v2 = peak(a.value + 2 * d, a)
    assert math.isclose(v2, v1 / 2, rel_tol=1e-12)
    assert math.isclose(t2, t1 - math.log(2), rel_tol=1e-12, abs_tol=1e-12)
    # the peak is the maximum of the profile
    assert profile_value(a.value + d, a, t1 + 0.01) < v1 and profile_value(a.value + d, a, t1 - 0.01) < v1


def test_crossing_examples():
    te, tx = crossing_times(Fraction(1, 10), Cusp(0, 1), 1)
    roots = sorted([(1 + math.sqrt(0.96)) / 2, (1 - math.sqrt(0.96)) / 2])
    assert math.isclose(math.exp(-te), roots[1]) and math.isclose(math.exp(-tx), roots[0])
    assert math.isclose(math.exp(-te - tx), 0.01)
    assert crossing_times(Fraction(6, 10), Cusp(0, 1), 1) is None
    # tangency: 2 theta h d = 1 gives the double root e^{-t} = d
    te, tx = crossing_times(Fraction(1, 2), Cusp(0, 1), 1)
    assert math.isclose(te, tx) and math.isclose(math.exp(-te), 0.5)
    with pytest.raises(ValueError):
        crossing_times(Fraction(1, 2), Cusp(0, 1), 0)


@given(unit, st.integers(1, 30), st.sampled_from([Fraction(1, 2), Fraction(1), Fraction(2), Fraction(5, 2)]))
def test_crossings_solve_the_quadratic(x, q, theta):
    a = Cusp(1, q) if q > 1 else Cusp(0, 1)
    r = crossing_times(x, a, theta)
    d = abs(x - a.value)
    if r is None:
        assert 2 * theta * a.height * d > 1
        return
    te, tx = r
    assert te <= tx
    # Vieta: the roots multiply to d^2 and sum to 1 / (theta h)
    ue, ux = math.exp(-te), math.exp(-tx)
    assert math.isclose(ue + ux, 1 / float(theta * a.height), rel_tol=1e-10)
    if d:
        assert math.isclose(ue * ux, float(d * d), rel_tol=1e-9)
        assert math.isclose(profile_value(x, a, te), float(theta), rel_tol=1e-8)


def test_cf_examples():
    g = cf_expand(Direction.named("golden"), 12)
    assert set(g.quotients[1:]) == {1}
    conv = g.convergents[1:6]
    assert [str(c) for c in conv] == ["1/1", "1/2", "2/3", "3/5", "5/8"]
    assert [c.height for c in conv] == [1, 4, 9, 25, 64]
    e = cf_expand(Fraction(2, 7))
    assert e.quotients == [0, 3, 2] and [str(c) for c in e.convergents] == ["0/1", "1/3", "2/7"] and e.terminated
    h = cf_expand(Fraction(1, 2))
    assert h.convergents[-1] == Cusp(1, 2) and h.terminated


@given(st.fractions(min_value=-5, max_value=5, max_denominator=10**12))
def test_cf_matches_euclid(x):
    qs, p, q = [], x.numerator, x.denominator
    while q:
        a, r = divmod(p, q)
        qs.append(a)
        p, q = q, r
    e = cf_expand(x, 10**4)
    assert e.quotients == qs and e.terminated
    assert e.convergents == convergent_cusps(qs)
    assert Direction.from_cf(qs).lo == x


def test_cf_certification_stops_on_wide_interval():
    e = cf_expand(Direction(Fraction(1, 3), Fraction(1, 2)), 50)
    assert e.truncated and not e.terminated
    pi = cf_expand(Direction.named("pi-3"), 400)
    assert pi.quotients[:5] == [0, 7, 15, 1, 292] and len(pi.quotients) > 50


def test_spectrum_golden():
    x = Direction.named("golden")
    s = spectrum(x, 1, 10**12)
    # oracle: Fibonacci convergents filtered by 2 q^2 |x - p/q| <= 1 in mpmath
    with mpmath.workprec(300):
        phi = (mpmath.sqrt(5) - 1) / 2
        fib = [1, 1]
        while fib[-1] ** 2 <= 10**12:
            fib.append(fib[-1] + fib[-2])
        expected = [Cusp(0, 1)] + [Cusp(fib[k - 1], fib[k]) for k in range(1, len(fib)) if fib[k] ** 2 <= 10**12]
        expected = [c for c in dict.fromkeys(expected) if 2 * c.den ** 2 * abs(phi - mpmath.mpf(c.num) / c.den) <= 1]
    assert sorted(s.cusps, key=lambda c: c.den) == sorted(expected, key=lambda c: c.den)
    for rec in s:
        assert math.isclose(rec.peak * 2 * rec.h * float(rec.dist), 1, rel_tol=1e-12)
    assert consecutive_gap_check(s).ok


def test_spectrum_near_half():
    x = Fraction(1, 2) + Fraction(1, 10**6)
    s = spectrum(x, 1)
    big = [r for r in s if r.h > 1]
    assert big[0].cusp == Cusp(1, 2)
    assert math.isclose(big[0].peak, 1 / (8 * 1e-6), rel_tol=1e-12)
    assert s.records[-1].cusp.value == x


@given(st.fractions(min_value=0, max_value=1, max_denominator=10**5))
def test_rational_spectrum_ends_at_itself(x):
    s = spectrum(x, 1)
    assert s.records[-1].cusp.value == x and s.records[-1].t_peak == math.inf


@given(st.fractions(min_value=0, max_value=1, max_denominator=10**15), st.sampled_from([1, 2, Fraction(3, 2)]))
def test_spectrum_routes_agree(x, theta):
    a = spectrum(x, theta, 10**4)
    b = spectrum(x, theta, 10**4, method="enumerate")
    assert a.cusps == b.cusps
    ts = [r.t_enter for r in a]
    assert ts == sorted(ts)
    for rec in a:
        assert rec.t_enter < rec.t_peak < rec.t_exit or rec.marginal or rec.dist == 0
        assert 2 * theta * rec.h * rec.dist <= 1


def test_spectrum_theta_below_one_enumerates():
    x = Fraction(1234567, 10**7)
    s = spectrum(x, Fraction(1, 2), 10**4)
    assert s.cusps == spectrum(x, Fraction(1, 2), 10**4, method="enumerate").cusps
    assert len(s) >= len(spectrum(x, 1, 10**4))
    with pytest.raises(ValueError):
        spectrum(x, 1, method="enumerate")
    with pytest.raises(ValueError):
        spectrum(x, 0, 100)


def test_spectrum_precision_flag():
    x = Direction(Fraction(1, 3) - Fraction(1, 10**8), Fraction(1, 3) + Fraction(1, 10**8))
    s = spectrum(x, 1, 10**30)
    assert s.truncated


def test_gap_examples():
    quotients = [0] + [1, 10**6] * 5
    s = spectrum(Direction.from_cf(quotients), 1)
    g = consecutive_gap_check(s)
    assert g.ok and max(abs(t) for t in g.gaps) < 1
    two = spectrum(Fraction(1, 3), 1)
    g = consecutive_gap_check(two)
    r0 = two.records[0]
    assert g.ratios[0] == pytest.approx(float(r0.dist * math.sqrt(r0.h * two.records[1].h)))


@given(st.lists(st.integers(1, 1000), min_size=4, max_size=30))
def test_consecutive_cusp_law(quotients):
    s = spectrum(Direction.from_cf([0] + quotients + [2]), 1)
    if len(s) >= 3:
        # drop the final record, which sits at distance 0
        trimmed = type(s)(s.direction, s.theta, s.records[:-1])
        if len(trimmed) >= 2:
            assert consecutive_gap_check(trimmed).ok


def test_direction_parsing():
    assert as_direction("2/7").lo == Fraction(2, 7)
    assert as_direction("cf:0,3,2").lo == Fraction(2, 7)
    assert as_direction(Cusp(1, 3)).lo == Fraction(1, 3)
    g = as_direction("golden")
    assert g.hi - g.lo <= Fraction(2, 2 ** 256) and abs(float(g) - 0.6180339887498949) < 1e-15
    with pytest.raises(ValueError):
        as_direction("tau")


def test_make_record_fields():
    r = make_record(Direction.exact(Fraction(1, 10)), Cusp(0, 1), Fraction(1))
    assert r.cusp == Cusp(0, 1) and math.isclose(r.peak, 5) and math.isclose(r.t_peak, math.log(10))
    assert make_record(Direction.exact(Fraction(6, 10)), Cusp(0, 1), Fraction(1)) is None
