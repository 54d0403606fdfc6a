import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cuspflow.covering import (
    CoverNode, NetBank, NodeRejected, Truncation, _le_root_sum, chain_extract, covering_sum, crossing_exponent,
    is_successor, make_node, neighbour_quotient, successors, validate_node,
)
from cuspflow.lattice import BudgetError, Cusp, Interval, canonical, farey_neighbors, iter_farey, realize
from cuspflow.product import DirectionTuple

QUARTER = Fraction(1, 4)


def brute_successors(node, delta, h_max):
    """k = 2 successors by filtering a superset with is_successor.

    Every successor box has half-side at most c / min(h_i, h_j), so its cusp in
    component l lies within r_l + c / min(h_i, h_j) of a_l; the j slot holds a
    Farey neighbour of a_j.
    """
    a, c, j = node.cusps, node.c, node.j
    Q = math.isqrt(h_max)
    pad = c / min(node.h_i, node.h_j)
    cands = {}
    for l in range(2):
        r = Fraction(math.isqrt(math.ceil(node.box_radius_sq(l) * 10**12)) + 1, 10**6)
        cands[l] = list(iter_farey(a[l].value - r - pad, a[l].value + r + pad, Q))
    jp = 1 - j
    out = set()
    for bj in (b for b in cands[j] if farey_neighbors(a[j], b)):
        for bjp in cands[jp]:
            cs = [None, None]
            cs[j], cs[jp] = bj, bjp
            v = CoverNode(tuple(cs), j, jp, c)
            if is_successor(node, v, delta) is None:
                out.add(v)
    return out


def test_node_membership_examples():
    node = make_node([Cusp(0, 1), Cusp(1, 3)], 1, 0, QUARTER)
    assert node.h_i == 9 and node.h_j == 1 and node.scale == 9
    assert node.radius_sq == Fraction(4, 9) and node.box_radius_sq(1) == Fraction(4, 81)
    with pytest.raises(NodeRejected) as e:
        make_node([Cusp(1, 2), Cusp(1, 3)], 1, 0, QUARTER)
    assert e.value.condition == "J1"
    with pytest.raises(NodeRejected):
        make_node([Cusp(0, 1), Cusp(1, 3)], 0, 0, QUARTER)


def test_three_component_node_uses_nets():
    nets = NetBank(Interval(0, 1, True))
    net = nets.net(2, 9)
    assert Cusp(1, 2) in net
    node = make_node([Cusp(0, 1), Cusp(1, 3), Cusp(1, 2)], 1, 0, QUARTER, nets)
    assert node.k == 3
    with pytest.raises(NodeRejected) as e:
        make_node([Cusp(0, 1), Cusp(1, 3), Cusp(1, 4)], 1, 0, QUARTER, nets)
    assert e.value.condition == "J2"
    with pytest.raises(NodeRejected):
        validate_node(CoverNode((Cusp(0, 1), Cusp(1, 3), Cusp(1, 2)), 1, 0), QUARTER)
    # nets are shared between components with the same N
    assert nets.net(0, 9) is net
    with pytest.raises(BudgetError):
        NetBank(Interval(0, 1), max_N=100).net(0, 101)


@given(st.fractions(min_value=-3, max_value=3, max_denominator=50), st.integers(-40, 40))
def test_neighbour_quotient_inverts_the_step(x, n):
    a = canonical(x.numerator, x.denominator)
    g = realize(a)
    b = canonical(g.a * n + g.b, g.c * n + g.d)
    assert neighbour_quotient(a, b) == n


def test_neighbour_quotient_rejects_non_neighbours():
    assert neighbour_quotient(Cusp(0, 1), Cusp(2, 5)) is None
    assert neighbour_quotient(Cusp(0, 1), Cusp(1, 5)) is not None


@given(st.fractions(min_value=-2, max_value=2, max_denominator=30),
       st.fractions(min_value=0, max_value=1, max_denominator=30),
       st.fractions(min_value=0, max_value=1, max_denominator=30))
def test_root_sum_comparison(d, A, B):
    exact = abs(float(d)) <= math.sqrt(A) + math.sqrt(B)
    if abs(abs(float(d)) - math.sqrt(A) - math.sqrt(B)) > 1e-9:
        assert _le_root_sum(d, A, B) == exact


@pytest.mark.parametrize("seed, ij, h_max", [
    ((Cusp(0, 1), Cusp(1, 7)), (1, 0), 1500),
    ((Cusp(1, 5), Cusp(0, 1)), (0, 1), 1500),
    ((Cusp(2, 3), Cusp(3, 11)), (1, 0), 1200),
])
def test_successors_match_brute_force(seed, ij, h_max):
    node = make_node(seed, *ij, QUARTER)
    got = successors(node, QUARTER, Truncation(h_max))
    assert not got.truncated
    assert set(got.nodes) == brute_successors(node, QUARTER, h_max)
    for v in got.nodes:
        assert v.i == node.j and max(a.height for a in v.cusps) <= h_max


def test_successor_set_shrinks_with_delta():
    node = make_node((Cusp(0, 1), Cusp(1, 7)), 1, 0, Fraction(1, 8))
    small = set(successors(node, Fraction(1, 8), Truncation(3000)).nodes)
    big = set(successors(node, QUARTER, Truncation(3000)).nodes)
    assert small and small <= big and small != big


def test_low_truncation_gives_no_successors():
    node = make_node((Cusp(0, 1), Cusp(1, 7)), 1, 0, QUARTER)
    # every successor needs h(a'_j) > h(a_i) = 49
    out = successors(node, QUARTER, Truncation(49))
    assert out.nodes == [] and not out.truncated


def test_max_nodes_truncates():
    node = make_node((Cusp(0, 1), Cusp(1, 7)), 1, 0, QUARTER)
    out = successors(node, QUARTER, Truncation(2500, max_nodes=10))
    assert len(out.nodes) == 10 and out.truncated


def test_successor_conditions_named():
    node = make_node((Cusp(0, 1), Cusp(1, 7)), 1, 0, QUARTER)
    good = successors(node, QUARTER, Truncation(1500)).nodes[0]
    assert is_successor(node, good, QUARTER) is None
    wrong_start = CoverNode(good.cusps, good.j, good.i, good.c)
    assert is_successor(node, wrong_start, QUARTER) is not None
    far = list(good.cusps)
    far[good.j] = Cusp(far[good.j].num + 5 * far[good.j].den, far[good.j].den)
    why = is_successor(node, CoverNode(tuple(far), good.i, good.j, good.c), QUARTER)
    assert why is not None and why.startswith(("rho2", "rho4"))


def test_covering_sum_decreases_in_s():
    node = make_node((Cusp(0, 1), Cusp(1, 11)), 1, 0, Fraction(1, 10))
    succ = successors(node, Fraction(1, 10), Truncation(10**4))
    sums = [covering_sum(node, s, Fraction(1, 10), Truncation(10**4), succ=succ).total for s in (1.0, 1.2, 1.5, 1.8)]
    assert all(b < a for a, b in zip(sums, sums[1:]))
    assert covering_sum(node, 1.0, Fraction(1, 10), Truncation(10**4)).terms == len(succ.nodes)


def test_crossing_exponent_trend():
    node = make_node((Cusp(0, 1), Cusp(1, 11)), 1, 0, Fraction(1, 10))
    c1 = crossing_exponent(node, Fraction(1, 10), Truncation(10**4))
    c2 = crossing_exponent(node, Fraction(3, 100), Truncation(10**4))
    assert c1.s_star == pytest.approx(1.452, abs=2e-3)
    assert c2.s_star == pytest.approx(1.163, abs=2e-3)
    assert c2.s_star <= c1.s_star
    # the sum at s* is one
    succ = successors(node, Fraction(1, 10), Truncation(10**4))
    assert covering_sum(node, c1.s_star, Fraction(1, 10), Truncation(10**4), succ=succ).total == pytest.approx(1, abs=1e-6)
    # no terms at all: no crossing
    c3 = crossing_exponent(node, Fraction(1, 100), Truncation(10**4))
    assert c3.s_star is None and c3.terms == 0


def test_chain_rejects_recurrent_tuples():
    xs = DirectionTuple.build(["golden", "golden"])
    with pytest.raises(ValueError):
        chain_extract(xs, QUARTER, 40)
