"""Self-similar coverings of the divergent-on-average tuples.

A node (a_1..a_k, i, j) stands for the sup-norm ball around (a_1..a_k) of
radius c / sqrt(h(a_i) h(a_j)), together with an inner box whose i-th side is
c / h(a_i).  The successor map rho encodes how the covering refines when the
maximizing component of the joint height hands over from i to j.  All
geometric comparisons are exact: radii are square roots of rationals and are
compared after squaring.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .counting import NetE, build_net
from .excursion import Direction, as_direction, flog
from .lattice import BudgetError, Cusp, Interval, canonical, farey_neighbors, iter_farey, realize
from .product import DirectionTuple, MinimumEvent, classify, minima_trace

DEFAULT_C = Fraction(2)
DEFAULT_QUOTIENT = 2


class NodeRejected(ValueError):
    """A tuple of cusps and indices is not an element of J."""

    def __init__(self, condition: str, detail: str):
        super().__init__(f"{condition}: {detail}")
        self.condition = condition


def _le_root(d: Fraction, A: Fraction) -> bool:
    """|d| <= sqrt(A)."""
    return d * d <= A


def _le_root_sum(d: Fraction, A: Fraction, B: Fraction) -> bool:
    """|d| <= sqrt(A) + sqrt(B), exactly."""
    lhs = d * d - A - B
    return lhs <= 0 or lhs * lhs <= 4 * A * B


class NetBank:
    """Lazily built nets E(l, N), one per component and N, over a fixed region."""

    def __init__(self, region: Interval, c=DEFAULT_C, c_pack=Fraction(1, 4), max_N: int = 10**6):
        self.region = region
        self.c, self.c_pack = Fraction(c), Fraction(c_pack)
        self.max_N = max_N
        self._nets: dict[tuple[int, int], NetE] = {}

    def net(self, comp: int, N: int) -> NetE:
        if N > self.max_N:
            raise BudgetError(f"net of height {N} exceeds budget {self.max_N}")
        key = (comp, N)
        if key not in self._nets:
            # every component uses the same model, so nets are shared
            same = [v for (_, n), v in self._nets.items() if n == N]
            self._nets[key] = same[0] if same else build_net(self.region, N, self.c, self.c_pack)
        return self._nets[key]


@dataclass(frozen=True)
class CoverNode:
    cusps: tuple[Cusp, ...]
    i: int
    j: int
    c: Fraction = DEFAULT_C

    @property
    def k(self) -> int:
        return len(self.cusps)

    @property
    def h_i(self) -> int:
        return self.cusps[self.i].height

    @property
    def h_j(self) -> int:
        return self.cusps[self.j].height

    @property
    def scale(self) -> int:
        """h(a_i) h(a_j); the ball radius is c / sqrt(scale)."""
        return self.h_i * self.h_j

    @property
    def radius_sq(self) -> Fraction:
        return self.c * self.c / self.scale

    @property
    def diam(self) -> float:
        return 2 * float(self.c) * math.exp(-0.5 * flog(self.scale))

    @property
    def log_diam(self) -> float:
        return math.log(2 * float(self.c)) - 0.5 * flog(self.scale)

    def box_radius_sq(self, l: int) -> Fraction:
        """Squared half-side of the inner box A in component l."""
        if l == self.i:
            return self.c * self.c / (self.h_i * self.h_i)
        return self.radius_sq

    def in_ball(self, x: Sequence[Fraction]) -> bool:
        return all(_le_root(xl - a.value, self.radius_sq) for xl, a in zip(x, self.cusps))

    def in_box(self, x: Sequence[Fraction]) -> bool:
        return all(_le_root(xl - a.value, self.box_radius_sq(l)) for l, (xl, a) in enumerate(zip(x, self.cusps)))

    def __str__(self) -> str:
        return f"({', '.join(map(str, self.cusps))}; i={self.i}, j={self.j})"


def validate_node(node: CoverNode, delta, nets: Optional[NetBank] = None) -> None:
    """Raise NodeRejected naming the first violated membership condition of J."""
    delta = Fraction(delta)
    if node.i == node.j:
        raise NodeRejected("indices", "i and j must differ")
    if not node.h_j < delta * node.h_i:
        raise NodeRejected("J1", f"h(a_j) = {node.h_j} is not < delta h(a_i) = {delta * node.h_i}")
    others = [l for l in range(node.k) if l not in (node.i, node.j)]
    if others:
        if nets is None:
            raise NodeRejected("J2", "nets are required for k >= 3")
        N = node.scale
        for l in others:
            if node.cusps[l] not in nets.net(l, N):
                raise NodeRejected("J2", f"component {l} cusp {node.cusps[l]} is not in E({l}, {N})")


def make_node(cusps: Sequence[Cusp], i: int, j: int, delta, nets: Optional[NetBank] = None, c=DEFAULT_C) -> CoverNode:
    node = CoverNode(tuple(cusps), i, j, Fraction(c))
    validate_node(node, delta, nets)
    return node


def neighbour_quotient(a: Cusp, b: Cusp) -> Optional[int]:
    """n with b = g(n) for g = realize(a), or None when b is not a Farey neighbour of a."""
    g = realize(a)
    # g^{-1} b = (Qs p - Ps q) / (P q - Q p); the denominator is +-1 for neighbours
    num = g.d * b.num - g.b * b.den
    den = g.a * b.den - g.c * b.num
    if abs(den) != 1:
        return None
    return num * den


def is_successor(node: CoverNode, succ: CoverNode, delta, C: int = DEFAULT_QUOTIENT,
                 nets: Optional[NetBank] = None) -> Optional[str]:
    """None when succ is in rho(node), otherwise the first violated condition."""
    try:
        validate_node(succ, delta, nets)
    except NodeRejected as e:
        return f"succ not in J ({e})"
    i, j, jp = node.i, node.j, succ.j
    if succ.i != j:
        return "index: successor must start at j"
    a, b = node.cusps, succ.cusps
    n = neighbour_quotient(a[j], b[j])
    if n is None or abs(n) < C:
        return "rho1: a_j -> a'_j is not a neighbour step with large quotient"
    if jp == i:
        # a'_i may coincide with a_i: both come from the spectrum of x_i
        if b[i] != a[i] and not b[i].height > a[i].height:
            return "rho2: h(a'_i) <= h(a_i)"
        if not _le_root(b[i].value - a[i].value, node.c * node.c / (a[i].height ** 2)):
            return "rho2: |a'_i - a_i| > c / h(a_i)"
    if not (a[i].height < b[j].height and a[j].height < b[jp].height):
        return "rho3: heights do not increase"
    for l in range(node.k):
        if not _le_root_sum(b[l].value - a[l].value, node.box_radius_sq(l), succ.box_radius_sq(l)):
            return f"rho4: inner boxes are disjoint in component {l}"
    if not a[i].height ** 2 <= b[j].height * b[jp].height:
        return "rho5: h(a_i)^2 > h(a'_j) h(a'_j')"
    return None


# -- successor generation -------------------------------------------------------


@dataclass(frozen=True)
class Truncation:
    h_max: int  # largest height of any generated cusp
    max_nodes: int = 10**4


@dataclass
class SuccessorSet:
    nodes: list[CoverNode]
    truncated: bool
    truncation: Truncation


def _window(center: Fraction, r2: Fraction) -> tuple[Fraction, Fraction]:
    """Rational interval containing [center - sqrt(r2), center + sqrt(r2)]."""
    num, den = r2.numerator, r2.denominator
    r = Fraction(math.isqrt(num * den) + 1, den)
    return center - r, center + r


def _neighbour_steps(a: Cusp, C: int, h_lo: int, h_max: int) -> list[Cusp]:
    """Neighbours g(n) of a with |n| >= C and h_lo < height <= h_max, by increasing height."""
    g = realize(a)
    P, Ps, Q, Qs = g.a, g.b, g.c, g.d
    q_max = math.isqrt(h_max)
    out = []
    for sign in (1, -1):
        n = sign * C
        while True:
            q = abs(Q * n + Qs)
            if q > q_max:
                break
            if q * q > h_lo:
                out.append(canonical(P * n + Ps, Q * n + Qs))
            n += sign
    out.sort(key=lambda c: (c.height, c.value))
    return out


def successors(node: CoverNode, delta, truncation: Truncation, C: int = DEFAULT_QUOTIENT,
               nets: Optional[NetBank] = None) -> SuccessorSet:
    """Elements of rho(node) with every cusp height at most truncation.h_max."""
    delta = Fraction(delta)
    i, j, k = node.i, node.j, node.k
    a = node.cusps
    out: list[CoverNode] = []
    for bj in _neighbour_steps(a[j], C, a[i].height, truncation.h_max):
        for jp in range(k):
            if jp == j:
                continue
            # the successor must lie in J: h(a'_j') < delta h(a'_j)
            h_top = min(truncation.h_max, math.ceil(delta * bj.height) - 1)
            for bjp in _component_candidates(node, jp, bj, h_top):
                combos = _other_components(node, j, jp, bj, bjp, nets)
                for cusps in combos:
                    succ = CoverNode(tuple(cusps), j, jp, node.c)
                    if is_successor(node, succ, delta, C, nets) is None:
                        out.append(succ)
                        if len(out) >= truncation.max_nodes:
                            return SuccessorSet(out, True, truncation)
    return SuccessorSet(out, False, truncation)


def _component_candidates(node: CoverNode, jp: int, bj: Cusp, h_top: int) -> list[Cusp]:
    """Cusps for slot j' allowed by the inner-box condition, heights <= h_top."""
    if h_top < 1:
        return []
    a = node.cusps[jp]
    r2 = node.box_radius_sq(jp)
    if jp == node.i:
        # rho2 is the tighter window when j' = i
        r2 = min(r2, node.c * node.c / (a.height ** 2))
    else:
        # the successor box in slot j' has radius at most c / sqrt(h(a'_j)), and
        # sqrt(A) + sqrt(B) <= sqrt(2 (A + B))
        r2 = 2 * (r2 + node.c * node.c / bj.height)
    lo, hi = _window(a.value, r2)
    return list(iter_farey(lo, hi, math.isqrt(h_top)))


def _other_components(node: CoverNode, j: int, jp: int, bj: Cusp, bjp: Cusp, nets: Optional[NetBank]):
    k = node.k
    others = [l for l in range(k) if l not in (j, jp)]
    base = list(node.cusps)
    base[j], base[jp] = bj, bjp
    if not others:
        return [base]
    if nets is None:
        raise ValueError("nets are required for k >= 3")
    N = bj.height * bjp.height
    choices = []
    for l in others:
        net = nets.net(l, N)
        r2 = node.box_radius_sq(l)
        lo, hi = _window(node.cusps[l].value, 2 * (r2 + node.c * node.c / N))
        choices.append([m for m in net.members if lo <= m.value <= hi])
    combos = [base]
    for l, ch in zip(others, choices):
        combos = [c[:l] + [m] + c[l + 1:] for c in combos for m in ch]
    return combos


# -- covering sums ----------------------------------------------------------------


@dataclass
class CoveringSum:
    s: float
    total: float
    terms: int
    truncated: bool


def _sum_ratios(node: CoverNode, succ: Sequence[CoverNode], s: float) -> float:
    # sorted-magnitude summation keeps the result independent of generation order
    logs = sorted(s * (v.log_diam - node.log_diam) for v in succ)
    return math.fsum(math.exp(x) for x in logs)


def covering_sum(node: CoverNode, s: float, delta, truncation: Truncation, C: int = DEFAULT_QUOTIENT,
                 nets: Optional[NetBank] = None, succ: Optional[SuccessorSet] = None) -> CoveringSum:
    """Sum of (diam B(v) / diam B(node))^s over the truncated successor set.

    Truncation only removes positive terms, so this is a lower bound for the
    full sum.
    """
    if succ is None:
        succ = successors(node, delta, truncation, C, nets)
    return CoveringSum(float(s), _sum_ratios(node, succ.nodes, s), len(succ.nodes), succ.truncated)


@dataclass
class Crossing:
    s_star: Optional[float]  # None when the sum stays on one side of 1 over the bracket
    lo: float
    hi: float
    sum_lo: float
    sum_hi: float
    terms: int
    truncated: bool


def crossing_exponent(node: CoverNode, delta, truncation: Truncation, n: int = 2, C: int = DEFAULT_QUOTIENT,
                      nets: Optional[NetBank] = None, tol: float = 1e-9) -> Crossing:
    """Bisect for the s where the truncated covering sum passes 1, on ((k-1)(n-1), k(n-1))."""
    k = node.k
    lo, hi = float((k - 1) * (n - 1)), float(k * (n - 1))
    succ = successors(node, delta, truncation, C, nets)
    f_lo, f_hi = _sum_ratios(node, succ.nodes, lo), _sum_ratios(node, succ.nodes, hi)
    if not f_lo > 1 >= f_hi:
        return Crossing(None, lo, hi, f_lo, f_hi, len(succ.nodes), succ.truncated)
    a, b = lo, hi
    while b - a > tol:
        m = 0.5 * (a + b)
        if _sum_ratios(node, succ.nodes, m) > 1:
            a = m
        else:
            b = m
    return Crossing(0.5 * (a + b), lo, hi, f_lo, f_hi, len(succ.nodes), succ.truncated)


# -- chains from escaping tuples ------------------------------------------------


@dataclass(frozen=True)
class Triple:
    """A switch of the joint height: component comp leaves cusp a, whose next cusp is b."""
    a: Cusp
    b: Cusp
    comp: int
    incoming: Cusp  # the cusp of the component taking over


@dataclass
class Chain:
    nodes: list[CoverNode]
    triples: list[Triple]
    violations: list[str] = field(default_factory=list)
    ratios: list[float] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _triples(xs: DirectionTuple, events: Sequence[MinimumEvent]) -> list[Triple]:
    out = []
    for e in events:
        cusps = xs.spectra[e.from_comp].cusps
        k = cusps.index(e.cusp_from)
        if k + 1 >= len(cusps):
            break
        out.append(Triple(e.cusp_from, cusps[k + 1], e.from_comp, e.cusp_to))
    return out


def _subsequence(triples: Sequence[Triple]) -> list[int]:
    """p_{l+1} = least p > p_l with h(b(p_l))^2 <= h(b(p)) h(a(p+1))."""
    idx = [0]
    while True:
        hb = triples[idx[-1]].b.height
        nxt = next((p for p in range(idx[-1] + 1, len(triples))
                    if hb * hb <= triples[p].b.height * triples[p].incoming.height), None)
        if nxt is None:
            return idx
        idx.append(nxt)


def _points(xs: DirectionTuple) -> list[Direction]:
    return [as_direction(d) for d in xs.directions]


def _dir_in(x: Direction, center: Fraction, r2: Fraction) -> bool:
    return _le_root(x.lo - center, r2) and _le_root(x.hi - center, r2)


def chain_extract(xs: DirectionTuple, delta, horizon: float, c=DEFAULT_C, C: int = DEFAULT_QUOTIENT,
                  nets: Optional[NetBank] = None) -> Chain:
    """Nested covering nodes u(l) around an escaping tuple, with every clause checked.

    Clauses: (i) the tuple lies in B(u(l)) and A(u(l)); (ii) u(l+1) is a
    successor of u(l); (iii) diam B(u(l+1)) <= sqrt(delta) diam B(u(l)).
    Violations are collected with the clause and node index.
    """
    delta = Fraction(delta)
    status = classify(xs, delta, horizon)
    if status != "escaping":
        raise ValueError(f"tuple is {status}, not escaping, at delta = {delta}")
    events = minima_trace(xs, horizon)
    # start after the last switch whose minimum is at most 1/delta
    bound = -math.log(float(delta))
    start = max((p + 1 for p, e in enumerate(events) if e.log_value <= bound), default=0)
    triples = _triples(xs, events[start:])
    if len(triples) < 3:
        raise ValueError("horizon too short: fewer than two covering nodes")
    sub = _subsequence(triples)
    x = _points(xs)
    c = Fraction(c)
    nodes: list[CoverNode] = []
    used: list[Triple] = []
    violations: list[str] = []
    for l in range(len(sub) - 1):
        t0, t1 = triples[sub[l]], triples[sub[l + 1]]
        i, j = t0.comp, t1.comp
        cusps = [None] * xs.k
        cusps[i], cusps[j] = t0.b, t1.a
        if i == j:
            violations.append(f"node {l}: subsequence stays in component {i}")
            break
        N = t0.b.height * t1.a.height
        for m in range(xs.k):
            if cusps[m] is None:
                if nets is None:
                    raise ValueError("nets are required for k >= 3")
                cusps[m] = nets.net(m, N).nearest(x[m].mid)
        node = CoverNode(tuple(cusps), i, j, c)
        try:
            validate_node(node, delta, nets)
        except NodeRejected as e:
            violations.append(f"node {l}: not in J ({e})")
        nodes.append(node)
        used.append(t0)
    if len(nodes) < 2:
        raise ValueError("horizon too short: fewer than two covering nodes")
    chain = Chain(nodes, used, violations)
    lam2 = delta
    for l, u in enumerate(nodes):
        if not all(_dir_in(xl, a.value, u.radius_sq) for xl, a in zip(x, u.cusps)):
            violations.append(f"clause i, node {l}: tuple outside B")
        if not all(_dir_in(xl, a.value, u.box_radius_sq(m)) for m, (xl, a) in enumerate(zip(x, u.cusps))):
            violations.append(f"clause i, node {l}: tuple outside A")
    for l, (u, v) in enumerate(zip(nodes, nodes[1:])):
        why = is_successor(u, v, delta, C, nets)
        if why is not None:
            violations.append(f"clause ii, node {l}: {why}")
        # diam ratio squared is scale(u) / scale(v)
        chain.ratios.append(math.exp(0.5 * (flog(u.scale) - flog(v.scale))))
        if not u.scale <= lam2 * v.scale:
            violations.append(f"clause iii, node {l}: contraction ratio above sqrt(delta)")
    return chain
