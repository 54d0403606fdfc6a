"""Nested ball families built from exact cusps, and the McMullen-type lower bound

    s_j = (n - 1) - sum_{i<j} log(1/Delta_i) / log(1/d_j)

evaluated from the measured diameters d_j and child-measure fractions Delta_i.

A ball is B(a, eps) = [a - eps/h(a), a + eps/h(a)] and d_j is the largest such
radius at level j.  Two trees are built:

* D_delta tree: the children of a are its Farey neighbours a' (|det| = 1) with
  h(a') in [h^{1+delta}, 2 h^{1+delta}] whose balls fit inside B(a, eps).
* slice tree over a D_delta chain a(0), a(1), ...: level-p nodes have heights in
  [H(p), 2 H(p)] with H(p) = h(a(p)) / log h(a(p)); the children of a node g are
  taken inside B(g', eps) for the neighbour g' of g at step n ~ log H(p).

Child families grow like h^{delta/2}, far beyond what can be materialized, so
each expanded node stores the exact size and measure of its full family and
only a few evenly spaced children (always including the extreme heights) are
expanded further.  Delta_j is the minimum over expanded nodes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath

from .arith import count_near_fractions, iroot, iroot_ceil
from .excursion import flog
from .lattice import BudgetError, Cusp, canonical, realize

DEFAULT_EPS = Fraction(1, 4)


class EmptyBandError(ValueError):
    """A node has no admissible children."""


@dataclass
class CantorNode:
    center: Fraction
    radius: Fraction
    level: int
    cusp: Optional[Cusp] = None
    children: list["CantorNode"] = field(default_factory=list)
    family_size: Optional[int] = None  # children in the full family (lower bound for slice trees)
    log_inv_delta: Optional[float] = None  # log(1/Delta) of the full family
    pivot: Optional[Cusp] = None  # slice trees: the intermediate cusp g'

    @property
    def expanded(self) -> bool:
        return self.log_inv_delta is not None

    def contains(self, other: "CantorNode") -> bool:
        return abs(other.center - self.center) + other.radius <= self.radius


@dataclass
class LevelStats:
    level: int
    d: Fraction
    log_inv_d: float
    log_inv_delta: Optional[float]
    nodes: int
    expanded: int

    @property
    def delta(self) -> Optional[float]:
        return None if self.log_inv_delta is None else math.exp(-self.log_inv_delta)


@dataclass
class CantorTree:
    root: CantorNode
    kind: str
    params: dict
    levels: list[LevelStats] = field(default_factory=list)
    thinned: int = 0
    n: int = 2

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def level_nodes(self, j: int) -> list[CantorNode]:
        nodes = [self.root]
        for _ in range(j):
            nodes = [c for p in nodes for c in p.children]
        return nodes

    def deepest_path(self, pick: str = "first") -> list[CantorNode]:
        """Root-to-leaf path of maximal length; ties go to the first (or last) child."""
        memo: dict[int, int] = {}

        def height(nd: CantorNode) -> int:
            if id(nd) not in memo:
                memo[id(nd)] = 1 + max((height(c) for c in nd.children), default=-1)
            return memo[id(nd)]

        path = [self.root]
        while path[-1].children:
            kids = path[-1].children
            best = max(height(c) for c in kids)
            tall = [c for c in kids if height(c) == best]
            path.append(tall[0] if pick == "first" else tall[-1])
        return path


def _evenly(items: Sequence, cap: int) -> list:
    if len(items) <= cap:
        return list(items)
    if cap == 1:
        return [items[0]]
    idx = sorted({round(i * (len(items) - 1) / (cap - 1)) for i in range(cap)})
    return [items[i] for i in idx]


def _thin(children: list[CantorNode]) -> tuple[list[CantorNode], int]:
    """Greedy left-to-right removal of overlapping balls."""
    children = sorted(children, key=lambda c: c.center)
    kept: list[CantorNode] = []
    for c in children:
        if kept and c.center - kept[-1].center <= c.radius + kept[-1].radius:
            continue
        kept.append(c)
    return kept, len(children) - len(kept)


def _level_stats(j: int, nodes: list[CantorNode]) -> LevelStats:
    d = max(nd.radius for nd in nodes)
    exp = [nd for nd in nodes if nd.expanded]
    lid = max((nd.log_inv_delta for nd in exp), default=None)
    return LevelStats(j, d, -flog(d), lid, len(nodes), len(exp))


def _select_for_expansion(nodes: list[CantorNode], cap: int) -> list[CantorNode]:
    return _evenly(sorted(nodes, key=lambda nd: (nd.radius, nd.center), reverse=True), cap)


# -- D_delta tree -------------------------------------------------------------


def _contain_min_q(Q: int, eps: Fraction) -> int:
    """Least q' with eps q'^2 - Q q' - eps Q^2 >= 0, i.e. B(a', eps) inside B(a, eps) for neighbours."""
    a, b = eps.numerator, eps.denominator
    # a q^2 - b Q q - a Q^2 >= 0
    disc = b * b * Q * Q + 4 * a * a * Q * Q
    q = (b * Q + math.isqrt(disc)) // (2 * a)
    while a * q * q - b * Q * q - a * Q * Q < 0:
        q += 1
    while q > 1 and a * (q - 1) ** 2 - b * Q * (q - 1) - a * Q * Q >= 0:
        q -= 1
    return q


def ddelta_band(Q: int, delta: Fraction) -> tuple[int, int]:
    """Denominator range of heights q^2 in [Q^{2(1+delta)}, 2 Q^{2(1+delta)}]."""
    u, v = delta.numerator, delta.denominator
    base = Q ** (u + v)
    q_lo = iroot_ceil(base, v)
    q_hi = iroot(2**v * base * base, 2 * v)
    return q_lo, q_hi


def _neighbour_ranges(Q: int, Qs: int, qa: int, qb: int) -> list[tuple[int, int]]:
    """Integer n with |Q n + Qs| in [qa, qb], as one range per sign of Q n + Qs."""
    out = []
    n1, n2 = -((Qs - qa) // Q), (qb - Qs) // Q
    if n1 <= n2:
        out.append((n1, n2))
    n1, n2 = -((qb + Qs) // Q), (-qa - Qs) // Q
    if n1 <= n2:
        out.append((n1, n2))
    return out


EXACT_SUM_LIMIT = 20_000


def _log_inv_family_measure(Q: int, Qs: int, ranges: list[tuple[int, int]]) -> float:
    """-log of Q^2 * sum 1/(Q n + Qs)^2 over the ranges.

    Long ranges use the midpoint rule: over q = qa, qa + Q, ..., qb the sum
    of Q^2/q^2 is Q (qb - qa + Q) / ((qa - Q/2)(qb + Q/2)) up to a relative
    error O((Q/qa)^2).  A D_delta family with more than 2e4 members starts at
    qa > 2e4 Q, which keeps that error near 1e-10.
    """
    count = sum(n2 - n1 + 1 for n1, n2 in ranges)
    if count <= EXACT_SUM_LIMIT:
        terms = [(Q / (Q * n + Qs)) ** 2 for n1, n2 in ranges for n in range(n1, n2 + 1)]
        return -math.log(math.fsum(terms))
    total = Fraction(0)
    for n1, n2 in ranges:
        qa, qb = sorted((abs(Q * n1 + Qs), abs(Q * n2 + Qs)))
        total += Fraction(4 * Q * (qb - qa + Q), (2 * qa - Q) * (2 * qb + Q))
    return -flog(total)


def _ddelta_children(node: CantorNode, delta: Fraction, eps: Fraction, cap: int, h_budget: Optional[int]):
    a = node.cusp
    g = realize(a)
    P, Ps, Q, Qs = g.a, g.b, g.c, g.d
    q_lo, q_hi = ddelta_band(Q, delta)
    if h_budget is not None and q_lo * q_lo > h_budget:
        raise BudgetError(f"children of {a} need heights beyond {h_budget}")
    qa = max(q_lo, _contain_min_q(Q, eps))
    ranges = _neighbour_ranges(Q, Qs, qa, q_hi)
    size = sum(n2 - n1 + 1 for n1, n2 in ranges)
    if size == 0:
        raise EmptyBandError(f"cusp {a} (height {a.height}) has no admissible children")
    node.family_size = size
    node.log_inv_delta = _log_inv_family_measure(Q, Qs, ranges)
    per = max(1, cap // len(ranges))
    kids = []
    for n1, n2 in ranges:
        span = n2 - n1
        picks = sorted({n1 + round(i * span / max(per - 1, 1)) for i in range(per)}) if span + 1 > per else range(n1, n2 + 1)
        for n in picks:
            c = canonical(P * n + Ps, Q * n + Qs)
            kids.append(CantorNode(c.value, eps / c.height, node.level + 1, c))
    return kids


def build_ddelta(
    root: Cusp, delta, depth: int, eps=DEFAULT_EPS, child_cap: int = 64, level_cap: int = 256,
    h_budget: Optional[int] = None,
) -> CantorTree:
    """Cantor tree of Farey-neighbour children with heights in [h^{1+delta}, 2h^{1+delta}]."""
    delta = Fraction(delta).limit_denominator(1000)
    eps = Fraction(eps)
    if delta <= 0:
        raise ValueError("delta must be positive")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rnode = CantorNode(root.value, eps / root.height, 0, root)
    tree = CantorTree(rnode, "ddelta", {"root": str(root), "delta": str(delta), "depth": depth, "eps": str(eps),
                                        "child_cap": child_cap, "level_cap": level_cap})
    level = [rnode]
    for j in range(depth):
        nxt = []
        for nd in _select_for_expansion(level, level_cap):
            kids = _ddelta_children(nd, delta, eps, child_cap, h_budget)
            kids, k = _thin(kids)
            tree.thinned += k
            nd.children = kids
            nxt.extend(kids)
        tree.levels.append(_level_stats(j, level))
        level = nxt
    tree.levels.append(_level_stats(depth, level))
    return tree


def ideal_ddelta_sequence(delta, j: int, n: int = 2) -> float:
    """(n-1)(1 - (1/2)((1+delta)^j - 1)/(1+delta)^j), the bound with all constants set to 1."""
    r = (1 + float(delta)) ** j
    return (n - 1) * (1 - 0.5 * (r - 1) / r)


# -- slice tree -----------------------------------------------------------------


def reduced_height(h: int) -> mpmath.mpf:
    return mpmath.mpf(h) / mpmath.log(h)


def reduced_band(h: int) -> tuple[int, int]:
    """Denominators q with q^2 in [h/log h, 2 h/log h]."""
    with mpmath.workprec(h.bit_length() + 100):
        H = reduced_height(h)
        q_lo = int(mpmath.ceil(mpmath.sqrt(H)))
        q_hi = int(mpmath.floor(mpmath.sqrt(2 * H)))
    return q_lo, q_hi


def validate_chain(heights: Sequence[int], delta) -> None:
    """Raise if consecutive heights break h' in [h^{1+delta}, 2 h^{1+delta}]."""
    delta = Fraction(delta).limit_denominator(1000)
    u, v = delta.numerator, delta.denominator
    for p, (h0, h1) in enumerate(zip(heights, heights[1:])):
        lo = h0 ** (u + v)
        if not (h1**v >= lo and h1**v <= 2**v * lo):
            raise ValueError(f"chain breaks the height law between positions {p} and {p + 1}")


def _pivot(a: Cusp, H_log: float, eps: Fraction) -> Cusp:
    g = realize(a)
    P, Ps, Q, Qs = g.a, g.b, g.c, g.d
    n = max(1, math.ceil(H_log))
    qmin = _contain_min_q(Q, eps)
    while Q * n + Qs < qmin:
        n += 1
    return canonical(P * n + Ps, Q * n + Qs)


def _slice_children(node: CantorNode, band: tuple[int, int], eps: Fraction, H_log: float,
                    sub_bands: int, k_max: int, d_max: int):
    piv = _pivot(node.cusp, H_log, eps)
    node.pivot = piv
    g = realize(piv)
    P, Ps, Q, Qs = g.a, g.b, g.c, g.d
    q_lo, q_hi = band
    r_piv = eps / piv.height
    # measure lower bound: count per sub-band with the smallest admissible radius
    cuts = sorted({q_lo + (q_hi + 1 - q_lo) * i // sub_bands for i in range(sub_bands)} | {q_hi + 1})
    count, mass = 0, Fraction(0)
    for b0, b1 in zip(cuts, cuts[1:]):
        R = r_piv - eps / (b0 * b0)
        if R <= 0:
            continue
        w = count_near_fractions(P, Q, Ps, Qs, b0, b1 - 1, R, d_max)
        count += w.lower
        mass += Fraction(w.lower, b1 * b1)
    if count == 0:
        raise EmptyBandError(f"slice node {node.cusp} has no children in its window")
    node.family_size = count
    node.log_inv_delta = -flog(mass * node.cusp.height)
    kids = []
    for k in [s * m for m in range(1, k_max + 1) for s in (1, -1)]:
        m_lo = -((Qs * k - q_lo) // Q)
        m_hi = (q_hi - Qs * k) // Q
        for m in (m_lo, m_hi):
            for step in range(4):
                mm = m + step if m == m_lo else m - step
                if not m_lo <= mm <= m_hi or math.gcd(mm, k) != 1:
                    continue
                c = canonical(P * mm + Ps * k, Q * mm + Qs * k)
                if not q_lo <= c.den <= q_hi:
                    continue
                if Fraction(abs(k), Q * c.den) + eps / c.height <= r_piv:
                    kids.append(CantorNode(c.value, eps / c.height, node.level + 1, c))
                    break
    return kids


def build_slice(
    base: Sequence[int], delta, depth: int, eps=DEFAULT_EPS, k_max: int = 2, level_cap: int = 64,
    sub_bands: int = 4, d_max: int = 256, p0: int = 0,
) -> CantorTree:
    """Slice tree over the base heights h(p0), h(p0+1), ... of a D_delta chain.

    Small base heights leave no room for children inside the pivot ball; p0
    skips those leading levels.
    """
    eps = Fraction(eps)
    base = list(base)[p0:]
    if len(base) < depth + 1:
        raise ValueError(f"base chain needs {depth + 1} heights, got {len(base)}")
    validate_chain(base, delta)
    bands = [reduced_band(h) for h in base[: depth + 1]]
    H_logs = [flog(h) - math.log(flog(h)) for h in base[: depth + 1]]
    q0 = bands[0][0]
    if q0 > bands[0][1]:
        raise EmptyBandError("no root height in the first band")
    root = Cusp(1, q0)
    rnode = CantorNode(root.value, eps / root.height, 0, root)
    tree = CantorTree(rnode, "slice", {"base_log_heights": [flog(h) for h in base[: depth + 1]], "delta": str(delta), "p0": p0,
                                       "depth": depth, "eps": str(eps), "k_max": k_max, "level_cap": level_cap})
    level = [rnode]
    for j in range(depth):
        nxt = []
        for nd in _select_for_expansion(level, level_cap):
            kids = _slice_children(nd, bands[j + 1], eps, H_logs[j], sub_bands, k_max, d_max)
            kids, k = _thin(kids)
            tree.thinned += k
            nd.children = kids
            nxt.extend(kids)
        if not nxt:
            raise EmptyBandError(f"no materialized children at level {j + 1}")
        tree.levels.append(_level_stats(j, level))
        level = nxt
    tree.levels.append(_level_stats(depth, level))
    return tree


def log_level_populations(tree: CantorTree) -> list[float]:
    """log of a lower bound on the number of level-j balls in the uncapped tree.

    Every level-j ball is assumed to carry the smallest family observed among
    the expanded level-j nodes.
    """
    out = [0.0]
    for j in range(tree.depth):
        sizes = [nd.family_size for nd in tree.level_nodes(j) if nd.family_size]
        out.append(out[-1] + math.log(min(sizes)))
    return out


def level_separation(tree: CantorTree, base: Sequence[int]) -> float:
    """min over nodes and pivots of max(h/h_p, h_p/h) / log h_p, against the base level p.

    Large values mean slice cusps avoid heights comparable to the base chain.
    """
    worst = math.inf
    for j in range(tree.depth + 1):
        lh = flog(base[j])
        for nd in tree.level_nodes(j):
            for c in filter(None, (nd.cusp, nd.pivot)):
                r = abs(flog(c.height) - lh)
                worst = min(worst, math.exp(r - math.log(lh)))
    return worst


# -- evaluation -----------------------------------------------------------------


@dataclass
class BoundRow:
    j: int
    d: Fraction
    log_inv_d: float
    delta: Optional[float]
    log_inv_delta: Optional[float]
    ratio: float  # sum_{i<j} log(1/Delta_i) / log(1/d_j)
    s: float


@dataclass
class BoundReport:
    rows: list[BoundRow]
    params: dict

    @property
    def s(self) -> list[float]:
        return [r.s for r in self.rows]


def evaluate_from_levels(levels: Sequence[LevelStats], n: int = 2, params: Optional[dict] = None) -> BoundReport:
    rows, acc = [], 0.0
    for st in levels:
        ratio = acc / st.log_inv_d if st.log_inv_d > 0 else math.inf
        rows.append(BoundRow(st.level, st.d, st.log_inv_d, st.delta, st.log_inv_delta, ratio, (n - 1) - ratio))
        if st.log_inv_delta is not None:
            acc += st.log_inv_delta
    return BoundReport(rows, dict(params or {}))


def evaluate_bound(tree: CantorTree) -> BoundReport:
    if tree.depth < 2:
        raise ValueError("bound evaluation needs depth >= 2")
    return evaluate_from_levels(tree.levels, tree.n, tree.params)


def verify_tree(tree: CantorTree) -> list[str]:
    """Nesting, sibling disjointness and strictly shrinking d_j; returns violations."""
    bad = []
    stack = [tree.root]
    while stack:
        nd = stack.pop()
        kids = sorted(nd.children, key=lambda c: c.center)
        for c in kids:
            if not nd.contains(c):
                bad.append(f"level {c.level}: {c.cusp} not inside parent {nd.cusp}")
        for a, b in zip(kids, kids[1:]):
            if b.center - a.center <= a.radius + b.radius:
                bad.append(f"level {a.level}: {a.cusp} and {b.cusp} overlap")
        stack.extend(kids)
    ds = [st.d for st in tree.levels]
    if any(b >= a for a, b in zip(ds, ds[1:])):
        bad.append("d_j not strictly decreasing")
    return bad


def synthetic_tree(branching: int, lam: Fraction, depth: int, d0: Fraction = Fraction(1, 2)) -> CantorTree:
    """Interval tree where each ball splits into `branching` equally spaced balls of ratio lam."""
    lam, d0 = Fraction(lam), Fraction(d0)
    if branching * lam >= 1:
        raise ValueError("children would overlap")
    root = CantorNode(Fraction(0), d0, 0)
    tree = CantorTree(root, "synthetic", {"branching": branching, "lambda": str(lam), "depth": depth})
    level = [root]
    for j in range(depth):
        nxt = []
        for nd in level:
            r = nd.radius * lam
            gap = (2 * nd.radius - 2 * r * branching) / branching
            left = nd.center - nd.radius + gap / 2 + r
            nd.children = [CantorNode(left + i * (2 * r + gap), r, j + 1) for i in range(branching)]
            mass = sum(2 * c.radius for c in nd.children) / (2 * nd.radius)
            nd.log_inv_delta = -flog(mass)
            nd.family_size = branching
            nxt.extend(nd.children)
        tree.levels.append(_level_stats(j, level))
        level = nxt
    tree.levels.append(_level_stats(depth, level))
    return tree


def synthetic_closed_form(branching: int, lam, j: int, d0=Fraction(1, 2), n: int = 2) -> float:
    """(n-1) - j log(1/(b lam)) / log(1/(d0 lam^j))."""
    lam = float(lam)
    if j == 0:
        return float(n - 1)
    return (n - 1) - j * math.log(1 / (branching * lam)) / (math.log(1 / float(d0)) + j * math.log(1 / lam))


# -- Sing_2 pipeline ------------------------------------------------------------


@dataclass
class Sing2Sample:
    x1: Cusp
    x2: Cusp
    base: list[Cusp]
    ddelta: CantorTree
    slice: CantorTree
    p0: int = 0


def sing2_pipeline(
    root: Cusp = Cusp(1, 5), delta=1, depth: int = 8, eps=DEFAULT_EPS, pick: str = "first", max_burn_in: int = 4,
) -> Sing2Sample:
    """A pair (x1, x2): x1 a deepest D_delta cusp, x2 a deepest slice-tree cusp over x1's chain.

    The slice tree starts at the first base level p0 whose child windows are
    nonempty; the D_delta chain is built p0 levels deeper to compensate.
    """
    for p0 in range(max_burn_in + 1):
        dd = build_ddelta(root, delta, depth + p0, eps, child_cap=2, level_cap=2)
        base = [nd.cusp for nd in dd.deepest_path(pick)]
        try:
            sl = build_slice([c.height for c in base], delta, depth, eps, k_max=1, level_cap=2, p0=p0)
        except EmptyBandError:
            continue
        x2 = sl.deepest_path(pick)[-1].cusp
        return Sing2Sample(base[-1], x2, base, dd, sl, p0)
    raise EmptyBandError(f"no slice tree within {max_burn_in} burn-in levels")


def sing2_level_counts(sample: Sing2Sample) -> tuple[list[float], list[float]]:
    """(log 1/eps_j, log N_j) for the product of the two trees at levels j = 1..depth.

    eps_j is the larger of the two level-j ball diameters and N_j the product
    of the level populations, both trees counted from the slice start p0.
    Disjoint, separated balls of diameter about eps_j each meet O(1) boxes of
    that size, so N_j tracks the box count of the finite approximation.
    """
    p0, depth = sample.p0, sample.slice.depth
    pop_d = log_level_populations(sample.ddelta)
    pop_s = log_level_populations(sample.slice)
    xs, ys = [], []
    for j in range(1, depth + 1):
        ld = sample.ddelta.levels[p0 + j].log_inv_d + math.log(0.5)
        ls = sample.slice.levels[j].log_inv_d + math.log(0.5)
        xs.append(min(ld, ls))
        ys.append(pop_d[p0 + j] - pop_d[p0] + pop_s[j])
    return xs, ys
