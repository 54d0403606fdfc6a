"""Fast invariant checks across all modules, run by ``cuspflow verify``."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import cantor, counting, covering, excursion, geometry, lattice, product


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def _sigma_involution(rng: random.Random) -> str:
    s2 = geometry.SIGMA @ geometry.SIGMA
    assert s2.equals_up_to_sign(geometry.IDENTITY)
    return "sigma^2 = id"


def _busemann_cocycle(rng: random.Random) -> str:
    worst = 0.0
    for _ in range(200):
        xi = geometry.Finite((rng.uniform(-2, 2),))
        p, q, r = (geometry.FramePoint(math.exp(rng.uniform(-2, 2)), (rng.uniform(-2, 2),)) for _ in range(3))
        lhs = geometry.busemann(xi, p, r)
        rhs = geometry.busemann(xi, p, q) + geometry.busemann(xi, q, r)
        worst = max(worst, abs(lhs - rhs), abs(geometry.busemann(xi, p, q) + geometry.busemann(xi, q, p)))
    assert worst <= 1e-9, worst
    return f"max error {worst:.3g}"


def _realize(rng: random.Random) -> str:
    for c in lattice.enumerate_cusps(lattice.Interval(0, 1, True), 400):
        g = lattice.realize(c)
        assert g.det == 1 and g.a == c.num and g.c == c.den
    return "det 1 and g.inf = a for h <= 400"


def _spectrum_routes(rng: random.Random) -> str:
    for _ in range(10):
        x = Fraction(rng.randrange(1, 10**6), 10**6)
        a = excursion.spectrum(x, 1, 10**4).cusps
        b = excursion.spectrum(x, 1, 10**4, method="enumerate").cusps
        assert a == b, x
    return "10 directions, h_max = 1e4"


def _ford_separation(rng: random.Random) -> str:
    cusps = lattice.enumerate_cusps(lattice.Interval(0, 1, True), 100)
    for a, b in zip(cusps, cusps[1:]):
        d = b.value - a.value
        assert d * d * a.height * b.height >= 1
    return f"{len(cusps)} consecutive pairs, h <= 100"


def _annulus(rng: random.Random) -> str:
    n = counting.count_annulus(lattice.Cusp(0, 1), 1, 4, 1, math.log(4))
    assert n == 10, n
    return "count(0/1, 1, 4, 1, log 4) = 10"


def _witness(rng: random.Random) -> str:
    for _ in range(200):
        x = Fraction(rng.randrange(10**6), 10**6)
        counting.dirichlet_witness(x, 10**4)
    return "200 directions, X = 1e4"


def _weighted(rng: random.Random) -> str:
    w = counting.weighted_height_sum(lattice.Interval(0, 1), 25)
    assert w.total == Fraction(52, 15), w.total
    return "X = 25 gives 52/15"


def _net(rng: random.Random) -> str:
    net = counting.build_net(lattice.Interval(0, 1, True), 400)
    return f"N = 400, {len(net.members)} members verified"


def _synthetic(rng: random.Random) -> str:
    tree = cantor.synthetic_tree(3, Fraction(1, 5), 4)
    rep = cantor.evaluate_bound(tree)
    for row in rep.rows[1:]:
        assert abs(row.s - cantor.synthetic_closed_form(3, Fraction(1, 5), row.j)) <= 1e-12
    return "closed form at every level"


def _ddelta(rng: random.Random) -> str:
    tree = cantor.build_ddelta(lattice.Cusp(1, 5), 1, 3, child_cap=8, level_cap=16)
    bad = cantor.verify_tree(tree)
    assert not bad, bad[:3]
    return f"depth 3, {sum(l.nodes for l in tree.levels)} nodes"


def _successors(rng: random.Random) -> str:
    delta = Fraction(1, 4)
    node = covering.make_node((lattice.Cusp(0, 1), lattice.Cusp(1, 7)), 1, 0, delta)
    out = covering.successors(node, delta, covering.Truncation(1000))
    assert all(covering.is_successor(node, v, delta) is None for v in out.nodes)
    return f"{len(out.nodes)} successors pass the rho filter"


def _classify(rng: random.Random) -> str:
    xs = product.DirectionTuple.build(["golden", "golden"])
    assert product.classify(xs, Fraction(1, 4), 40.0) == "recurrent"
    return "golden pair recurrent"


CHECKS: list[tuple[str, Callable[[random.Random], str]]] = [
    ("geometry.sigma", _sigma_involution),
    ("geometry.busemann", _busemann_cocycle),
    ("lattice.realize", _realize),
    ("excursion.routes", _spectrum_routes),
    ("lattice.ford", _ford_separation),
    ("counting.annulus", _annulus),
    ("counting.witness", _witness),
    ("counting.weighted", _weighted),
    ("counting.net", _net),
    ("cantor.synthetic", _synthetic),
    ("cantor.ddelta", _ddelta),
    ("covering.successors", _successors),
    ("product.classify", _classify),
]


def run_checks(seed: int = 0) -> list[CheckResult]:
    out = []
    for name, fn in CHECKS:
        rng = random.Random(seed)
        try:
            out.append(CheckResult(name, True, fn(rng)))
        except Exception as e:  # every failure is reported, not raised
            out.append(CheckResult(name, False, f"{type(e).__name__}: {e}"))
    return out
