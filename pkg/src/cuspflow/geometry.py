"""Coordinate-level hyperbolic geometry in the upper half-space model.

A point of H^n is stored as ``(height, base)`` with ``height = e^t > 0`` and
``base`` a vector in R^{n-1}.  Matrices follow one fixed convention:

    a(t) = diag(e^{t/2}, e^{-t/2}),  u(x) = (1 x; 0 1),  sigma = (0 -1; 1 0)

so that ``a(t)`` moves the basepoint ``o = (1, 0)`` to height ``e^t``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence, Union

Number = Union[int, Fraction, float, complex]

GROMOV_T = 40.0


@dataclass(frozen=True)
class FramePoint:
    height: float
    base: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(self.base))
        if not self.height > 0:
            raise ValueError(f"height must be positive, got {self.height}")

    @property
    def dim(self) -> int:
        """Dimension n of the ambient H^n."""
        return len(self.base) + 1


ORIGIN = FramePoint(1.0, (0.0,))


@dataclass(frozen=True)
class Finite:
    x: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(self.x))


@dataclass(frozen=True)
class Infinity:
    pass


BoundaryPoint = Union[Finite, Infinity]
INFINITY = Infinity()


def _norm2(v: Sequence[float]) -> float:
    return sum(c * c for c in v)


def _sub(u: Sequence[float], v: Sequence[float]) -> tuple[float, ...]:
    if len(u) != len(v):
        raise ValueError("dimension mismatch")
    return tuple(a - b for a, b in zip(u, v))


def weyl_apply(p: FramePoint) -> FramePoint:
    s = p.height ** 2 + _norm2(p.base)
    return FramePoint(p.height / s, tuple(-c / s for c in p.base))


def left_translate(v: Sequence[float], p: FramePoint) -> FramePoint:
    if len(v) != len(p.base):
        raise ValueError("dimension mismatch")
    return FramePoint(p.height, tuple(a + b for a, b in zip(p.base, v)))


def left_dilate(t: float, p: FramePoint) -> FramePoint:
    s = math.exp(t)
    return FramePoint(s * p.height, tuple(s * c for c in p.base))


def hyperbolic_distance(p: FramePoint, q: FramePoint) -> float:
    num = _norm2(_sub(p.base, q.base)) + (p.height - q.height) ** 2
    z = num / (2.0 * p.height * q.height)
    # acosh(1 + z) written to keep precision for small z
    return math.log1p(z + math.sqrt(z * (z + 2.0)))


# -- Moebius maps -------------------------------------------------------------


def _div(a: Number, b: Number) -> Number:
    if isinstance(a, Rational) and isinstance(b, Rational):
        return Fraction(a) / Fraction(b)
    return a / b


@dataclass(frozen=True)
class Moebius:
    """A 2x2 matrix acting by fractional-linear maps, identified with its negation.

    Real entries act on H^2; complex entries act on H^3 through the Poincare
    extension.
    """

    a: Number
    b: Number
    c: Number
    d: Number

    @property
    def det(self) -> Number:
        return self.a * self.d - self.b * self.c

    @property
    def is_real(self) -> bool:
        return not any(isinstance(e, complex) for e in (self.a, self.b, self.c, self.d))

    def __matmul__(self, o: "Moebius") -> "Moebius":
        return Moebius(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def inverse(self) -> "Moebius":
        det = self.det
        return Moebius(_div(self.d, det), _div(-self.b, det), _div(-self.c, det), _div(self.a, det))

    def normalized(self) -> "Moebius":
        det = self.det
        if abs(det - 1) <= 1e-12:
            return self
        s = cmath.sqrt(det) if isinstance(det, complex) or det < 0 else math.sqrt(det)
        return Moebius(self.a / s, self.b / s, self.c / s, self.d / s)

    def entries(self) -> tuple[Number, Number, Number, Number]:
        return (self.a, self.b, self.c, self.d)

    def equals_up_to_sign(self, o: "Moebius", tol: float = 1e-10) -> bool:
        e1, e2 = self.entries(), o.entries()
        return all(abs(x - y) <= tol for x, y in zip(e1, e2)) or all(
            abs(x + y) <= tol for x, y in zip(e1, e2)
        )


IDENTITY = Moebius(1, 0, 0, 1)
SIGMA = Moebius(0, -1, 1, 0)


def translation(v: Number) -> Moebius:
    return Moebius(1, v, 0, 1)


def dilation(t: float) -> Moebius:
    return Moebius(math.exp(t / 2), 0, 0, math.exp(-t / 2))


def moebius_apply(g: Moebius, p: FramePoint) -> FramePoint:
    """Act on H^2 (one base coordinate) or H^3 (two base coordinates)."""
    if len(p.base) == 1:
        if not g.is_real:
            raise ValueError("complex matrix acting on H^2")
        a, b, c, d = (float(e) for e in g.entries())
        x, h = p.base[0], p.height
        den = (c * x + d) ** 2 + (c * h) ** 2
        num = (a * x + b) * (c * x + d) + a * c * h * h
        out_h = h / den
        det = a * d - b * c
        out = FramePoint(out_h * det, (num / den,))
    elif len(p.base) == 2:
        a, b, c, d = (complex(e) for e in g.entries())
        z, h = complex(p.base[0], p.base[1]), p.height
        cz_d = c * z + d
        den = abs(cz_d) ** 2 + abs(c) ** 2 * h * h
        w = ((a * z + b) * cz_d.conjugate() + a * c.conjugate() * h * h) / den
        out = FramePoint(h * abs(a * d - b * c) / den, (w.real, w.imag))
    else:
        raise ValueError("matrix action implemented for n = 2 and n = 3 only")
    if not out.height > 0:
        raise ArithmeticError("non-positive image height")
    return out


# -- Bruhat decomposition -----------------------------------------------------


@dataclass(frozen=True)
class GenericCell:
    """u(x) sigma u(y) a(r) m, stored with ``root = e^{r/2}`` so integer inputs stay exact."""

    x: Number
    y: Number
    root: Number
    m: tuple[tuple[int, ...], ...] = ((1,),)

    @property
    def scale(self) -> Number:
        """e^r."""
        return self.root * self.root

    @property
    def r(self) -> float:
        return 2.0 * math.log(self.root)


@dataclass(frozen=True)
class ParabolicCell:
    """u(y) a(r) m."""

    y: Number
    root: Number
    m: tuple[tuple[int, ...], ...] = ((1,),)

    @property
    def scale(self) -> Number:
        return self.root * self.root

    @property
    def r(self) -> float:
        return 2.0 * math.log(self.root)


BruhatForm = Union[GenericCell, ParabolicCell]


def bruhat_decompose(g: Moebius) -> BruhatForm:
    if not g.is_real:
        raise NotImplementedError("Bruhat decomposition implemented for real matrices")
    a, b, c, d = g.entries()
    if c != 0:
        if c < 0:
            a, b, c, d = -a, -b, -c, -d
        return GenericCell(x=_div(a, c), y=d * c, root=c)
    if a < 0:
        a, b, d = -a, -b, -d
    return ParabolicCell(y=b * a, root=a)


def bruhat_compose(form: BruhatForm) -> Moebius:
    s = form.root
    if isinstance(form, GenericCell):
        x, y = form.x, form.y
        return Moebius(x * s, _div(x * y - 1, s), s, _div(y, s))
    return Moebius(s, _div(form.y, s), 0, _div(1, s))


# -- Busemann functions and the Gromov metric ---------------------------------


def _horo_term(xi: Finite, p: FramePoint) -> float:
    return math.log((_norm2(_sub(p.base, xi.x)) + p.height ** 2) / p.height)


def busemann(xi: BoundaryPoint, p: FramePoint, q: FramePoint) -> float:
    if isinstance(xi, Infinity):
        return math.log(q.height / p.height)
    return _horo_term(xi, p) - _horo_term(xi, q)


def ray_point(xi: BoundaryPoint, t: float, dim: int = 2) -> FramePoint:
    """Point at parameter t on the vertical geodesic ray ending at xi."""
    if isinstance(xi, Infinity):
        return FramePoint(math.exp(t), (0.0,) * (dim - 1))
    return FramePoint(math.exp(-t), xi.x)


def gromov_dist(
    xi1: BoundaryPoint, xi2: BoundaryPoint, o: FramePoint = ORIGIN, t: float = GROMOV_T
) -> float:
    """Visual distance exp(-(xi1|xi2)_o), evaluated at time t on the ray to xi1."""
    if isinstance(xi1, Infinity) and isinstance(xi2, Infinity):
        raise ValueError("both boundary points are infinite")
    if xi1 == xi2:
        return 0.0
    z = ray_point(xi1, t, o.dim)
    s = busemann(xi1, o, z) + busemann(xi2, o, z)
    return math.exp(-0.5 * s)


def busemann_height(gamma: Moebius, base_cusp: BoundaryPoint = INFINITY) -> Number:
    """Busemann height of the cusp gamma.inf; equals a^2 + c^2 for gamma = (a b; c d)."""
    if not isinstance(base_cusp, Infinity):
        raise NotImplementedError("only the cusp at infinity is a base cusp")
    if not gamma.is_real:
        raise NotImplementedError("real matrices only")
    return gamma.a * gamma.a + gamma.c * gamma.c
