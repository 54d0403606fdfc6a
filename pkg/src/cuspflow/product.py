"""Diagonal geodesics on k-fold products of modular surfaces.

Component i contributes W_i(t), the upper envelope of its excursion profiles;
the joint height is W(t) = max_i W_i(t).  Two profiles cross at most once, so
the joint envelope is computed event by event from closed-form crossing times,
evaluated in log space so heights may have hundreds of digits.  Its local
minima sit at the switches where a falling profile hands over to a rising one.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .excursion import (
    DirectionLike,
    ExcursionRecord,
    Spectrum,
    as_direction,
    flog,
    spectrum,
)
from .lattice import Cusp

LOG_CAP = 700.0


def _exp(x: float) -> float:
    return math.exp(x) if x < LOG_CAP else math.inf


@dataclass
class DirectionTuple:
    spectra: list[Spectrum]

    @property
    def k(self) -> int:
        return len(self.spectra)

    @property
    def directions(self):
        return [s.direction for s in self.spectra]

    @classmethod
    def build(cls, xs: Sequence[DirectionLike], theta=1, h_max: Optional[int] = None) -> "DirectionTuple":
        if not xs:
            raise ValueError("need at least one component")
        return cls([spectrum(as_direction(x), theta, h_max) for x in xs])


# -- envelopes ----------------------------------------------------------------


@dataclass(frozen=True)
class Curve:
    comp: int
    rec: ExcursionRecord

    @property
    def hd2(self) -> Fraction:
        return self.rec.h * self.rec.dist * self.rec.dist

    def log_value(self, t: float) -> float:
        return self.rec.log_profile(t)


@dataclass(frozen=True)
class Piece:
    t0: float
    t1: float
    curve: Curve


def _log_hd2(c: Curve) -> float:
    return -math.inf if c.rec.dist == 0 else flog(c.rec.h) + 2.0 * c.rec.log_dist


def overtake_time(a: Curve, b: Curve) -> Optional[float]:
    """Time after which b stays above a, or None if b never dominates a eventually.

    Returns -inf when b dominates a for all t.
    """
    ea, eb = a.hd2, b.hd2
    if not eb < ea:
        return None
    ha, hb = a.rec.h, b.rec.h
    if hb <= ha:
        return -math.inf
    return -0.5 * flog(Fraction(ea - eb) / (hb - ha))


def _dedupe(curves: Sequence[Curve]) -> list[Curve]:
    """Identical profiles from different components collapse onto the lowest index."""
    seen: dict[tuple, Curve] = {}
    for c in curves:
        key = (c.rec.h, c.rec.dist)
        if key not in seen or c.comp < seen[key].comp:
            seen[key] = c
    return list(seen.values())


def upper_envelope(curves: Sequence[Curve], t0: float, t1: float) -> list[Piece]:
    """Pieces of max over curves on [t0, t1]; ties go to the lower component index.

    All profiles are translated sech bumps, so once b dominates a at some time
    it does so forever; each switch strictly lowers h d^2 and the walk ends.
    """
    curves = _dedupe(curves)
    if not curves:
        return []
    la = np.array([_log_hd2(c) for c in curves])
    lh = np.array([flog(c.rec.h) for c in curves])
    comp = np.array([c.comp for c in curves])
    v0 = np.array([c.log_value(t0) for c in curves])
    cur = int(np.lexsort((comp, -v0))[0])
    tau = t0
    pieces = []
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        while True:
            cand = la < la[cur]
            # log(e_a - e_b) and log(h_b - h_a), kept in log space for huge heights
            num = la[cur] + np.log(-np.expm1(la - la[cur]))
            den = lh + np.log(-np.expm1(lh[cur] - lh))
            tc = np.where(lh > lh[cur], -0.5 * (num - den), -np.inf)
            tc = np.maximum(tc, tau)
            tc = np.where(cand, tc, np.inf)
            order = np.lexsort((comp, la, tc))
            nxt = int(order[0])
            if not cand[nxt] or tc[nxt] >= t1:
                pieces.append(Piece(tau, t1, curves[cur]))
                return pieces
            if tc[nxt] > tau:
                pieces.append(Piece(tau, float(tc[nxt]), curves[cur]))
            cur, tau = nxt, float(tc[nxt])


def component_curves(xs: DirectionTuple) -> list[Curve]:
    return [Curve(i, r) for i, s in enumerate(xs.spectra) for r in s.records]


def joint_envelope(xs: DirectionTuple, t_max: float, t_min: float = 0.0) -> list[Piece]:
    return upper_envelope(component_curves(xs), t_min, t_max)


def joint_profile(xs: DirectionTuple, t: float) -> tuple[float, int]:
    """(W, argmax component) at time t; components with no excursions count as 0."""
    best, arg = -math.inf, 0
    for c in component_curves(xs):
        v = c.log_value(t)
        if v > best or (v == best and c.comp < arg):
            best, arg = v, c.comp
    return (_exp(best) if best > -math.inf else 0.0), arg


# -- local minima -------------------------------------------------------------


@dataclass(frozen=True)
class MinimumEvent:
    t: float
    log_value: float
    from_comp: int
    to_comp: int
    cusp_from: Cusp
    cusp_to: Cusp

    @property
    def value(self) -> float:
        return _exp(self.log_value)

    @property
    def is_switch(self) -> bool:
        return self.from_comp != self.to_comp


def envelope_minima(pieces: Sequence[Piece]) -> list[MinimumEvent]:
    out = []
    for p, q in zip(pieces, pieces[1:]):
        t = p.t1
        f, g = p.curve, q.curve
        if f.rec.t_peak < t < g.rec.t_peak:
            out.append(MinimumEvent(t, f.log_value(t), f.comp, g.comp, f.rec.cusp, g.rec.cusp))
    return out


def all_minima(xs: DirectionTuple, t_max: float) -> list[MinimumEvent]:
    return envelope_minima(joint_envelope(xs, t_max))


def minima_trace(xs: DirectionTuple, t_max: float) -> list[MinimumEvent]:
    """Local minima of the joint height where the maximizing component changes."""
    return [e for e in all_minima(xs, t_max) if e.is_switch]


@dataclass(frozen=True)
class SwitchLaw:
    event: MinimumEvent
    next_cusp: Cusp
    log_value_ratio: float  # log(value^2 h(a') / h(b))
    log_time_ratio: float  # log(e^{2t} / (h(b) h(a')))

    def within(self, c: float = 16.0) -> bool:
        lc = math.log(c)
        return abs(self.log_value_ratio) <= lc and abs(self.log_time_ratio) <= lc


def switch_laws(xs: DirectionTuple, trace: Sequence[MinimumEvent]) -> list[SwitchLaw]:
    """Compare each switch with the next excursion b of the component being left."""
    out = []
    for e in trace:
        cusps = xs.spectra[e.from_comp].cusps
        k = cusps.index(e.cusp_from)
        if k + 1 >= len(cusps):
            continue
        b = cusps[k + 1]
        hb, ha = flog(b.height), flog(e.cusp_to.height)
        out.append(SwitchLaw(e, b, 2 * e.log_value + ha - hb, 2 * e.t - hb - ha))
    return out


# -- classification -----------------------------------------------------------


def classify(xs: DirectionTuple, delta, t_window: float) -> str:
    """Finite-horizon surrogate for divergence of the joint height.

    escaping: every local minimum in the second half of the window exceeds
    1/delta.  recurrent: minima below 1/delta occur in both halves.
    """
    delta = float(delta)
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    bound = -math.log(delta)
    half = t_window / 2
    mins = all_minima(xs, t_window)
    low_first = any(e.log_value < bound for e in mins if e.t <= half)
    low_second = any(e.log_value < bound for e in mins if e.t > half)
    if not low_second:
        # the envelope itself must stay high in the second half, not just its minima
        pieces = joint_envelope(xs, t_window, half)
        if all(p.curve.log_value(p.t0) > bound and p.curve.log_value(p.t1) > bound for p in pieces):
            return "escaping"
        return "undecided"
    if low_first:
        return "recurrent"
    return "undecided"


def _classify_job(args):
    return classify(*args)


def classify_batch(tuples: Sequence[DirectionTuple], delta, t_window: float, workers: int = 1) -> list[str]:
    if workers <= 1:
        return [classify(xs, delta, t_window) for xs in tuples]
    with ProcessPoolExecutor(workers) as ex:
        return list(ex.map(_classify_job, [(xs, delta, t_window) for xs in tuples]))


# -- box counting -------------------------------------------------------------


@dataclass
class BoxCount:
    slope: float
    intercept: float
    log_inv_scales: list[float]
    log_counts: list[float]
    residuals: list[float]

    @property
    def counts(self) -> list[float]:
        return [math.exp(c) for c in self.log_counts]


def fit_box_counts(log_inv_scales: Sequence[float], log_counts: Sequence[float]) -> BoxCount:
    """Least-squares slope of log N(eps) against log(1/eps)."""
    if len(log_inv_scales) < 4:
        raise ValueError("need at least 4 scales")
    x = np.asarray(log_inv_scales, dtype=float)
    y = np.asarray(log_counts, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return BoxCount(float(slope), float(intercept), list(map(float, x)), list(map(float, y)), list(map(float, resid)))


def box_count_dimension(points, scales: Sequence[float], min_points: int = 1000) -> BoxCount:
    """Box-counting slope of a finite point set in R^d over the given box sizes."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if len(pts) < min_points:
        raise ValueError(f"need at least {min_points} points, got {len(pts)}")
    if len(scales) < 4:
        raise ValueError("need at least 4 scales")
    scales = [float(e) for e in scales]
    x = [-math.log(e) for e in scales]
    if np.all(pts == pts[0]):
        warnings.warn("degenerate point set: all points coincide")
        return BoxCount(0.0, 0.0, x, [0.0] * len(x), [0.0] * len(x))
    # nudge the grid below the data so points on exact cell edges do not
    # straddle them through rounding
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    origin = lo - 1e-9 * np.maximum(hi - lo, 1e-300)
    counts = []
    for eps in scales:
        cells = np.floor((pts - origin) / eps).astype(np.int64)
        counts.append(math.log(len(np.unique(cells, axis=0))))
    return fit_box_counts(x, counts)


def dimension_targets(k: int, n: int) -> tuple[float, float]:
    """(divergent diagonal directions, divergent diagonal frames) Hausdorff dimensions."""
    b = k * (n - 1) - (n - 1) / 2
    return b, b + k * n
