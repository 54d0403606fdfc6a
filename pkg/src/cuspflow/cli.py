"""Command-line front end.

    cuspflow <subcommand> [key=value ...] [--config FILE] [--format csv|json]

Settings come from defaults, then a flat key=value config file, then the
command line.  Exit status: 0 success, 1 failed verification or arithmetic
failure, 2 bad configuration, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional, Sequence

from . import cantor, counting, covering, excursion, lattice, product
from .lattice import BudgetError, Cusp, Interval

if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    model: str = "modular"
    region: Interval = lattice.DEFAULT_REGION
    theta: Fraction = Fraction(1)
    delta: Optional[Fraction] = None
    h_max: Optional[int] = None
    depth: Optional[int] = None
    truncation: Optional[int] = None
    workers: int = 1
    seed: int = 0
    format: str = "csv"
    extra: dict[str, str] = field(default_factory=dict)

    def get(self, key: str, conv: Callable[[str], Any] = str, default: Any = None, required: bool = False):
        if key not in self.extra:
            if required:
                raise ConfigError(f"missing required setting {key!r}")
            return default
        try:
            return conv(self.extra[key])
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"bad value for {key}: {self.extra[key]!r} ({e})") from None


def _int(text: str) -> int:
    """Integers, also written as 1e6 or 10**6."""
    text = text.strip()
    if "**" in text:
        b, e = text.split("**")
        return int(b) ** int(e)
    if "e" in text.lower():
        v = float(text)
        if v != int(v):
            raise ValueError("not an integer")
        return int(v)
    return int(text)


def _frac(text: str) -> Fraction:
    return Fraction(text.strip())


def _region(text: str) -> Interval:
    lo, _, hi = text.partition(":")
    if not hi:
        raise ValueError("region is lo:hi")
    closed = hi.endswith("]")
    return Interval(Fraction(lo.strip()), Fraction(hi.strip().rstrip("]")), closed)


def _cusps(text: str) -> list[Cusp]:
    return [Cusp.parse(t) for t in text.split(",") if t.strip()]


def _floats(text: str) -> list[float]:
    """Comma list, or lo:hi:count for an even grid."""
    if ":" in text:
        lo, hi, n = text.split(":")
        n = int(n)
        return [float(lo) + (float(hi) - float(lo)) * i / (n - 1) for i in range(n)]
    return [float(t) for t in text.split(",") if t.strip()]


_TYPED = {
    "model": str, "region": _region, "theta": _frac, "delta": _frac, "h_max": _int, "depth": _int,
    "truncation": _int, "workers": _int, "seed": _int, "format": str,
}


def parse_pairs(tokens: Sequence[str]) -> dict[str, str]:
    out = {}
    for tok in tokens:
        key, sep, value = tok.lstrip("-").partition("=")
        if not sep or not key:
            raise ConfigError(f"expected key=value, got {tok!r}")
        out[key.strip()] = value.strip()
    return out


def read_config_file(path: str) -> dict[str, str]:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e}") from None
    lines = [ln.split("#", 1)[0].strip() for ln in lines]
    return parse_pairs([ln for ln in lines if ln])


def build_config(pairs: dict[str, str]) -> ExperimentConfig:
    cfg = ExperimentConfig()
    for key, value in pairs.items():
        if key in _TYPED:
            try:
                setattr(cfg, key, _TYPED[key](value))
            except (ValueError, ZeroDivisionError) as e:
                raise ConfigError(f"bad value for {key}: {value!r} ({e})") from None
        else:
            cfg.extra[key] = value
    if cfg.format not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    for key in ("h_max", "depth", "truncation", "workers"):
        v = getattr(cfg, key)
        if v is not None and v <= 0:
            raise ConfigError(f"{key} must be positive")
    if cfg.delta is not None and cfg.delta <= 0:
        raise ConfigError("delta must be positive")
    try:
        lattice.get_model(cfg.model)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return cfg


# -- output -------------------------------------------------------------------


def fmt(v: Any) -> Any:
    """12 significant digits for floats, p/q for rationals."""
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, float):
        return format(v, ".12g")
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, (Cusp, Interval)):
        return str(v)
    return v


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]]
    meta: dict[str, Any] = field(default_factory=dict)

    def render(self, format: str) -> str:
        if format == "json":
            rows = [{c: fmt(v) for c, v in zip(self.columns, r)} for r in self.rows]
            meta = {k: fmt(v) for k, v in self.meta.items()}
            return json.dumps({"meta": meta, "rows": rows}, indent=2) + "\n"
        buf = io.StringIO()
        for k, v in self.meta.items():
            buf.write(f"# {k}={fmt(v)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([fmt(v) for v in r])
        return buf.getvalue()


# -- subcommands ----------------------------------------------------------------


def cmd_spectrum(cfg: ExperimentConfig) -> Table:
    x = excursion.as_direction(cfg.get("x", required=True))
    s = excursion.spectrum(x, cfg.theta, cfg.h_max, cfg.depth, cfg.get("method", default="cf"))
    rows = [[n, r.cusp, r.cusp.height, r.dist, r.t_enter, r.t_peak, r.t_exit, r.peak] for n, r in enumerate(s.records)]
    return Table(["index", "cusp", "height", "dist", "t_enter", "t_peak", "t_exit", "peak"], rows,
                 {"direction": str(x), "theta": cfg.theta, "truncated": s.truncated})


def cmd_count(cfg: ExperimentConfig) -> Table:
    a = cfg.get("a", Cusp.parse, Cusp(0, 1))
    A1, A2, A3 = (cfg.get(k, _frac, Fraction(d)) for k, d in (("A1", 1), ("A2", 4), ("A3", 1)))
    budget = cfg.get("budget", _int, counting.DEFAULT_BUDGET)
    meta: dict[str, Any] = {"a": a, "A1": A1, "A2": A2, "A3": A3}
    if "t" in cfg.extra:
        t = cfg.get("t", float)
        n = counting.count_annulus(a, A1, A2, A3, t, budget, cfg.workers)
        return Table(["t", "count", "log_count"], [[t, n, math.log(n) if n else -math.inf]], meta)
    grid = cfg.get("t_grid", _floats, _floats("4:14:11"))
    fit = counting.growth_exponent(a, A1, A2, A3, grid, budget=budget, workers=cfg.workers)
    meta.update(slope=fit.slope, intercept=fit.intercept, upsilon=fit.upsilon, dropped=len(fit.dropped))
    rows = [[t, n, math.log(n)] for t, n in zip(fit.ts, fit.counts)]
    return Table(["t", "count", "log_count"], rows, meta)


def cmd_net(cfg: ExperimentConfig) -> Table:
    region = cfg.region
    N = cfg.get("N", _int, required=True)
    net = counting.build_net(region, N, cfg.get("c", _frac, 1), cfg.get("c_pack", _frac, Fraction(1, 4)))
    rows = [[m, m.height, m.value] for m in net.members]
    return Table(["cusp", "height", "value"], rows, {"N": N, "region": region, "c": net.c, "c_pack": net.c_pack,
                                                     "size": len(net.members)})


def cmd_witness(cfg: ExperimentConfig) -> Table:
    x = excursion.as_direction(cfg.get("x", required=True))
    X = cfg.get("X", _int, required=True)
    a = counting.dirichlet_witness(x, X)
    d = abs(x.mid - a.value)
    return Table(["cusp", "height", "distance", "bound"], [[a, a.height, float(d), 1 / math.sqrt(X)]],
                 {"direction": str(x), "X": X})


def cmd_cantor(cfg: ExperimentConfig) -> Table:
    kind = cfg.get("kind", default="ddelta")
    delta = cfg.delta if cfg.delta is not None else Fraction(1)
    depth = cfg.depth or 4
    eps = cfg.get("eps", _frac, cantor.DEFAULT_EPS)
    root = cfg.get("root", Cusp.parse, Cusp(1, 5))
    if kind == "ddelta":
        tree = cantor.build_ddelta(root, delta, depth, eps, cfg.get("child_cap", _int, 64),
                                   cfg.get("level_cap", _int, 256))
    elif kind == "slice":
        p0 = cfg.get("p0", _int, 1)
        base = cantor.build_ddelta(root, delta, depth + p0, eps, child_cap=2, level_cap=2)
        heights = [nd.cusp.height for nd in base.deepest_path()]
        tree = cantor.build_slice(heights, delta, depth, eps, level_cap=cfg.get("level_cap", _int, 16), p0=p0)
    else:
        raise ConfigError(f"unknown tree kind {kind!r}")
    rep = cantor.evaluate_bound(tree)
    rows = [[r.j, r.log_inv_d, r.log_inv_delta, r.ratio, r.s] for r in rep.rows]
    return Table(["j", "log_inv_d", "log_inv_delta", "ratio", "s"], rows,
                 {"kind": kind, "root": root, "delta": delta, "depth": depth, "thinned": tree.thinned})


def cmd_cover(cfg: ExperimentConfig) -> Table:
    mode = cfg.get("mode", default="crossing")
    delta = cfg.delta if cfg.delta is not None else Fraction(1, 4)
    c = cfg.get("c", _frac, covering.DEFAULT_C)
    C = cfg.get("C", _int, covering.DEFAULT_QUOTIENT)
    if mode == "crossing":
        seed = cfg.get("seed_cusps", _cusps, [Cusp(1, 11), Cusp(0, 1)])
        node = covering.make_node(seed, cfg.get("i", _int, 0), cfg.get("j", _int, 1), delta, c=c)
        trunc = covering.Truncation(cfg.truncation or 10**5, cfg.get("max_nodes", _int, 10**6))
        cr = covering.crossing_exponent(node, delta, trunc, C=C)
        return Table(["s_star", "sum_lo", "sum_hi", "terms", "truncated"],
                     [[cr.s_star, cr.sum_lo, cr.sum_hi, cr.terms, cr.truncated]],
                     {"node": str(node), "delta": delta, "h_max": trunc.h_max, "bracket_lo": cr.lo, "bracket_hi": cr.hi})
    if mode == "chain":
        sample = cantor.sing2_pipeline(depth=cfg.depth or 8)
        xs = product.DirectionTuple.build([sample.x1, sample.x2])
        horizon = cfg.get("horizon", float, None) or max(r.t_enter for s in xs.spectra for r in s.records)
        chain = covering.chain_extract(xs, delta, horizon, c, C)
        rows = [[n, u.i, u.j, ";".join(map(str, u.cusps)), u.log_diam] for n, u in enumerate(chain.nodes)]
        return Table(["l", "i", "j", "cusps", "log_diam"], rows,
                     {"delta": delta, "ok": chain.ok, "violations": "; ".join(chain.violations),
                      "max_ratio": max(chain.ratios)})
    raise ConfigError(f"unknown cover mode {mode!r}")


def cmd_classify(cfg: ExperimentConfig) -> Table:
    names = cfg.get("xs", required=True).split(",")
    delta = cfg.delta if cfg.delta is not None else Fraction(1, 4)
    t_window = cfg.get("t_window", float, 50.0)
    xs = product.DirectionTuple.build(names, cfg.theta, cfg.h_max)
    status = product.classify(xs, delta, t_window)
    mins = product.minima_trace(xs, t_window)
    rows = [[e.t, e.value, e.from_comp, e.to_comp, e.cusp_from, e.cusp_to] for e in mins]
    return Table(["t", "value", "from", "to", "cusp_from", "cusp_to"], rows,
                 {"status": status, "delta": delta, "t_window": t_window})


def cmd_dimbox(cfg: ExperimentConfig) -> Table:
    kind = cfg.get("set", default="segment")
    if kind == "segment":
        n = cfg.get("points", _int, 10**4)
        pts = [(i + 0.5) / n for i in range(n)]
        fit = product.box_count_dimension(pts, [2.0 ** -k for k in range(3, 11)])
    elif kind == "cantor":
        depth = cfg.depth or 10
        pts = [sum(2 * ((m >> (depth - 1 - i)) & 1) / 3 ** (i + 1) for i in range(depth)) for m in range(2 ** depth)]
        fit = product.box_count_dimension(pts, [3.0 ** -k for k in range(2, depth - 1)])
    elif kind == "sing2":
        sample = cantor.sing2_pipeline(delta=cfg.delta or 1, depth=cfg.depth or 10)
        fit = product.fit_box_counts(*cantor.sing2_level_counts(sample))
    else:
        raise ConfigError(f"unknown set {kind!r}")
    rows = [[x, y] for x, y in zip(fit.log_inv_scales, fit.log_counts)]
    return Table(["log_inv_scale", "log_count"], rows, {"set": kind, "slope": fit.slope})


def cmd_verify(cfg: ExperimentConfig) -> Table:
    from .verify import run_checks

    res = run_checks(cfg.seed)
    return Table(["check", "ok", "detail"], [[r.name, r.ok, r.detail] for r in res],
                 {"failed": sum(not r.ok for r in res)})


def cmd_targets(cfg: ExperimentConfig) -> Table:
    k, n = cfg.get("k", _int, 2), cfg.get("n", _int, 2)
    if k < 1 or n < 2:
        raise ConfigError("need k >= 1 and n >= 2")
    b, d = product.dimension_targets(k, n)
    return Table(["set", "dimension"], [["B", b], ["D", d]], {"k": k, "n": n})


COMMANDS: dict[str, Callable[[ExperimentConfig], Table]] = {
    "spectrum": cmd_spectrum, "count": cmd_count, "net": cmd_net, "witness": cmd_witness,
    "cantor": cmd_cantor, "cover": cmd_cover, "classify": cmd_classify, "dimbox": cmd_dimbox,
    "verify": cmd_verify, "targets": cmd_targets,
}


def run(subcommand: str, pairs: dict[str, str], out=None) -> int:
    out = out or sys.stdout
    err = sys.stderr
    try:
        if subcommand not in COMMANDS:
            raise ConfigError(f"unknown subcommand {subcommand!r}")
        cfg = build_config(pairs)
        table = COMMANDS[subcommand](cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=err)
        return 2
    except BudgetError as e:
        print(f"budget exceeded: {e}", file=err)
        return 3
    except ValueError as e:
        print(f"invalid input: {e}", file=err)
        return 2
    except ArithmeticError as e:
        print(f"arithmetic failure: {e}", file=err)
        return 1
    out.write(table.render(cfg.format))
    if subcommand == "verify" and table.meta["failed"]:
        return 1
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="cuspflow", description=__doc__.split("\n\n")[0])
    ap.add_argument("subcommand", choices=sorted(COMMANDS))
    ap.add_argument("settings", nargs="*", help="key=value settings")
    ap.add_argument("--config", help="flat key=value config file")
    ap.add_argument("--format", choices=("csv", "json"))
    try:
        args = ap.parse_intermixed_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        pairs = read_config_file(args.config) if args.config else {}
        pairs.update(parse_pairs(args.settings))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    if args.format:
        pairs["format"] = args.format
    return run(args.subcommand, pairs)


if __name__ == "__main__":
    sys.exit(main())
