"""Command line front end.

Subcommands: ``outage-fap``, ``outage-mbs``, ``sweep``, ``areas``,
``laplace`` and ``validate``.  Outage results go out as CSV with a fixed
header (see ``CSV_HEADER``); floats are written with ``repr`` so they round
trip exactly and do not depend on the locale.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np

from . import bounds, geometry
from .geometry import GeometryError, QuantizationGrid
from .montecarlo import ConditioningError, sample_sir_at_fap, sample_sir_at_mbs
from .params import DEFAULTS, ParameterError, SystemParams

CSV_HEADER = (
    "param", "value", "estimator", "trials", "effective_trials", "p_hat", "stderr",
    "bound_lower", "bound_upper", "bound_lower_raw", "bound_upper_raw", "seed",
)
PARAM_KEYS = tuple(f.name for f in fields(SystemParams))
_INT_KEYS = {"n_s", "n_h"}
SWEEP_PARAMS = ("T", "kappa", "eta", "d_f", "mu_m", "n_h", "t")
ESTIMATORS = ("fap", "fap-avg", "fu", "mbs")


class ConfigError(ValueError):
    pass


def _number(key: str, text: str):
    if key in _INT_KEYS:
        v = float(text)
        if v != int(v):
            raise ValueError(f"{key} must be an integer")
        return int(v)
    return float(text)


def parse_config(text: str, source: str = "<config>") -> SystemParams:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in PARAM_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _number(key, val)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: cannot parse {val!r} as a number for {key}") from None
    return SystemParams(**values)


def load_config(path) -> SystemParams:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), str(path))


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple

    @classmethod
    def parse(cls, param: str, values: Optional[str], range_: Optional[str]) -> "SweepSpec":
        if param not in SWEEP_PARAMS:
            raise ConfigError(f"cannot sweep {param!r}; choose one of {', '.join(SWEEP_PARAMS)}")
        if (values is None) == (range_ is None):
            raise ConfigError("give exactly one of --values and --range")
        if values is not None:
            try:
                vals = [float(v) for v in values.split(",") if v.strip()]
            except ValueError:
                raise ConfigError(f"bad --values list {values!r}") from None
        else:
            parts = range_.split(",")
            if len(parts) != 4 or parts[3] not in ("linear", "log"):
                raise ConfigError("--range takes start,stop,steps,linear|log")
            try:
                a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            except ValueError:
                raise ConfigError(f"bad --range {range_!r}") from None
            if n < 1:
                raise ConfigError("--range needs at least one step")
            if parts[3] == "log":
                if a <= 0 or b <= 0:
                    raise ConfigError("log ranges need positive endpoints")
                vals = list(np.geomspace(a, b, n))
            else:
                vals = list(np.linspace(a, b, n))
        if not vals:
            raise ConfigError("empty sweep")
        if param in ("n_h", "t"):
            # log ranges land a few ulps off exact integers
            vals = [round(v) if abs(v - round(v)) <= 1e-9 * abs(v) else v for v in vals]
            if any(v != int(v) for v in vals):
                raise ConfigError(f"{param} values must be integers")
            vals = [int(v) for v in vals]
        return cls(param, tuple(float(v) if param not in ("n_h", "t") else v for v in vals))


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


class _Rows:
    def __init__(self, fh):
        self.writer = csv.writer(fh, lineterminator="\n")
        self.writer.writerow(CSV_HEADER)

    def add(self, param, value, estimator, sir, est, b: Optional[bounds.BoundPair], seed):
        nan = float("nan")
        self.writer.writerow([
            _fmt(v) for v in (
                param, value, estimator, sir.realizations, est.trials, est.p_hat, est.stderr,
                b.lower_clamped if b else nan, b.upper_clamped if b else nan,
                b.lower if b else nan, b.upper if b else nan, seed,
            )
        ])


def _bounds_for(estimator, params, d_f, t, quad_points):
    grid = QuantizationGrid.uniform(params.kappa, t)
    if estimator in ("fap", "fu"):
        return bounds.outage_bounds_at_fap(d_f, grid, params)
    if estimator == "fap-avg":
        return bounds.avg_outage_bounds_at_fap(grid, params, quad_points)
    return bounds.outage_bounds_at_mbs(params)


def _samples(estimator, params, d_f, args):
    common = dict(trials=args.trials, mode=args.collision, seed=args.seed, threads=args.threads)
    if estimator == "mbs":
        return sample_sir_at_mbs(params, include_fu_at_mbs=args.include_fu_at_mbs, **common)
    kind = "fu" if estimator == "fu" else "mu"
    return sample_sir_at_fap(
        params, None if estimator == "fap-avg" else d_f, target_kind=kind,
        include_cross_femto=args.include_cross_femto, **common,
    )


def _emit(rows, param, value, estimator, params, d_f, args, cache=None):
    key = (estimator, params.replace(T=0.0), d_f)
    if cache is not None and key in cache:
        sir = cache[key]
    else:
        sir = _samples(estimator, params, d_f, args)
        if cache is not None:
            cache[key] = sir
    est = sir.outage(params.T)
    b = _bounds_for(estimator, params, d_f, args.t, args.quad_points)
    rows.add(param, value, estimator, sir, est, b, args.seed)


# --- argument parsing ------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, mc: bool = True):
    p.add_argument("--config", help="key = value parameter file")
    for key in PARAM_KEYS:
        p.add_argument(f"--{key}", type=str, default=None, metavar="X", help=f"override {key}")
    p.add_argument("--t", type=int, default=32, help="quantization levels (default 32)")
    p.add_argument("--out", help="output path (default stdout)")
    if mc:
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=100_000)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--collision", choices=("expected", "sampled"), default="expected")
        p.add_argument("--include-cross-femto", action="store_true")
        p.add_argument("--include-fu-at-mbs", action="store_true")
        p.add_argument("--quad-points", type=int, default=64)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twotier", description="Two-tier femto/macro uplink outage tool")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("outage-fap", help="FAP-served MU outage: bounds and Monte Carlo")
    _add_common(p)
    p.add_argument("--d_f", type=float, default=700.0)
    p.add_argument("--random-df", action="store_true", help="average over the FAP distance")
    p.add_argument("--fu", action="store_true", help="target a femto user instead of an MU")

    p = sub.add_parser("outage-mbs", help="MBS-served MU outage: bounds and Monte Carlo")
    _add_common(p)

    p = sub.add_parser("sweep", help="one CSV row per swept value and estimator")
    _add_common(p)
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--values")
    p.add_argument("--range", dest="range_", metavar="START,STOP,STEPS,linear|log")
    p.add_argument("--d_f", type=float, default=700.0)
    p.add_argument("--estimator", action="append", choices=ESTIMATORS)

    p = sub.add_parser("areas", help="band areas: closed form against sampling")
    _add_common(p, mc=False)
    p.add_argument("--d_f", type=float, default=700.0)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("laplace", help="MBS-served MU count transform: bounds and Monte Carlo")
    _add_common(p)
    p.add_argument("--s", default="0.1,0.5,1,2")
    p.add_argument("--d_f", type=float, default=None)

    p = sub.add_parser("validate", help="run the acceptance checks")
    p.add_argument("--only", help="comma-separated check names, e.g. A4,A7")
    p.add_argument("--threads", type=int, default=min(8, os.cpu_count() or 1))
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--verbose", action="store_true")
    return parser


def _params(args) -> SystemParams:
    params = load_config(args.config) if args.config else DEFAULTS
    overrides = {}
    for key in PARAM_KEYS:
        val = getattr(args, key, None)
        if val is None:
            continue
        try:
            overrides[key] = _number(key, val)
        except ValueError:
            raise ConfigError(f"--{key}: cannot parse {val!r}") from None
    return params.replace(**overrides)


def _cmd_outage(args, params, out):
    rows = _Rows(out)
    if args.command == "outage-mbs":
        estimator, d_f = "mbs", None
    elif args.random_df:
        estimator, d_f = "fap-avg", None
    else:
        estimator, d_f = ("fu" if args.fu else "fap"), args.d_f
        params.check_distance(d_f)
    _emit(rows, "T", params.T, estimator, params, d_f, args)


def _cmd_sweep(args, params, out):
    spec = SweepSpec.parse(args.param, args.values, args.range_)
    estimators = args.estimator or ["fap"]
    rows = _Rows(out)
    cache: dict = {}
    for v in spec.values:
        p, d_f, t = params, args.d_f, args.t
        if spec.param == "d_f":
            d_f = float(v)
        elif spec.param == "t":
            t = int(v)
        else:
            p = params.replace(**{spec.param: v})
        p.check_distance(d_f)
        local = argparse.Namespace(**{**vars(args), "t": t})
        for est in estimators:
            _emit(rows, spec.param, v, est, p, d_f, local, cache)


def _cmd_areas(args, params, out):
    params.check_distance(args.d_f)
    if params.kappa == 0:
        raise ParameterError("kappa", "band areas need kappa > 0")
    grid = QuantizationGrid.uniform(params.kappa, args.t)
    pa = geometry.partition_areas(args.d_f, params.R, grid)
    mc, cover = geometry.monte_carlo_band_areas(args.d_f, params.R, grid, args.samples, args.seed)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("band", "closed_form", "monte_carlo", "abs_err_over_total"))
    for i, a, m in zip(pa.indices, pa.areas, mc):
        w.writerow((int(i), _fmt(a), _fmt(m), _fmt(abs(a - m) / pa.total)))
    w.writerow(("coverage", _fmt(geometry.coverage_area_in_disk(args.d_f, params.R, params.kappa)), _fmt(cover), ""))
    w.writerow(("max_rel_err", _fmt(float(np.max(np.abs(pa.areas - mc)) / pa.total)), "", ""))


def _cmd_laplace(args, params, out):
    from .montecarlo import estimate_laplace_nm_bm

    try:
        svals = [float(s) for s in args.s.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad --s list {args.s!r}") from None
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("s", "d_f", "mc_mean", "mc_stderr", "bound_lower", "bound_upper", "trials", "seed"))
    for s in svals:
        if args.d_f is None:
            b = bounds.laplace_n_mu_mbs_bounds(s, params)
        else:
            b = bounds.laplace_n_mu_mbs_cond_bounds(s, args.d_f, params)
        e = estimate_laplace_nm_bm(params, s, args.d_f, args.trials, rng=args.seed, threads=args.threads)
        w.writerow([_fmt(x) for x in (s, args.d_f if args.d_f is not None else "", e.mean, e.stderr, b.lower, b.upper, e.trials, args.seed)])


def _cmd_validate(args, out):
    from .acceptance import CHECKS, Settings, run_checks

    names = [n.strip() for n in args.only.split(",")] if args.only else list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown checks: {', '.join(unknown)}")
    base = Settings()
    settings = Settings(
        trials=args.trials, threads=args.threads, seed=base.seed if args.seed is None else args.seed
    )

    def echo(line):
        print(line, file=out, flush=True)

    results = run_checks(names, settings, echo)
    if args.verbose:
        for r in results:
            for line in r.lines:
                print(f"  {r.name} {line}", file=out)
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed" + (f"; failed: {', '.join(failed)}" if failed else ""), file=out)
    return 1 if failed else 0


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    """Entry point; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "validate":
            return _cmd_validate(args, stdout)
        params = _params(args)
        # buffer so a failing command leaves no partial CSV behind
        buf = io.StringIO()
        {
            "outage-fap": _cmd_outage,
            "outage-mbs": _cmd_outage,
            "sweep": _cmd_sweep,
            "areas": _cmd_areas,
            "laplace": _cmd_laplace,
        }[args.command](args, params, buf)
        if args.out:
            with open(args.out, "w", newline="", encoding="utf-8") as fh:
                fh.write(buf.getvalue())
        else:
            stdout.write(buf.getvalue())
    except ParameterError as exc:
        print(f"error: invalid parameter {exc.key}: {exc}", file=stderr)
        return 2
    except (ConfigError, GeometryError, ConditioningError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
