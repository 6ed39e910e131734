"""Command-line front end.

Exit codes: 0 success, 1 numerical or statistical check failed, 2 usage or
domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .bell_poly import bell_number, complete_bell, partial_bell
from .borel import BorelParams, borel_cumulants, borel_sample_many
from .errors import SimulationError
from .exp_poly import KernelParams
from .hawkes_cumulants import (
    closed_form_reference,
    cumulants,
    intensity_count_moment,
    mean_intensity,
)
from .simulator import N_BATCHES, METHODS, SimConfig, block_rng, k_statistics, run

CLOSED_FORM_TOL = 1e-8
Z_LIMIT = 5.0
NEAR_CRITICAL = 0.99


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return repr(float(x))


def _write_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, args, manifest: dict) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
        return
    path = Path(args.out)
    path.write_text(text, newline="")
    manifest = dict(manifest, output=str(path))
    Path(str(path) + ".manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _manifest(args, started: float, **extra) -> dict:
    resolved = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    return {
        "subcommand": args.command,
        "parameters": resolved,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "started_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_clock_s": round(time.perf_counter() - started, 3),
        **extra,
    }


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma list of numbers: {text!r}") from exc


def _fraction_list(text: str) -> list[Fraction]:
    try:
        return [Fraction(x.strip()) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma list of numbers: {text!r}") from exc


def _kernel(args, t: float) -> KernelParams:
    try:
        params = KernelParams(args.a, args.b, t, args.nu)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if params.a <= 0 or params.nu <= 0:
        raise UsageError("need a > 0 and nu > 0")
    if params.branching_ratio > NEAR_CRITICAL:
        print(f"warning: near-critical branching ratio a/b={params.branching_ratio:.4g}; "
              "cumulants grow like (b-a)^-(2n-1)", file=sys.stderr)
    return params


# ---------------------------------------------------------------- bell


def cmd_bell(args) -> int:
    n, k = args.n, args.k
    if not 1 <= n <= 12 or (k is not None and not 1 <= k <= n):
        raise UsageError("need 1 <= k <= n <= 12")
    if args.args is None:
        value = partial_bell(n, k, [1] * (n - k + 1)) if k else bell_number(n)
    else:
        vals = args.args
        want = n - k + 1 if k else n
        if len(vals) != want:
            raise UsageError(f"--args needs {want} values, got {len(vals)}")
        value = partial_bell(n, k, vals) if k else complete_bell(n, vals)
    value = Fraction(value)
    print(value.numerator if value.denominator == 1 else repr(float(value)))
    return 0


# ---------------------------------------------------------------- borel


def cmd_borel(args) -> int:
    try:
        params = BorelParams(args.mu)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not 1 <= args.order <= 12:
        raise UsageError("--order must be in [1, 12]")
    kappa = borel_cumulants(params, args.order)
    if not args.simulate:
        print(_write_csv(["order", "kappa"], [[i + 1, v] for i, v in enumerate(kappa)]), end="")
        return 0
    if args.simulate < 4 * N_BATCHES:
        raise UsageError(f"--simulate needs at least {4 * N_BATCHES} draws")
    draws = borel_sample_many(params, args.simulate, block_rng(args.seed, 0)).astype(float)
    orders = min(args.order, 4)
    kst = k_statistics(draws)
    batches = np.array([k_statistics(b) for b in np.array_split(draws, N_BATCHES)])
    se = batches.std(axis=0, ddof=1) / math.sqrt(N_BATCHES)
    rows = []
    for i, v in enumerate(kappa):
        if i < orders:
            rows.append([i + 1, v, kst[i], se[i], (kst[i] - v) / se[i]])
        else:
            rows.append([i + 1, v, None, None, None])
    print(_write_csv(["order", "kappa", "kstat", "se", "z"], rows), end="")
    worst = max(abs(r[4]) for r in rows[:orders])
    if worst > Z_LIMIT:
        print(f"max |z| = {worst:.2f} exceeds {Z_LIMIT:g}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------- closed-form


def cmd_closed_form(args) -> int:
    started = time.perf_counter()
    if not 1 <= args.order <= 6:
        raise UsageError("--order must be in [1, 6]")
    if args.steps < 1 or args.t_max < 0:
        raise UsageError("need --steps >= 1 and --t-max >= 0")
    base = _kernel(args, args.t_max)
    n_ref = min(args.order, 4)
    worst = 0.0
    rows, records = [], []
    for t in np.linspace(0.0, args.t_max, args.steps + 1):
        p = base.with_horizon(float(t))
        cv = cumulants(args.order, p)
        refs = [closed_form_reference(n, p) for n in range(1, n_ref + 1)]
        devs = [abs(cv[n] - r) / abs(r) if r != 0 else abs(cv[n]) for n, r in enumerate(refs, 1)]
        dev = max(devs)
        worst = max(worst, dev)
        rows.append([float(t), *cv.values, cv.skewness, cv.excess_kurtosis, *refs, dev])
        rec = cv.to_record(p)
        rec["ref_kappa"] = refs
        rec["max_rel_dev"] = dev
        records.append(rec)
    header = (["t"] + [f"kappa{n}" for n in range(1, args.order + 1)] + ["skewness", "excess_kurtosis"]
              + [f"ref_kappa{n}" for n in range(1, n_ref + 1)] + ["max_rel_dev"])
    text = _write_csv(header, rows) if args.format == "csv" else json.dumps(records, indent=2) + "\n"
    _emit(text, args, _manifest(args, started, max_rel_dev=worst))
    if worst > CLOSED_FORM_TOL:
        print(f"closed-form deviation {worst:.3g} exceeds {CLOSED_FORM_TOL:g}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------- simulate / compare


def _sim_config(args) -> SimConfig:
    grid = sorted(args.t_grid)
    if not grid or grid[0] < 0:
        raise UsageError("--t-grid must be a nonempty list of nonnegative times")
    t_max = args.t_max if args.t_max is not None else grid[-1]
    if grid[-1] > t_max:
        raise UsageError(f"--t-grid extends beyond --t-max={t_max}")
    if args.samples < 4 * N_BATCHES:
        raise UsageError(f"--samples must be at least {4 * N_BATCHES} (k-statistics per batch need n >= 4)")
    if args.method not in METHODS:
        raise UsageError(f"--method must be one of {METHODS}")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    params = _kernel(args, t_max)
    return SimConfig(params, tuple(grid), args.samples, args.seed, args.method)


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    config = _sim_config(args)
    try:
        stats = run(config)
    except SimulationError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return 1
    header = ["t", "k1", "k2", "k3", "k4", "se_k1", "se_k2", "se_k3", "se_k4",
              "mean_intensity", "se_mean_intensity", "joint_mean", "se_joint_mean"]
    rows = []
    for g, t in enumerate(stats.t_grid):
        se = stats.std_errors[g]
        rows.append([t, *stats.count_kstats[g], *se[:4], stats.intensity_mean[g], se[4],
                     stats.joint_mean[g], se[5]])
    if args.format == "csv":
        text = _write_csv(header, rows)
    else:
        text = json.dumps([dict(zip(header, map(float, r))) for r in rows], indent=2) + "\n"
    _emit(text, args, _manifest(args, started))
    return 0


def comparison_rows(config: SimConfig) -> list[dict]:
    """Analytic value, Monte Carlo estimate, batch SE and z-score per quantity and time."""
    stats = run(config)
    rows = []
    for g, t in enumerate(stats.t_grid):
        p = config.params.with_horizon(t)
        cv = cumulants(4, p)
        est = stats.count_kstats[g]
        se = stats.std_errors[g]
        items = [(f"kappa{n}", cv[n], est[n - 1], se[n - 1]) for n in range(1, 5)]
        items += [
            ("skewness", cv.skewness, *stats.skewness[g]),
            ("excess_kurtosis", cv.excess_kurtosis, *stats.excess_kurtosis[g]),
            ("mean_intensity", mean_intensity(p), stats.intensity_mean[g], se[4]),
            ("joint_moment", intensity_count_moment(p), stats.joint_mean[g], se[5]),
        ]
        for name, analytic, estimate, err in items:
            if err > 0:
                z = (estimate - analytic) / err
            else:
                z = 0.0 if math.isclose(estimate, analytic, abs_tol=1e-12) else math.inf
            rows.append({"t": t, "quantity": name, "analytic": analytic,
                         "estimate": float(estimate), "se": float(err), "z": z})
    return rows


def cmd_compare(args) -> int:
    started = time.perf_counter()
    config = _sim_config(args)
    try:
        rows = comparison_rows(config)
    except SimulationError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return 1
    header = ["t", "quantity", "analytic", "estimate", "se", "z"]
    if args.format == "csv":
        text = _write_csv(header, [[r[h] for h in header] for r in rows])
    else:
        text = json.dumps(rows, indent=2) + "\n"
    # skewness/kurtosis are undefined at t = 0
    finite = [abs(r["z"]) for r in rows if not math.isnan(r["z"])]
    worst = max(finite) if finite else 0.0
    figures = []
    if args.figures:
        from .report import render_comparison

        figures = [str(p) for p in render_comparison(rows, config.params, args.figures, config.samples)]
    _emit(text, args, _manifest(args, started, max_abs_z=worst, figures=figures))
    if worst > Z_LIMIT:
        print(f"max |z| = {worst:.2f} exceeds {Z_LIMIT:g}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------- parser


def _add_kernel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nu", type=float, default=1.0, help="immigrant intensity")
    p.add_argument("--a", type=float, default=0.5, help="kernel amplitude")
    p.add_argument("--b", type=float, default=1.0, help="kernel decay rate")


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output file (default stdout); writes <out>.manifest.json")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t-grid", type=_float_list, default=[float(i) for i in range(1, 11)],
                   help="comma list of evaluation times")
    p.add_argument("--t-max", type=float, default=None, help="simulation horizon (default max of grid)")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", default="cluster", help="cluster or thinning")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hawkes-bell", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bell", help="Bell numbers and polynomials")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None, help="partial polynomial B_{n,k}")
    p.add_argument("--args", type=_fraction_list, default=None, help="comma list a_1,a_2,...")
    p.set_defaults(func=cmd_bell)

    p = sub.add_parser("borel", help="Borel cumulants, optionally checked by simulation")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--simulate", type=int, default=0, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_borel)

    p = sub.add_parser("closed-form", help="cumulant curves from the recursion with closed-form cross-check")
    _add_kernel_flags(p)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--order", type=int, default=4)
    _add_output_flags(p)
    p.set_defaults(func=cmd_closed_form)

    p = sub.add_parser("simulate", help="Monte Carlo k-statistics and intensity moments")
    _add_kernel_flags(p)
    _add_sim_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="analytic values against Monte Carlo with z-scores")
    _add_kernel_flags(p)
    _add_sim_flags(p)
    _add_output_flags(p)
    p.add_argument("--figures", default=None, metavar="DIR", help="also render comparison figures (PNG) into DIR")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
