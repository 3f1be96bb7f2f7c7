"""Command-line interface: fit, compare, density, simulate.

Exit codes: 0 success, 1 input error, 2 non-convergence (reports are still
written). File-producing commands also render a companion PNG figure next to
their main output.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import BetaFError, DomainError
from .family import BetaFDistribution, BetaShapes
from .fit import FitResult, OptimizerConfig, fit_family
from .io import (
    density_grid,
    read_grouped_csv,
    write_density_curve,
    write_grouped_rows,
    write_report,
)
from .kernels import PARAM_NAMES, KernelFamily, arity
from .metrics import FAMILY_ORDER, compute_metrics, comparison_table, format_comparison_table
from .plotting import save_density_overlay, save_density_panels


def _parse_family(name: str) -> KernelFamily:
    return KernelFamily.from_name(name)


def _parse_params(family: KernelFamily, text: str) -> BetaFDistribution:
    """Comma-separated values in (alpha, beta, *theta_f) order."""
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise DomainError(f"bad --params value: {exc}") from None
    expected = 2 + arity(family)
    names = ["alpha", "beta", *PARAM_NAMES[family]]
    if len(values) != expected:
        raise DomainError(
            f"{family.value} takes {expected} parameters ({', '.join(names)}), got {len(values)}"
        )
    return BetaFDistribution(BetaShapes(values[0], values[1]), family, tuple(values[2:]))


def _parse_edges(text: str) -> list[float]:
    try:
        edges = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise DomainError(f"bad --edges value: {exc}") from None
    if len(edges) < 3:
        raise DomainError("--edges needs at least 3 boundaries (2 bins)")
    for lo, hi in zip(edges, edges[1:]):
        if not lo < hi:
            raise DomainError(f"edges must be strictly increasing, got {lo} >= {hi}")
    return edges


def _parse_grid(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise DomainError(f"--grid must look like start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(v) for v in parts)
    except ValueError as exc:
        raise DomainError(f"bad --grid value: {exc}") from None
    return start, stop, step


def _load_starts(text: str):
    if text == "auto":
        return "auto"
    path = Path(text)
    if not path.exists():
        raise DomainError(f"--starts must be 'auto' or a JSON file; {text!r} does not exist")
    starts = json.loads(path.read_text())
    if not isinstance(starts, list) or not starts:
        raise DomainError(f"{text}: starts file must hold a non-empty JSON list of vectors")
    return [list(map(float, vec)) for vec in starts]


def _config_from_args(args) -> OptimizerConfig:
    return OptimizerConfig(
        grad_tol=args.tol, max_iter=args.max_iter, starts=_load_starts(args.starts)
    )


def _fit_with_metrics(family: KernelFamily, sample, cfg: OptimizerConfig) -> FitResult:
    res = fit_family(family, sample, cfg)
    return res.with_metrics(compute_metrics(res.distribution(), sample))


def _plot_grid(sample) -> tuple[float, float, float]:
    finite = [e for e in sample.edges if math.isfinite(e)]
    lo = min(finite)
    hi = max(finite) * 1.2
    return lo, hi, (hi - lo) / 400.0


def _figure_path(out: str) -> Path:
    return Path(out).with_suffix(".png")


def _density_curve(dist: BetaFDistribution, grid) -> tuple[list[float], list[float]]:
    xs = density_grid(*grid)
    return xs, [dist.pdf(x) for x in xs]


def cmd_fit(args) -> int:
    family = _parse_family(args.family)
    sample = read_grouped_csv(args.data, unit_scale=args.unit_scale)
    result = _fit_with_metrics(family, sample, _config_from_args(args))
    write_report([result], sample, args.out)
    xs, ps = _density_curve(result.distribution(), _plot_grid(sample))
    save_density_overlay([(family.value, xs, ps)], _figure_path(args.out))
    status = "converged" if result.converged else "did NOT converge"
    print(
        f"{family.value}: loglik={result.loglik:.6f} {status} "
        f"in {result.iterations} iterations (report: {args.out})"
    )
    return 0 if result.converged else 2


def cmd_compare(args) -> int:
    sample = read_grouped_csv(args.data, unit_scale=args.unit_scale)
    cfg = _config_from_args(args)
    results = [_fit_with_metrics(family, sample, cfg) for family in FAMILY_ORDER]
    rows = comparison_table(results, sample)
    print(format_comparison_table(rows))
    if args.out != "-":
        write_report(results, sample, args.out)
        grid = _plot_grid(sample)
        curves = []
        for res in results:
            xs, ps = _density_curve(res.distribution(), grid)
            curves.append((res.family.value, xs, ps))
        save_density_overlay(curves, _figure_path(args.out))
    return 0 if all(res.converged for res in results) else 2


def cmd_density(args) -> int:
    family = _parse_family(args.family)
    dist = _parse_params(family, args.params)
    grid = _parse_grid(args.grid)
    write_density_curve(dist, grid, args.out)
    if not args.no_plot:
        xs = density_grid(*grid)
        pdfs = [dist.pdf(x) for x in xs]
        cdfs = [dist.cdf(x) for x in xs]
        save_density_panels(xs, pdfs, cdfs, _figure_path(args.out), family.value)
    return 0


def cmd_simulate(args) -> int:
    family = _parse_family(args.family)
    dist = _parse_params(family, args.params)
    edges = _parse_edges(args.edges)
    if args.n < 0:
        raise DomainError(f"--n must be nonnegative, got {args.n}")
    draws = dist.sample(args.n, args.seed)
    interior = np.array(edges[1:-1])
    idx = np.searchsorted(interior, draws, side="right")
    r = len(edges) - 1
    counts = np.bincount(idx, minlength=r)
    means = []
    for i in range(r):
        cell = draws[idx == i]
        means.append(float(cell.mean()) if cell.size else math.nan)
    write_grouped_rows(edges, counts.tolist(), means, args.out)
    print(f"wrote {args.n} draws into {r} bins: {args.out}")
    return 0


def _add_shared_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--unit-scale", type=float, default=10000.0,
                   help="divide monetary columns by this on ingestion (default 10000)")
    p.add_argument("--starts", default="auto",
                   help="'auto' or a JSON file with a list of (alpha,beta,...) vectors")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="gradient infinity-norm tolerance on the transformed scale")
    p.add_argument("--max-iter", type=int, default=500, help="iteration cap per start")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="betaf",
        description="Fit generalized beta-F income distributions to grouped data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit one family to a grouped CSV")
    p_fit.add_argument("--data", required=True, help="grouped-data CSV path")
    p_fit.add_argument("--family", required=True,
                       help="one of: " + ", ".join(f.value for f in KernelFamily))
    _add_shared_fit_flags(p_fit)
    p_fit.add_argument("--out", default="report.json", help="JSON report path")
    p_fit.set_defaults(func=cmd_fit)

    p_cmp = sub.add_parser("compare", help="fit all seven families and tabulate")
    p_cmp.add_argument("--data", required=True, help="grouped-data CSV path")
    _add_shared_fit_flags(p_cmp)
    p_cmp.add_argument("--out", default="compare.json",
                       help="JSON report path ('-' prints the table only)")
    p_cmp.set_defaults(func=cmd_compare)

    p_den = sub.add_parser("density", help="export a density/CDF curve as CSV")
    p_den.add_argument("--family", required=True)
    p_den.add_argument("--params", required=True,
                       help="comma-separated alpha,beta,<kernel params>")
    p_den.add_argument("--grid", default="0:30:0.1", help="start:stop:step")
    p_den.add_argument("--out", default="density.csv", help="curve CSV path")
    p_den.add_argument("--no-plot", action="store_true", help="skip the companion PNG")
    p_den.set_defaults(func=cmd_density)

    p_sim = sub.add_parser("simulate", help="draw a synthetic grouped sample")
    p_sim.add_argument("--family", required=True)
    p_sim.add_argument("--params", required=True,
                       help="comma-separated alpha,beta,<kernel params>")
    p_sim.add_argument("--n", type=int, required=True, help="number of draws")
    p_sim.add_argument("--edges", required=True,
                       help="comma-separated bin boundaries, last may be inf")
    p_sim.add_argument("--seed", type=int, default=0, help="RNG seed")
    p_sim.add_argument("--out", default="simulated.csv", help="output CSV path")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BetaFError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
