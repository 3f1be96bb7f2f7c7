"""Grouped-data CSV ingestion and report/curve serialization.

CSV schema: header ``lower,upper,count`` with an optional ``group_mean``
column; rows sorted and contiguous (each upper equals the next lower), the
last upper is the literal ``inf``, the first lower may be ``-inf`` or the
support origin. Monetary columns are divided by ``unit_scale`` on ingestion.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .errors import ParseError, SchemaError
from .family import BetaFDistribution
from .grouped import GroupedSample
from .grouped import empirical_mean as _empirical_mean
from .kernels import PARAM_NAMES
from .metrics import comparison_table

_HEADERS = (["lower", "upper", "count"], ["lower", "upper", "count", "group_mean"])


def read_grouped_csv(path, unit_scale: float = 10000.0) -> GroupedSample:
    """Parse a grouped-data CSV into a GroupedSample in working units."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if header not in _HEADERS:
            raise SchemaError(
                f"{path}: header must be 'lower,upper,count[,group_mean]', got {','.join(header)}"
            )
        has_means = len(header) == 4
        lowers: list[float] = []
        uppers: list[float] = []
        counts: list[int] = []
        means: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                lo = float(row[0])
                hi = float(row[1])
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: bad bound: {exc}") from None
            try:
                n = int(row[2])
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: count must be an integer, got {row[2]!r}") from None
            if n < 0:
                raise ParseError(f"{path}: line {lineno}: count must be nonnegative, got {n}")
            if has_means:
                text = row[3].strip()
                if text == "":
                    means.append(math.nan)
                else:
                    try:
                        means.append(float(text))
                    except ValueError:
                        raise ParseError(
                            f"{path}: line {lineno}: bad group_mean {row[3]!r}"
                        ) from None
            lowers.append(lo)
            uppers.append(hi)
            counts.append(n)

    if len(counts) < 2:
        raise SchemaError(f"{path}: need at least 2 rows, got {len(counts)}")
    for i, (lo, hi) in enumerate(zip(lowers, uppers)):
        if not lo < hi:
            raise SchemaError(f"{path}: row {i + 1}: upper {hi} must exceed lower {lo}")
    for i in range(len(counts) - 1):
        if uppers[i] != lowers[i + 1]:
            raise SchemaError(
                f"{path}: bins are not contiguous at row {i + 2} "
                f"(upper {uppers[i]} != next lower {lowers[i + 1]})"
            )
        if math.isinf(uppers[i]):
            raise SchemaError(f"{path}: only the last row may have an infinite upper bound")
    if not math.isinf(uppers[-1]) or uppers[-1] < 0:
        raise SchemaError(f"{path}: the last upper bound must be the literal 'inf'")

    edges = [v / unit_scale for v in [lowers[0], *uppers]]
    group_means = [m / unit_scale for m in means] if has_means else None
    return GroupedSample(
        edges=tuple(edges),
        counts=tuple(counts),
        group_means=tuple(group_means) if group_means is not None else None,
        unit_scale=unit_scale,
    )


def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _format_bound(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return _format_number(value)


def write_grouped_rows(edges, counts, group_means, path) -> None:
    """Write raw-unit grouped rows; None/NaN group means become blanks."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if group_means is None:
            writer.writerow(["lower", "upper", "count"])
            for i, n in enumerate(counts):
                writer.writerow([_format_bound(edges[i]), _format_bound(edges[i + 1]), int(n)])
        else:
            writer.writerow(["lower", "upper", "count", "group_mean"])
            for i, n in enumerate(counts):
                m = group_means[i]
                cell = "" if m is None or (isinstance(m, float) and math.isnan(m)) else _format_number(float(m))
                writer.writerow([_format_bound(edges[i]), _format_bound(edges[i + 1]), int(n), cell])


def write_grouped_csv(s: GroupedSample, path) -> None:
    """Serialize a GroupedSample back to raw units (working values times
    unit_scale)."""
    u = s.unit_scale
    edges = [e * u for e in s.edges]
    means = None if s.group_means is None else [m * u for m in s.group_means]
    write_grouped_rows(edges, s.counts, means, path)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def build_report(results, s: GroupedSample) -> dict:
    """Assemble the JSON-ready report document for a set of fit results."""
    families = []
    for res in results:
        m = res.metrics
        entry = {
            "family": res.family.value,
            "alpha": res.shapes.alpha,
            "beta": res.shapes.beta,
            "theta_f": dict(zip(PARAM_NAMES[res.family], res.theta_f)),
            "loglik": _json_safe(res.loglik),
            "converged": res.converged,
            "iterations": res.iterations,
            "grad_norm": _json_safe(res.grad_norm),
            "start_index": res.start_index,
            "cap_hits": list(res.cap_hits),
            "est_mean": _json_safe(m.est_mean) if m else None,
            "sse": _json_safe(m.sse) if m else None,
            "sae": _json_safe(m.sae) if m else None,
            "chi_square": _json_safe(m.chi_square) if m else None,
        }
        families.append(entry)
    doc = {
        "unit_scale": s.unit_scale,
        "n_bins": s.n_bins,
        "total_count": s.total,
        "empirical_mean": _json_safe(
            _empirical_mean(s) if s.group_means is not None else math.nan
        ),
        "families": families,
    }
    if all(res.metrics is not None for res in results):
        doc["comparison"] = [
            {k: _json_safe(v) for k, v in row.items()}
            for row in comparison_table(list(results), s)
        ]
    return doc


def write_report(results, s: GroupedSample, path) -> dict:
    """Write the JSON fit report; returns the document."""
    doc = build_report(results, s)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
    return doc


def density_grid(start: float, stop: float, step: float) -> list[float]:
    if not (step > 0.0 and stop > start):
        raise ParseError(f"bad grid {start}:{stop}:{step}")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [start + k * step for k in range(n + 1)]


def write_density_curve(d: BetaFDistribution, grid_spec, path) -> int:
    """Write (x, pdf, cdf) rows over the inclusive grid; returns row count."""
    start, stop, step = grid_spec
    xs = density_grid(start, stop, step)
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "pdf", "cdf"])
        for x in xs:
            writer.writerow([repr(float(x)), repr(d.pdf(x)), repr(d.cdf(x))])
    return len(xs)
