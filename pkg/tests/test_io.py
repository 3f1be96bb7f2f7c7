import json
import math

import numpy as np
import pytest

from betaf import BetaFDistribution, BetaShapes, KernelFamily
from betaf.errors import DomainError, ParseError, SchemaError
from betaf.fit import FitResult
from betaf.grouped import GroupedSample
from betaf.io import (
    build_report,
    density_grid,
    read_grouped_csv,
    write_density_curve,
    write_grouped_csv,
    write_report,
)
from betaf.metrics import FitMetrics
from conftest import GB2_2003


class TestReadGroupedCsv:
    def test_minimal_file(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("lower,upper,count\n0,1,5\n1,inf,5\n")
        s = read_grouped_csv(path, unit_scale=1.0)
        assert s.edges == (0.0, 1.0, math.inf)
        assert s.counts == (5, 5)
        assert s.group_means is None

    def test_census_style_scaling(self, tmp_path):
        path = tmp_path / "c.csv"
        rows = ["lower,upper,count,group_mean"]
        bounds = [0, 25000, 50000, 75000, 100000, 150000, 250000]
        for lo, hi in zip(bounds, bounds[1:]):
            rows.append(f"{lo},{hi},100,{(lo + hi) / 2}")
        rows.append("250000,inf,50,300000")
        path.write_text("\n".join(rows) + "\n")
        s = read_grouped_csv(path, unit_scale=10000.0)
        assert s.edges[0] == 0.0
        assert s.edges[1] == 2.5
        assert s.edges[-2] == 25.0
        assert s.edges[-1] == math.inf
        assert s.group_means[0] == pytest.approx(1.25)
        assert s.unit_scale == 10000.0

    def test_upper_below_lower(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("lower,upper,count\n1,0.5,5\n0.5,inf,5\n")
        with pytest.raises(SchemaError, match="exceed"):
            read_grouped_csv(path, unit_scale=1.0)

    def test_non_contiguous(self, tmp_path):
        path = tmp_path / "gap.csv"
        path.write_text("lower,upper,count\n0,1,5\n2,inf,5\n")
        with pytest.raises(SchemaError, match="contiguous"):
            read_grouped_csv(path, unit_scale=1.0)

    def test_bad_count_reports_line(self, tmp_path):
        path = tmp_path / "badcount.csv"
        path.write_text("lower,upper,count\n0,1,5\n1,inf,5.5\n")
        with pytest.raises(ParseError, match="line 3"):
            read_grouped_csv(path, unit_scale=1.0)

    def test_bad_bound_reports_line(self, tmp_path):
        path = tmp_path / "badbound.csv"
        path.write_text("lower,upper,count\n0,one,5\n1,inf,5\n")
        with pytest.raises(ParseError, match="line 2"):
            read_grouped_csv(path, unit_scale=1.0)

    def test_wrong_header(self, tmp_path):
        path = tmp_path / "hdr.csv"
        path.write_text("low,high,n\n0,1,5\n1,inf,5\n")
        with pytest.raises(SchemaError, match="header"):
            read_grouped_csv(path, unit_scale=1.0)

    def test_last_upper_must_be_infinite(self, tmp_path):
        path = tmp_path / "fin.csv"
        path.write_text("lower,upper,count\n0,1,5\n1,2,5\n")
        with pytest.raises(SchemaError, match="inf"):
            read_grouped_csv(path, unit_scale=1.0)

    def test_interior_inf_rejected(self, tmp_path):
        path = tmp_path / "midinf.csv"
        path.write_text("lower,upper,count\n0,inf,5\ninf,inf,5\n")
        with pytest.raises(SchemaError):
            read_grouped_csv(path, unit_scale=1.0)

    def test_negative_infinite_first_lower(self, tmp_path):
        path = tmp_path / "real.csv"
        path.write_text("lower,upper,count\n-inf,0,5\n0,inf,5\n")
        s = read_grouped_csv(path, unit_scale=1.0)
        assert s.edges == (-math.inf, 0.0, math.inf)

    def test_zero_total_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("lower,upper,count\n0,1,0\n1,inf,0\n")
        with pytest.raises(DomainError):
            read_grouped_csv(path, unit_scale=1.0)

    def test_blank_mean_only_for_empty_bin(self, tmp_path):
        path = tmp_path / "blank.csv"
        path.write_text("lower,upper,count,group_mean\n0,1,0,\n1,inf,5,2.0\n")
        s = read_grouped_csv(path, unit_scale=1.0)
        assert math.isnan(s.group_means[0])


class TestRoundTrip:
    def test_unit_scale_one(self, tmp_path):
        s = GroupedSample(
            edges=(0.0, 1.25, 3.7, math.inf),
            counts=(3, 14, 9),
            group_means=(0.61234567890123, 2.0000000001, 5.5),
            unit_scale=1.0,
        )
        path = tmp_path / "rt.csv"
        write_grouped_csv(s, path)
        back = read_grouped_csv(path, unit_scale=1.0)
        assert back.edges == s.edges
        assert back.counts == s.counts
        assert back.group_means == s.group_means

    def test_census_units(self, tmp_path):
        path = tmp_path / "census.csv"
        path.write_text(
            "lower,upper,count,group_mean\n"
            "0,25000,120,13000\n25000,50000,80,36000\n50000,inf,40,81000\n"
        )
        s = read_grouped_csv(path, unit_scale=10000.0)
        out = tmp_path / "census_back.csv"
        write_grouped_csv(s, out)
        back = read_grouped_csv(out, unit_scale=10000.0)
        assert back.edges == s.edges
        assert back.counts == s.counts
        assert back.group_means == s.group_means
        assert out.read_text() == path.read_text()


class TestReport:
    def _result(self):
        metrics = FitMetrics(
            sse=5.04e-4, sae=0.123, chi_square=1972.524, est_mean=6.618, empirical_mean=6.598
        )
        return FitResult(
            family=KernelFamily.GB2_BURR,
            shapes=BetaShapes(0.490, 1.111),
            theta_f=(2.724, 8.297),
            loglik=-1234.5678901234567,
            converged=True,
            iterations=12,
            grad_norm=3.2e-8,
            start_index=1,
            metrics=metrics,
        )

    def test_single_family_document(self, tmp_path):
        s = GroupedSample(
            edges=(0.0, 5.0, math.inf), counts=(6, 4), group_means=(2.5, 8.0), unit_scale=1.0
        )
        path = tmp_path / "report.json"
        doc = write_report([self._result()], s, path)
        loaded = json.loads(path.read_text())
        assert loaded == doc
        assert len(loaded["families"]) == 1
        entry = loaded["families"][0]
        for key in ("family", "alpha", "beta", "theta_f", "loglik", "converged",
                    "est_mean", "sse", "sae", "chi_square"):
            assert key in entry
        assert entry["theta_f"] == {"a": 2.724, "b": 8.297}

    def test_numbers_survive_round_trip(self, tmp_path):
        s = GroupedSample(edges=(0.0, 5.0, math.inf), counts=(6, 4), unit_scale=1.0)
        path = tmp_path / "report.json"
        write_report([self._result()], s, path)
        loaded = json.loads(path.read_text())
        entry = loaded["families"][0]
        assert entry["loglik"] == -1234.5678901234567
        assert entry["alpha"] == 0.490
        assert entry["sse"] == 5.04e-4

    def test_no_metrics_yields_null_columns(self):
        s = GroupedSample(edges=(0.0, 5.0, math.inf), counts=(6, 4), unit_scale=1.0)
        bare = FitResult(
            family=KernelFamily.SCALED_T2,
            shapes=BetaShapes(7.8, 0.9),
            theta_f=(),
            loglik=-10.0,
            converged=False,
            iterations=2,
            grad_norm=0.1,
            start_index=0,
        )
        doc = build_report([bare], s)
        assert doc["families"][0]["est_mean"] is None
        assert "comparison" not in doc


class TestDensityCurve:
    def test_grid_row_count_and_monotone_x(self, tmp_path):
        path = tmp_path / "curve.csv"
        n = write_density_curve(GB2_2003, (0.0, 30.0, 0.1), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "x,pdf,cdf"
        assert n == 301
        assert len(lines) == 302
        xs, pdfs, cdfs = [], [], []
        for line in lines[1:]:
            x, p, c = line.split(",")
            xs.append(float(x))
            pdfs.append(float(p))
            cdfs.append(float(c))
        assert all(b > a for a, b in zip(xs, xs[1:]))
        assert all(p >= 0.0 for p in pdfs)

    def test_trapezoid_matches_cdf_increment(self, tmp_path):
        path = tmp_path / "curve.csv"
        write_density_curve(GB2_2003, (0.0, 30.0, 0.1), path)
        rows = [line.split(",") for line in path.read_text().splitlines()[1:]]
        xs = np.array([float(r[0]) for r in rows])
        pdfs = np.array([float(r[1]) for r in rows])
        integral = np.trapezoid(pdfs, xs)
        assert abs(integral - (GB2_2003.cdf(30.0) - GB2_2003.cdf(0.0))) < 0.02

    def test_bad_grid(self):
        with pytest.raises(ParseError):
            density_grid(0.0, 10.0, -1.0)
        with pytest.raises(ParseError):
            density_grid(5.0, 1.0, 0.1)
