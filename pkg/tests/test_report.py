"""
Free Gibbs Transport - Report Renderer Tests
"""
import numpy as np

from renderer.report import (
    render_density_overlay,
    render_plot,
    render_report,
    run_section,
    table_section,
)


class TestRenderPlot:
    """Tests for SVG plots."""

    def test_series(self):
        """Test one polyline and legend entry per series."""
        svg = render_plot({"a": ([0, 1, 2], [0, 1, 4]), "b": ([0, 2], [1, 1])}, title="moments")
        assert svg.startswith("<svg")
        assert svg.count("<polyline") == 2
        assert ">moments</text>" in svg
        assert ">a</text>" in svg and ">b</text>" in svg

    def test_deterministic(self):
        """Test identical inputs give identical documents."""
        data = {"d": (np.linspace(0, 1, 5), np.exp(-np.linspace(0, 1, 5)))}
        assert render_plot(data) == render_plot(data)

    def test_flat_series(self):
        """Test a constant series still gets a finite range."""
        svg = render_plot({"c": ([0, 1], [2.0, 2.0])})
        assert "nan" not in svg
        assert ">1.5</text>" in svg and ">2.5</text>" in svg

    def test_empty(self):
        """Test a plot without series renders axes only."""
        svg = render_plot({})
        assert "<polyline" not in svg
        assert svg.rstrip().endswith("</svg>")


class TestDensityOverlay:
    """Tests for spectrum histograms."""

    def test_bars_and_curve(self):
        """Test one bar per bin under the reference curve."""
        eigs = np.random.default_rng(0).normal(size=500)
        xs = np.linspace(-3, 3, 50)
        svg = render_density_overlay(eigs, (xs, np.exp(-xs ** 2 / 2) / np.sqrt(2 * np.pi)),
                                     bins=12)
        assert svg.count('fill="#cccccc"') == 12
        assert svg.count("<polyline") == 1


class TestRenderReport:
    """Tests for markdown reports."""

    def test_sections(self):
        """Test status, summary rows, tables and plots appear."""
        table = table_section("moments.csv", [{"k": "2", "value": "1.0"}])
        section = run_section(
            "run1", "sample", "passed", "runs/run1",
            summary={"ks": 0.031234, "checks": {"m2": True}, "support": [-2.0, 2.0]},
            tables=[table],
            plots=["spectrum.svg"],
        )
        text = render_report([section])
        assert "## run1 (sample)" in text
        assert "Status: **passed**" in text
        assert "| ks | 0.03123 |" in text
        assert "| checks.m2 | True |" in text
        assert "| support | -2, 2 |" in text
        assert "| k | value |" in text
        assert "| 2 | 1.0 |" in text
        assert "![spectrum.svg](runs/run1/spectrum.svg)" in text

    def test_missing_artifacts(self):
        """Test missing artifacts are listed."""
        text = render_report([run_section("r", "sde", None, "r", missing=["paths.csv"])])
        assert "Status: **unknown**" in text
        assert "- `paths.csv`" in text

    def test_truncated_table(self):
        """Test long tables are cut at the limit."""
        rows = [{"i": str(i)} for i in range(30)]
        table = table_section("rows.csv", rows, limit=5)
        assert len(table["rows"]) == 5
        assert "(25 more rows)" in render_report([run_section("r", "x", "passed", "r",
                                                              tables=[table])])

    def test_no_runs(self):
        """Test an empty report says so."""
        assert "No runs given." in render_report([])
