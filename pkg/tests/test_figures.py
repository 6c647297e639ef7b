#!/usr/bin/env python3
"""Tests for the figure sweeps."""

import math
import os
import shutil
import sys
import tempfile
import unittest

# src directory to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from cfcomm import analytic, figures
from cfcomm.states import CoherentStatistics


class TestSweepSpec(unittest.TestCase):
    """Test cases for sweep descriptions."""

    def test_default_specs(self):
        """Test the published grids."""
        spec = figures.default_spec("fig1b")
        self.assertEqual(len(spec.cells()), 100)
        self.assertEqual(spec.cells()[0], (50, 5000))
        self.assertEqual(spec.cells()[1], (50, 10000))
        self.assertEqual(figures.default_spec("fig1d").grid["Ptilde"][-1], 0.95)
        self.assertEqual(figures.default_spec("figD1").fixed["kbar"], 2.0)

    def test_unknown_figure(self):
        """Test rejection of an unknown figure name."""
        with self.assertRaises(figures.SweepError):
            figures.default_spec("fig9")

    def test_validate(self):
        """Test rejection of empty ranges and foreign parameters."""
        with self.assertRaises(figures.SweepError):
            figures.SweepSpec("fig1b", {"M": [], "N": [5000]}).validate()
        with self.assertRaises(figures.SweepError):
            figures.SweepSpec("fig1b", {"Ptilde": [0.5]}).validate()
        with self.assertRaises(figures.SweepError):
            figures.SweepSpec("fig1d", {"Ptilde": [0.5]}, {"kbar": 2}).validate()
        with self.assertRaises(figures.SweepError):
            figures.SweepSpec("fig1b", {"M": [50], "N": [5000]}, source="guess").validate()


class TestSweepRows(unittest.TestCase):
    """Test cases for evaluating sweeps."""

    def test_fig1b_engine(self):
        """Test the engine value at M = 250, N = 35000."""
        spec = figures.SweepSpec("fig1b", {"M": [250], "N": [35000]}, {"mean_photons": 10})
        ((M, N, P),) = figures.sweep_rows(spec)
        self.assertEqual((M, N), (250, 35000))
        self.assertAlmostEqual(P, 0.9064, delta=0.002)

    def test_fig1c_analytic(self):
        """Test the closed-form source of fig1c."""
        spec = figures.SweepSpec("fig1c", {"M": [100], "N": [20000]}, {"mean_photons": 10}, source=figures.ANALYTIC)
        ((_, _, P),) = figures.sweep_rows(spec)
        self.assertEqual(P, analytic.approx_probs_slaz(100, 20000, CoherentStatistics(10)).p1_sum)

    def test_fig1d(self):
        """Test both columns of fig1d at P = 0.5."""
        spec = figures.SweepSpec("fig1d", {"Ptilde": [0.5]}, {"mean_photons": 200, "mc_max": 5})
        ((target, approx, exact),) = figures.sweep_rows(spec)
        self.assertEqual(target, 0.5)
        self.assertAlmostEqual(approx, math.log10(36))
        self.assertAlmostEqual(exact, math.log10(28))

    def test_fig1d_table(self):
        """Test the integer optimum table."""
        spec = figures.SweepSpec("fig1d-table", {"Ptilde": [0.5]}, {"mean_photons": 200, "mc_max": 5})
        self.assertEqual(figures.sweep_rows(spec), [(0.5, 38, 14, 2, 28)])

    def test_fig1d_infeasible_is_nan(self):
        """Test that an infeasible target leaves an empty cell."""
        spec = figures.SweepSpec("fig1d", {"Ptilde": [0.5]}, {"mean_photons": 200, "mc_max": 1})
        ((_, approx, exact),) = figures.sweep_rows(spec)
        self.assertAlmostEqual(approx, math.log10(36))
        self.assertTrue(math.isnan(exact))

    def test_figD1(self):
        """Test the baseline and the counterfactual-only curve at P' = 0.9."""
        spec = figures.SweepSpec("figD1", {"Pprime": [0.9]}, {"mean_photons": 200, "kbar": 2})
        ((_, baseline, counterfactual_only, design),) = figures.sweep_rows(spec)
        self.assertAlmostEqual(baseline, math.log10(7725))
        self.assertAlmostEqual(counterfactual_only, 3.7502, places=3)
        self.assertGreater(design, counterfactual_only)

    def test_figD1_curves_meet_at_high_targets(self):
        """Test that the baseline and counterfactual-only curves nearly coincide."""
        spec = figures.SweepSpec("figD1", {"Pprime": [0.9, 0.95]}, {"mean_photons": 200, "kbar": 2})
        for _, baseline, counterfactual_only, _ in figures.sweep_rows(spec):
            self.assertLess(abs(baseline - counterfactual_only), 0.2)

    def test_parallel_rows_match(self):
        """Test that worker processes keep the grid order."""
        spec = figures.SweepSpec(
            "fig1b", {"M": [50, 100, 150], "N": [5000, 10000]}, {"mean_photons": 10}, source=figures.ANALYTIC
        )
        self.assertEqual(figures.sweep_rows(spec, jobs=2), figures.sweep_rows(spec, jobs=1))


class TestCsv(unittest.TestCase):
    """Test cases for writing tables."""

    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def test_format_value(self):
        """Test twelve significant digits for floats."""
        self.assertEqual(figures.format_value(0.1 + 0.2), "0.3")
        self.assertEqual(figures.format_value(7725), "7725")
        self.assertEqual(figures.format_value(math.nan), "nan")

    def test_write_csv(self):
        """Test header, rows and line endings."""
        path = os.path.join(self.directory, "sub", "table.csv")
        figures.write_csv(path, ("M", "N", "P"), [(50, 5000, 0.25)])
        with open(path, "rb") as f:
            self.assertEqual(f.read(), b"M,N,P\n50,5000,0.25\n")

    def test_make_figure_is_reproducible(self):
        """Test that two runs write identical files."""
        contents = []
        for name in ("a.csv", "b.csv"):
            spec = figures.SweepSpec(
                "fig1b",
                {"M": [50, 100], "N": [5000]},
                {"mean_photons": 10},
                output=os.path.join(self.directory, name),
            )
            with open(figures.make_figure(spec), "rb") as f:
                contents.append(f.read())
        self.assertEqual(contents[0], contents[1])
        self.assertTrue(contents[0].startswith(b"M,N,P\n50,5000,"))

    def test_figD1_header(self):
        """Test the exact figD1 header line."""
        spec = figures.SweepSpec(
            "figD1", {"Pprime": [0.9]}, {"mean_photons": 200, "kbar": 2}, output=os.path.join(self.directory, "d1.csv")
        )
        with open(figures.make_figure(spec), "rb") as f:
            header = f.read().split(b"\n")[0]
        self.assertEqual(header, b"Pprime,log10T_baseline,log10T_D34,log10T_eq8")


if __name__ == "__main__":
    unittest.main()
