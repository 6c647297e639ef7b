#!/usr/bin/env python3
"""Tests for the cycle-number searches."""

import math
import os
import sys
import unittest

import pytest

# src directory to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from cfcomm import analytic, optimizer
from cfcomm.analytic import baseline_probabilities
from cfcomm.engine import ProtocolParams, Scheme, run_modified
from cfcomm.states import CoherentStatistics


class TestApproxSearch(unittest.TestCase):
    """Test cases for the closed-form search."""

    def test_half_targets(self):
        """Test the optimum at P0 = P1 = 0.5 and mean photon number 200."""
        result = optimizer.minimize_T_approx(0.5, 0.5, 200)
        self.assertEqual((result.mc, result.M, result.N, result.T), (2, 38, 18, 36))
        self.assertEqual(result.mode, optimizer.APPROX)
        self.assertGreaterEqual(result.achieved_p0, 0.5)

    def test_higher_targets_cost_more(self):
        """Test that T grows with the target probability."""
        T = [optimizer.minimize_T_approx(p, p, 200).T for p in (0.5, 0.7, 0.9)]
        self.assertLess(T[0], T[1])
        self.assertLess(T[1], T[2])

    def test_infeasible(self):
        """Test that a single inner chain cannot reach 0.5 and 0.5."""
        with self.assertRaises(optimizer.InfeasibleError):
            optimizer.minimize_T_approx(0.5, 0.5, 200, mc_max=1)

    def test_invalid_target(self):
        """Test rejection of targets outside (0, 1)."""
        with self.assertRaises(ValueError):
            optimizer.minimize_T_approx(1.5, 0.5, 200)
        with self.assertRaises(ValueError):
            optimizer.minimize_T_approx(0.5, 0.0, 200)

    def test_as_dict(self):
        """Test the report of a result."""
        data = optimizer.minimize_T_approx(0.5, 0.5, 200).as_dict()
        self.assertEqual(data["T"], 36)
        self.assertAlmostEqual(data["log10T"], math.log10(36))


class TestExactSearch(unittest.TestCase):
    """Test cases for the engine-backed search."""

    def test_half_target(self):
        """Test the exact optimum at P = 0.5 and mean photon number 200."""
        result = optimizer.minimize_T_exact(0.5, 200)
        self.assertEqual((result.mc, result.M, result.N, result.T), (2, 38, 14, 28))
        self.assertEqual(result.mode, optimizer.EXACT)
        self.assertAlmostEqual(result.kbar, 200 * math.sin(math.pi / 38) ** 2)

    def test_result_meets_targets(self):
        """Test the returned point against fresh engine runs."""
        result = optimizer.minimize_T_exact(0.5, 200)
        stats = CoherentStatistics(200)
        for s, achieved in ((0, result.achieved_p0), (1, result.achieved_p1)):
            params = ProtocolParams(Scheme.MODIFIED, result.M, result.N, s, result.mc)
            ptilde = run_modified(params, stats).ptilde
            self.assertGreaterEqual(ptilde, 0.5)
            self.assertAlmostEqual(ptilde, achieved, places=12)

    def test_approx_is_close(self):
        """Test that the closed-form optimum is within 0.15 in log10 T."""
        exact = optimizer.minimize_T_exact(0.5, 200)
        approx = optimizer.minimize_T_approx(0.5, 0.5, 200)
        self.assertLessEqual(abs(exact.log10T - approx.log10T), 0.15)

    def test_zero_target(self):
        """Test that a zero target still asks for a click."""
        result = optimizer.minimize_T_exact(0.0, 200)
        self.assertEqual((result.mc, result.M, result.N, result.T), (1, 2, 2, 2))

    def test_restricted_mc(self):
        """Test that excluding m_c = 2 costs more."""
        result = optimizer.minimize_T_exact(0.5, 200, mc_bounds=(3, 50))
        self.assertGreaterEqual(result.mc, 3)
        self.assertGreater(result.T, 28)

    def test_infeasible_bounds(self):
        """Test the closest point is reported when M is capped."""
        with self.assertRaises(optimizer.InfeasibleError) as cm:
            optimizer.minimize_T_exact(0.5, 200, M_bounds=(2, 20))
        self.assertIsNotNone(cm.exception.best)
        self.assertLess(cm.exception.best.achieved_p0, 0.5)

    def test_invalid_arguments(self):
        """Test rejection of bad bounds and a missing source."""
        with self.assertRaises(ValueError):
            optimizer.minimize_T_exact(0.5, 200, M_bounds=(1, 20))
        with self.assertRaises(ValueError):
            optimizer.minimize_T_exact(0.5)
        with self.assertRaises(ValueError):
            optimizer.minimize_T_exact(1.0, 200)

    @pytest.mark.slow
    def test_approx_is_close_at_high_target(self):
        """Test the closed-form optimum at P = 0.9."""
        exact = optimizer.minimize_T_exact(0.9, 200, mc_bounds=(1, 100))
        approx = optimizer.minimize_T_approx(0.9, 0.9, 200)
        self.assertLessEqual(abs(exact.log10T - approx.log10T), 0.15)

    @pytest.mark.slow
    def test_approx_is_close_across_targets(self):
        """Test the closed-form optimum from P = 0.6 to P = 0.95."""
        for target in (0.6, 0.7, 0.8, 0.85, 0.9, 0.95):
            exact = optimizer.minimize_T_exact(target, 200, mc_bounds=(1, 100))
            approx = optimizer.minimize_T_approx(target, target, 200)
            self.assertLessEqual(abs(exact.log10T - approx.log10T), 0.15, "P = %g" % target)


class TestMatchedSearch(unittest.TestCase):
    """Test cases for the search at a requested Zone 1 photon number."""

    def test_asymptotic_constant(self):
        """Test T against the cubic kbar law at P' = 0.9."""
        baseline = optimizer.baseline_min_T(0.9)
        for kbar, mc in ((5, 47), (8, 76)):
            result = optimizer.minimize_T_matched_kbar(kbar, 0.9, 200)
            self.assertEqual(result.mode, optimizer.MATCHED)
            self.assertEqual(result.mc, mc)
            self.assertLess(abs(result.kbar - kbar), 0.5)
            reference = analytic.baseline_comparison(result.kbar, baseline.M, baseline.N)
            self.assertLess(abs(result.T / reference - 1.0), 0.25)

    def test_smallest_M_then_N(self):
        """Test that one fewer outer or inner cycle misses the target."""
        result = optimizer.minimize_T_matched_kbar(5, 0.9, 200)
        stats = CoherentStatistics(200)
        self.assertGreaterEqual(result.achieved_p0, 0.9)
        self.assertGreaterEqual(result.achieved_p1, 0.9)
        fewer_M = ProtocolParams(Scheme.MODIFIED, result.M - 1, 1, 0, result.mc)
        fewer_N = ProtocolParams(Scheme.MODIFIED, result.M, result.N - 1, 1, result.mc)
        self.assertLess(run_modified(fewer_M, stats).ptilde, 0.9)
        self.assertLess(run_modified(fewer_N, stats).ptilde, 0.9)

    def test_infeasible_and_invalid(self):
        """Test capped bounds and bad arguments."""
        with self.assertRaises(optimizer.InfeasibleError):
            optimizer.minimize_T_matched_kbar(5, 0.9, 200, M_bounds=(2, 100))
        with self.assertRaises(optimizer.InfeasibleError) as cm:
            optimizer.minimize_T_matched_kbar(5, 0.9, 200, N_bounds=(1, 100))
        self.assertLess(cm.exception.best.achieved_p1, 0.9)
        with self.assertRaises(ValueError):
            optimizer.minimize_T_matched_kbar(0, 0.9, 200)
        with self.assertRaises(ValueError):
            optimizer.minimize_T_matched_kbar(5, 1.0, 200)
        with self.assertRaises(ValueError):
            optimizer.minimize_T_matched_kbar(5, 0.9)


class TestBaseline(unittest.TestCase):
    """Test cases for the single-photon baseline."""

    def test_reference(self):
        """Test M' = 25, N' = 309 at P' = 0.9."""
        result = optimizer.baseline_min_T(0.9)
        self.assertEqual((result.M, result.N, result.T), (25, 309, 7725))
        self.assertEqual(result.mc, 0)
        self.assertIsNone(result.kbar)
        self.assertGreaterEqual(result.achieved_p0, 0.9)
        self.assertGreaterEqual(result.achieved_p1, 0.9)

    def test_minimality(self):
        """Test that one fewer cycle misses the target."""
        self.assertLess(baseline_probabilities(24, 309)[0], 0.9)
        self.assertLess(baseline_probabilities(25, 308)[1], 0.9)

    def test_low_target(self):
        """Test the smallest nontrivial outer cycle number."""
        self.assertEqual(optimizer.baseline_min_T(0.01).M, 3)

    def test_monotone(self):
        """Test that T does not fall as the target rises."""
        T = [optimizer.baseline_min_T(p).T for p in (0.5, 0.6, 0.7, 0.8, 0.9, 0.95)]
        self.assertEqual(T, sorted(T))

    def test_unreachable(self):
        """Test P' = 1 and a small M' cap."""
        with self.assertRaises(optimizer.InfeasibleError):
            optimizer.baseline_min_T(1.0)
        with self.assertRaises(optimizer.InfeasibleError):
            optimizer.baseline_min_T(0.9, M_max=10)
        with self.assertRaises(ValueError):
            optimizer.baseline_min_T(0.0)


if __name__ == "__main__":
    unittest.main()
