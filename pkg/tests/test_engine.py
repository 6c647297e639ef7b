#!/usr/bin/env python3
"""Tests for the protocol engine."""

import math
import os
import sys
import unittest

import numpy as np

# src directory to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from cfcomm import analytic
from cfcomm.engine import (
    BEAM_SPLITTER,
    DETECTOR,
    InvalidParamsError,
    ProtocolParams,
    Scheme,
    SurvivalLedger,
    channel_occupancy_profile,
    optical_elements,
    run,
    run_inner_chain,
    run_modified,
    run_slaz,
    success_probability,
)
from cfcomm.states import ArbitraryStatistics, CoherentStatistics, FockStatistics, ModeAmplitudes


def slaz(M, N, s):
    return ProtocolParams(Scheme.SLAZ, M, N, s)


def modified(M, N, mc, s):
    return ProtocolParams(Scheme.MODIFIED, M, N, s, mc)


class TestProtocolParams(unittest.TestCase):
    """Test cases for parameter validation."""

    def test_angles_and_T(self):
        """Test derived angles and cycle totals."""
        params = slaz(4, 5, 1)
        self.assertAlmostEqual(params.theta_M, math.pi / 8)
        self.assertAlmostEqual(params.theta_N, math.pi / 10)
        self.assertEqual(params.T, 20)
        self.assertEqual(modified(38, 14, 2, 0).T, 28)

    def test_scheme_from_string(self):
        """Test that a scheme name is accepted."""
        self.assertIs(ProtocolParams("modified", 5, 3, 0, 2).scheme, Scheme.MODIFIED)

    def test_invalid(self):
        """Test rejection of unusable parameters."""
        for args in (
            (Scheme.SLAZ, 1, 5, 0),
            (Scheme.SLAZ, 5, 0, 0),
            (Scheme.SLAZ, 5, 5, 2),
            (Scheme.MODIFIED, 5, 5, 0),
            (Scheme.MODIFIED, 5, 5, 0, 6),
            (Scheme.MODIFIED, 5, 5, 0, 0),
            ("ring", 5, 5, 0),
        ):
            with self.assertRaises(InvalidParamsError):
                ProtocolParams(*args)

    def test_with_signal(self):
        """Test switching Bob's bit."""
        self.assertEqual(modified(5, 3, 2, 0).with_signal(1), modified(5, 3, 2, 1))

    def test_integral_floats(self):
        """Test that integral floats are stored as integers."""
        params = ProtocolParams(Scheme.MODIFIED, 38.0, 14.0, 1.0, 2.0)
        self.assertEqual((params.M, params.N, params.s, params.mc), (38, 14, 1, 2))
        self.assertIs(type(params.M), int)
        self.assertIs(type(params.mc), int)
        self.assertEqual(params, modified(38, 14, 2, 1))
        outcome = run_modified(params, CoherentStatistics(200))
        self.assertEqual(outcome.ptilde, run_modified(modified(38, 14, 2, 1), CoherentStatistics(200)).ptilde)
        for args in ((Scheme.SLAZ, 38.5, 14, 0), (Scheme.SLAZ, "many", 14, 0), (Scheme.SLAZ, 38, None, 0)):
            with self.assertRaises(InvalidParamsError):
                ProtocolParams(*args)


class TestOpticalElements(unittest.TestCase):
    """Test cases for the unrolled optical path."""

    def count(self, params, kind):
        return sum(1 for e in optical_elements(params) if e.kind == kind)

    def test_slaz_blocking(self):
        """Test a detector after every inner splitter with s = 1."""
        params = slaz(3, 2, 1)
        self.assertEqual(len(list(optical_elements(params))), 11)
        self.assertEqual(self.count(params, BEAM_SPLITTER), 7)
        self.assertEqual(self.count(params, DETECTOR), 4)

    def test_slaz_transparent(self):
        """Test a single detector per inner chain with s = 0."""
        params = slaz(3, 2, 0)
        self.assertEqual(len(list(optical_elements(params))), 9)
        self.assertEqual(self.count(params, DETECTOR), 2)

    def test_modified_stops_after_last_chain(self):
        """Test that the modified path ends with an inner chain."""
        elements = list(optical_elements(modified(5, 3, 2, 0)))
        self.assertEqual(len(elements), 10)
        self.assertEqual(elements[-1].kind, DETECTOR)
        self.assertEqual(elements[-1].outer, 2)

    def test_angles(self):
        """Test outer and inner splitter angles."""
        elements = list(optical_elements(slaz(4, 6, 0)))
        self.assertAlmostEqual(elements[0].theta, math.pi / 8)
        self.assertEqual(elements[0].pair, (0, 1))
        self.assertAlmostEqual(elements[1].theta, math.pi / 12)
        self.assertEqual(elements[1].pair, (1, 2))


class TestInnerChain(unittest.TestCase):
    """Test cases for a single inner chain."""

    def test_blocking_chain(self):
        """Test beta1 -> beta1 cos^N(pi / 2N) when Bob blocks."""
        N = 50
        state = run_inner_chain(ModeAmplitudes(0.6, 0.8, 0.0), N, 1)
        self.assertEqual(state.beta0, 0.6)
        self.assertAlmostEqual(state.beta1, 0.8 * math.cos(math.pi / (2 * N)) ** N, places=14)
        self.assertEqual(state.beta2, 0.0)

    def test_transparent_chain(self):
        """Test that a transparent chain empties Zone 1."""
        ledger = SurvivalLedger()
        state = run_inner_chain(ModeAmplitudes(0.6, 0.8, 0.0), 7, 0, ledger=ledger)
        self.assertAlmostEqual(state.beta1, 0.0, places=14)
        self.assertAlmostEqual(ledger.leaked_total(), 0.64, places=14)

    def test_single_splitter_chain(self):
        """Test that N = 1 sends all of Zone 1 to the channel."""
        ledger = SurvivalLedger()
        state = run_inner_chain(ModeAmplitudes(0.6, 0.8, 0.0), 1, 1, ledger=ledger)
        self.assertEqual(state.beta1, 0.0)
        self.assertAlmostEqual(ledger.leaked_total(), 0.64)

    def test_coherent_survival(self):
        """Test the chain survival of a coherent source."""
        ledger = SurvivalLedger(CoherentStatistics(5.0))
        state = run_inner_chain(ModeAmplitudes(0.6, 0.8, 0.0), 20, 1, ledger=ledger)
        leaked = 0.64 - state.beta1**2
        self.assertAlmostEqual(ledger.log_survival(), -5.0 * leaked, places=14)

    def test_matches_stepwise(self):
        """Test the closed form against splitter-by-splitter evolution."""
        params = slaz(2, 9, 1)
        stepwise = run_slaz(params, FockStatistics(1), stepwise=True)
        closed = run_slaz(params, FockStatistics(1))
        np.testing.assert_allclose(
            stepwise.final_amplitudes.as_tuple(), closed.final_amplitudes.as_tuple(), atol=1e-14
        )

    def test_rejects_occupied_channel(self):
        """Test that a chain must start with Zone 2 empty."""
        with self.assertRaises(ValueError):
            run_inner_chain(ModeAmplitudes(0.6, 0.6, 0.1), 5, 1)


class TestRunSlaz(unittest.TestCase):
    """Test cases for the full scheme."""

    def test_coherent_reference_point(self):
        """Test both bits for a coherent source at M = 250, N = 35000."""
        stats = CoherentStatistics(10)
        p0 = run_slaz(slaz(250, 35000, 0), stats).prob_only_d0
        p1 = run_slaz(slaz(250, 35000, 1), stats).prob_only_d1
        self.assertAlmostEqual(p0, 0.9064, delta=0.002)
        self.assertAlmostEqual(p1, 0.9157, delta=0.002)

    def test_matches_coherent_closed_forms(self):
        """Test the engine against the closed-form coherent results."""
        for mu, M, N in ((2.0, 10, 100), (10.0, 50, 4000), (0.5, 3, 7)):
            forms = analytic.coherent_closed_forms(M, N, mu)
            stats = CoherentStatistics(mu)
            self.assertAlmostEqual(run_slaz(slaz(M, N, 0), stats).prob_only_d0, forms.p0_exact, places=12)
            self.assertAlmostEqual(run_slaz(slaz(M, N, 1), stats).prob_only_d1, forms.p1_exact, places=12)

    def test_fock_transparent_is_independent_of_N(self):
        """Test that only D0 fires with probability cos^(2Mv)(pi / 2M)."""
        M, v = 12, 3
        expected = math.cos(math.pi / (2 * M)) ** (2 * M * v)
        for N in (1, 5, 40):
            outcome = run_slaz(slaz(M, N, 0), FockStatistics(v))
            self.assertAlmostEqual(outcome.prob_only_d0, expected, places=12)

    def test_single_photon_blocking(self):
        """Test the single-photon readout against the matrix product."""
        M, N = 8, 60
        outcome = run_slaz(slaz(M, N, 1), FockStatistics(1))
        gamma0, gamma1 = analytic.exact_final_amplitudes(M, N, 1)
        self.assertAlmostEqual(outcome.prob_only_d1, gamma1**2, places=12)
        self.assertAlmostEqual(outcome.prob_only_d0, gamma0**2, places=12)

    def test_vacuum_input(self):
        """Test that the empty input only produces silence."""
        outcome = run_slaz(slaz(5, 5, 1), FockStatistics(0))
        self.assertEqual(outcome.prob_only_d0, 0.0)
        self.assertEqual(outcome.prob_only_d1, 0.0)
        self.assertEqual(outcome.prob_leak, 0.0)
        self.assertAlmostEqual(outcome.prob_other, 1.0)

    def test_probabilities_sum_to_one(self):
        """Test the outcome classes are exhaustive."""
        for stats in (FockStatistics(2), CoherentStatistics(3.0), ArbitraryStatistics([0.2, 0.3, 0.5])):
            for s in (0, 1):
                outcome = run_slaz(slaz(6, 11, s), stats)
                self.assertAlmostEqual(outcome.total_probability(), 1.0, places=12)

    def test_stepwise_agrees(self):
        """Test closed-form and stepwise runs give the same outcome."""
        for s in (0, 1):
            params = slaz(5, 7, s)
            a = run_slaz(params, CoherentStatistics(4.0))
            b = run_slaz(params, CoherentStatistics(4.0), stepwise=True)
            self.assertAlmostEqual(a.prob_only_d0, b.prob_only_d0, places=13)
            self.assertAlmostEqual(a.prob_only_d1, b.prob_only_d1, places=13)
            self.assertAlmostEqual(a.max_channel_occupancy, b.max_channel_occupancy, places=13)

    def test_rejects_modified(self):
        """Test that run_slaz refuses modified parameters."""
        with self.assertRaises(InvalidParamsError):
            run_slaz(modified(5, 5, 2, 0), FockStatistics(1))

    def test_as_dict(self):
        """Test the serializable view of an outcome."""
        data = run(slaz(4, 4, 0), FockStatistics(1)).as_dict()
        self.assertEqual(data["scheme"], "slaz")
        self.assertEqual(len(data["final_amplitudes"]), 3)

    def test_mixture_is_weighted_fock_sum(self):
        """Test that a photon-number mixture averages the Fock outcomes."""
        weights = [0.1, 0.2, 0.3, 0.4]
        for s in (0, 1):
            params = slaz(6, 11, s)
            mixed = run_slaz(params, ArbitraryStatistics(weights))
            fock = [run_slaz(params, FockStatistics(v)) for v in range(len(weights))]
            for name in ("prob_only_d0", "prob_only_d1", "prob_leak"):
                expected = math.fsum(w * getattr(o, name) for w, o in zip(weights, fock))
                self.assertAlmostEqual(getattr(mixed, name), expected, places=12)

    def test_d1_grows_with_N(self):
        """Test that only-D1 does not fall as N grows past mu M."""
        stats = CoherentStatistics(10)
        values = [run_slaz(slaz(20, N, 1), stats).prob_only_d1 for N in (200, 400, 800, 1600, 3200)]
        for previous, following in zip(values, values[1:]):
            self.assertGreaterEqual(following, previous - 1e-12)
        self.assertGreater(values[-1], values[0])

    def test_photon_sums_within_regime_error(self):
        """Test the photon-number sums where N >> mu M and M >> mu."""
        mu = 2.0
        stats = CoherentStatistics(mu)
        for M, N in ((50, 2000), (100, 5000), (100, 50000)):
            approx = analytic.approx_probs_slaz(M, N, stats)
            bound = 5 * (mu * M / N + mu / M)
            self.assertLess(abs(run_slaz(slaz(M, N, 0), stats).prob_only_d0 - approx.p0_sum), bound)
            self.assertLess(abs(run_slaz(slaz(M, N, 1), stats).prob_only_d1 - approx.p1_sum), bound)


class TestRunModified(unittest.TestCase):
    """Test cases for the modified scheme."""

    def setUp(self):
        self.stats = CoherentStatistics(200)

    def test_reference_design(self):
        """Test the success probabilities of mc = 2, M = 38, N = 14."""
        p0 = run_modified(modified(38, 14, 2, 0), self.stats).ptilde
        p1 = run_modified(modified(38, 14, 2, 1), self.stats).ptilde
        self.assertAlmostEqual(p0, 0.50535, delta=0.001)
        self.assertGreaterEqual(p1, 0.5)

    def test_reference_design_is_tight(self):
        """Test that one fewer cycle misses the 0.5 target."""
        self.assertLess(run_modified(modified(38, 13, 2, 1), self.stats).ptilde, 0.5)
        self.assertLess(run_modified(modified(37, 14, 2, 0), self.stats).ptilde, 0.5)

    def test_ptilde0_independent_of_N(self):
        """Test that P0 does not depend on the inner cycle number."""
        a = run_modified(modified(38, 1, 2, 0), self.stats).ptilde
        b = run_modified(modified(38, 500, 2, 0), self.stats).ptilde
        self.assertAlmostEqual(a, b, places=12)

    def test_occupancy(self):
        """Test the largest channel occupancy and where it happens."""
        outcome0 = run_modified(modified(38, 14, 2, 0), self.stats)
        self.assertAlmostEqual(outcome0.max_channel_occupancy, 0.3415, delta=1e-4)
        self.assertEqual(outcome0.max_channel_location, (1, 14))

        outcome1 = run_modified(modified(38, 14, 2, 1), self.stats)
        theta_M, theta_N = math.pi / 76, math.pi / 28
        expected = (
            200
            * math.sin(theta_M) ** 2
            * math.cos(theta_M) ** 2
            * (1 + math.cos(theta_N) ** 14) ** 2
            * math.sin(theta_N) ** 2
        )
        self.assertAlmostEqual(outcome1.max_channel_occupancy, expected, places=10)
        self.assertEqual(outcome1.max_channel_location, (2, 1))

    def test_occupancy_estimate(self):
        """Test the closed-form occupancy estimates are in range."""
        s0, s1 = analytic.channel_occupancy_estimates(200, 38, 14, 2)
        self.assertAlmostEqual(s0, 0.3415, delta=1e-4)
        self.assertAlmostEqual(s1, 0.0171, delta=1e-4)

    def test_success_probability(self):
        """Test the light-weight success probability."""
        params = modified(38, 14, 2, 1)
        self.assertAlmostEqual(success_probability(params, self.stats), run(params, self.stats).ptilde, places=14)

    def test_stepwise_agrees(self):
        """Test closed-form and stepwise modified runs."""
        for s in (0, 1):
            params = modified(10, 6, 3, s)
            a = run_modified(params, CoherentStatistics(5.0))
            b = run_modified(params, CoherentStatistics(5.0), stepwise=True)
            self.assertAlmostEqual(a.ptilde, b.ptilde, places=13)

    def test_rejects_slaz(self):
        """Test that run_modified refuses full-scheme parameters."""
        with self.assertRaises(InvalidParamsError):
            run_modified(slaz(5, 5, 0), self.stats)


class TestOccupancyProfile(unittest.TestCase):
    """Test cases for the full occupancy profile."""

    def test_profile_length(self):
        """Test one entry per inner splitter."""
        profile = channel_occupancy_profile(slaz(4, 5, 1), CoherentStatistics(3.0))
        self.assertEqual(len(profile), 15)

    def test_profile_maximum_matches_run(self):
        """Test the profile peak against the run's reported peak."""
        for s in (0, 1):
            params = modified(12, 8, 3, s)
            for stats in (CoherentStatistics(7.0), FockStatistics(3)):
                profile = channel_occupancy_profile(params, stats)
                outcome = run(params, stats)
                self.assertAlmostEqual(profile.maximum()[2], outcome.max_channel_occupancy, places=12)

    def test_blocking_chain_peaks_first(self):
        """Test that each s = 1 chain holds its largest occupancy at its first entry."""
        for stats in (CoherentStatistics(7.0), FockStatistics(3)):
            profile = channel_occupancy_profile(modified(12, 8, 3, 1), stats)
            for m in np.unique(profile.outer):
                chain = profile.occupancy[profile.outer == m]
                self.assertEqual(int(np.argmax(chain)), 0)

    def test_coherent_profile(self):
        """Test that coherent entries are mu beta2^2."""
        mu, M, N = 4.0, 3, 4
        profile = channel_occupancy_profile(slaz(M, N, 0), CoherentStatistics(mu))
        first = [value for m, n, value in profile if m == 1]
        theta_M, theta_N = math.pi / (2 * M), math.pi / (2 * N)
        expected = [mu * math.sin(theta_M) ** 2 * math.sin(n * theta_N) ** 2 for n in range(1, N + 1)]
        np.testing.assert_allclose(first, expected, rtol=1e-12)


if __name__ == "__main__":
    unittest.main()
