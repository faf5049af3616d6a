import math

import numpy as np
from django.test import SimpleTestCase

from irsnoma.analytic import NomaConfig, noma_thresholds, outage_bounds_noma, outage_bounds_oma
from irsnoma.channel import ScenarioParams, draw_unordered_gains, order_gains
from irsnoma.choices import Scenario, Scheme
from irsnoma.exceptions import InfeasibleAllocation, InvalidParameter, LengthMismatch
from irsnoma.fading import RngStream
from irsnoma.montecarlo import (
    BATCH_SIZE,
    FdrParams,
    OutageEstimate,
    estimate_outage,
    estimate_outage_fdr,
    estimate_outage_fdr_sweep,
    estimate_outage_sweep,
    fdr_outage_events,
    from_db,
    gain_ratio,
    outage_events,
)

S1 = ScenarioParams()
S2 = ScenarioParams(scenario=Scenario.WITH_DIRECT_LINK)
DEFAULT_NOMA = NomaConfig.default_allocation(2)


def intervals_overlap(first, second, slack=1.0):
    """True when the two CIs are within ``slack`` times their combined width."""
    gap = abs(first.p_hat - second.p_hat)
    combined = (first.ci_high - first.ci_low) + (second.ci_high - second.ci_low)
    return gap <= slack * combined


class OutageEstimateTest(SimpleTestCase):
    def test_from_counts(self):
        estimate = OutageEstimate.from_counts(50, 1000, 1, 10.0)
        self.assertEqual(estimate.p_hat, 0.05)
        self.assertLessEqual(estimate.ci_low, estimate.p_hat)
        self.assertGreaterEqual(estimate.ci_high, estimate.p_hat)
        self.assertEqual(estimate.status, 'ok')

    def test_interval_shrinks_with_trials(self):
        small = OutageEstimate.from_counts(50, 1000, 1, 10.0)
        large = OutageEstimate.from_counts(5000, 100_000, 1, 10.0)
        self.assertLess(large.ci_high - large.ci_low, (small.ci_high - small.ci_low) / 5)

    def test_zero_failures(self):
        estimate = OutageEstimate.from_counts(0, 10_000, 2, 30.0)
        self.assertEqual(estimate.p_hat, 0.0)
        self.assertEqual(estimate.ci_low, 0.0)
        self.assertGreater(estimate.ci_high, 0.0)
        self.assertTrue(estimate.insufficient_failures)
        self.assertEqual(estimate.status, 'insufficient-failures')


class EstimateOutageTest(SimpleTestCase):
    def test_vanishing_snr_always_fails(self):
        for scheme in (Scheme.NOMA, Scheme.OMA):
            estimates = estimate_outage(S1, DEFAULT_NOMA, scheme, from_db(-60.0), 10_000, RngStream(1))
            self.assertEqual([e.p_hat for e in estimates], [1.0, 1.0])
            self.assertAlmostEqual(estimates[0].rho_db, -60.0)

    def test_zero_thresholds_never_fail(self):
        estimates = estimate_outage(S1, DEFAULT_NOMA, Scheme.NOMA, 1.0, 10_000, RngStream(1), thresholds=[0.0, 0.0])
        self.assertEqual([e.failures for e in estimates], [0, 0])

    def test_outage_is_ordered_gain_below_threshold(self):
        rho = from_db(15.0)
        trials = 20_000
        estimates = estimate_outage(S1, DEFAULT_NOMA, Scheme.NOMA, rho, trials, RngStream(5))

        gains = draw_unordered_gains(S1, RngStream(5).generator(0), trials)
        ordered, _ = order_gains(gains)
        thresholds = noma_thresholds(DEFAULT_NOMA.alphas, DEFAULT_NOMA.rates, rho).rho_tilde_max
        events = outage_events(ordered, thresholds)
        self.assertEqual([e.failures for e in estimates], events.sum(axis=0).tolist())
        self.assertEqual([e.user_index for e in estimates], [1, 2])

    def test_outage_events_strict_inequality(self):
        events = outage_events(np.array([[1.0, 2.0]]), np.array([1.0, 4.5]))
        np.testing.assert_array_equal(events, [[False, True]])

    def test_reproducible_and_worker_independent(self):
        trials = 2 * BATCH_SIZE + 123
        first = estimate_outage(S2, DEFAULT_NOMA, Scheme.NOMA, from_db(5.0), trials, RngStream(9), workers=1)
        second = estimate_outage(S2, DEFAULT_NOMA, Scheme.NOMA, from_db(5.0), trials, RngStream(9), workers=3)
        self.assertEqual(first, second)
        self.assertEqual(first[0].trials, trials)

    def test_sweep_monotone_in_snr(self):
        rhos = [from_db(v) for v in (0.0, 5.0, 10.0, 15.0)]
        sweep = estimate_outage_sweep(S1, DEFAULT_NOMA, Scheme.NOMA, rhos, 50_000, RngStream(2))
        for n in range(2):
            failures = [point[n].failures for point in sweep]
            self.assertEqual(failures, sorted(failures, reverse=True))

    def test_oma_users_exchangeable(self):
        for params in (S1, S2):
            first, second = estimate_outage(params, DEFAULT_NOMA, Scheme.OMA, from_db(5.0), 200_000, RngStream(4))
            self.assertTrue(intervals_overlap(first, second))

    def test_fast_path_agrees(self):
        full = estimate_outage(S1, DEFAULT_NOMA, Scheme.NOMA, from_db(5.0), 200_000, RngStream(4))
        fast = estimate_outage(S1, DEFAULT_NOMA, Scheme.NOMA, from_db(5.0), 200_000, RngStream(4), fast_path=True)
        for a, b in zip(full, fast):
            self.assertTrue(intervals_overlap(a, b))

    def test_bounds_sandwich(self):
        # points with too few failures say nothing about the bounds
        snrs_db = ((S1, (20.0, 25.0, 30.0)), (S2, (15.0, 20.0, 25.0)))
        for params, rhos_db in snrs_db:
            rhos = [from_db(rho_db) for rho_db in rhos_db]
            for scheme in (Scheme.NOMA, Scheme.OMA):
                sweep = estimate_outage_sweep(params, DEFAULT_NOMA, scheme, rhos, 2_000_000, RngStream(3))
                checked = 0
                for rho, estimates in zip(rhos, sweep):
                    for n, estimate in enumerate(estimates, start=1):
                        if estimate.failures < 100:
                            continue
                        if scheme == Scheme.NOMA:
                            thresholds = noma_thresholds(DEFAULT_NOMA.alphas, DEFAULT_NOMA.rates, rho)
                            bounds = outage_bounds_noma(n, params, thresholds)
                        else:
                            bounds = outage_bounds_oma(params, DEFAULT_NOMA.rates, rho)
                        msg = f'{params.scenario} {scheme} U{n} rho={rho:g}'
                        self.assertLessEqual(estimate.ci_low, 2 * bounds.upper, msg=msg)
                        self.assertGreaterEqual(estimate.ci_high, 0.5 * bounds.lower, msg=msg)
                        checked += 1
                self.assertGreater(checked, 0, msg=f'{params.scenario} {scheme}')

    def test_rare_events_logged(self):
        with self.assertLogs('irsnoma.montecarlo', level='WARNING') as logs:
            estimate_outage(S1, DEFAULT_NOMA, Scheme.NOMA, from_db(40.0), 10_000, RngStream(1))
        self.assertIn('failures', logs.output[0])

    def test_errors(self):
        with self.assertRaises(InvalidParameter):
            estimate_outage(S1, DEFAULT_NOMA, Scheme.NOMA, 1.0, 0, RngStream(1))
        with self.assertRaises(LengthMismatch):
            estimate_outage(S1.with_changes(N=3), DEFAULT_NOMA, Scheme.NOMA, 1.0, 100, RngStream(1))
        with self.assertRaises(InfeasibleAllocation):
            estimate_outage(S1, NomaConfig((0.5, 0.5), (1.0, 1.0)), Scheme.NOMA, 1.0, 100, RngStream(1))
        with self.assertRaises(InvalidParameter):
            estimate_outage(S1, DEFAULT_NOMA, Scheme.FDR, 1.0, 100, RngStream(1))


class GainRatioTest(SimpleTestCase):
    trials = 200_000

    def test_continuous_is_one(self):
        self.assertEqual(gain_ratio(S1.with_changes(b=None), 10, RngStream(1)), 1.0)

    def test_increases_with_resolution(self):
        ratios = [gain_ratio(S1.with_changes(b=b), self.trials, RngStream(6)) for b in (1, 2, 3, 4)]
        for earlier, later in zip(ratios, ratios[1:]):
            self.assertLess(earlier, later)
        for b, ratio in zip((1, 2, 3, 4), ratios):
            self.assertGreaterEqual(ratio, math.cos(math.pi / 2 ** b))
            self.assertLessEqual(ratio, 1.0)

    def test_three_bits_suffice(self):
        for params in (S1, S2):
            self.assertGreaterEqual(gain_ratio(params, self.trials, RngStream(6)), 0.95)

    def test_rejects_no_trials(self):
        with self.assertRaises(InvalidParameter):
            gain_ratio(S1, 0, RngStream(1))


class FdrTest(SimpleTestCase):
    def test_hand_evaluation(self):
        relay_fail, ud_fail = fdr_outage_events(
            np.array([[10.0]]), np.array([[0.0]]), np.array([[10.0, 10.0]]), DEFAULT_NOMA, 1.0, 0.5
        )
        np.testing.assert_array_equal(relay_fail, [[False, True]])
        np.testing.assert_array_equal(ud_fail, [[False, True]])

    def test_relay_failure_hits_every_user_needing_the_message(self):
        relay_fail, ud_fail = fdr_outage_events(
            np.array([[0.01]]), np.array([[0.0]]), np.array([[100.0, 100.0]]), DEFAULT_NOMA, 100.0, 0.5
        )
        np.testing.assert_array_equal(relay_fail, [[True, True]])
        np.testing.assert_array_equal(ud_fail, [[False, False]])

    def test_self_interference_only_hurts(self):
        rho = from_db(20.0)
        clean = estimate_outage_fdr(S1, DEFAULT_NOMA, FdrParams(self_interference=False), rho, 100_000, RngStream(8))
        noisy = estimate_outage_fdr(S1, DEFAULT_NOMA, FdrParams(), rho, 100_000, RngStream(8))
        for a, b in zip(clean, noisy):
            self.assertLessEqual(a.failures, b.failures)

    def test_relay_to_user_hop_matches_rayleigh_closed_form(self):
        rho = from_db(20.0)
        theta = noma_thresholds(DEFAULT_NOMA.alphas, DEFAULT_NOMA.rates, 0.5 * rho).rho_tilde_max
        trials = 1_000_000
        z = np.random.default_rng(12).exponential(size=(trials, 2))
        relay_fail, ud_fail = fdr_outage_events(
            np.full((trials, 1), 1e12), np.zeros((trials, 1)), z, DEFAULT_NOMA, rho, 0.5
        )
        self.assertFalse(relay_fail.any())
        for n in (1, 2):
            single_hop = -math.expm1(-theta[n - 1])
            sigma = math.sqrt(single_hop * (1 - single_hop) / trials)
            self.assertAlmostEqual(ud_fail[:, n - 1].mean(), single_hop, delta=5 * sigma)

    def test_dual_hop_never_below_single_hop(self):
        rho = from_db(20.0)
        theta = noma_thresholds(DEFAULT_NOMA.alphas, DEFAULT_NOMA.rates, 0.5 * rho).rho_tilde_max
        estimates = estimate_outage_fdr(S1, DEFAULT_NOMA, FdrParams(self_interference=False), rho, 500_000, RngStream(8))
        for n, estimate in enumerate(estimates, start=1):
            self.assertGreaterEqual(estimate.ci_high, -math.expm1(-theta[n - 1]), msg=f'U{n}')

    def test_floor_at_high_snr(self):
        sweep = estimate_outage_fdr_sweep(
            S1, DEFAULT_NOMA, FdrParams(), [from_db(50.0), from_db(60.0)], 1_000_000, RngStream(8)
        )
        for at_50, at_60 in zip(*sweep):
            self.assertGreater(at_60.failures, 0)
            self.assertTrue(intervals_overlap(at_50, at_60, slack=3.0))

    def test_worse_than_irs_noma(self):
        rho = from_db(30.0)
        relay = estimate_outage_fdr(S1, DEFAULT_NOMA, FdrParams(), rho, 200_000, RngStream(8))
        irs = estimate_outage(S1, DEFAULT_NOMA, Scheme.NOMA, rho, 200_000, RngStream(8))
        self.assertGreater(relay[0].p_hat, irs[0].p_hat)

    def test_power_split_range(self):
        for split in (0.0, 1.0):
            with self.assertRaises(InvalidParameter):
                FdrParams(power_split=split)
