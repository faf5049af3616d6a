import math

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose, assert_array_equal
from scipy import stats

from irsnoma.analytic import (
    NomaConfig,
    base_exponent,
    constants,
    diversity_order,
    gamma_fn,
    noma_thresholds,
    order_statistic_cdf,
    ordered_cdf_s1,
    ordered_cdf_s2,
    outage_bounds_noma,
    outage_bounds_oma,
    oma_target_sinr,
)
from irsnoma.channel import (
    ChannelRealization,
    ScenarioParams,
    draw_ordered_gains,
    draw_realization,
    draw_unordered_gains,
    equivalent_gain_s1,
    equivalent_gain_s2,
    order_gains,
    user_gains,
)
from irsnoma.choices import CdfMode, Scenario, Scheme
from irsnoma.exceptions import InfeasibleAllocation, InvalidParameter, LengthMismatch, UnsupportedParameters
from irsnoma.fading import TWO_PI, FadingParam, RngStream, sample_complex, sample_nakagami_magnitude, wrap_phase
from irsnoma.phase import (
    IrsSetting,
    PhaseCodebook,
    optimal_phases_s1,
    optimal_phases_s2,
    quantization_error,
    quantize,
)

S1 = ScenarioParams()
S2 = ScenarioParams(scenario=Scenario.WITH_DIRECT_LINK)


def rng(seed=7, stream_id=0):
    return RngStream(seed, stream_id).generator()


def magnitude_and_phase(coefficient):
    return np.abs(coefficient), wrap_phase(np.angle(coefficient))


class FadingParamTest(SimpleTestCase):
    def test_rejects_small_shape(self):
        with self.assertRaises(InvalidParameter):
            FadingParam(0.4)

    def test_rejects_nonpositive_spread(self):
        with self.assertRaises(InvalidParameter):
            FadingParam(1.0, 0.0)

    def test_error_code(self):
        with self.assertRaises(InvalidParameter) as ctx:
            FadingParam(0.1)
        self.assertEqual(ctx.exception.code, 'invalid-parameter')


class NakagamiSamplingTest(SimpleTestCase):
    samples = 1_000_000

    def test_mean_square_matches_omega(self):
        for m in (0.5, 1.0, 2.0, 3.5):
            power = sample_nakagami_magnitude(FadingParam(m), rng(), self.samples) ** 2
            standard_error = math.sqrt(1.0 / m / self.samples)
            self.assertLess(abs(power.mean() - 1.0), 4 * standard_error, msg=f"m={m}")

    def test_rayleigh_power_mean(self):
        power = sample_nakagami_magnitude(FadingParam(1.0), rng(), self.samples) ** 2
        self.assertTrue(0.997 <= power.mean() <= 1.003)

    def test_power_variance_for_m2(self):
        power = sample_nakagami_magnitude(FadingParam(2.0), rng(), self.samples) ** 2
        self.assertAlmostEqual(power.var(), 0.5, delta=0.006)

    def test_scale_equivariance(self):
        base = sample_nakagami_magnitude(FadingParam(1.0, 1.0), rng(), 1000)
        scaled = sample_nakagami_magnitude(FadingParam(1.0, 4.0), rng(), 1000)
        assert_allclose(scaled, 2.0 * base, rtol=1e-12)

    def test_rayleigh_cdf(self):
        magnitude = sample_nakagami_magnitude(FadingParam(1.0), rng(), self.samples)
        result = stats.kstest(magnitude, lambda x: 1.0 - np.exp(-x ** 2))
        self.assertLess(result.statistic, 0.005)


class ComplexSamplingTest(SimpleTestCase):
    samples = 1_000_000

    def test_phase_uniform(self):
        _, phase = magnitude_and_phase(sample_complex(FadingParam(2.0), rng(), self.samples))
        counts, _ = np.histogram(phase, bins=32, range=(0.0, TWO_PI))
        self.assertGreater(stats.chisquare(counts).pvalue, 0.001)

    def test_magnitude_and_phase_uncorrelated(self):
        magnitude, phase = magnitude_and_phase(sample_complex(FadingParam(1.0), rng(), self.samples))
        self.assertLess(abs(np.corrcoef(magnitude, phase)[0, 1]), 0.01)

    def test_phase_range(self):
        _, phase = magnitude_and_phase(sample_complex(FadingParam(1.0), rng(), 10_000))
        self.assertTrue(np.all(phase >= 0.0))
        self.assertTrue(np.all(phase < TWO_PI))

    def test_same_stream_reproduces(self):
        first = sample_complex(FadingParam(1.0), rng(3, 5), 1000)
        second = sample_complex(FadingParam(1.0), rng(3, 5), 1000)
        assert_array_equal(first, second)

    def test_distinct_streams_uncorrelated(self):
        first = sample_nakagami_magnitude(FadingParam(1.0), rng(3, 0), 100_000)
        second = sample_nakagami_magnitude(FadingParam(1.0), rng(3, 1), 100_000)
        self.assertFalse(np.array_equal(first, second))
        self.assertLess(abs(np.corrcoef(first, second)[0, 1]), 0.02)

    def test_wrap_phase_never_returns_two_pi(self):
        self.assertEqual(float(wrap_phase(-1e-20)), 0.0)
        self.assertAlmostEqual(float(wrap_phase(-math.pi / 2)), 1.5 * math.pi)


class PhaseCodebookTest(SimpleTestCase):
    def test_levels(self):
        cb = PhaseCodebook(2)
        self.assertEqual(cb.L, 4)
        self.assertAlmostEqual(cb.delta, math.pi / 2)
        assert_allclose(cb.levels, [math.pi / 4, 3 * math.pi / 4, 5 * math.pi / 4, 7 * math.pi / 4])

    def test_rejects_zero_bits(self):
        with self.assertRaises(InvalidParameter):
            PhaseCodebook(0)

    def test_irs_setting_rejects_zero_beta(self):
        with self.assertRaises(InvalidParameter):
            IrsSetting(0.0, np.zeros(2))

    def test_irs_setting_element_count(self):
        self.assertEqual(IrsSetting(0.9, np.zeros((5, 2, 4))).K, 4)


class QuantizeTest(SimpleTestCase):
    def test_hand_example(self):
        self.assertAlmostEqual(float(quantize(0.3, PhaseCodebook(2))), math.pi / 4)

    def test_level_is_fixed_point(self):
        cb = PhaseCodebook(3)
        self.assertAlmostEqual(float(quantize(cb.delta / 2, cb)), cb.delta / 2)
        self.assertAlmostEqual(float(quantization_error(cb.delta / 2, cb)), 0.0)

    def test_fine_codebook_error(self):
        targets = np.random.default_rng(1).uniform(-10, 10, 10_000)
        error = quantization_error(targets, PhaseCodebook(10))
        self.assertTrue(np.all(np.abs(error) <= math.pi / 1024 + 1e-15))

    def test_error_half_open_range(self):
        cb = PhaseCodebook(3)
        targets = np.random.default_rng(2).uniform(-20, 20, 100_000)
        error = quantization_error(targets, cb)
        self.assertTrue(np.all(error >= -cb.delta / 2 - 1e-12))
        self.assertTrue(np.all(error < cb.delta / 2 + 1e-12))

    def test_error_range_at_cell_boundaries(self):
        for b in range(1, 12):
            cb = PhaseCodebook(b)
            edges = cb.delta * np.arange(-2 * cb.L, 2 * cb.L + 1)
            targets = np.concatenate([edges, np.nextafter(edges, -np.inf), np.nextafter(edges, np.inf)])
            error = quantization_error(targets, cb)
            self.assertTrue(np.all(error >= -cb.delta / 2), msg=f"b={b}")
            self.assertTrue(np.all(error < cb.delta / 2), msg=f"b={b}")

    def test_output_in_codebook(self):
        cb = PhaseCodebook(3)
        quantized = quantize(np.linspace(-7, 7, 1001), cb)
        distance = np.min(np.abs(quantized[:, np.newaxis] - cb.levels[np.newaxis, :]), axis=1)
        self.assertTrue(np.all(distance < 1e-12))


class OptimalPhasesTest(SimpleTestCase):
    def test_zero_angle_channels(self):
        G = np.ones(4, dtype=complex)
        g = np.ones(4, dtype=complex)
        phases = optimal_phases_s1(G, g, PhaseCodebook(2))
        assert_allclose(phases, np.full(4, math.pi / 4))

    def test_residual_uniform(self):
        cb = PhaseCodebook(3)
        realization = draw_realization(ScenarioParams(N=1, K=1), rng(), 1_000_000)
        G, g = realization.G[:, 0, :], realization.g[:, 0, :]
        phases = optimal_phases_s1(G, g, cb)
        residual = np.angle(np.exp(1j * (phases + np.angle(G * g)))).ravel()
        result = stats.kstest(residual, stats.uniform(loc=-cb.delta / 2, scale=cb.delta).cdf)
        self.assertGreater(result.pvalue, 0.001)

    def test_length_mismatch(self):
        with self.assertRaises(LengthMismatch):
            optimal_phases_s1(np.ones(3), np.ones(2), PhaseCodebook(2))
        with self.assertRaises(LengthMismatch):
            optimal_phases_s2(1.0, np.ones(3), np.ones(2), None)

    def test_theta_tilde_irrelevant_for_continuous(self):
        realization = draw_realization(ScenarioParams(N=1, K=4), rng())
        G, g = realization.G[0], realization.g[0]
        reference = equivalent_gain_s1(G, g, IrsSetting(0.9, optimal_phases_s1(G, g, None)))
        rotated = equivalent_gain_s1(G, g, IrsSetting(0.9, optimal_phases_s1(G, g, None, theta_tilde=1.1)))
        self.assertAlmostEqual(float(reference), float(rotated))


class EquivalentGainTest(SimpleTestCase):
    def setUp(self):
        self.realization = draw_realization(ScenarioParams(scenario=Scenario.WITH_DIRECT_LINK, N=1, K=4), rng(), 2000)
        self.G = self.realization.G[:, 0, :]
        self.g = self.realization.g[:, 0, :]
        self.h = self.realization.h[:, 0]
        self.cascade = np.sum(np.abs(self.G) * np.abs(self.g), axis=-1)

    def test_single_element_continuous(self):
        G, g = self.G[0, :1], self.g[0, :1]
        gain = equivalent_gain_s1(G, g, IrsSetting(0.9, optimal_phases_s1(G, g, None)))
        self.assertAlmostEqual(float(gain), 0.9 * abs(G[0]) * abs(g[0]))

    def test_hand_example(self):
        setting = IrsSetting(0.9, np.array([math.pi / 4, 7 * math.pi / 4]), PhaseCodebook(2))
        gain = equivalent_gain_s1(np.ones(2), np.ones(2), setting)
        self.assertAlmostEqual(float(gain), 0.9 * math.sqrt(2))

    def test_discrete_bounds_s1(self):
        cb = PhaseCodebook(3)
        gain = equivalent_gain_s1(self.G, self.g, IrsSetting(0.9, optimal_phases_s1(self.G, self.g, cb), cb))
        self.assertTrue(np.all(gain >= 0.9 * math.cos(math.pi / 8) * self.cascade - 1e-12))
        self.assertTrue(np.all(gain <= 0.9 * self.cascade + 1e-12))

    def test_continuous_s2_is_coherent_sum(self):
        phases = optimal_phases_s2(self.h, self.G, self.g, None)
        gain = equivalent_gain_s2(self.h, self.G, self.g, IrsSetting(0.9, phases))
        assert_allclose(gain, np.abs(self.h) + 0.9 * self.cascade, rtol=1e-12)

    def test_discrete_s2_lower_bound(self):
        cb = PhaseCodebook(3)
        phases = optimal_phases_s2(self.h, self.G, self.g, cb)
        gain = equivalent_gain_s2(self.h, self.G, self.g, IrsSetting(0.9, phases, cb))
        self.assertTrue(np.all(gain >= np.abs(self.h) + 0.9 * math.cos(math.pi / 8) * self.cascade - 1e-12))

    def test_no_elements_leaves_direct_link(self):
        empty = np.zeros(0, dtype=complex)
        gain = equivalent_gain_s2(self.h[0], empty, empty, IrsSetting(0.9, np.zeros(0)))
        self.assertAlmostEqual(float(gain), abs(self.h[0]))

    def test_direct_link_never_hurts_continuous(self):
        s1 = equivalent_gain_s1(self.G, self.g, IrsSetting(0.9, optimal_phases_s1(self.G, self.g, None)))
        s2 = equivalent_gain_s2(self.h, self.G, self.g, IrsSetting(0.9, optimal_phases_s2(self.h, self.G, self.g, None)))
        self.assertTrue(np.all(s2 >= s1 - 1e-12))

    def test_discrete_never_beats_continuous(self):
        for params in (ScenarioParams(N=1, K=4, b=2), ScenarioParams(scenario=Scenario.WITH_DIRECT_LINK, N=1, K=4, b=2)):
            discrete = user_gains(self.realization, params, params.codebook)
            continuous = user_gains(self.realization, params, None)
            self.assertTrue(np.all(discrete <= continuous + 1e-12))

    def test_length_mismatch(self):
        with self.assertRaises(LengthMismatch):
            equivalent_gain_s1(np.ones(3), np.ones(3), IrsSetting(0.9, np.zeros(2)))
        with self.assertRaises(LengthMismatch):
            ChannelRealization(G=np.ones((2, 3)), g=np.ones((2, 2)))


class ScenarioParamsTest(SimpleTestCase):
    def test_defaults_follow_default_allocation(self):
        self.assertEqual((S1.N, S1.K, S1.b, S1.beta, S1.m_G, S1.m_g, S1.m_h), (2, 2, 3, 0.9, 2.0, 1.0, 1.0))

    def test_invalid(self):
        for changes in ({'N': 0}, {'K': 0}, {'beta': 1.5}, {'m_G': 0.3}, {'b': 0}, {'scenario': 'III'}):
            with self.assertRaises(InvalidParameter, msg=str(changes)):
                ScenarioParams(**changes)

    def test_continuous(self):
        params = S1.with_changes(b=None)
        self.assertTrue(params.is_continuous)
        self.assertIsNone(params.codebook)


class OrderedGainsTest(SimpleTestCase):
    def test_single_user(self):
        vector = draw_ordered_gains(ScenarioParams(N=1), rng())
        self.assertEqual(vector.gains.shape, (1,))
        assert_array_equal(vector.permutation, [0])

    def test_sorted_with_bijective_permutation(self):
        generator = rng()
        for _ in range(50):
            vector = draw_ordered_gains(ScenarioParams(N=4), generator)
            self.assertTrue(np.all(np.diff(vector.gains) >= 0))
            assert_array_equal(np.sort(vector.permutation), np.arange(4))

    def test_ties_keep_lower_index_first(self):
        gains, permutation = order_gains(np.array([0.5, 0.2, 0.5]))
        assert_array_equal(gains, [0.2, 0.5, 0.5])
        assert_array_equal(permutation, [1, 0, 2])

    def test_minimum_of_three(self):
        gains = draw_unordered_gains(ScenarioParams(N=3), rng(), 200_000)
        ordered, _ = order_gains(gains)
        grid = np.quantile(gains, np.linspace(0.01, 0.99, 99))
        unordered_cdf = np.searchsorted(np.sort(gains.ravel()), grid, side='right') / gains.size
        minimum_cdf = np.searchsorted(np.sort(ordered[:, 0]), grid, side='right') / len(ordered)
        self.assertLess(np.max(np.abs(minimum_cdf - (1.0 - (1.0 - unordered_cdf) ** 3))), 0.01)

    def test_order_statistics_consistency(self):
        for N in (2, 3):
            gains = draw_unordered_gains(ScenarioParams(N=N), rng(11), 300_000)
            ordered, _ = order_gains(gains)
            pooled = np.sort(gains.ravel())
            grid = np.quantile(pooled, np.linspace(0.005, 0.995, 199))
            F = np.searchsorted(pooled, grid, side='right') / pooled.size
            for n in range(1, N + 1):
                empirical = np.searchsorted(np.sort(ordered[:, n - 1]), grid, side='right') / len(ordered)
                predicted = order_statistic_cdf(F, n, N)
                self.assertLess(np.max(np.abs(empirical - predicted)), 0.01, msg=f"N={N}, n={n}")

    def test_users_exchangeable(self):
        for params in (S1, S2):
            gains = draw_unordered_gains(params, rng(), 200_000)
            self.assertLess(stats.ks_2samp(gains[:, 0], gains[:, 1]).statistic, 0.01)

    def test_fast_path_matches_full_computation(self):
        for params in (S1, S2, S1.with_changes(b=1)):
            full = draw_unordered_gains(params, rng(1), 200_000).ravel()
            fast = draw_unordered_gains(params, rng(2), 200_000, fast_path=True).ravel()
            self.assertLess(stats.ks_2samp(full, fast).statistic, 0.01, msg=str(params))


class GammaFunctionTest(SimpleTestCase):
    def test_identities(self):
        self.assertAlmostEqual(gamma_fn(1.0), 1.0, places=12)
        self.assertAlmostEqual(gamma_fn(0.5), math.sqrt(math.pi), places=12)
        self.assertAlmostEqual(gamma_fn(5.0), 24.0, places=10)
        self.assertAlmostEqual(gamma_fn(2.5), 1.5 * 0.5 * math.sqrt(math.pi), places=12)

    def test_matches_math_gamma(self):
        for x in np.linspace(0.05, 50, 200):
            self.assertLess(abs(gamma_fn(x) / math.gamma(x) - 1.0), 1e-10)

    def test_domain(self):
        for x in (0.0, -1.5):
            with self.assertRaises(InvalidParameter):
                gamma_fn(x)


class ConstantsTest(SimpleTestCase):
    def test_reflection_floor(self):
        self.assertAlmostEqual(constants(S1).a, 0.9 * math.cos(math.pi / 8), places=12)
        self.assertAlmostEqual(constants(S1).a, 0.831492, places=6)

    def test_reference_values(self):
        c = constants(S1)
        self.assertAlmostEqual(c.phi2, 4.0, places=12)
        self.assertAlmostEqual(c.zeta1, 2.0 / 3.0, places=12)
        self.assertAlmostEqual(c.xi1, (2.0 / 3.0) / c.a ** 4, places=12)
        self.assertAlmostEqual(c.xi1, 1.395, places=2)

    def test_shape_order_does_not_matter(self):
        swapped = constants(S1.with_changes(m_G=1.0, m_g=2.0))
        self.assertAlmostEqual(swapped.zeta1, constants(S1).zeta1, places=12)

    def test_continuous_collapses_bounds(self):
        c = constants(S1.with_changes(b=None))
        self.assertEqual(c.a, 0.9)
        self.assertEqual(c.xi1, c.xi2)
        self.assertEqual(c.xi3, c.xi4)

    def test_ratio_law(self):
        c = constants(S2)
        ratio = (0.9 / c.a) ** (2 * c.m_s * S2.K)
        self.assertAlmostEqual(c.xi1 / c.xi2 / ratio, 1.0, places=12)
        self.assertAlmostEqual(c.xi3 / c.xi4 / ratio, 1.0, places=12)
        self.assertGreaterEqual(c.xi1, c.xi2)
        self.assertGreaterEqual(c.xi3, c.xi4)

    def test_unsupported(self):
        for changes in ({'m_G': 1.0}, {'b': 1}, {'omega_G': 2.0}):
            with self.assertRaises(UnsupportedParameters, msg=str(changes)):
                constants(S1.with_changes(**changes))


class OrderedCdfTest(SimpleTestCase):
    def test_origin(self):
        self.assertEqual(float(ordered_cdf_s1(0.0, 1, S1)), 0.0)
        self.assertEqual(float(ordered_cdf_s2(0.0, 2, S2)), 0.0)

    def test_single_user_collapse(self):
        params = S1.with_changes(N=1)
        y = 0.05
        self.assertAlmostEqual(float(ordered_cdf_s1(y, 1, params)), constants(params).xi1 * y ** 4, places=15)
        params = S2.with_changes(N=1)
        self.assertAlmostEqual(float(ordered_cdf_s2(y, 1, params)), constants(params).xi3 * y ** 6, places=15)

    def test_two_user_expansion(self):
        xi = constants(S1).xi1
        y = 0.1
        expected = 2 * xi * y ** 4 - xi ** 2 * y ** 8
        self.assertAlmostEqual(float(ordered_cdf_s1(y, 1, S1)), expected, places=15)
        xi3 = constants(S2).xi3
        expected = 2 * xi3 * y ** 6 - xi3 ** 2 * y ** 12
        self.assertAlmostEqual(float(ordered_cdf_s2(y, 1, S2)), expected, places=15)

    def test_continuous_mode_uses_beta(self):
        y = 0.1
        expected = 2 * constants(S1).xi2 * y ** 4 - constants(S1).xi2 ** 2 * y ** 8
        self.assertAlmostEqual(float(ordered_cdf_s1(y, 1, S1, CdfMode.CONTINUOUS_EXACT)), expected, places=15)

    def test_exponent_law(self):
        for n in (1, 2):
            ratio = ordered_cdf_s1(1e-4, n, S1) / ordered_cdf_s1(2e-4, n, S1)
            self.assertAlmostEqual(ratio / 2.0 ** (-4 * n), 1.0, delta=0.01)

    def test_order_statistic_cdf_bounds(self):
        with self.assertRaises(InvalidParameter):
            order_statistic_cdf(0.5, 0, 2)
        with self.assertRaises(InvalidParameter):
            order_statistic_cdf(0.5, 3, 2)
        self.assertAlmostEqual(float(order_statistic_cdf(1.0, 2, 3)), 1.0)

    def test_negative_gain_rejected(self):
        with self.assertRaises(InvalidParameter):
            ordered_cdf_s1(-0.1, 1, S1)


class NomaThresholdsTest(SimpleTestCase):
    def test_hand_example(self):
        thresholds = noma_thresholds((0.9, 0.1), (1.0, 1.0), 1.0)
        self.assertEqual(thresholds.gamma_tilde, (1.0, 1.0))
        self.assertAlmostEqual(thresholds.rho_tilde[0][0], 1.25)
        self.assertAlmostEqual(thresholds.rho_tilde[1][0], 1.25)
        self.assertAlmostEqual(thresholds.rho_tilde[1][1], 10.0)
        self.assertAlmostEqual(thresholds.rho_tilde_max[0], 1.25)
        self.assertAlmostEqual(thresholds.rho_tilde_max[1], 10.0)

    def test_inverse_in_rho(self):
        for N in (2, 3, 4):
            noma = NomaConfig.default_allocation(N)
            low = noma_thresholds(noma.alphas, noma.rates, 10.0)
            high = noma_thresholds(noma.alphas, noma.rates, 20.0)
            for low_row, high_row in zip(low.rho_tilde, high.rho_tilde):
                assert_allclose(np.array(high_row), np.array(low_row) / 2, rtol=1e-14)

    def test_infeasible(self):
        with self.assertRaises(InfeasibleAllocation) as ctx:
            noma_thresholds((0.5, 0.5), (1.0, 1.0), 1.0)
        self.assertEqual(ctx.exception.code, 'infeasible-allocation')
        with self.assertRaises(InfeasibleAllocation):
            noma_thresholds((0.6, 0.4), (2.0, 2.0), 1.0)

    def test_feasible_but_not_descending(self):
        with self.assertRaises(InvalidParameter):
            noma_thresholds((0.45, 0.55), (0.1, 0.1), 1.0)

    def test_invalid_allocation(self):
        with self.assertRaises(InvalidParameter):
            noma_thresholds((0.9, 0.2), (1.0, 1.0), 1.0)
        with self.assertRaises(InvalidParameter):
            noma_thresholds((0.9, 0.1), (1.0, 0.0), 1.0)
        with self.assertRaises(InvalidParameter):
            noma_thresholds((0.9, 0.1), (1.0, 1.0), 0.0)

    def test_default_allocations_feasible(self):
        for N in (2, 3, 4):
            noma = NomaConfig.default_allocation(N)
            thresholds = noma_thresholds(noma.alphas, noma.rates, 1.0)
            self.assertEqual(len(thresholds.rho_tilde_max), N)
            self.assertTrue(all(value > 0 for value in thresholds.rho_tilde_max))


class OutageBoundsTest(SimpleTestCase):
    def setUp(self):
        self.thresholds = noma_thresholds((0.9, 0.1), (1.0, 1.0), 10 ** 2.5)

    def test_first_user_hand_instantiation(self):
        bounds = outage_bounds_noma(1, S1, self.thresholds)
        expected = 2 * constants(S1).xi1 * self.thresholds.rho_tilde_max[0] ** 2
        self.assertAlmostEqual(bounds.upper / expected, 1.0, places=12)
        self.assertEqual(bounds.diversity, 2)
        self.assertEqual(bounds.scheme, Scheme.NOMA)

    def test_ratio_independent_of_snr(self):
        for params in (S1, S2):
            a = constants(params).a
            for n in (1, 2):
                for rho in (10.0, 1000.0):
                    bounds = outage_bounds_noma(n, params, noma_thresholds((0.9, 0.1), (1.0, 1.0), rho))
                    expected = (0.9 / a) ** (2 * 1.0 * params.K * n)
                    self.assertAlmostEqual(bounds.upper / bounds.lower / expected, 1.0, places=12)
                    self.assertGreater(bounds.lower, 0.0)

    def test_continuous_bounds_coincide(self):
        bounds = outage_bounds_noma(2, S2.with_changes(b=None), self.thresholds)
        self.assertEqual(bounds.upper, bounds.lower)

    def test_scenario_ii_diversity(self):
        self.assertEqual(outage_bounds_noma(1, S2, self.thresholds).diversity, 3)
        self.assertEqual(outage_bounds_noma(2, S2, self.thresholds).diversity, 6)

    def test_wrong_user_count(self):
        with self.assertRaises(InvalidParameter):
            outage_bounds_noma(1, S1.with_changes(N=3), self.thresholds)

    def test_oma(self):
        self.assertEqual(oma_target_sinr((1.0, 1.0), 2), 3.0)
        bounds = outage_bounds_oma(S1, (1.0, 1.0), 100.0)
        self.assertAlmostEqual(bounds.upper / (constants(S1).xi1 * (3.0 / 100.0) ** 2), 1.0, places=12)
        self.assertEqual(bounds.diversity, 2)
        self.assertIsNone(bounds.user_index)
        continuous = outage_bounds_oma(S1.with_changes(b=None), 1.0, 100.0)
        self.assertEqual(continuous.upper, continuous.lower)

    def test_oma_needs_common_rate(self):
        with self.assertRaises(InvalidParameter):
            outage_bounds_oma(S1, (1.0, 2.0), 100.0)


class DiversityOrderTest(SimpleTestCase):
    def test_reference_values(self):
        self.assertEqual(diversity_order(Scheme.NOMA, Scenario.NO_DIRECT_LINK, 2, S1), 4)
        self.assertEqual(diversity_order(Scheme.NOMA, Scenario.WITH_DIRECT_LINK, 1, S2), 3)
        self.assertEqual(diversity_order(Scheme.OMA, Scenario.NO_DIRECT_LINK, 1, S1), 2)

    def test_table_for_all_users(self):
        for N in (1, 2, 3, 4):
            for scenario in Scenario.values:
                params = ScenarioParams(scenario=scenario, N=N, K=3, m_G=1.5, m_g=2.5, m_h=2.0)
                d0 = 1.5 * 3 + (2.0 if scenario == Scenario.WITH_DIRECT_LINK else 0.0)
                self.assertEqual(base_exponent(params), d0)
                for n in range(1, N + 1):
                    self.assertEqual(diversity_order(Scheme.NOMA, scenario, n, params), n * d0)
                    self.assertEqual(diversity_order(Scheme.OMA, scenario, n, params), d0)

    def test_independent_of_resolution_and_beta(self):
        reference = diversity_order(Scheme.NOMA, Scenario.NO_DIRECT_LINK, 2, S1)
        for changes in ({'b': None}, {'b': 2}, {'b': 6}, {'beta': 0.5}):
            params = S1.with_changes(**changes)
            self.assertEqual(diversity_order(Scheme.NOMA, Scenario.NO_DIRECT_LINK, 2, params), reference)

    def test_no_closed_form_for_relay(self):
        with self.assertRaises(InvalidParameter):
            diversity_order(Scheme.FDR, Scenario.NO_DIRECT_LINK, 1, S1)
