"""Numerical-convolution check of the small-argument constants.

The density of ``Q = sum_k |G_k||g_k|`` is built by convolving K copies of the
product-Nakagami density (Bessel-K form) on a fine grid; with a direct link
the Nakagami density of ``|h|`` is convolved in as well. Only values on
[0, GRID_END] are needed since every term is nonnegative.
"""
import numpy as np
from django.test import SimpleTestCase
from scipy import integrate, special, stats

from irsnoma.analytic import constants
from irsnoma.channel import ScenarioParams
from irsnoma.choices import Scenario

GRID_STEP = 1e-5
GRID_END = 0.05
CHECK_POINT = 0.01

CASES = [(2.0, 1.0, 1.0, 1), (2.0, 1.0, 1.0, 2), (3.0, 1.0, 1.0, 2), (2.0, 1.0, 2.0, 1)]


def grid():
    return np.arange(0.0, GRID_END + GRID_STEP / 2, GRID_STEP)


def product_density(m1, m2, q):
    density = np.zeros_like(q)
    w = q[1:]
    scale = 4 * (m1 * m2) ** ((m1 + m2) / 2) / (special.gamma(m1) * special.gamma(m2))
    density[1:] = scale * w ** (m1 + m2 - 1) * special.kv(abs(m1 - m2), 2 * np.sqrt(m1 * m2) * w)
    return density


def nakagami_density(m, x):
    return 2 * m ** m / special.gamma(m) * x ** (2 * m - 1) * np.exp(-m * x ** 2)


def convolve(f, g):
    return np.convolve(f, g)[:len(f)] * GRID_STEP


def reflected_density(m_G, m_g, K, q):
    single = product_density(m_G, m_g, q)
    density = single
    for _ in range(K - 1):
        density = convolve(density, single)
    return density


def cdf(density, q):
    return integrate.cumulative_trapezoid(density, q, initial=0.0)


def loglog_slope(F, q):
    window = (q >= 0.005) & (q <= GRID_END)
    picks = np.flatnonzero(window)[::50]
    return stats.linregress(np.log(q[picks]), np.log(F[picks])).slope


class ConvolutionOracleTest(SimpleTestCase):
    def setUp(self):
        self.q = grid()
        self.check = int(round(CHECK_POINT / GRID_STEP))

    def params(self, m_G, m_g, m_h, K):
        return ScenarioParams(scenario=Scenario.WITH_DIRECT_LINK, K=K, b=None, beta=1.0, m_G=m_G, m_g=m_g, m_h=m_h)

    def test_reflected_sum(self):
        for m_G, m_g, m_h, K in CASES:
            c = constants(self.params(m_G, m_g, m_h, K))
            exponent = 2 * c.m_s * K
            F = cdf(reflected_density(m_G, m_g, K, self.q), self.q)
            ratio = F[self.check] / (c.zeta1 * CHECK_POINT ** exponent)
            self.assertTrue(0.8 <= ratio <= 1.2, msg=f"{(m_G, m_g, K)}: ratio {ratio:.4f}")
            slope = loglog_slope(F, self.q)
            self.assertAlmostEqual(slope / exponent, 1.0, delta=0.1, msg=f"{(m_G, m_g, K)}: slope {slope:.4f}")

    def test_with_direct_link(self):
        for m_G, m_g, m_h, K in CASES:
            c = constants(self.params(m_G, m_g, m_h, K))
            exponent = 2 * m_h + 2 * c.m_s * K
            density = convolve(nakagami_density(m_h, self.q), reflected_density(m_G, m_g, K, self.q))
            F = cdf(density, self.q)
            ratio = F[self.check] / (c.zeta2 * CHECK_POINT ** exponent)
            self.assertTrue(0.8 <= ratio <= 1.2, msg=f"{(m_G, m_g, m_h, K)}: ratio {ratio:.4f}")
            slope = loglog_slope(F, self.q)
            self.assertAlmostEqual(slope / exponent, 1.0, delta=0.1, msg=f"{(m_G, m_g, m_h, K)}: slope {slope:.4f}")

    def test_grid_density_integrates_to_cdf(self):
        # a single product term; the exact CDF near zero is 4 q^2 / 2 for (2, 1)
        F = cdf(product_density(2.0, 1.0, self.q), self.q)
        self.assertAlmostEqual(F[self.check] / (2.0 * CHECK_POINT ** 2), 1.0, delta=0.01)
