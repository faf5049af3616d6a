"""Closed-form high-SNR outage analysis.

The asymptotic constants follow from the small-argument behaviour of the sum
of K products of two Nakagami-m magnitudes (and, with a direct link, of the
direct magnitude added to it). They hold only for unit-spread links with
``m_G != m_g`` and, for discrete phases, ``b >= 2``.
"""
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special

from irsnoma.channel import ScenarioParams
from irsnoma.choices import CdfMode, Scenario, Scheme
from irsnoma.exceptions import InfeasibleAllocation, InvalidParameter, UnsupportedParameters

SUM_TOLERANCE = 1e-12

DEFAULT_ALPHAS = {
    2: (0.9, 0.1),
    3: (0.7, 0.2, 0.1),
    4: (0.6, 0.25, 0.1, 0.05),
}


@dataclass(frozen=True)
class NomaConfig:
    alphas: tuple
    rates: tuple

    def __post_init__(self):
        object.__setattr__(self, 'alphas', tuple(float(a) for a in self.alphas))
        object.__setattr__(self, 'rates', tuple(float(r) for r in self.rates))
        if not self.alphas or len(self.alphas) != len(self.rates):
            raise InvalidParameter(
                f"Need one power coefficient per target rate, got {len(self.alphas)} and {len(self.rates)}"
            )

    @property
    def N(self) -> int:
        return len(self.alphas)

    @classmethod
    def default_allocation(cls, N: int, rate: float = 1.0) -> 'NomaConfig':
        if N not in DEFAULT_ALPHAS:
            raise InvalidParameter(f"No default power allocation for N={N}; set alphas explicitly")
        return cls(alphas=DEFAULT_ALPHAS[N], rates=(rate,) * N)


@dataclass(frozen=True)
class AsymptoticConstants:
    m_s: float
    m_l: float
    a: float
    phi2: float
    zeta1: float
    xi1: float
    xi2: float
    zeta2: float
    xi3: float
    xi4: float


@dataclass(frozen=True)
class NomaThresholds:
    """SIC decoding thresholds on the squared gain.

    ``rho_tilde[n-1][l-1]`` is the threshold user n must clear to decode
    user l's message (l <= n); ``rho_tilde_max[n-1]`` is the largest of them.
    """
    rho: float
    gamma_tilde: tuple
    rho_tilde: tuple
    rho_tilde_max: tuple


@dataclass(frozen=True)
class BoundSet:
    upper: float
    lower: float
    diversity: float
    scheme: str
    scenario: str
    user_index: Optional[int]


def gamma_fn(x: float) -> float:
    if not x > 0:
        raise InvalidParameter(f"Gamma function argument must be > 0 here, got {x}")
    return float(special.gamma(x))


def constants(params: ScenarioParams) -> AsymptoticConstants:
    if params.m_G == params.m_g:
        raise UnsupportedParameters("Asymptotic constants need m_G != m_g")
    if params.b is not None and params.b < 2:
        raise UnsupportedParameters(f"Asymptotic bounds need b >= 2, got b={params.b}")
    if (params.omega_G, params.omega_g, params.omega_h) != (1.0, 1.0, 1.0):
        raise UnsupportedParameters("Asymptotic constants assume unit-spread links")

    m_s, m_l = sorted((params.m_G, params.m_g))
    m_h, K, beta = params.m_h, params.K, params.beta
    a = beta if params.b is None else beta * math.cos(math.pi / 2 ** params.b)

    # leading coefficient of the Laplace transform of one |G_k||g_k| term
    phi2 = (math.sqrt(math.pi) * 4 ** (m_s - m_l + 1) * (m_s * m_l) ** m_s
            * gamma_fn(2 * m_s) * gamma_fn(2 * m_l - 2 * m_s)
            / (gamma_fn(m_s) * gamma_fn(m_l) * gamma_fn(m_l - m_s + 0.5)))
    d1 = 2 * m_s * K
    d2 = 2 * m_h + 2 * m_s * K
    zeta1 = phi2 ** K / (d1 * gamma_fn(d1))
    # the direct-link density starts as 2*m_h**m_h/Gamma(m_h) * x**(2*m_h - 1)
    zeta2 = 2 * m_h ** m_h * gamma_fn(2 * m_h) * phi2 ** K / (d2 * gamma_fn(m_h) * gamma_fn(d2))
    return AsymptoticConstants(
        m_s=m_s,
        m_l=m_l,
        a=a,
        phi2=phi2,
        zeta1=zeta1,
        xi1=zeta1 / a ** d1,
        xi2=zeta1 / beta ** d1,
        zeta2=zeta2,
        xi3=zeta2 / a ** d1,
        xi4=zeta2 / beta ** d1,
    )


def order_statistic_cdf(F, n: int, N: int):
    """CDF of the n-th smallest of N i.i.d. variables whose common CDF value is ``F``."""
    if not 1 <= n <= N:
        raise InvalidParameter(f"Order index must satisfy 1 <= n <= N, got n={n}, N={N}")
    F = np.asarray(F, dtype=float)
    coefficient = math.factorial(N) // (math.factorial(N - n) * math.factorial(n - 1))
    total = sum(
        math.comb(N - n, i) * (-1) ** i / (n + i) * F ** (n + i)
        for i in range(N - n + 1)
    )
    return coefficient * total


def base_exponent(params: ScenarioParams, scenario: Optional[str] = None) -> float:
    """Outage exponent of one unordered user: ``m_s*K`` plus ``m_h`` with a direct link."""
    scenario = scenario or params.scenario
    m_s = min(params.m_G, params.m_g)
    if scenario == Scenario.WITH_DIRECT_LINK:
        return params.m_h + m_s * params.K
    return m_s * params.K


def _ordered_cdf(x, n, params, xi, exponent):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise InvalidParameter("Gain argument must be >= 0")
    return order_statistic_cdf(xi * x ** (2 * exponent), n, params.N)


def ordered_cdf_s1(y, n: int, params: ScenarioParams, mode: str = CdfMode.UPPER_VIA_LOWER_BOUND_CDF):
    c = constants(params)
    xi = c.xi1 if mode == CdfMode.UPPER_VIA_LOWER_BOUND_CDF else c.xi2
    return _ordered_cdf(y, n, params, xi, base_exponent(params, Scenario.NO_DIRECT_LINK))


def ordered_cdf_s2(z, n: int, params: ScenarioParams, mode: str = CdfMode.UPPER_VIA_LOWER_BOUND_CDF):
    c = constants(params)
    xi = c.xi3 if mode == CdfMode.UPPER_VIA_LOWER_BOUND_CDF else c.xi4
    return _ordered_cdf(z, n, params, xi, base_exponent(params, Scenario.WITH_DIRECT_LINK))


def noma_thresholds(alphas: Sequence[float], rates: Sequence[float], rho: float) -> NomaThresholds:
    alphas = tuple(float(a) for a in alphas)
    rates = tuple(float(r) for r in rates)
    N = len(alphas)
    if N == 0 or len(rates) != N:
        raise InvalidParameter("Need one power coefficient per target rate")
    if abs(math.fsum(alphas) - 1.0) > SUM_TOLERANCE:
        raise InvalidParameter(f"Power coefficients must sum to 1, got {math.fsum(alphas)!r}")
    if any(r <= 0 for r in rates):
        raise InvalidParameter(f"Target rates must be > 0, got {rates}")
    if not rho > 0:
        raise InvalidParameter(f"Transmit SNR must be > 0, got {rho}")

    gamma_tilde = tuple(2.0 ** r - 1.0 for r in rates)
    per_message = []
    for l in range(N):
        margin = alphas[l] - gamma_tilde[l] * math.fsum(alphas[l + 1:])
        if margin <= 0:
            raise InfeasibleAllocation(
                f"SIC cannot decode message {l + 1}: alpha_{l + 1} - gamma_{l + 1} * sum(alpha_i, i > {l + 1}) = {margin:.6g}"
            )
        per_message.append(gamma_tilde[l] / (rho * margin))

    if any(later >= earlier for earlier, later in zip(alphas, alphas[1:])):
        raise InvalidParameter(f"Power coefficients must be strictly descending, got {alphas}")

    rho_tilde = tuple(tuple(per_message[:n + 1]) for n in range(N))
    return NomaThresholds(
        rho=rho,
        gamma_tilde=gamma_tilde,
        rho_tilde=rho_tilde,
        rho_tilde_max=tuple(max(row) for row in rho_tilde),
    )


def _bound_constants(params: ScenarioParams):
    c = constants(params)
    if params.has_direct_link:
        return c.xi3, c.xi4
    return c.xi1, c.xi2


def outage_bounds_noma(n: int, params: ScenarioParams, noma: NomaThresholds) -> BoundSet:
    N = params.N
    if len(noma.rho_tilde_max) != N:
        raise InvalidParameter(f"Thresholds are for {len(noma.rho_tilde_max)} users, scenario has N={N}")
    if not 1 <= n <= N:
        raise InvalidParameter(f"User index must satisfy 1 <= n <= N, got n={n}, N={N}")
    xi_upper, xi_lower = _bound_constants(params)
    exponent = n * base_exponent(params)
    weight = math.comb(N, n) * noma.rho_tilde_max[n - 1] ** exponent
    return BoundSet(
        upper=weight * xi_upper ** n,
        lower=weight * xi_lower ** n,
        diversity=diversity_order(Scheme.NOMA, params.scenario, n, params),
        scheme=Scheme.NOMA,
        scenario=params.scenario,
        user_index=n,
    )


def oma_target_sinr(rates, N: int) -> float:
    rates = tuple(np.atleast_1d(np.asarray(rates, dtype=float)))
    if any(r != rates[0] for r in rates):
        raise InvalidParameter(f"OMA bounds assume one common target rate, got {rates}")
    if rates[0] <= 0:
        raise InvalidParameter(f"Target rate must be > 0, got {rates[0]}")
    # each user holds 1/N of the resource block
    return 2.0 ** (N * rates[0]) - 1.0


def outage_bounds_oma(params: ScenarioParams, rates, rho: float) -> BoundSet:
    if not rho > 0:
        raise InvalidParameter(f"Transmit SNR must be > 0, got {rho}")
    xi_upper, xi_lower = _bound_constants(params)
    exponent = base_exponent(params)
    weight = (oma_target_sinr(rates, params.N) / rho) ** exponent
    return BoundSet(
        upper=xi_upper * weight,
        lower=xi_lower * weight,
        diversity=diversity_order(Scheme.OMA, params.scenario, 1, params),
        scheme=Scheme.OMA,
        scenario=params.scenario,
        user_index=None,
    )


def diversity_order(scheme: str, scenario: str, n: int, params: ScenarioParams) -> float:
    exponent = base_exponent(params, scenario)
    if scheme == Scheme.NOMA:
        return n * exponent
    if scheme == Scheme.OMA:
        return exponent
    raise InvalidParameter(f"No closed-form diversity order for scheme {scheme}")
