"""Closed-form outage and intercept probabilities for both schemes.

Under Rayleigh fading every squared channel gain is exponential, which makes
each outage probability Pr(C_main < R_overall) and intercept probability
Pr(C_eve > R_overall - R_secrecy) expressible in closed form:

* interference-limited forms are exact for arbitrary per-antenna statistics
  (subset enumeration over the antenna set, with an O(n) binomial grouping
  when the antennas are i.i.d.);
* interference-canceled macro outage is an exact product over antennas;
* the remaining interference-canceled forms assume i.i.d. antennas and the
  small-scale regime where the centered SBS->MU gain fluctuation
  (2**rate * sigma2_sm) is negligible.  Each of those comes in an ``integral``
  flavor (adaptive quadrature over the normalized best-antenna gain density)
  and a series flavor built on the exponential integral E1, whose extra
  premise is the interference-dominated (high-SNR) regime.

All functions return plain probabilities in [0, 1] and are pure; quadrature
workspaces are per-call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .channel import SystemConfig, Topology
from .errors import (
    ComplexityLimitError,
    ModelAssumptionError,
    ParameterError,
    SchemeInfeasibleError,
)

# Exact subset enumeration is exponential in the antenna count.
MAX_ENUM_ANTENNAS = 20

# Below this value an alternating subset/binomial sum may be dominated by
# floating-point cancellation, so the equivalent positive-integrand quadrature
# is used instead.
_CANCELLATION_FLOOR = 1e-4

_QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-12, limit=300)

_EULER_GAMMA = 0.57721566490153286060651209008240243


# --- exponential integral ------------------------------------------------------


def exp_integral_e1(x: float) -> float:
    """E1(x) = integral of exp(-t)/t from x to infinity, for x > 0.

    Power series below 1, modified-Lentz continued fraction above; absolute
    error below 1e-12 throughout [1e-8, 700].  Beyond ~700 the result
    underflows to 0.
    """
    if not (x > 0.0):
        raise ParameterError(f"E1 is defined for x > 0, got {x}")
    if x < 1.0:
        return _e1_series(x)
    return math.exp(-x) * _e1_cf(x) if x <= 700.0 else 0.0


def _e1_series(x: float) -> float:
    # E1(x) = -gamma - ln x + sum_{k>=1} (-1)^(k+1) x^k / (k * k!)
    total = -_EULER_GAMMA - math.log(x)
    term = 1.0
    for k in range(1, 60):
        term *= -x / k
        contrib = -term / k
        total += contrib
        if abs(contrib) < 1e-18 * abs(total):
            break
    return total


def _e1_cf(x: float) -> float:
    # exp(x) * E1(x) for x >= 1 via the continued fraction
    # 1/(x+1- 1/(x+3- 4/(x+5- 9/(x+7- ...)))), modified Lentz iteration.
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 200):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h


def _e1_scaled(x: float) -> float:
    """exp(x) * E1(x); stays finite for arbitrarily large x."""
    if not (x > 0.0):
        raise ParameterError(f"scaled E1 needs x > 0, got {x}")
    if math.isinf(x):
        return 0.0
    if x < 1.0:
        return math.exp(x) * _e1_series(x)
    if x > 1e16:
        # asymptotic tail; the continued fraction would converge too, this
        # just avoids pointless iterations
        return (1.0 - 1.0 / x) / x
    return _e1_cf(x)


def _x_exp_e1(x: float) -> float:
    """x * exp(x) * E1(x), extended continuously to 0 at x=0 and 1 at x=inf."""
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    return x * _e1_scaled(x)


# --- thresholds -----------------------------------------------------------------


def _snr_threshold(rate_exponent: float, gamma: float) -> float:
    """(2**rate_exponent - 1) / gamma with the 0/0 corner resolved to 0."""
    num = 2.0 ** rate_exponent - 1.0
    if num == 0.0:
        return 0.0
    if gamma == 0.0:
        return math.inf
    return num / gamma


@dataclass(frozen=True)
class Thresholds:
    """SNR-normalized decoding thresholds derived from the configured rates.

    ``delta_*`` gate the legitimate links (outage when the received SINR
    falls below ``2**R_overall - 1``); ``lambda_*`` gate the wiretap links
    (intercept when the eavesdropper's SINR exceeds
    ``2**(R_overall - R_secrecy) - 1``).
    """

    delta_m: float
    delta_s: float
    lambda_m: float
    lambda_s: float

    @classmethod
    def from_config(cls, cfg: SystemConfig) -> "Thresholds":
        return cls(
            delta_m=_snr_threshold(cfg.rate_macro_overall, cfg.gamma_m),
            delta_s=_snr_threshold(cfg.rate_small_overall, cfg.gamma_s),
            lambda_m=_snr_threshold(
                cfg.rate_macro_overall - cfg.rate_macro_secrecy, cfg.gamma_m
            ),
            lambda_s=_snr_threshold(
                cfg.rate_small_overall - cfg.rate_small_secrecy, cfg.gamma_s
            ),
        )


# --- subset machinery ------------------------------------------------------------


def _subset_sums(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For every bitmask over ``values`` return (sum over members, popcount).

    Index m of the returned arrays corresponds to the subset whose bit i is
    set iff antenna i is a member.  O(n * 2^n) time, 2^n memory.
    """
    n = len(values)
    if n > MAX_ENUM_ANTENNAS:
        raise ComplexityLimitError(
            f"subset enumeration over {n} antennas exceeds the {MAX_ENUM_ANTENNAS}-antenna cap"
        )
    size = 1 << n
    sums = np.zeros(size)
    pops = np.zeros(size, dtype=np.int64)
    for i, v in enumerate(values):
        step = 1 << i
        sums.reshape(-1, 2 * step)[:, step:] += v
        pops.reshape(-1, 2 * step)[:, step:] += 1
    return sums, pops


def _alternating_fsum(signs: np.ndarray, magnitudes: np.ndarray) -> float:
    return math.fsum((signs * magnitudes).tolist())


@lru_cache(maxsize=None)
def _binom(n: int, k: int) -> float:
    return float(math.comb(n, k))


# --- best-antenna gain density -----------------------------------------------------


@dataclass(frozen=True)
class MaxGainDensity:
    """Density of the best normalized antenna gain X = max_i |h_i|^2 / sigma2
    over n i.i.d. unit-mean exponential gains:
    p(x) = n * exp(-x) * (1 - exp(-x))**(n-1)."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ParameterError("antenna count must be >= 1")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return self.n * np.exp(-x) * (-np.expm1(-x)) ** (self.n - 1)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return (-np.expm1(-x)) ** self.n

    def expect(self, f) -> float:
        """E[f(X)] by adaptive quadrature after substituting u = exp(-x),
        which maps the half-line to (0, 1]."""
        n = self.n

        def integrand(u: float) -> float:
            return f(-math.log(u)) * n * (1.0 - u) ** (n - 1)

        value, _ = quad(integrand, 0.0, 1.0, **_QUAD_OPTS)
        return value


# --- interference-limited closed forms ----------------------------------------------


def _il_macro_outage_quad(
    delta_m: float, gamma_s: float, sigma2_am: np.ndarray, sigma2_sm: float
) -> float:
    """Cancellation-free evaluation of the macro outage probability as
    E_y[ prod_i (1 - exp(-(delta*(gamma_s*y) + delta)/sigma2_i)) ] with
    y the SBS->MU gain; exact, positive integrand."""
    scale = delta_m * gamma_s * sigma2_sm

    def integrand(u: float) -> float:
        z = scale * (-math.log(u)) + delta_m
        return float(np.prod(-np.expm1(-z / sigma2_am)))

    value, _ = quad(integrand, 0.0, 1.0, **_QUAD_OPTS)
    return value


def il_macro_outage(topology: Topology, cfg: SystemConfig) -> float:
    """Macro-cell outage probability of the interference-limited scheme.

    Exact alternating sum over the non-empty antenna subsets; i.i.d. antenna
    statistics collapse it to a binomial sum over subset cardinalities.  When
    the result is small enough for the alternating sum to lose significance,
    the equivalent positive-integrand quadrature takes over.
    """
    th = Thresholds.from_config(cfg)
    d = th.delta_m
    if d == 0.0:
        return 0.0
    sigma2_am = topology.sigma2_am
    k = d * cfg.gamma_s * topology.sigma2_sm
    if topology.iid:
        n, s = topology.n, float(sigma2_am[0])
        total = 1.0 + math.fsum(
            _binom(n, c) * (-1.0) ** c * math.exp(-c * d / s) / (1.0 + c * k / s)
            for c in range(1, n + 1)
        )
    else:
        t_sums, pops = _subset_sums(1.0 / sigma2_am)
        t, p = t_sums[1:], pops[1:]
        total = 1.0 + _alternating_fsum((-1.0) ** p, np.exp(-d * t) / (1.0 + k * t))
    if total < _CANCELLATION_FLOOR:
        total = _il_macro_outage_quad(d, cfg.gamma_s, sigma2_am, topology.sigma2_sm)
    return float(total)


def _selection_prob_quad(sigma2_am: np.ndarray, i: int) -> float:
    """Pr(antenna i has the best gain) as integral of its gain density times
    the product of the other antennas' CDFs; positive integrand."""
    s_i = sigma2_am[i]
    ratios = np.delete(sigma2_am, i)
    exponents = s_i / ratios

    def integrand(u: float) -> float:
        # u = exp(-x / s_i); the k-th CDF factor is 1 - u**(s_i/s_k)
        return float(np.prod(1.0 - u ** exponents))

    value, _ = quad(integrand, 0.0, 1.0, **_QUAD_OPTS)
    return value


def selection_probs(topology: Topology) -> np.ndarray:
    """Probability that each antenna has the largest gain to the macro user;
    sums to one."""
    n = topology.n
    if topology.iid:
        return np.full(n, 1.0 / n)
    sigma2_am = topology.sigma2_am
    if n > MAX_ENUM_ANTENNAS:
        raise ComplexityLimitError(
            f"selection probabilities for {n} non-i.i.d. antennas exceed the "
            f"{MAX_ENUM_ANTENNAS}-antenna enumeration cap"
        )
    out = np.empty(n)
    for i in range(n):
        if n == 1:
            out[i] = 1.0
            continue
        others = np.delete(sigma2_am, i)
        t_sums, pops = _subset_sums(1.0 / others)
        t, p = t_sums[1:], pops[1:]
        value = 1.0 + _alternating_fsum((-1.0) ** p, 1.0 / (1.0 + sigma2_am[i] * t))
        if value < 1e-6:
            value = _selection_prob_quad(sigma2_am, i)
        out[i] = value
    return out


def antenna_selection_prob(topology: Topology, i: int) -> float:
    """Probability that antenna ``i`` wins the gain-based selection."""
    if not 0 <= i < topology.n:
        raise ParameterError(f"antenna index {i} out of range for n={topology.n}")
    return float(selection_probs(topology)[i])


def il_small_outage(topology: Topology, cfg: SystemConfig) -> float:
    """Small-cell outage probability of the interference-limited scheme:
    selection-probability-weighted average of the per-antenna outage of the
    SBS->SU link under macro interference."""
    th = Thresholds.from_config(cfg)
    d = th.delta_s
    if d == 0.0:
        return 0.0
    if math.isinf(d):
        return 1.0
    s_ss = topology.sigma2_ss
    probs = selection_probs(topology)
    terms = 1.0 - s_ss / (s_ss + cfg.gamma_m * topology.sigma2_as * d) * math.exp(-d / s_ss)
    return float(np.dot(probs, terms))


def il_macro_intercept(topology: Topology, cfg: SystemConfig) -> float:
    """Macro-cell intercept probability of the interference-limited scheme."""
    lam = Thresholds.from_config(cfg).lambda_m
    if math.isinf(lam):
        return 0.0
    s_ae = topology.sigma2_ae
    probs = selection_probs(topology)
    terms = s_ae / (s_ae + lam * cfg.gamma_s * topology.sigma2_se) * np.exp(-lam / s_ae)
    return float(np.dot(probs, terms))


def il_small_intercept(topology: Topology, cfg: SystemConfig) -> float:
    """Small-cell intercept probability of the interference-limited scheme.

    A zero wiretap threshold (overall rate equal to the secrecy rate) yields
    1 by the vanishing-threshold convention, matching the limit of a small
    but positive small-cell power.
    """
    lam = Thresholds.from_config(cfg).lambda_s
    if math.isinf(lam):
        return 0.0
    s_se = topology.sigma2_se
    probs = selection_probs(topology)
    terms = s_se / (s_se + cfg.gamma_m * topology.sigma2_ae * lam) * math.exp(-lam / s_se)
    return float(np.dot(probs, terms))


# --- interference-canceled closed forms ----------------------------------------------


def _require_ic_feasible(topology: Topology, cfg: SystemConfig) -> np.ndarray:
    margins = cfg.gamma_m * topology.sigma2_am - cfg.gamma_s * topology.sigma2_sm
    if np.any(margins < 0.0):
        raise SchemeInfeasibleError(
            f"power ratio {cfg.smr} exceeds the cancelation bound "
            f"{float(np.min(topology.sigma2_am) / topology.sigma2_sm):.6g}"
        )
    return margins


def _require_iid(topology: Topology, what: str) -> None:
    if not topology.iid:
        raise ModelAssumptionError(f"{what} assumes i.i.d. antenna statistics")


def ic_macro_outage(topology: Topology, cfg: SystemConfig) -> float:
    """Macro-cell outage probability of the interference-canceled scheme:
    product over antennas of the per-antenna below-threshold probability.
    Exact for arbitrary per-antenna statistics.  A zero cancelation margin
    (power ratio at the bound) forces that factor, hence the product, to 1.
    """
    margins = _require_ic_feasible(topology, cfg)
    d = Thresholds.from_config(cfg).delta_m
    if d == 0.0:
        return 0.0
    factors = np.ones_like(margins)
    pos = margins > 0.0
    factors[pos] = -np.expm1(-d * cfg.gamma_m / margins[pos])
    return float(np.prod(factors))


def ic_small_outage(topology: Topology, cfg: SystemConfig, mode: str = "integral") -> float:
    """Small-cell outage probability of the interference-canceled scheme.

    Valid in the regime where the SBS->MU gain fluctuation is negligible
    (small 2**rate_small_overall * sigma2_sm, see asymptotic_terms).  The
    ``integral`` mode keeps the noise term and is evaluated by quadrature;
    the ``asymptotic`` mode additionally takes the interference-dominated
    limit and reduces to an E1 series.
    """
    _require_ic_feasible(topology, cfg)
    _require_iid(topology, "the interference-canceled small-cell outage form")
    th = Thresholds.from_config(cfg)
    d = th.delta_s
    if d == 0.0:
        return 0.0
    n = topology.n
    s_ss, s_as = topology.sigma2_ss, float(topology.sigma2_as[0])
    if mode == "integral":
        if math.isinf(d):
            return 1.0
        c = d * cfg.gamma_m * s_as

        def f(x: float) -> float:
            if x <= 0.0:
                return 0.0
            sx = s_ss * x
            return sx / (sx + c) * math.exp(-d / sx)

        return 1.0 - MaxGainDensity(n).expect(f)
    if mode == "asymptotic":
        if cfg.smr == 0.0:
            return 1.0
        rate_gain = 2.0 ** cfg.rate_small_overall - 1.0
        if rate_gain == 0.0:
            return 0.0
        terms = []
        for k in range(n):
            phi = (k + 1) * rate_gain * s_as / (cfg.smr * s_ss)
            bracket = 1.0 - _x_exp_e1(phi)
            terms.append((-1.0) ** k * _binom(n, k + 1) * bracket)
        return 1.0 - math.fsum(terms)
    raise ParameterError(f"unknown mode {mode!r}; expected 'integral' or 'asymptotic'")


def ic_macro_intercept(topology: Topology, cfg: SystemConfig, mode: str = "closed") -> float:
    """Macro-cell intercept probability of the interference-canceled scheme.

    The eavesdropper's effective wiretap gain carries the factor
    omega = 1 - beta * sigma2_sm * 2**(Ro - Rs) / sigma2_am; when omega is
    nonpositive the auxiliary interference already swamps the macro signal at
    any eavesdropper gain and the intercept probability is 0.  The two modes
    (quadrature over the best-gain density vs. E1 series) evaluate the same
    expression and agree to quadrature accuracy.
    """
    _require_ic_feasible(topology, cfg)
    _require_iid(topology, "the interference-canceled macro intercept form")
    lam = Thresholds.from_config(cfg).lambda_m
    n = topology.n
    s_am = float(topology.sigma2_am[0])
    s_ae, s_se = float(topology.sigma2_ae[0]), topology.sigma2_se
    rate_gain = 2.0 ** (cfg.rate_macro_overall - cfg.rate_macro_secrecy)
    omega = 1.0 - cfg.smr * topology.sigma2_sm * rate_gain / s_am
    if omega <= 0.0:
        return 0.0
    if lam == 0.0:
        return 1.0
    prefactor = math.exp(-lam / (omega * s_ae))
    if mode == "integral":
        c = lam * cfg.gamma_s * s_se
        base = omega * s_ae
        return prefactor * MaxGainDensity(n).expect(lambda x: base / (base + c * x))
    if mode == "closed":
        if cfg.smr == 0.0:
            return prefactor
        terms = []
        for k in range(n):
            phi = (k + 1) * omega * s_ae / ((rate_gain - 1.0) * cfg.smr * s_se)
            terms.append((-1.0) ** k * _binom(n, k + 1) * _x_exp_e1(phi))
        return prefactor * math.fsum(terms)
    raise ParameterError(f"unknown mode {mode!r}; expected 'integral' or 'closed'")


def ic_small_intercept(topology: Topology, cfg: SystemConfig, mode: str = "integral") -> float:
    """Small-cell intercept probability of the interference-canceled scheme.

    ``integral`` keeps the finite-SNR noise factor; ``closed`` additionally
    assumes the interference-dominated regime (vanishing wiretap threshold
    against noise) and reduces to an E1 series.
    """
    _require_ic_feasible(topology, cfg)
    _require_iid(topology, "the interference-canceled small-cell intercept form")
    lam = Thresholds.from_config(cfg).lambda_s
    if math.isinf(lam):
        return 0.0
    if lam == 0.0:
        return 1.0
    n = topology.n
    s_ae, s_se = float(topology.sigma2_ae[0]), topology.sigma2_se
    if mode == "integral":
        c = lam * cfg.gamma_m * s_ae

        def f(x: float) -> float:
            if x <= 0.0:
                return 0.0
            sx = s_se * x
            return sx / (sx + c) * math.exp(-lam / sx)

        return MaxGainDensity(n).expect(f)
    if mode == "closed":
        rate_gain = 2.0 ** (cfg.rate_small_overall - cfg.rate_small_secrecy) - 1.0
        terms = []
        for k in range(n):
            phi = (k + 1) * rate_gain * s_ae / (cfg.smr * s_se)
            terms.append((-1.0) ** k * _binom(n, k + 1) * (1.0 - _x_exp_e1(phi)))
        return math.fsum(terms)
    raise ParameterError(f"unknown mode {mode!r}; expected 'integral' or 'closed'")


# --- asymptotic bookkeeping -----------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticTerms:
    """Coefficients and regime certificates of the asymptotic forms.

    ``x_sm_scale``, ``x_sm_prime_scale`` and ``z_sm_scale`` measure the
    neglected SBS->MU gain fluctuations (the forms assume they vanish);
    ``noise_to_interference_su`` / ``..._eve`` measure the noise the
    interference-dominated series additionally discard, relative to the
    interference they keep.  Small values certify the respective regimes.
    """

    omega_sm: float
    phi_ss: np.ndarray
    phi_ae: np.ndarray
    phi_se: np.ndarray
    x_sm_scale: float
    x_sm_prime_scale: float
    z_sm_scale: float
    noise_to_interference_su: float
    noise_to_interference_eve: float


def asymptotic_terms(topology: Topology, cfg: SystemConfig) -> AsymptoticTerms:
    _require_iid(topology, "asymptotic coefficients")
    n = topology.n
    s_am = float(topology.sigma2_am[0])
    s_as = float(topology.sigma2_as[0])
    s_ae = float(topology.sigma2_ae[0])
    s_sm, s_ss, s_se = topology.sigma2_sm, topology.sigma2_ss, topology.sigma2_se
    ks = np.arange(1, n + 1, dtype=float)
    macro_gain = 2.0 ** (cfg.rate_macro_overall - cfg.rate_macro_secrecy)
    small_gain = 2.0 ** cfg.rate_small_overall - 1.0
    small_eve_gain = 2.0 ** (cfg.rate_small_overall - cfg.rate_small_secrecy) - 1.0
    beta = cfg.smr
    with np.errstate(divide="ignore"):
        phi_ss = ks * small_gain * s_as / (beta * s_ss) if beta > 0 else np.full(n, np.inf)
        omega = 1.0 - beta * s_sm * macro_gain / s_am
        phi_ae = (
            ks * omega * s_ae / ((macro_gain - 1.0) * beta * s_se)
            if beta > 0 and macro_gain > 1.0
            else np.full(n, np.inf)
        )
        phi_se = ks * small_eve_gain * s_ae / (beta * s_se) if beta > 0 else np.full(n, np.inf)
    lam_s = Thresholds.from_config(cfg).lambda_s
    return AsymptoticTerms(
        omega_sm=omega,
        phi_ss=phi_ss,
        phi_ae=phi_ae,
        phi_se=phi_se,
        x_sm_scale=2.0 ** cfg.rate_small_overall * s_sm,
        x_sm_prime_scale=2.0 ** (cfg.rate_small_overall - cfg.rate_small_secrecy) * s_sm,
        z_sm_scale=2.0 ** cfg.rate_macro_overall * s_sm,
        noise_to_interference_su=1.0 / (cfg.gamma_m * s_as),
        noise_to_interference_eve=lam_s / s_se if not math.isinf(lam_s) else math.inf,
    )
