"""Closed-form performance analysis.

Error probabilities of the single-arrival, first-arrival, and Gray-coded
rules; the bound on the probability that the full-likelihood and
first-arrival rules disagree; error exponents (closed form for the
first-arrival rule, numeric Chernoff information for full likelihood); and
the large-m asymptotics of the first-arrival threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special

from .channels import fa_cdf
from .detectors import fa_threshold, ml_threshold_single
from .numerics import Bracket, Tolerance, find_root, integrate_semi_infinite, minimize_scalar

__all__ = [
    "ExponentResult",
    "MismatchBound",
    "pe_ml_single",
    "pe_fa",
    "pe_ml_mc",
    "pe_gray",
    "pe_gray_exact",
    "gray_error_ceiling",
    "g_function",
    "g_stationary_point",
    "g_root",
    "mismatch_bound",
    "err_exp_fa",
    "err_exp_ml",
    "fa_threshold_asymptote",
    "max_bits_for_m",
]


@dataclass(frozen=True)
class ExponentResult:
    """Error exponent in nats per particle; optimizer_s is set only when the
    value came from the numeric Chernoff minimization."""

    value: float
    optimizer_s: float | None
    method: str  # "closed_form" | "chernoff_numeric"


@dataclass(frozen=True)
class MismatchBound:
    """Root x_star of the per-arrival likelihood term, the stationary point
    x1 bounding it, and the disagreement-probability upper bound."""

    x_star: float
    x1: float
    bound: float


def pe_ml_single(c: float, delta: float) -> float:
    """Error probability of the optimal single-arrival threshold rule:
    0.5 (1 - erfc(sqrt(c/(2 theta))) + erfc(sqrt(c/(2 (theta - delta)))))."""
    theta = ml_threshold_single(c, delta)
    return 0.5 * (
        1.0
        - float(special.erfc(math.sqrt(c / (2.0 * theta))))
        + float(special.erfc(math.sqrt(c / (2.0 * (theta - delta)))))
    )


def pe_fa(c: float, delta: float, m: int) -> float:
    """Error probability of the first-arrival rule at its optimal threshold.

    The two m-th powers are evaluated through log1p/expm1 so the result
    stays meaningful down to the double-precision floor even for m ~ 1e5.
    """
    theta = fa_threshold(c, delta, m)
    e0 = float(special.erfc(math.sqrt(c / (2.0 * theta))))
    e1 = float(special.erfc(math.sqrt(c / (2.0 * (theta - delta)))))
    a = math.exp(m * math.log1p(-e0))
    b = -math.expm1(m * math.log1p(-e1)) if e1 < 1.0 else 1.0
    return 0.5 * (a + b)


def pe_ml_mc(c: float, delta: float, m: int, trials: int, seed: int):
    """Monte Carlo estimate of the full-likelihood rule's error probability
    (no closed form exists for m > 1).  Thin wrapper over the trial engine."""
    from .montecarlo import simulate_pe

    return simulate_pe("ml", {"c": c, "delta": delta, "m": m}, trials, seed)


def gray_error_ceiling(bits_l: int) -> float:
    """Symbol error probability of random guessing among 2^L points."""
    return 1.0 - 2.0 ** (-bits_l)


def pe_gray_exact(c: float, delta_total: float, bits_l: int, m: int) -> float:
    """Unclamped symbol error probability of the Gray-coded first-arrival
    rule: (2^L - 1) / 2^(L-1) times the binary error at the sub-spacing.
    Counts adjacent-cell errors exactly and may exceed the guessing ceiling
    when the sub-spacing is tiny."""
    if bits_l < 1:
        raise ValueError(f"bits_l must be >= 1, got {bits_l}")
    dt = delta_total / (2**bits_l - 1)
    return (2**bits_l - 1) / 2 ** (bits_l - 1) * pe_fa(c, dt, m)


def pe_gray(c: float, delta_total: float, bits_l: int, m: int) -> float:
    """Symbol error probability of the Gray-coded first-arrival rule,
    clamped at the random-guess ceiling 1 - 2^(-L)."""
    return min(pe_gray_exact(c, delta_total, bits_l, m), gray_error_ceiling(bits_l))


def g_function(c: float, delta: float, x: float) -> float:
    """Per-arrival likelihood term log((x - delta)/x) + c delta/(3 x (x - delta)),
    defined for x > delta.  Positive below its unique root, negative above."""
    if x <= delta:
        raise ValueError(f"g is defined for x > delta, got x={x}, delta={delta}")
    return math.log((x - delta) / x) + c * delta / (3.0 * x * (x - delta))


def g_stationary_point(c: float, delta: float) -> float:
    """Closed-form location x1 of the unique minimum of g above delta."""
    return c / 3.0 + 0.5 * delta * (1.0 + math.sqrt(1.0 + 4.0 * c * c / (9.0 * delta * delta)))


def g_root(c: float, delta: float) -> float:
    """Unique root x_star of g on (delta, inf); g diverges to +inf at
    delta, dips to its minimum at x1, and returns to 0 from below, so the
    root is bracketed by (delta, x1)."""
    x1 = g_stationary_point(c, delta)
    lo = delta * (1.0 + 1e-12)
    return find_root(
        lambda x: g_function(c, delta, x),
        Bracket(lo, x1),
        Tolerance(abs_x=1e-14 * max(1.0, x1)),
    )


def mismatch_bound(c: float, delta: float, m: int) -> MismatchBound:
    """Upper bound on the probability that the full-likelihood and
    first-arrival rules decide differently on the same arrivals:
    0.5 [ (Psi(x_star) - Psi(delta)) + Psi(x_star - delta) ], where Psi is
    the first-arrival CDF and Psi(0) = 0."""
    x_star = g_root(c, delta)
    x1 = g_stationary_point(c, delta)
    bound = 0.5 * (
        fa_cdf(c, m, x_star)
        - fa_cdf(c, m, delta)
        + fa_cdf(c, m, x_star - delta)
    )
    return MismatchBound(x_star, x1, min(max(bound, 0.0), 1.0))


def err_exp_fa(c: float, delta: float) -> ExponentResult:
    """Closed-form error exponent of the first-arrival rule:
    -log(1 - erfc(sqrt(c/(2 delta))))."""
    value = -math.log1p(-float(special.erfc(math.sqrt(c / (2.0 * delta)))))
    return ExponentResult(value, None, "closed_form")


def err_exp_ml(c: float, delta: float, tol: Tolerance | None = None) -> ExponentResult:
    """Error exponent of the full-likelihood rule: the Chernoff information
    -min_s log int f0^s fd^(1-s) dy between the delay densities shifted by
    0 and delta.  The integrand vanishes below delta, so the integral runs
    over (delta, inf)."""
    if tol is None:
        tol = Tolerance(abs_x=1e-6, rel_f=1e-9)
    half_log_c = 0.5 * math.log(c / (2.0 * math.pi))

    def log_integral(s: float) -> float:
        def integrand(y: float) -> float:
            u = y - delta
            lg0 = half_log_c - 1.5 * math.log(y) - c / (2.0 * y)
            lgd = half_log_c - 1.5 * math.log(u) - c / (2.0 * u)
            return math.exp(s * lg0 + (1.0 - s) * lgd)

        return math.log(integrate_semi_infinite(integrand, delta, tol))

    s_opt, f_opt = minimize_scalar(
        log_integral, Bracket(0.0, 1.0), Tolerance(abs_x=tol.abs_x, max_iter=tol.max_iter)
    )
    return ExponentResult(-f_opt, s_opt, "chernoff_numeric")


def fa_threshold_asymptote(c: float, delta: float) -> float:
    """Slope d1 of the first-arrival threshold's approach to delta,
    theta_m ~ delta + d1/m: d1 = -c / (2 log beta) with
    beta = 1 - erfc(sqrt(c/(2 delta))).  Positive because log beta < 0."""
    log_beta = math.log1p(-float(special.erfc(math.sqrt(c / (2.0 * delta)))))
    return -c / (2.0 * log_beta)


def max_bits_for_m(c: float, delta: float, m: int, epsilon: float, max_l: int = 24) -> int:
    """Largest constellation size exponent L >= 1 at which doubling the
    particle count from m/2 to m still pays: the symbol error must drop by
    at least the relative margin epsilon.  Returns 0 when even L = 1 shows
    no such gain.  A pragmatic finite-m surrogate for the guarantee that L
    may grow like log log m."""
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    best = 0
    for bits_l in range(1, max_l + 1):
        now = pe_gray(c, delta, bits_l, m)
        before = pe_gray(c, delta, bits_l, max(m // 2, 1))
        if now <= (1.0 - epsilon) * before:
            best = bits_l
    return best
