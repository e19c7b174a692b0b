"""Decision rules mapping arrival times to a decided symbol.

Binary rules for the Levy channel (full maximum-likelihood over all
arrivals, first-arrival thresholding, linear combining), their
inverse-Gaussian counterparts for channels with drift, and the Gray-coded
first-arrival rule for non-binary constellations.

Every threshold is solved once per parameter set and memoized; the detect
functions themselves are pure.  Boundary ties decide the later symbol
(statistic >= threshold reads as symbol 1), matching the orientation of all
threshold tests here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .channels import (
    BadWeights,
    IGParams,
    LevyParams,
    fa_mode,
    ig_log_sf,
    ig_logpdf,
    stable_linear_dispersion,
)
from .numerics import Bracket, Tolerance, find_root

__all__ = [
    "LengthMismatch",
    "Decision",
    "BinaryScheme",
    "GrayScheme",
    "ml_threshold_single",
    "fa_threshold",
    "ig_fa_threshold",
    "ig_linear_threshold",
    "ml_detect",
    "fa_detect",
    "linear_detect",
    "gray_fa_detect",
    "ig_ml_detect",
    "ig_fa_detect",
    "ml_decide",
    "fa_decide",
    "linear_decide",
    "gray_fa_decide",
    "ig_ml_decide",
    "ig_fa_decide",
    "ig_linear_decide",
]

# Arrivals this close to the release epoch make the reciprocal likelihood
# term blow up; the combined statistic tends to +inf and the decision is 0.
_EDGE_FRAC = 1e-12


class LengthMismatch(ValueError):
    """Arrival vector length does not match the scheme's particle count."""


@dataclass(frozen=True)
class Decision:
    """Decided constellation index plus the statistic actually compared."""

    symbol_index: int
    statistic: float
    threshold_used: float | None = None


@dataclass(frozen=True)
class BinaryScheme:
    """Two release times {0, delta}, m particles per symbol, and the
    propagation law (Levy for no flow, IG for drift)."""

    delta: float
    m: int
    channel: LevyParams | IGParams

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")

    @property
    def is_levy(self) -> bool:
        return isinstance(self.channel, LevyParams)


@dataclass(frozen=True)
class GrayScheme:
    """2^L release times n * delta_sub on [0, delta_total] with
    delta_sub = delta_total / (2^L - 1); per-symbol particle count m."""

    delta_total: float
    bits_l: int
    m: int
    channel: LevyParams

    def __post_init__(self):
        if self.delta_total <= 0:
            raise ValueError("delta_total must be positive")
        if self.bits_l < 1:
            raise ValueError(f"bits_l must be >= 1, got {self.bits_l}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")

    @property
    def n_points(self) -> int:
        return 2**self.bits_l

    @property
    def delta_sub(self) -> float:
        return self.delta_total / (self.n_points - 1)


def _check_levy(scheme) -> LevyParams:
    if not isinstance(scheme.channel, LevyParams):
        raise TypeError("this detector applies to the Levy (no flow) channel")
    return scheme.channel


def _check_ig(scheme) -> IGParams:
    if not isinstance(scheme.channel, IGParams):
        raise TypeError("this detector applies to the IG (drift) channel")
    return scheme.channel


def _check_length(scheme, y) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1 or arr.size != scheme.m:
        raise LengthMismatch(f"expected {scheme.m} arrivals, got shape {arr.shape}")
    return arr


@lru_cache(maxsize=None)
def ml_threshold_single(c: float, delta: float) -> float:
    """Optimal single-arrival decision threshold: the unique root of
    y (y - delta) log(y / (y - delta)) = c delta / 3 in
    [delta, delta + c/3]."""
    if c <= 0 or delta <= 0:
        raise ValueError("c and delta must be positive")
    target = c * delta / 3.0

    def f(y: float) -> float:
        return y * (y - delta) * math.log(y / (y - delta)) - target

    lo = delta * (1.0 + _EDGE_FRAC)
    hi = delta + c / 3.0
    return find_root(f, Bracket(lo, hi), Tolerance(abs_x=1e-14 * max(1.0, hi)))


@lru_cache(maxsize=None)
def fa_threshold(c: float, delta: float, m: int) -> float:
    """Optimal first-arrival threshold theta_m: strictly decreasing in m,
    with theta_1 equal to the single-arrival threshold."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    theta1 = ml_threshold_single(c, delta)
    if m == 1:
        return theta1
    target = c * delta / 3.0
    expo = 2.0 * (m - 1) / 3.0

    def f(y: float) -> float:
        u = y - delta
        # ratio of the no-arrival-yet probabilities under the two hypotheses
        lr = math.log1p(-float(special.erfc(math.sqrt(c / (2.0 * u))))) - math.log1p(
            -float(special.erfc(math.sqrt(c / (2.0 * y))))
        )
        return y * u * (math.log(y / u) + expo * lr) - target

    lo = delta * (1.0 + _EDGE_FRAC)
    return find_root(f, Bracket(lo, theta1), Tolerance(abs_x=1e-14 * max(1.0, theta1)))


def _ig_fa_llr(p: IGParams, delta: float, m: int, y: float) -> float:
    """Log-likelihood ratio of the first-arrival density under release at
    delta versus release at 0, evaluated at first arrival y > delta."""
    a = ig_logpdf(p, y - delta) + (m - 1) * ig_log_sf(p, y - delta)
    b = ig_logpdf(p, y) + (m - 1) * ig_log_sf(p, y)
    return a - b


@lru_cache(maxsize=None)
def ig_fa_threshold(kappa: float, lam: float, delta: float, m: int) -> float:
    """Threshold for the IG first-arrival rule: root of the first-arrival
    log-likelihood ratio on (delta, inf)."""
    p = IGParams(kappa, lam)
    lo = delta * (1.0 + _EDGE_FRAC)
    hi = delta + max(kappa, lam, delta)
    for _ in range(200):
        if _ig_fa_llr(p, delta, m, hi) > 0:
            break
        hi = delta + 2.0 * (hi - delta)
    return find_root(
        lambda y: _ig_fa_llr(p, delta, m, y),
        Bracket(lo, hi),
        Tolerance(abs_x=1e-12 * max(1.0, hi)),
    )


@lru_cache(maxsize=None)
def ig_linear_threshold(kappa: float, lam: float, delta: float, m: int) -> float:
    """Threshold for the averaged-arrivals IG rule; averaging m draws keeps
    the mean and multiplies the shape by m."""
    return ig_fa_threshold(kappa, m * lam, delta, 1)


def _levy_llr_terms(c: float, delta: float, Y: np.ndarray) -> np.ndarray:
    """Per-arrival terms log((y-delta)/y) + (c delta/3) / (y (y-delta)).

    Rows containing arrivals at or below delta are the caller's concern;
    arrivals within _EDGE_FRAC*delta above it get +inf (the reciprocal term
    dominates the log singularity there)."""
    u = Y - delta
    near = u < _EDGE_FRAC * delta
    us = np.where(near, 1.0, u)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.log(us / Y) + (c * delta / 3.0) / (Y * us)
    return np.where(near, np.inf, terms)


def ml_decide(scheme: BinaryScheme, Y: np.ndarray) -> np.ndarray:
    """Vectorized ML rule over rows of arrival vectors: decide 1 iff every
    arrival exceeds delta and the summed likelihood terms are <= 0."""
    p = _check_levy(scheme)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    ok = (Y > scheme.delta).all(axis=1)
    safe = np.where(Y > scheme.delta, Y, 2.0 * scheme.delta)
    s = _levy_llr_terms(p.c, scheme.delta, safe).sum(axis=1)
    return np.where(ok & (s <= 0.0), 1, 0)


def ml_detect(scheme: BinaryScheme, y) -> Decision:
    """Full maximum-likelihood rule over the arrival vector."""
    p = _check_levy(scheme)
    arr = _check_length(scheme, y)
    if not (arr > scheme.delta).all():
        return Decision(0, -math.inf, None)
    s = float(_levy_llr_terms(p.c, scheme.delta, arr).sum())
    return Decision(int(s <= 0.0), s, 0.0)


def fa_decide(scheme: BinaryScheme, Y: np.ndarray) -> np.ndarray:
    p = _check_levy(scheme)
    theta = fa_threshold(p.c, scheme.delta, scheme.m)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    return (Y.min(axis=1) >= theta).astype(int)


def fa_detect(scheme: BinaryScheme, y) -> Decision:
    """First-arrival rule: threshold the minimum arrival time."""
    p = _check_levy(scheme)
    arr = _check_length(scheme, y)
    theta = fa_threshold(p.c, scheme.delta, scheme.m)
    yfa = float(arr.min())
    return Decision(int(yfa >= theta), yfa, theta)


def _resolve_weights(scheme, weights) -> np.ndarray:
    if weights is None:
        return np.full(scheme.m, 1.0 / scheme.m)
    w = np.asarray(weights, dtype=float)
    if w.size != scheme.m:
        raise LengthMismatch(f"expected {scheme.m} weights, got {w.size}")
    if np.any(w <= 0):
        raise BadWeights("weights must be positive")
    if abs(float(w.sum()) - 1.0) > 1e-12:
        raise BadWeights(f"weights must sum to 1, got {w.sum()!r}")
    return w


def _linear_threshold(scheme: BinaryScheme, w: np.ndarray) -> float:
    if scheme.is_levy:
        c_lin = stable_linear_dispersion(scheme.channel.c, 0.5, w)
        return ml_threshold_single(c_lin, scheme.delta)
    p = _check_ig(scheme)
    if not np.allclose(w, w[0]):
        raise BadWeights("IG linear combining supports equal weights only")
    return ig_linear_threshold(p.kappa, p.lam, scheme.delta, scheme.m)


def linear_decide(scheme: BinaryScheme, Y: np.ndarray, weights=None) -> np.ndarray:
    w = _resolve_weights(scheme, weights)
    theta = _linear_threshold(scheme, w)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    return (Y @ w >= theta).astype(int)


def linear_detect(scheme: BinaryScheme, weights, y) -> Decision:
    """Threshold a convex combination of the arrivals.  For the Levy channel
    the combination is again Levy with a larger (c_LIN >= c) scale, so the
    threshold is the single-arrival one at that scale; for the IG channel
    equal-weight averaging keeps the law IG with shape m * lam."""
    w = _resolve_weights(scheme, weights)
    arr = _check_length(scheme, y)
    theta = _linear_threshold(scheme, w)
    ylin = float(arr @ w)
    return Decision(int(ylin >= theta), ylin, theta)


def gray_fa_decide(scheme: GrayScheme, Y: np.ndarray) -> np.ndarray:
    c = scheme.channel.c
    dt = scheme.delta_sub
    omega = fa_mode(c, scheme.m)
    theta = fa_threshold(c, dt, scheme.m)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    yfa = Y.min(axis=1)
    nf = np.floor((yfa - omega) / dt)
    # clip before casting so extreme arrivals cannot overflow the int cast
    nfc = np.clip(nf, 0, scheme.n_points - 1).astype(int)
    inner = nfc + (yfa - nfc * dt >= theta).astype(int)
    return np.where(
        nf < 0, 0, np.where(nf >= scheme.n_points - 1, scheme.n_points - 1, inner)
    )


def gray_fa_detect(scheme: GrayScheme, y) -> Decision:
    """Reduce the 2^L-ary problem to a binary one between the constellation
    cell below the first arrival (offset by the first-arrival mode) and its
    upper neighbor, then apply the binary first-arrival rule at the
    sub-spacing.  Extreme cells clamp to the end points."""
    _check_levy(scheme)
    arr = _check_length(scheme, y)
    c = scheme.channel.c
    dt = scheme.delta_sub
    theta = fa_threshold(c, dt, scheme.m)
    yfa = float(arr.min())
    nf = math.floor((yfa - fa_mode(c, scheme.m)) / dt)
    if nf < 0:
        return Decision(0, yfa, theta)
    if nf >= scheme.n_points - 1:
        return Decision(scheme.n_points - 1, yfa, theta)
    return Decision(nf + int(yfa - nf * dt >= theta), yfa, theta)


def ig_ml_decide(scheme: BinaryScheme, Y: np.ndarray) -> np.ndarray:
    p = _check_ig(scheme)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    ok = (Y > scheme.delta).all(axis=1)
    llr = (ig_logpdf(p, Y - scheme.delta) - ig_logpdf(p, Y)).sum(axis=1)
    return np.where(ok & (llr >= 0.0), 1, 0)


def ig_ml_detect(scheme: BinaryScheme, y) -> Decision:
    """Product-likelihood rule for the drift channel: sum per-arrival
    log-likelihood ratios of the two shifted IG densities."""
    p = _check_ig(scheme)
    arr = _check_length(scheme, y)
    if not (arr > scheme.delta).all():
        return Decision(0, -math.inf, None)
    llr = float((ig_logpdf(p, arr - scheme.delta) - ig_logpdf(p, arr)).sum())
    return Decision(int(llr >= 0.0), llr, 0.0)


def ig_fa_decide(scheme: BinaryScheme, Y: np.ndarray) -> np.ndarray:
    p = _check_ig(scheme)
    theta = ig_fa_threshold(p.kappa, p.lam, scheme.delta, scheme.m)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    return (Y.min(axis=1) >= theta).astype(int)


def ig_fa_detect(scheme: BinaryScheme, y) -> Decision:
    """First-arrival rule for the drift channel."""
    p = _check_ig(scheme)
    arr = _check_length(scheme, y)
    theta = ig_fa_threshold(p.kappa, p.lam, scheme.delta, scheme.m)
    yfa = float(arr.min())
    return Decision(int(yfa >= theta), yfa, theta)


def ig_linear_decide(scheme: BinaryScheme, Y: np.ndarray) -> np.ndarray:
    p = _check_ig(scheme)
    theta = ig_linear_threshold(p.kappa, p.lam, scheme.delta, scheme.m)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    return (Y.mean(axis=1) >= theta).astype(int)
