"""Propagation-delay laws of the timing channel.

Levy law for pure diffusion (no flow), inverse Gaussian for diffusion with
drift, the dispersion algebra of one-sided stable laws under linear
combining, and the first-arrival (minimum) order statistics.  Samplers take
a numpy Generator; distribution evaluations accept scalars or arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .numerics import Bracket, Tolerance, minimize_scalar

__all__ = [
    "BadWeights",
    "LevyParams",
    "IGParams",
    "StableParams",
    "ChannelSpec",
    "levy_pdf",
    "levy_logpdf",
    "levy_cdf",
    "levy_median",
    "levy_sample",
    "ig_pdf",
    "ig_logpdf",
    "ig_cdf",
    "ig_log_sf",
    "ig_sample",
    "stable_linear_dispersion",
    "fa_cdf",
    "fa_pdf",
    "fa_mode",
]


class BadWeights(ValueError):
    """Combining weights must be positive and sum to one."""


@dataclass(frozen=True)
class LevyParams:
    """Location mu and scale c (both in seconds) of the Levy delay law."""

    mu: float
    c: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.c)):
            raise ValueError("Levy parameters must be finite")
        if self.c <= 0:
            raise ValueError(f"Levy scale c must be positive, got {self.c}")


@dataclass(frozen=True)
class IGParams:
    """Mean kappa = d/v and shape lam = d^2/(2D) of the inverse-Gaussian law."""

    kappa: float
    lam: float

    def __post_init__(self):
        if self.kappa <= 0 or self.lam <= 0:
            raise ValueError("IG parameters must be positive")


@dataclass(frozen=True)
class StableParams:
    """Stable-law parameters (location, dispersion, characteristic exponent,
    skewness).  Only the dispersion algebra is implemented; general stable
    densities have no closed form."""

    mu: float
    c: float
    alpha: float
    beta: float

    def __post_init__(self):
        if self.c < 0:
            raise ValueError("dispersion must be nonnegative")
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must be in (0, 2], got {self.alpha}")
        if abs(self.beta) > 1.0:
            raise ValueError(f"|beta| must be <= 1, got {self.beta}")

    @classmethod
    def levy(cls, mu: float, c: float) -> "StableParams":
        """The Levy law as the maximally skewed alpha = 1/2 stable member."""
        return cls(mu, c, 0.5, 1.0)


@dataclass(frozen=True)
class ChannelSpec:
    """Physical channel geometry: distance (um), diffusion coefficient
    (um^2/s), drift velocity (um/s, 0 means no flow), and an opaque scalar
    for 3-D geometries."""

    distance_d: float
    diffusion_D: float
    drift_v: float = 0.0
    dim_scale: float = 1.0

    def __post_init__(self):
        if self.distance_d <= 0 or self.diffusion_D <= 0:
            raise ValueError("distance and diffusion coefficient must be positive")
        if self.drift_v < 0:
            raise ValueError("drift velocity must be nonnegative")
        if self.dim_scale <= 0:
            raise ValueError("dim_scale must be positive")

    @property
    def levy_scale(self) -> float:
        return self.dim_scale * self.distance_d**2 / (2.0 * self.diffusion_D)

    def levy(self) -> LevyParams:
        return LevyParams(0.0, self.levy_scale)

    def ig(self) -> IGParams:
        if self.drift_v == 0:
            raise ValueError("no drift: channel follows the Levy law, not IG")
        return IGParams(
            self.distance_d / self.drift_v,
            self.distance_d**2 / (2.0 * self.diffusion_D),
        )


def _maybe_float(out, scalar: bool):
    return float(out) if scalar else out


def levy_pdf(p: LevyParams, z):
    """Density sqrt(c / (2 pi u^3)) exp(-c / (2u)), u = z - mu; 0 for z <= mu."""
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    u = z - p.mu
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.where(
            u > 0,
            np.sqrt(p.c / (2.0 * np.pi * u**3)) * np.exp(-p.c / (2.0 * u)),
            0.0,
        )
    return _maybe_float(out, scalar)


def levy_logpdf(p: LevyParams, z):
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    u = z - p.mu
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.where(
            u > 0,
            0.5 * (np.log(p.c) - np.log(2.0 * np.pi) - 3.0 * np.log(np.maximum(u, 1e-320)))
            - p.c / (2.0 * np.maximum(u, 1e-320)),
            -np.inf,
        )
    return _maybe_float(out, scalar)


def levy_cdf(p: LevyParams, z):
    """erfc(sqrt(c / (2 (z - mu)))) above mu, 0 otherwise."""
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    u = z - p.mu
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.where(u > 0, special.erfc(np.sqrt(p.c / (2.0 * np.maximum(u, 1e-320)))), 0.0)
    return _maybe_float(out, scalar)


def levy_median(p: LevyParams) -> float:
    """The z at which the CDF reaches 1/2."""
    return p.mu + p.c / (2.0 * float(special.erfcinv(0.5)) ** 2)


def levy_sample(p: LevyParams, rng, size=None):
    """Draw via the reciprocal-squared-normal transform mu + c / N^2,
    whose law P(c/N^2 <= z) = erfc(sqrt(c/(2z))) matches the CDF exactly."""
    n = rng.standard_normal(size)
    out = p.mu + p.c / (n * n)
    return _maybe_float(out, size is None)


def ig_pdf(p: IGParams, z):
    """Density sqrt(lam / (2 pi z^3)) exp(-lam (z - kappa)^2 / (2 kappa^2 z))."""
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        zz = np.maximum(z, 1e-320)
        out = np.where(
            z > 0,
            np.sqrt(p.lam / (2.0 * np.pi * zz**3))
            * np.exp(-p.lam * (zz - p.kappa) ** 2 / (2.0 * p.kappa**2 * zz)),
            0.0,
        )
    return _maybe_float(out, scalar)


def ig_logpdf(p: IGParams, z):
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        zz = np.maximum(z, 1e-320)
        out = np.where(
            z > 0,
            0.5 * (np.log(p.lam) - np.log(2.0 * np.pi) - 3.0 * np.log(zz))
            - p.lam * (zz - p.kappa) ** 2 / (2.0 * p.kappa**2 * zz),
            -np.inf,
        )
    return _maybe_float(out, scalar)


def ig_cdf(p: IGParams, z):
    """Gaussian-CDF form of the IG distribution function; the e^(2 lam/kappa)
    factor is combined with the normal log-CDF in log space so large shape
    ratios do not overflow."""
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        zz = np.maximum(z, 1e-320)
        r = np.sqrt(p.lam / zz)
        term1 = special.ndtr(r * (zz / p.kappa - 1.0))
        term2 = np.exp(2.0 * p.lam / p.kappa + special.log_ndtr(-r * (zz / p.kappa + 1.0)))
        out = np.where(z > 0, term1 + term2, 0.0)
    return _maybe_float(np.clip(out, 0.0, 1.0), scalar)


def ig_log_sf(p: IGParams, z):
    """log(1 - CDF), evaluated stably for the deep exponential tail."""
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        zz = np.maximum(z, 1e-320)
        r = np.sqrt(p.lam / zz)
        # 1 - F = Phi(-u1) - e^(2 lam/kappa) Phi(-u2), u2 > u1, as a stable
        # log-difference log(e^a - e^b) = a + log1p(-e^(b-a))
        a = special.log_ndtr(-r * (zz / p.kappa - 1.0))
        b = 2.0 * p.lam / p.kappa + special.log_ndtr(-r * (zz / p.kappa + 1.0))
        diff = np.minimum(b - a, -1e-320)
        out = np.where(z > 0, a + np.log1p(-np.exp(diff)), 0.0)
    return _maybe_float(out, scalar)


def ig_sample(p: IGParams, rng, size=None):
    """Two-root transform sampler: solve the shape quadratic driven by a
    chi-square draw, then pick the root by the classic uniform acceptance."""
    nu = rng.standard_normal(size)
    nu = nu * nu
    k, lam = p.kappa, p.lam
    x = k + k * k * nu / (2.0 * lam) - (k / (2.0 * lam)) * np.sqrt(
        4.0 * k * lam * nu + k * k * nu * nu
    )
    u = rng.random(size)
    out = np.where(u <= k / (k + x), x, k * k / np.maximum(x, 1e-320))
    return _maybe_float(out, size is None)


def stable_linear_dispersion(c: float, alpha: float, weights) -> float:
    """Dispersion of a convex combination of iid stable draws with exponent
    alpha < 1: c * (sum w_i^alpha)^(1/alpha).  Always >= c, with equality
    only for a single unit weight."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"dispersion algebra requires 0 < alpha < 1, got {alpha}")
    w = np.asarray(weights, dtype=float)
    if w.size == 0 or np.any(w <= 0):
        raise BadWeights("weights must be positive")
    if abs(float(w.sum()) - 1.0) > 1e-12:
        raise BadWeights(f"weights must sum to 1, got {w.sum()!r}")
    return c * float(np.sum(w**alpha)) ** (1.0 / alpha)


def fa_cdf(c: float, m: int, t):
    """CDF of the first arrival offset among m iid Levy(0, c) delays:
    1 - (1 - erfc(sqrt(c/(2t))))^m for t > 0, else 0."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        e = special.erfc(np.sqrt(c / (2.0 * np.maximum(t, 1e-320))))
        out = np.where(t > 0, -np.expm1(m * np.log1p(-e)), 0.0)
    return _maybe_float(out, scalar)


def fa_pdf(c: float, m: int, t):
    """Density of the first arrival offset: m f(t) (1 - erfc(...))^(m-1)."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    p = LevyParams(0.0, c)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        e = special.erfc(np.sqrt(c / (2.0 * np.maximum(t, 1e-320))))
        out = np.where(t > 0, m * levy_pdf(p, t) * np.exp((m - 1) * np.log1p(-e)), 0.0)
    return _maybe_float(out, scalar)


@lru_cache(maxsize=None)
def fa_mode(c: float, m: int) -> float:
    """Mode of the first-arrival density; equals c/3 for m = 1 and decreases
    toward 0 as m grows (the density concentrates at the release time)."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if m == 1:
        return c / 3.0

    def neg_log_density(t: float) -> float:
        e = float(special.erfc(math.sqrt(c / (2.0 * t))))
        if e >= 1.0:
            return math.inf
        return -(-1.5 * math.log(t) - c / (2.0 * t) + (m - 1) * math.log1p(-e))

    x, _ = minimize_scalar(
        neg_log_density,
        Bracket(1e-12 * c, c / 3.0),
        Tolerance(abs_x=1e-14 * max(1.0, c)),
    )
    return x
