"""Shared numeric kernels: special functions, bracketed root finding,
scalar minimization, and semi-infinite quadrature.

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy import integrate, special

__all__ = [
    "Bracket",
    "Tolerance",
    "NoSignChange",
    "MaxIterations",
    "NonFinite",
    "ERFC_CLAMP_BELOW",
    "erfc",
    "erfc_inv",
    "find_root",
    "minimize_scalar",
    "integrate_semi_infinite",
]

# erfc values below this threshold are clamped to exactly 0 so that callers
# can rely on log1p(-erfc(x)) style guards instead of handling subnormals.
ERFC_CLAMP_BELOW = 1e-300


class NoSignChange(ValueError):
    """The supplied bracket does not straddle a sign change."""


class MaxIterations(RuntimeError):
    """An iterative routine failed to converge within its iteration budget."""


class NonFinite(ValueError):
    """A user-supplied function returned NaN or infinity inside the domain."""


@dataclass(frozen=True)
class Bracket:
    """Search interval [lo, hi] for root finding or minimization."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("bracket endpoints must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class Tolerance:
    """Convergence targets: abs_x in domain units, rel_f dimensionless."""

    abs_x: float = 1e-12
    rel_f: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if self.abs_x <= 0 or self.rel_f <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


def _default_tolerance(b: Bracket) -> Tolerance:
    return Tolerance(abs_x=1e-12 * max(1.0, abs(b.hi)))


def erfc(x: float) -> float:
    """Complementary error function (2/sqrt(pi)) * int_x^inf exp(-u^2) du.

    Total on finite inputs; results below ERFC_CLAMP_BELOW clamp to 0.
    """
    if not math.isfinite(x):
        raise ValueError(f"erfc requires finite x, got {x}")
    v = math.erfc(x)
    return 0.0 if v < ERFC_CLAMP_BELOW else v


def erfc_inv(p: float) -> float:
    """Inverse of erfc on (0, 2)."""
    if not 0.0 < p < 2.0:
        raise ValueError(f"erfc_inv requires 0 < p < 2, got {p}")
    return float(special.erfcinv(p))


def find_root(f: Callable[[float], float], b: Bracket, tol: Tolerance | None = None) -> float:
    """Find a root of f in the bracket by Brent's method.

    Requires f(b.lo) * f(b.hi) <= 0.  Bisection steps guarantee convergence;
    secant / inverse-quadratic steps accelerate it.  Deterministic for fixed
    inputs.
    """
    if tol is None:
        tol = _default_tolerance(b)
    a, bb = b.lo, b.hi
    fa, fb = f(a), f(bb)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return bb
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise NoSignChange(f"f({a})={fa} and f({bb})={fb} have the same sign")

    c, fc = a, fa
    d = e = bb - a
    for _ in range(tol.max_iter):
        if abs(fc) < abs(fb):
            a, bb, c = bb, c, bb
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * math.ulp(abs(bb)) + 0.5 * tol.abs_x
        xm = 0.5 * (c - bb)
        if abs(xm) <= tol1 or fb == 0.0:
            return bb
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                # secant step
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                # inverse quadratic interpolation
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (bb - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = xm
        else:
            d = e = xm
        a, fa = bb, fb
        bb += d if abs(d) > tol1 else math.copysign(tol1, xm)
        fb = f(bb)
        if (fb > 0.0) == (fc > 0.0):
            c, fc = a, fa
            d = e = bb - a
    raise MaxIterations(f"root not bracketed to {tol.abs_x} in {tol.max_iter} iterations")


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi


def minimize_scalar(
    f: Callable[[float], float], b: Bracket, tol: Tolerance | None = None
) -> tuple[float, float]:
    """Golden-section minimization of a unimodal f on the bracket.

    Unimodality is the caller's responsibility; for a monotone f the search
    converges to the appropriate bracket endpoint.  Returns (x, f(x)).
    """
    if tol is None:
        tol = _default_tolerance(b)
    lo, hi = b.lo, b.hi
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(tol.max_iter):
        if hi - lo <= tol.abs_x:
            x = 0.5 * (lo + hi)
            fx = f(x)
            # return the best point actually evaluated
            return min(((x, fx), (x1, f1), (x2, f2)), key=lambda t: t[1])
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = f(x2)
    raise MaxIterations(f"bracket not reduced to {tol.abs_x} in {tol.max_iter} iterations")


def integrate_semi_infinite(
    f: Callable[[float], float], a: float, tol: Tolerance | None = None
) -> float:
    """Integrate f over (a, inf) via the compactifying substitution
    y = a + t/(1-t), t in [0, 1), with adaptive Gauss-Kronrod quadrature.

    Intended for nonnegative integrands decaying at least like y^(-3/2);
    the substitution turns that tail into an integrable endpoint singularity
    which the adaptive rule resolves.
    """
    if tol is None:
        tol = Tolerance()

    def transformed(t: float) -> float:
        y = a + t / (1.0 - t)
        v = f(y)
        if not math.isfinite(v):
            raise NonFinite(f"integrand returned {v} at y={y}")
        return v / (1.0 - t) ** 2

    out = integrate.quad(
        transformed,
        0.0,
        1.0,
        limit=max(tol.max_iter, 50),
        epsabs=0.0,
        epsrel=tol.rel_f,
        full_output=1,
    )
    val, abserr = out[0], out[1]
    if len(out) > 3 and abserr > max(10.0 * tol.rel_f * abs(val), 1e-13):
        raise MaxIterations(f"quadrature did not converge: {out[3]}")
    return val
