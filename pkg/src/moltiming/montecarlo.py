"""Reproducible Monte Carlo trial engine.

Trials are partitioned into fixed-size blocks; block b draws from a
counter-based stream keyed by (seed, first trial index of b), so any
assignment of blocks to workers reproduces the serial run bit for bit.
Error counts are integers and their reduction is associative, making the
aggregate independent of completion order.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import detectors
from .channels import IGParams, LevyParams, ig_sample, levy_sample
from .detectors import BinaryScheme, GrayScheme

__all__ = [
    "TargetUnreachable",
    "SweepSpec",
    "SweepPoint",
    "TrialStats",
    "LEVY_DETECTORS",
    "IG_DETECTORS",
    "wilson_interval",
    "simulate_pe",
    "sweep",
    "required_m",
]

# Fixed partitioning constants; changing them changes the trial-to-stream
# mapping and therefore the sampled values.
BLOCK_TRIALS = 1 << 16
_CHUNK_ELEMS = 1 << 22

LEVY_DETECTORS = ("ml", "fa", "linear", "gray_fa")
IG_DETECTORS = ("ig_ml", "ig_fa", "ig_linear")


class TargetUnreachable(RuntimeError):
    """No admissible particle count reaches the requested error target."""


@dataclass(frozen=True)
class TrialStats:
    """Error counts from one simulated operating point with a 95% Wilson
    interval for the error probability."""

    errors: int
    trials: int
    p_hat: float
    ci_95: tuple[float, float]
    elapsed: float

    def __post_init__(self):
        if self.errors > self.trials:
            raise ValueError("errors cannot exceed trials")


@dataclass(frozen=True)
class SweepSpec:
    """One detector swept along one parameter axis, everything else fixed."""

    detector: str
    vary: str  # delta | m | c | velocity | L
    grid: tuple[float, ...]
    fixed: Mapping[str, float] = field(default_factory=dict)
    trials: int = 10**6
    seed: int = 0

    def __post_init__(self):
        if self.detector not in LEVY_DETECTORS + IG_DETECTORS:
            raise ValueError(f"unknown detector {self.detector!r}")
        if self.vary not in ("delta", "m", "c", "velocity", "L"):
            raise ValueError(f"unknown sweep axis {self.vary!r}")
        g = tuple(float(v) for v in self.grid)
        if not g:
            raise ValueError("grid must be nonempty")
        if any(b <= a for a, b in zip(g, g[1:])):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", g)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class SweepPoint:
    value: float
    stats: TrialStats | None
    error: str | None = None


def wilson_interval(errors: int, trials: int, z: float = 1.959964) -> tuple[float, float]:
    """95% Wilson score interval; robust for p_hat spanning 1e-4 to 0.5."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = (z / denom) * np.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials))
    return (max(0.0, center - half), min(1.0, center + half))


def _block_rng(seed: int, start: int) -> np.random.Generator:
    # 2^64 counter states per trial index: blocks can never overlap
    return np.random.Generator(np.random.Philox(key=np.uint64(seed), counter=start << 64))


def _build_scheme(detector: str, params: Mapping):
    m = int(params["m"])
    delta = float(params["delta"])
    if detector in LEVY_DETECTORS:
        channel = LevyParams(0.0, float(params["c"]))
        if detector == "gray_fa":
            return GrayScheme(delta, int(params["bits"]), m, channel)
        return BinaryScheme(delta, m, channel)
    channel = IGParams(float(params["kappa"]), float(params["lam"]))
    return BinaryScheme(delta, m, channel)


def _decide_fn(detector: str, scheme, params: Mapping):
    if detector == "ml":
        return lambda Y: detectors.ml_decide(scheme, Y)
    if detector == "fa":
        return lambda Y: detectors.fa_decide(scheme, Y)
    if detector == "linear":
        w = params.get("weights")
        return lambda Y: detectors.linear_decide(scheme, Y, w)
    if detector == "gray_fa":
        return lambda Y: detectors.gray_fa_decide(scheme, Y)
    if detector == "ig_ml":
        return lambda Y: detectors.ig_ml_decide(scheme, Y)
    if detector == "ig_fa":
        return lambda Y: detectors.ig_fa_decide(scheme, Y)
    if detector == "ig_linear":
        return lambda Y: detectors.ig_linear_decide(scheme, Y)
    raise ValueError(f"unknown detector {detector!r}")


def _simulate_block(detector: str, params: Mapping, seed: int, start: int, n: int) -> int:
    """Run trials [start, start + n) on their own stream; returns the error
    count.  The call sequence on the stream (symbols, then noise chunk by
    chunk) is fixed, so results depend only on (seed, start, n)."""
    scheme = _build_scheme(detector, params)
    decide = _decide_fn(detector, scheme, params)
    m = scheme.m
    channel = scheme.channel
    n_symbols = scheme.n_points if isinstance(scheme, GrayScheme) else 2
    spacing = scheme.delta_sub if isinstance(scheme, GrayScheme) else scheme.delta

    rng = _block_rng(seed, start)
    symbols = rng.integers(0, n_symbols, size=n)
    errors = 0
    rows_per_chunk = max(1, _CHUNK_ELEMS // m)
    for i in range(0, n, rows_per_chunk):
        sym = symbols[i : i + rows_per_chunk]
        if isinstance(channel, LevyParams):
            z = levy_sample(channel, rng, size=(sym.size, m))
        else:
            z = ig_sample(channel, rng, size=(sym.size, m))
        y = sym[:, None] * spacing + z
        errors += int(np.count_nonzero(decide(y) != sym))
    return errors


def simulate_pe(
    detector: str,
    params: Mapping,
    trials: int,
    seed: int,
    workers: int = 1,
) -> TrialStats:
    """Estimate a detector's symbol error probability.

    Per trial: draw an equiprobable symbol, draw m propagation delays, form
    the arrivals, detect, compare.  Identical (params, trials, seed) give
    identical counts for any worker count.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    t0 = time.perf_counter()
    blocks = [
        (start, min(BLOCK_TRIALS, trials - start)) for start in range(0, trials, BLOCK_TRIALS)
    ]
    plain = dict(params)
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counts = list(
                pool.map(
                    _simulate_block,
                    [detector] * len(blocks),
                    [plain] * len(blocks),
                    [seed] * len(blocks),
                    [s for s, _ in blocks],
                    [n for _, n in blocks],
                )
            )
        errors = sum(counts)
    else:
        errors = sum(_simulate_block(detector, plain, seed, s, n) for s, n in blocks)
    elapsed = time.perf_counter() - t0
    return TrialStats(errors, trials, errors / trials, wilson_interval(errors, trials), elapsed)


def resolve_point(spec: SweepSpec, grid_value: float) -> tuple[str, dict]:
    """Concrete (detector, params) for one grid point of a sweep."""
    params = dict(spec.fixed)
    v = spec.vary
    if v == "velocity":
        d = float(params.pop("d", 1.0))
        diff = float(params.pop("D", 0.5))
        params["kappa"] = d / grid_value
        params["lam"] = d * d / (2.0 * diff)
    elif v == "m":
        params["m"] = int(round(grid_value))
    elif v == "L":
        params["bits"] = int(round(grid_value))
    else:
        params[v] = grid_value
    params.setdefault("m", 1)
    return spec.detector, params


def sweep(spec: SweepSpec, workers: int = 1) -> list[SweepPoint]:
    """Map simulate_pe over the grid; a failing point is recorded and the
    sweep continues."""
    out = []
    for gv in spec.grid:
        try:
            detector, params = resolve_point(spec, gv)
            stats = simulate_pe(detector, params, spec.trials, spec.seed, workers=workers)
            out.append(SweepPoint(gv, stats))
        except Exception as exc:  # noqa: BLE001 - per-point fault isolation
            out.append(SweepPoint(gv, None, f"{type(exc).__name__}: {exc}"))
    return out


def required_m(
    c: float,
    delta: float,
    target_pe: float,
    use_closed_form: bool = True,
    trials: int = 10**5,
    seed: int = 0,
    cap: int = 10**7,
) -> int:
    """Smallest particle count whose first-arrival error probability is at
    or below target_pe, found by doubling then bisection (the error is
    decreasing in the particle count)."""
    from .analysis import pe_fa

    if not 0.0 < target_pe < 0.5:
        raise ValueError(f"target_pe must be in (0, 0.5), got {target_pe}")

    if use_closed_form:
        pe = lambda m: pe_fa(c, delta, m)
    else:
        pe = lambda m: simulate_pe("fa", {"c": c, "delta": delta, "m": m}, trials, seed).p_hat

    hi = 1
    while pe(hi) > target_pe:
        hi *= 2
        if hi > cap:
            raise TargetUnreachable(
                f"pe stays above {target_pe} up to m={cap} (c={c}, delta={delta})"
            )
    lo = hi // 2  # pe(lo) > target (when hi > 1); pe(hi) <= target
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pe(mid) <= target_pe:
            hi = mid
        else:
            lo = mid
    return hi
