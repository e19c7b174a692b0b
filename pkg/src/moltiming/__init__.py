"""Detectors and error analysis for diffusion-based molecular timing
channels with Levy and inverse-Gaussian propagation noise."""

from .analysis import (
    ExponentResult,
    MismatchBound,
    err_exp_fa,
    err_exp_ml,
    fa_threshold_asymptote,
    g_function,
    g_root,
    max_bits_for_m,
    mismatch_bound,
    pe_fa,
    pe_gray,
    pe_ml_mc,
    pe_ml_single,
)
from .channels import (
    BadWeights,
    ChannelSpec,
    IGParams,
    LevyParams,
    StableParams,
    fa_cdf,
    fa_mode,
    fa_pdf,
    ig_cdf,
    ig_pdf,
    ig_sample,
    levy_cdf,
    levy_pdf,
    levy_sample,
    stable_linear_dispersion,
)
from .detectors import (
    BinaryScheme,
    Decision,
    GrayScheme,
    LengthMismatch,
    fa_detect,
    fa_threshold,
    gray_fa_detect,
    ig_fa_detect,
    ig_ml_detect,
    linear_detect,
    ml_detect,
    ml_threshold_single,
)
from .montecarlo import (
    SweepPoint,
    SweepSpec,
    TargetUnreachable,
    TrialStats,
    required_m,
    simulate_pe,
    sweep,
)
from .numerics import (
    Bracket,
    MaxIterations,
    NonFinite,
    NoSignChange,
    Tolerance,
    erfc,
    erfc_inv,
    find_root,
    integrate_semi_infinite,
    minimize_scalar,
)

__version__ = "0.1.0"
