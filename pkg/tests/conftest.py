import numpy as np
import pytest


def ks_statistic(samples: np.ndarray, cdf) -> float:
    """Two-sided Kolmogorov-Smirnov distance between an empirical sample and
    a callable CDF."""
    x = np.sort(np.asarray(samples))
    n = x.size
    f = cdf(x)
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    return float(max(np.abs(hi - f).max(), np.abs(f - lo).max()))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
