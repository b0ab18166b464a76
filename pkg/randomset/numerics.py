import math

import numpy as np
from scipy import special
from scipy.stats import rankdata

from randomset.errors import InputError

SQRT_HALF_PI = math.sqrt(math.pi / 2.0)
SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


def _finite(x, name='x'):
    x = float(x)
    if not math.isfinite(x):
        raise InputError(f'{name} must be finite, got {x!r}')
    return x


# ---------------------------------------------------------------------------
# Normal distribution
# ---------------------------------------------------------------------------

def norm_cdf(x):
    """Standard normal CDF, accurate in both tails (erfc-based)."""
    return float(special.ndtr(_finite(x)))


def norm_sf(x):
    """Upper tail 1 - Phi(x) without cancellation."""
    return float(special.ndtr(-_finite(x)))


def log_norm_sf(x):
    return float(special.log_ndtr(-_finite(x)))


def norm_pdf(x):
    x = _finite(x)
    return math.exp(-0.5 * x * x) / SQRT_TWO_PI


def norm_quantile(p):
    """Inverse of norm_cdf on the open interval (0, 1).

    Starts from the rational approximation in ``ndtri`` and applies one
    Halley step against ``norm_cdf``.
    """
    p = float(p)
    if not (0.0 < p < 1.0):
        raise InputError(f'quantile level must lie in (0, 1), got {p!r}')
    x = float(special.ndtri(p))
    if abs(x) < 37.0:
        # Work in the tail nearest x so the residual keeps its precision
        if x < 0:
            e = special.ndtr(x) - p
        else:
            e = (1.0 - p) - special.ndtr(-x)
        u = e * SQRT_TWO_PI * math.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    return x


def mills_ratio(x):
    """(1 - Phi(x)) / phi(x), evaluated through the scaled erfc."""
    x = _finite(x)
    return SQRT_HALF_PI * float(special.erfcx(x / math.sqrt(2.0)))


# ---------------------------------------------------------------------------
# Ranks and correlation
# ---------------------------------------------------------------------------

def midranks(scores):
    values = np.asarray(scores, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise InputError('midranks needs a nonempty one-dimensional list')
    if not np.all(np.isfinite(values)):
        raise InputError('midranks needs finite values')
    return rankdata(values, method='average')


def spearman(x, y):
    """Pearson correlation of midranks; ties are handled by the ranks."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise InputError(f'length mismatch: {x.size} vs {y.size}')
    if x.size < 3:
        raise InputError('spearman needs at least 3 observations')
    rx = midranks(x) - (x.size + 1) / 2.0
    ry = midranks(y) - (y.size + 1) / 2.0
    sxx = math.fsum(rx * rx)
    syy = math.fsum(ry * ry)
    if sxx == 0.0 or syy == 0.0:
        raise InputError('spearman correlation is undefined for a constant vector')
    r = math.fsum(rx * ry) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


# ---------------------------------------------------------------------------
# Fisher transform (sign flipped: negative correlation -> positive score)
# ---------------------------------------------------------------------------

def _check_sample_size(n):
    if int(n) != n or n < 4:
        raise InputError(f'sample size must be an integer >= 4, got {n!r}')
    return int(n)


def fisher_transform(r, n):
    r = _finite(r, 'r')
    n = _check_sample_size(n)
    if abs(r) >= 1.0:
        raise InputError(f'|r| must be < 1, got {r!r}')
    # 0.5 * log((1 - r)/(1 + r)) == -atanh(r); atanh is odd so f(-r) == -f(r)
    return -math.sqrt(n - 3) * math.atanh(r)


def fisher_transform_many(r, n):
    r = np.asarray(r, dtype=float)
    n = _check_sample_size(n)
    if not np.all(np.isfinite(r)) or np.any(np.abs(r) >= 1.0):
        raise InputError('all correlations must be finite with |r| < 1')
    return -math.sqrt(n - 3) * np.arctanh(r)
