"""Power of averaging versus selection tests for category enrichment.

Genes score N(delta * I_g, 1) independently; a fraction pi of the system and
pi_c of the category are altered. Averaging tests the mean score of the
category; selection tests the fraction of category genes above a threshold k
chosen so the selected gene list has FDR fdr_alpha.
"""
import logging
import math

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import special

from randomset.errors import InfeasibleFDRError, InputError
from randomset.models import SelectionCalibration
from randomset.numerics import norm_quantile, norm_sf

logger = logging.getLogger(__name__)

BRACKET = 50.0
TIE_BAND = 1e-12
GRID_COLUMNS = ['pic_minus_pi', 'delta', 'power_ave', 'power_sel', 'delta_gap', 'superior']
DEFAULT_ENRICHMENT_AXIS = np.round(np.arange(1, 81) * 0.01, 10)
DEFAULT_DELTA_AXIS = np.round(np.arange(1, 101) * 0.05, 10)


def _check_open_unit(value, name):
    if not (0.0 < value < 1.0):
        raise InputError(f'{name} must lie in (0, 1), got {value!r}')


def _check_delta(delta):
    if not (delta > 0.0 and math.isfinite(delta)):
        raise InputError(f'delta must be positive and finite, got {delta!r}')


# ---------------------------------------------------------------------------
# FDR threshold
# ---------------------------------------------------------------------------

def kappa(pi, fdr_alpha):
    _check_open_unit(pi, 'pi')
    _check_open_unit(fdr_alpha, 'fdr_alpha')
    value = fdr_alpha * pi / ((1.0 - fdr_alpha) * (1.0 - pi))
    if not (0.0 < value < 1.0):
        raise InfeasibleFDRError(
            f'kappa={value:.6g} for pi={pi}, fdr_alpha={fdr_alpha}; FDR target is infeasible'
        )
    return value


def _log_h(x, delta):
    return float(special.log_ndtr(-x) - special.log_ndtr(delta - x))


def h(x, delta):
    """(1 - Phi(x)) / (1 - Phi(x - delta)); decreasing from 1 to 0."""
    _check_delta(delta)
    return math.exp(_log_h(float(x), delta))


def invert_h(kappa_value, delta):
    """Threshold k with h(k) = kappa, by bisection on log h."""
    _check_open_unit(kappa_value, 'kappa')
    _check_delta(delta)
    target = math.log(kappa_value)
    lo, hi = -BRACKET, BRACKET
    while _log_h(lo, delta) < target:
        lo *= 2.0
    while _log_h(hi, delta) > target:
        hi *= 2.0
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _log_h(mid, delta) > target:
            lo = mid
        else:
            hi = mid
    k = min((lo, hi), key=lambda x: abs(math.exp(_log_h(x, delta)) - kappa_value))
    return SelectionCalibration(
        kappa=kappa_value,
        delta=delta,
        k=k,
        mu0=float(special.ndtr(-k)),
        mu1=float(special.ndtr(delta - k)),
        nu0=float(special.ndtr(k)),
        nu1=float(special.ndtr(k - delta)),
        log_mu1=float(special.log_ndtr(delta - k)),
    )


def calibrate(model):
    return invert_h(kappa(model.pi, model.fdr_alpha), model.delta)


def variance_fn(pi_c, cal):
    """Variance of sqrt(m) times the selected fraction when a share pi_c is altered."""
    if not (0.0 <= pi_c <= 1.0):
        raise InputError(f'pi_c must lie in [0, 1], got {pi_c!r}')
    v0 = cal.mu0 * (1.0 - cal.mu0)
    v1 = cal.mu1 * (1.0 - cal.mu1)
    return v0 + pi_c * (v1 - v0)


def _scaled_variance(pi_c, cal):
    # variance_fn / mu1, written with mu0 = kappa * mu1 so it survives underflow
    base = cal.kappa * cal.nu0
    return base + pi_c * (cal.nu1 - base)


# ---------------------------------------------------------------------------
# Power
# ---------------------------------------------------------------------------

def averaging_tau(model):
    z_alpha = norm_quantile(1.0 - model.alpha)
    return z_alpha - math.sqrt(model.m) * model.enrichment * model.delta


def selection_tau(model, cal=None):
    cal = cal or calibrate(model)
    z_alpha = norm_quantile(1.0 - model.alpha)
    null_var = _scaled_variance(model.pi, cal)
    alt_var = _scaled_variance(model.pi_c, cal)
    if alt_var <= 0.0:
        return -math.inf if model.enrichment > 0 else z_alpha
    ratio = math.sqrt(null_var / alt_var)
    effect = math.exp(0.5 * cal.log_mu1) * (1.0 - cal.kappa) / math.sqrt(alt_var)
    return z_alpha * ratio - math.sqrt(model.m) * model.enrichment * effect


def power_ave(model):
    return norm_sf(averaging_tau(model))


def power_sel(model, cal=None):
    tau = selection_tau(model, cal)
    return 1.0 if tau == -math.inf else norm_sf(tau)


def delta_gap(model, cal=None):
    """tau_sel - tau_ave: negative when selection is the more powerful test."""
    return selection_tau(model, cal) - averaging_tau(model)


def superiority(gap):
    if gap > TIE_BAND:
        return 'ave'
    if gap < -TIE_BAND:
        return 'sel'
    return 'tie'


# ---------------------------------------------------------------------------
# Selection-superiority interval
# ---------------------------------------------------------------------------

def critical_delta(kappa_value):
    """Effect at which the selection variance no longer depends on pi_c."""
    _check_open_unit(kappa_value, 'kappa')
    return 2.0 * norm_quantile(1.0 / (1.0 + kappa_value))


def selection_interval(kappa_value):
    """Effects for which selection beats averaging in large categories, or None."""
    lo = critical_delta(kappa_value)
    hi = 1.0 / math.sqrt(kappa_value) - math.sqrt(kappa_value)
    return (lo, hi) if lo < hi else None


def critical_kappa(tol=1e-12):
    """Largest kappa for which the selection-superiority interval is nonempty."""
    lo, hi = 1e-6, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if selection_interval(mid) is None:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def small_delta_threshold(kappa_value, delta):
    _check_open_unit(kappa_value, 'kappa')
    _check_delta(delta)
    return -math.log(kappa_value) / delta


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

def _grid_row(base, enrichment, deltas, calibrations):
    rows = []
    for delta in deltas:
        model = base.evolve(pi_c=base.pi + enrichment, delta=delta)
        ave = power_ave(model)
        cal = calibrations[delta]
        if cal is None:
            rows.append((enrichment, delta, ave, math.nan, math.nan, 'infeasible'))
            continue
        gap = delta_gap(model, cal)
        rows.append((enrichment, delta, ave, power_sel(model, cal), gap, superiority(gap)))
    return rows


def power_grid(base, enrichment_axis=None, delta_axis=None, workers=1):
    """Averaging vs selection over a (pi_c - pi) x delta grid, row-major.

    Cells whose FDR target is infeasible stay in the table, marked
    ``infeasible`` with blank selection columns.
    """
    if enrichment_axis is None:
        enrichment_axis = [e for e in DEFAULT_ENRICHMENT_AXIS if base.pi + e <= 1.0]
    delta_axis = DEFAULT_DELTA_AXIS if delta_axis is None else delta_axis
    enrichment_axis = [float(e) for e in enrichment_axis]
    delta_axis = [float(d) for d in delta_axis]
    if not enrichment_axis or not delta_axis:
        raise InputError('grid axes must be nonempty')
    for e in enrichment_axis:
        if not (math.isfinite(e) and e >= 0.0 and base.pi + e <= 1.0):
            raise InputError(f'enrichment {e!r} puts pi_c outside [pi, 1]')
    for d in delta_axis:
        _check_delta(d)

    try:
        kappa_value = kappa(base.pi, base.fdr_alpha)
        calibrations = {d: invert_h(kappa_value, d) for d in delta_axis}
    except InfeasibleFDRError as err:
        logger.warning('%s; selection columns left blank', err)
        calibrations = {d: None for d in delta_axis}

    chunks = Parallel(n_jobs=workers, prefer='threads')(
        delayed(_grid_row)(base, e, delta_axis, calibrations) for e in enrichment_axis
    )
    return pd.DataFrame([row for chunk in chunks for row in chunk], columns=GRID_COLUMNS)


# ---------------------------------------------------------------------------
# Monte Carlo of the location model
# ---------------------------------------------------------------------------

def simulate_location_power(model, n_rep, seed, block_size=10000):
    """Empirical rejection rates of both tests under the location model.

    Each replicate draws one category of m genes, round(pi_c * m) of them
    shifted by delta. Returns a dict with ``ave`` and ``sel`` rates.
    """
    altered = model.pi_c * model.m
    n_altered = int(round(altered))
    if abs(altered - n_altered) > 1e-9:
        raise InputError(f'pi_c * m = {altered} must be a whole number of genes')
    if n_rep < 1:
        raise InputError(f'n_rep must be >= 1, got {n_rep}')
    cal = calibrate(model)
    z_alpha = norm_quantile(1.0 - model.alpha)
    root_m = math.sqrt(model.m)
    ave_cut = model.pi * model.delta + z_alpha / root_m
    sel_null_mean = model.pi * cal.mu1 + (1.0 - model.pi) * cal.mu0
    sel_cut = sel_null_mean + z_alpha * math.sqrt(variance_fn(model.pi, cal)) / root_m

    ave_hits = sel_hits = 0
    full, rest = divmod(n_rep, block_size)
    sizes = [block_size] * full + ([rest] if rest else [])
    for block, size in enumerate(sizes):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
        scores = rng.standard_normal((size, model.m))
        scores[:, :n_altered] += model.delta
        ave_hits += int(np.count_nonzero(scores.mean(axis=1) > ave_cut))
        sel_hits += int(np.count_nonzero((scores > cal.k).mean(axis=1) > sel_cut))
    return {'ave': ave_hits / n_rep, 'sel': sel_hits / n_rep, 'n_rep': n_rep}
