"""Joint null distribution of category Z-scores and the single-step maxT test.

Under random permutation of the gene scores, two category statistics are
correlated only through the genes they share. The correlation depends on the
sizes and the overlap alone, so the whole null covariance is known without
looking at the scores.
"""
import itertools
import logging
import math
from fractions import Fraction

import numpy as np
from joblib import Parallel, delayed
from scipy.linalg import lapack

from randomset.catalog import incidence_matrix, overlap_matrix
from randomset.errors import DegenerateNullError, InputError, OverlapError
from randomset.models import MaxTResult, NullJointModel
from randomset.scoring import RandomSetCalibrator

logger = logging.getLogger(__name__)

FACTOR_TOL = 1e-8
CORRELATION_SLACK = 1e-12
EIGEN_FLOOR = -1e-8
MIN_SIMULATIONS = 100
MAX_EXHAUSTIVE_G = 8
DEFAULT_BLOCK_SIZE = 1000


def overlap_correlation(m1, m2, m12, G):
    for name, value in (('m1', m1), ('m2', m2), ('m12', m12), ('G', G)):
        if int(value) != value:
            raise InputError(f'{name} must be an integer, got {value!r}')
    m1, m2, m12, G = int(m1), int(m2), int(m12), int(G)
    if min(m1, m2) < 1 or not (0 <= m12 <= min(m1, m2)) or max(m1, m2) >= G:
        raise InputError(
            f'need 0 <= m12 <= min(m1, m2), 1 <= m1, m2 < G; got m1={m1}, m2={m2}, m12={m12}, G={G}'
        )
    num = G * m12 - m1 * m2
    # Square in exact rationals so identical categories give exactly 1
    r = math.sqrt(Fraction(num * num, m1 * m2 * (G - m1) * (G - m2)))
    return math.copysign(r, num) if num else 0.0


# ---------------------------------------------------------------------------
# Null model
# ---------------------------------------------------------------------------

def _psd_factor(R):
    """L with L @ L.T == R for a PSD (possibly singular) R.

    Pivoted Cholesky (LAPACK ?pstrf) first; eigenvalue clipping at zero when
    rounding has pushed R slightly off the PSD cone.
    """
    n = R.shape[0]
    c, piv, rank, info = lapack.dpstrf(R, lower=1)
    if info >= 0 and rank > 0:
        L = np.zeros((n, rank))
        L[piv - 1] = np.tril(c)[:, :rank]
        if np.abs(L @ L.T - R).max() <= FACTOR_TOL:
            return L
    w, V = np.linalg.eigh(R)
    if w[0] < EIGEN_FLOOR:
        raise OverlapError(f'correlation matrix has eigenvalue {w[0]:.3g}; not a valid covariance')
    logger.debug('pivoted Cholesky failed (info=%s); clipping eigenvalues', info)
    w = np.clip(w, 0.0, None)
    keep = w > w[-1] * n * np.finfo(float).eps
    return V[:, keep] * np.sqrt(w[keep])


def build_null_model(catalog):
    if not catalog.bound:
        raise InputError('catalog is not bound to a universe')
    G = catalog.table.universe_size
    sizes = catalog.sizes
    full = [c.id for c in catalog if c.size >= G]
    if full:
        raise DegenerateNullError(f'categories cover the whole universe: {", ".join(full)}')

    overlaps = overlap_matrix(catalog).astype(float)
    spread = sizes * (G - sizes).astype(float)
    R = (G * overlaps - np.outer(sizes, sizes).astype(float)) / np.sqrt(np.outer(spread, spread))
    if np.abs(R).max() > 1.0 + CORRELATION_SLACK:
        i, j = np.unravel_index(np.abs(R).argmax(), R.shape)
        raise OverlapError(
            f'correlation {R[i, j]!r} between {catalog.categories[i].id} and '
            f'{catalog.categories[j].id} is outside [-1, 1]'
        )
    R = np.clip(R, -1.0, 1.0)
    same = (overlaps == sizes[:, None]) & (overlaps == sizes[None, :])
    R[same] = 1.0

    # Factor each distinct member set once, in id order, so that duplicate
    # categories share a row and the draws do not depend on catalog order.
    order = sorted(range(len(catalog)), key=lambda i: catalog.categories[i].id)
    representative, group_of = {}, np.empty(len(catalog), dtype=np.int64)
    for i in order:
        key = catalog.categories[i].indices.tobytes()
        group_of[i] = representative.setdefault(key, len(representative))
    firsts = np.empty(len(representative), dtype=np.int64)
    for i in reversed(order):
        firsts[group_of[i]] = i
    L_unique = _psd_factor(np.ascontiguousarray(R[np.ix_(firsts, firsts)]))
    factor = L_unique[group_of]
    factor.setflags(write=False)
    R.setflags(write=False)
    logger.debug('null model: k=%d distinct=%d rank=%d', len(catalog), firsts.size, factor.shape[1])
    return NullJointModel(
        category_ids=tuple(catalog.ids),
        sizes=sizes,
        universe_size=G,
        correlation=R,
        factor=factor,
    )


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

def _check_seed(seed):
    if int(seed) != seed or seed < 0:
        raise InputError(f'seed must be a nonnegative integer, got {seed!r}')
    return int(seed)


def _block_rng(seed, block):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _block_sizes(B, block_size):
    full, rest = divmod(B, block_size)
    return [block_size] * full + ([rest] if rest else [])


def _draw_block(model, seed, block, size):
    eps = _block_rng(seed, block).standard_normal((size, model.rank))
    return eps @ model.factor.T


def simulate_null(model, B, seed, block_size=DEFAULT_BLOCK_SIZE):
    """Yield blocks of null Z-vectors (rows); block b uses substream (seed, b)."""
    if B < 1:
        raise InputError(f'B must be >= 1, got {B}')
    seed = _check_seed(seed)
    for block, size in enumerate(_block_sizes(B, block_size)):
        yield _draw_block(model, seed, block, size)


def _block_max_t(model, seed, block, size):
    z = _draw_block(model, seed, block, size)
    return (z / np.sqrt(model.sizes)).max(axis=1)


def max_t(results, model, alpha, B, seed, block_size=DEFAULT_BLOCK_SIZE, workers=1):
    ids = [r.category_id for r in results]
    if ids != list(model.category_ids):
        raise InputError('results and null model list different categories or orders')
    if B < MIN_SIMULATIONS:
        raise InputError(f'B must be >= {MIN_SIMULATIONS} for a stable quantile, got {B}')
    if not (0.0 <= alpha <= 1.0):
        raise InputError(f'alpha must lie in [0, 1], got {alpha!r}')
    seed = _check_seed(seed)

    blocks = Parallel(n_jobs=workers, prefer='threads')(
        delayed(_block_max_t)(model, seed, block, size)
        for block, size in enumerate(_block_sizes(B, block_size))
    )
    null_max = np.concatenate(blocks)
    # alpha = 1 rejects every finite T
    threshold = -math.inf if alpha == 1.0 else float(np.quantile(null_max, 1.0 - alpha))
    t_values = np.array([r.t for r in results], dtype=float)
    decisions = t_values > threshold
    ordered = np.sort(null_max)
    exceed = B - np.searchsorted(ordered, t_values, side='left')
    p_adjusted = (exceed + 1) / (B + 1)
    logger.debug('maxT: t*=%.6g from B=%d, %d significant', threshold, B, int(decisions.sum()))
    return MaxTResult(
        threshold=threshold,
        category_ids=tuple(ids),
        t_values=t_values,
        decisions=decisions,
        p_adjusted=p_adjusted,
        B=B,
        seed=seed,
        alpha=alpha,
        null_max=null_max,
    )


# ---------------------------------------------------------------------------
# Permutation oracle
# ---------------------------------------------------------------------------

def _standardizers(table, catalog):
    calibrator = RandomSetCalibrator(table)
    mu = calibrator.mu
    sigma = np.empty(len(catalog))
    for i, category in enumerate(catalog):
        moments = calibrator.moments(category.size)
        if moments.sigma2 <= 0.0:
            raise DegenerateNullError(f'{category.id}: zero random-set variance')
        sigma[i] = moments.sigma
    return mu, sigma


def _permuted_z(permuted, incidence, sizes, mu, sigma):
    sums = np.asarray(incidence @ permuted.T).T
    return (sums / sizes - mu) / sigma


def _oracle_block(table, incidence, sizes, mu, sigma, seed, block, size):
    rng = _block_rng(seed, block)
    permuted = rng.permuted(np.tile(table.scores, (size, 1)), axis=1)
    return _permuted_z(permuted, incidence, sizes, mu, sigma)


def permutation_joint_oracle(table, catalog, B, seed, exhaustive=False,
                             block_size=DEFAULT_BLOCK_SIZE, workers=1):
    """Z-scores of every category under random relabelling of the gene scores.

    Returns a (draws x k) array. With ``exhaustive`` every one of the G!
    permutations is used once and ``B``/``seed`` are ignored.
    """
    if not catalog.bound or not catalog.table.same_universe(table):
        raise InputError('catalog must be bound to the score table')
    incidence = incidence_matrix(catalog).astype(float)
    sizes = catalog.sizes.astype(float)
    mu, sigma = _standardizers(table, catalog)

    if exhaustive:
        G = table.universe_size
        if G > MAX_EXHAUSTIVE_G:
            raise InputError(f'exhaustive enumeration is limited to G <= {MAX_EXHAUSTIVE_G}, got {G}')
        order = np.array(list(itertools.permutations(range(G))), dtype=np.int64)
        return _permuted_z(table.scores[order], incidence, sizes, mu, sigma)

    if B < 1:
        raise InputError(f'B must be >= 1, got {B}')
    seed = _check_seed(seed)
    blocks = Parallel(n_jobs=workers, prefer='threads')(
        delayed(_oracle_block)(table, incidence, sizes, mu, sigma, seed, block, size)
        for block, size in enumerate(_block_sizes(B, block_size))
    )
    return np.vstack(blocks)
