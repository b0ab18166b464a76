"""Random-set calibration of category scores.

A category of size m is compared with a uniformly random m-subset of the
universe, conditioning on the observed gene scores. The first two moments of
the subset mean are available in closed form, so no permutation is needed
to standardize a category statistic.
"""
import logging
import math

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import special
from scipy.stats import false_discovery_control, hypergeom, rankdata

from randomset.errors import DegenerateNullError, InputError
from randomset.models import EnrichmentResult, GeneScoreTable, RandomSetMoments
from randomset.numerics import fisher_transform_many, midranks, norm_sf

logger = logging.getLogger(__name__)

SCORE_METHODS = ('ave', 'sel', 'rank')


# ---------------------------------------------------------------------------
# Moments
# ---------------------------------------------------------------------------

class RandomSetCalibrator:
    """Universe aggregates computed once and shared by every category."""

    def __init__(self, table):
        scores = table.scores
        G = table.universe_size
        self.table = table
        self.G = G
        self.mu = math.fsum(scores) / G
        if np.ptp(scores) == 0.0:
            self.sum_sq = 0.0
        else:
            self.sum_sq = math.fsum((scores - self.mu) ** 2)

    def moments(self, m):
        G = self.G
        if int(m) != m or not (1 <= m <= G):
            raise InputError(f'category size must lie in [1, {G}], got {m!r}')
        m = int(m)
        # One rounding: both operands are exact for integer-valued scores
        sigma2 = ((G - m) * self.sum_sq) / (m * (G - 1) * G)
        return RandomSetMoments(mu=self.mu, sigma2=sigma2, m=m, G=G)


class RankCalibrator(RandomSetCalibrator):
    """Midrank scores: Wilcoxon closed form without ties, general form with."""

    def __init__(self, table):
        super().__init__(table)
        self.tied = np.unique(table.scores).size < self.G

    def moments(self, m):
        if self.tied or m == self.G:
            return super().moments(m)
        return wilcoxon_moments(self.G, m)


def random_set_moments(table, m):
    return RandomSetCalibrator(table).moments(m)


def wilcoxon_moments(G, m):
    if int(G) != G or int(m) != m or not (1 <= m < G):
        raise InputError(f'wilcoxon moments need 1 <= m < G, got m={m!r}, G={G!r}')
    G, m = int(G), int(m)
    return RandomSetMoments(
        mu=(G + 1) / 2,
        sigma2=((G - m) * (G + 1)) / (12 * m),
        m=m,
        G=G,
    )


# ---------------------------------------------------------------------------
# Category scores
# ---------------------------------------------------------------------------

def _degenerate_cause(moments, calibrator):
    if moments.m == moments.G:
        return f'category covers the whole universe (m = G = {moments.G})'
    if calibrator.sum_sq == 0.0:
        return 'all gene scores are equal'
    return 'variance underflow'


def z_score(category, table, calibrator=None):
    if not category.bound:
        raise InputError(f'category {category.id} is not bound to a universe')
    if not category.universe.same_universe(table):
        raise InputError(f'category {category.id} is bound to a different universe')
    calibrator = calibrator or RandomSetCalibrator(table)
    m = category.size
    moments = calibrator.moments(m)
    if moments.sigma2 <= 0.0:
        raise DegenerateNullError(
            f'{category.id}: zero random-set variance; {_degenerate_cause(moments, calibrator)}'
        )
    xbar = math.fsum(table.scores[category.indices]) / m
    sigma = moments.sigma
    z = (xbar - moments.mu) / sigma
    return EnrichmentResult(
        category_id=category.id,
        description=category.description,
        m=m,
        xbar=xbar,
        mu=moments.mu,
        sigma=sigma,
        z=z,
        t=z / math.sqrt(m),
        p_nominal=norm_sf(z),
    )


def calibrator_for(table, method):
    return RankCalibrator(table) if method == 'rank' else RandomSetCalibrator(table)


def score_catalog(catalog, table, method='ave', workers=1):
    """Score every category; results come back ordered by category id."""
    if not catalog.bound:
        raise InputError('catalog is not bound to a universe')
    if not catalog.table.same_universe(table):
        raise InputError('score table and catalog universe differ')
    calibrator = calibrator_for(table, method)
    ordered = sorted(catalog, key=lambda c: c.id)
    results = Parallel(n_jobs=workers, prefer='threads')(
        delayed(z_score)(category, table, calibrator) for category in ordered
    )
    return list(results)


def rank_table(table):
    return table.with_scores(midranks(table.scores))


# ---------------------------------------------------------------------------
# Gene selection
# ---------------------------------------------------------------------------

def bh_step_up(p_values, level):
    """Benjamini-Hochberg step-up; returns a boolean mask."""
    return false_discovery_control(np.asarray(p_values, dtype=float), method='bh') <= level


def storey_pi0(p_values, lam=0.5):
    p = np.asarray(p_values, dtype=float)
    return min(1.0, np.count_nonzero(p > lam) / ((1.0 - lam) * p.size))


def select_genes(table, rule):
    """Binary indicator table of the genes chosen by ``rule``.

    p-values are upper-tail normal: large scores are the interesting ones.
    """
    scores = table.scores
    if rule.kind == 'score_threshold':
        chosen = scores > rule.threshold
    elif rule.kind == 'top_n':
        chosen = np.zeros(scores.size, dtype=bool)
        chosen[np.argsort(-scores, kind='stable')[:rule.n]] = True
    else:
        p_values = special.ndtr(-scores)
        level = rule.level
        if rule.kind == 'fdr_storey_fixed_lambda':
            pi0 = storey_pi0(p_values, rule.storey_lambda)
            level = min(1.0, level / pi0) if pi0 > 0.0 else 1.0
            logger.debug('storey pi0=%.4f (lambda=%.2f), BH level %.4g',
                         pi0, rule.storey_lambda, level)
        chosen = bh_step_up(p_values, level)
    logger.debug('selected %d of %d genes (%s)', int(chosen.sum()), scores.size, rule.kind)
    return table.with_scores(chosen.astype(float))


def fisher_exact_pvalue(category, indicator):
    """One-sided hypergeometric p-value of the selected count in a category."""
    if not indicator.is_binary:
        raise InputError('fisher_exact_pvalue needs a 0/1 indicator table')
    if not category.universe.same_universe(indicator):
        raise InputError(f'category {category.id} is bound to a different universe')
    x = int(indicator.scores[category.indices].sum())
    selected = int(indicator.scores.sum())
    return float(hypergeom.sf(x - 1, indicator.universe_size, selected, category.size))


# ---------------------------------------------------------------------------
# Probe sets
# ---------------------------------------------------------------------------

def adjust_for_probesets(z, m_g, m_p, G):
    if not (1 <= m_g <= m_p < G):
        raise InputError(f'need 1 <= m_g <= m_p < G, got m_g={m_g}, m_p={m_p}, G={G}')
    return z * math.sqrt(m_g * (G - m_p) / (m_p * (G - m_g)))


# ---------------------------------------------------------------------------
# Gene-level scores from an expression matrix
# ---------------------------------------------------------------------------

def correlation_scores(expression, covariate):
    """Signed Fisher-transformed Spearman correlation of each gene with ``covariate``.

    ``expression`` is a genes x samples frame, ``covariate`` a series indexed
    by sample. Genes negatively correlated with the covariate score high.
    """
    missing = [s for s in expression.columns if s not in covariate.index]
    if missing:
        raise InputError(f'covariate missing for samples: {", ".join(map(str, missing))}')
    values = expression.to_numpy(dtype=float)
    if not np.all(np.isfinite(values)):
        raise InputError('expression matrix has non-finite values')
    y = pd.to_numeric(covariate.loc[expression.columns]).to_numpy(dtype=float)
    n = y.size
    if n < 4:
        raise InputError(f'need at least 4 samples, got {n}')

    ry = rankdata(y) - (n + 1) / 2.0
    rx = rankdata(values, axis=1) - (n + 1) / 2.0
    sxx = np.einsum('ij,ij->i', rx, rx)
    syy = float(ry @ ry)
    if syy == 0.0:
        raise InputError('covariate is constant')
    constant = np.flatnonzero(sxx == 0.0)
    if constant.size:
        names = ', '.join(str(expression.index[i]) for i in constant[:10])
        raise InputError(f'constant expression for genes: {names}')
    r = np.clip((rx @ ry) / np.sqrt(sxx * syy), -1.0, 1.0)
    perfect = np.flatnonzero(np.abs(r) >= 1.0)
    if perfect.size:
        names = ', '.join(str(expression.index[i]) for i in perfect[:10])
        raise InputError(f'perfect rank correlation (|r| = 1) for genes: {names}')
    return GeneScoreTable(ids=[str(g) for g in expression.index], scores=fisher_transform_many(r, n))
