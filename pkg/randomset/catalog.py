"""Binding categories to a gene universe, overlap counts, probe-set reduction."""
import logging

import numpy as np
import pandas as pd
from scipy import sparse

from randomset.errors import InputError
from randomset.models import Category, CategoryCatalog, GeneScoreTable

logger = logging.getLogger(__name__)

UNIVERSE_MODES = ('all', 'annotated')


def bind(catalog, table, universe_mode='all'):
    """Intersect every category with the table's genes and drop small ones.

    In ``annotated`` mode the universe shrinks to the genes appearing in at
    least one category (before the size filter). Binding a bound catalog
    again to its table, or to the table it was bound from, returns it as is.
    """
    if universe_mode not in UNIVERSE_MODES:
        raise InputError(f'universe mode must be one of {UNIVERSE_MODES}, got {universe_mode!r}')
    if catalog.bound and catalog.universe_mode == universe_mode:
        if table.same_universe(catalog.table) or table.same_universe(catalog.source):
            return catalog

    if universe_mode == 'annotated':
        annotated = set()
        for category in catalog:
            annotated.update(category.members)
        present = annotated.intersection(table.index)
        if len(present) < 2:
            raise InputError(f'annotated universe has {len(present)} genes; need at least 2')
        universe = table.restrict(present)
    else:
        universe = table
    logger.debug('universe (%s): G=%d', universe_mode, universe.universe_size)

    index = universe.index
    kept, dropped = [], 0
    for category in catalog:
        members = frozenset(g for g in category.members if g in index)
        if len(members) < catalog.min_size:
            dropped += 1
            continue
        kept.append(Category(
            id=category.id,
            description=category.description,
            members=members,
            indices=np.sort(np.fromiter((index[g] for g in members), dtype=np.int64)),
            universe=universe,
        ))
    logger.debug('bound %d categories, dropped %d below min_size=%d',
                 len(kept), dropped, catalog.min_size)
    if not kept:
        raise InputError(
            f'no category keeps at least {catalog.min_size} genes in the universe'
        )
    return CategoryCatalog(
        categories=kept,
        min_size=catalog.min_size,
        table=universe,
        universe_mode=universe_mode,
        source=table,
    )


def overlap(c1, c2):
    """Number of shared genes m12 (sorted-index merge)."""
    if not (c1.bound and c2.bound):
        raise InputError('overlap needs bound categories')
    if not c1.universe.same_universe(c2.universe):
        raise InputError(f'{c1.id} and {c2.id} are bound to different universes')
    return int(np.intersect1d(c1.indices, c2.indices, assume_unique=True).size)


def incidence_matrix(catalog):
    """Sparse k x G 0/1 membership matrix of a bound catalog."""
    if not catalog.bound:
        raise InputError('catalog is not bound to a universe')
    rows = np.concatenate([np.full(c.size, i, dtype=np.int64) for i, c in enumerate(catalog)])
    cols = np.concatenate([c.indices for c in catalog])
    data = np.ones(rows.size, dtype=np.int64)
    return sparse.csr_matrix(
        (data, (rows, cols)), shape=(len(catalog), catalog.table.universe_size)
    )


def overlap_matrix(catalog):
    """All pairwise overlaps m_ij; the diagonal holds the sizes."""
    inc = incidence_matrix(catalog)
    return np.asarray((inc @ inc.T).toarray(), dtype=np.int64)


# ---------------------------------------------------------------------------
# Probe sets
# ---------------------------------------------------------------------------

def _check_mapped(probe_ids, probe_map):
    missing = probe_map.unmapped(probe_ids)
    if missing:
        shown = ', '.join(missing[:20])
        more = f' (+{len(missing) - 20} more)' if len(missing) > 20 else ''
        raise InputError(f'{len(missing)} probes missing from the probe map: {shown}{more}')


def reduce_probesets(table, probe_map):
    """Collapse a probe-level table to genes by taking each gene's median."""
    _check_mapped(table.ids, probe_map)
    frame = pd.DataFrame({
        'gene_id': [probe_map.gene_of(p) for p in table.ids],
        'score': table.scores,
    })
    reduced = frame.groupby('gene_id', sort=False)['score'].median()
    logger.debug('reduced %d probes to %d genes', table.universe_size, reduced.size)
    return GeneScoreTable(ids=list(reduced.index), scores=reduced.to_numpy())


def probe_gene_counts(category, probe_map):
    """(m_p, m_g): member probes and the distinct genes they map to."""
    _check_mapped(sorted(category.members), probe_map)
    genes = {probe_map.gene_of(p) for p in category.members}
    return category.size, len(genes)


def collapse_to_genes(catalog, probe_map, min_size=1):
    """Unbound gene-level catalog: each category becomes its members' genes."""
    categories = []
    for category in catalog:
        _check_mapped(sorted(category.members), probe_map)
        categories.append(Category(
            id=category.id,
            description=category.description,
            members=frozenset(probe_map.gene_of(p) for p in category.members),
        ))
    return CategoryCatalog(categories=categories, min_size=min_size)
