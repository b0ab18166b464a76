"""Probe-set comparison: naive, variance-adjusted and gene-level ("ideal") Z."""
import logging

import click
import pandas as pd

from randomset.catalog import bind, collapse_to_genes, probe_gene_counts, reduce_probesets
from randomset.commands import build_config, input_options, load_inputs, reports_errors, working_scores
from randomset.errors import InputError
from randomset.io import parse_probe_map, render, write_output
from randomset.scoring import adjust_for_probesets, score_catalog

logger = logging.getLogger(__name__)

ADJUST_COLUMNS = ['category_id', 'description', 'm_p', 'm_g', 'z_naive', 'z_adjusted', 'z_ideal']


def run_adjust(config, workers=1):
    if not config.probe_map:
        raise InputError('adjust needs --probe-map')
    catalog, probes = load_inputs(config)
    probe_map = parse_probe_map(config.probe_map)
    naive = score_catalog(catalog, working_scores(probes, config), config.method, workers)

    genes = reduce_probesets(probes, probe_map)
    gene_catalog = bind(collapse_to_genes(catalog, probe_map, min_size=1), genes)
    ideal = {
        r.category_id: r.z
        for r in score_catalog(gene_catalog, working_scores(genes, config), config.method, workers)
    }

    G = probes.universe_size
    by_id = catalog.by_id
    rows = []
    for result in naive:
        m_p, m_g = probe_gene_counts(by_id[result.category_id], probe_map)
        rows.append([result.category_id, result.description, m_p, m_g, result.z,
                     adjust_for_probesets(result.z, m_g, m_p, G), ideal[result.category_id]])
    frame = pd.DataFrame(rows, columns=ADJUST_COLUMNS)
    frame = frame.sort_values('z_adjusted', ascending=False, kind='stable')
    logger.debug('adjusted %d categories (%d probes, %d genes)',
                 len(frame), G, genes.universe_size)
    return render(frame, config.header_lines(G=G, G_genes=genes.universe_size))


@click.command()
@input_options
@click.option('--probe-map', type=click.Path(dir_okay=False), required=True,
              help='probe_id<TAB>gene_id map')
@click.option('--out', type=click.Path(dir_okay=False), default=None)
@click.option('--workers', type=int, default=None, help='threads used for scoring')
@click.pass_obj
@reports_errors
def adjust(settings, workers, **options):
    """Compare probe-level, adjusted and gene-level Z per category."""
    config = build_config(settings, 'adjust', **options)
    write_output(run_adjust(config, workers or settings.WORKERS), config.out)
