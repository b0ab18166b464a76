import logging

import click
import pandas as pd

from randomset.catalog import probe_gene_counts
from randomset.commands import build_config, input_options, load_inputs, reports_errors, working_scores
from randomset.io import parse_probe_map, render, write_output
from randomset.scoring import adjust_for_probesets, score_catalog

logger = logging.getLogger(__name__)

SCORE_COLUMNS = ['category_id', 'description', 'm', 'xbar', 'mu', 'sigma', 'z', 't',
                 'p_nominal', 'z_adjusted']


def rank_results(results, sort='t'):
    """Descending by t (or z); ties keep category id order."""
    ordered = sorted(results, key=lambda r: r.category_id)
    return sorted(ordered, key=lambda r: -(r.t if sort == 't' else r.z))


def run_score(config, workers=1):
    """Score every category and return the results table as text."""
    catalog, universe = load_inputs(config)
    table = working_scores(universe, config)
    results = score_catalog(catalog, table, config.method, workers)
    if config.probe_map:
        probe_map = parse_probe_map(config.probe_map)
        G = universe.universe_size
        by_id = catalog.by_id
        adjusted = []
        for result in results:
            m_p, m_g = probe_gene_counts(by_id[result.category_id], probe_map)
            adjusted.append(result.with_adjusted(adjust_for_probesets(result.z, m_g, m_p, G)))
        results = adjusted

    frame = pd.DataFrame(
        [[r.category_id, r.description, r.m, r.xbar, r.mu, r.sigma, r.z, r.t, r.p_nominal,
          r.z_adjusted] for r in rank_results(results, config.sort)],
        columns=SCORE_COLUMNS,
    )
    frame['z_adjusted'] = frame['z_adjusted'].astype(float)
    logger.debug('scored %d categories', len(frame))
    return render(frame, config.header_lines(G=universe.universe_size))


@click.command()
@input_options
@click.option('--probe-map', type=click.Path(dir_okay=False), default=None,
              help='probe_id<TAB>gene_id map; adds the probe-set adjusted z')
@click.option('--sort', type=click.Choice(['t', 'z']), default='t', show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None)
@click.option('--workers', type=int, default=None, help='threads used for scoring')
@click.pass_obj
@reports_errors
def score(settings, workers, **options):
    """Random-set Z and T for every category."""
    config = build_config(settings, 'score', **options)
    write_output(run_score(config, workers or settings.WORKERS), config.out)
