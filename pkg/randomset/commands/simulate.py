import logging

import click
import pandas as pd

from randomset.commands import build_config, input_options, load_inputs, reports_errors, working_scores
from randomset.commands.score import rank_results
from randomset.io import render, write_null_sample, write_output
from randomset.multicat import build_null_model, max_t
from randomset.scoring import score_catalog

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ['category_id', 'description', 'm', 'z', 't', 'p_maxt']


def run_simulate(config, workers=1):
    """maxT across categories. Returns (report text, MaxTResult)."""
    catalog, universe = load_inputs(config)
    results = score_catalog(catalog, working_scores(universe, config), config.method, workers)
    model = build_null_model(catalog)
    by_id = {r.category_id: r for r in results}
    results = [by_id[cid] for cid in model.category_ids]

    outcome = max_t(results, model, config.alpha, config.B, config.seed, workers=workers)
    p_maxt = dict(zip(outcome.category_ids, outcome.p_adjusted))
    hits = [r for r, hit in zip(results, outcome.decisions) if hit]
    frame = pd.DataFrame(
        [[r.category_id, r.description, r.m, r.z, r.t, p_maxt[r.category_id]]
         for r in rank_results(hits)],
        columns=REPORT_COLUMNS,
    )
    header = config.header_lines(
        G=universe.universe_size,
        categories=model.k,
        t_star=outcome.threshold,
        significant=len(hits),
    )
    return render(frame, header), outcome


@click.command()
@input_options
@click.option('--alpha', type=float, default=None, help='family-wise error level [0.05]')
@click.option('--B', 'B', type=int, default=None, help='number of null draws [10000]')
@click.option('--seed', type=int, default=None, help='random seed [0]')
@click.option('--out', type=click.Path(dir_okay=False), default=None)
@click.option('--dump-null', type=click.Path(dir_okay=False), default=None,
              help='write the simulated max-T sample, one value per line')
@click.option('--workers', type=int, default=None, help='threads used for scoring and simulation')
@click.pass_obj
@reports_errors
def simulate(settings, workers, **options):
    """Single-step maxT threshold and the categories that exceed it."""
    config = build_config(settings, 'simulate', **options)
    report, outcome = run_simulate(config, workers or settings.WORKERS)
    write_output(report, config.out)
    if config.dump_null:
        write_null_sample(outcome.null_max, config.dump_null)
