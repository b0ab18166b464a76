import logging

import click

from randomset.commands import build_config, reports_errors
from randomset.io import render, write_output
from randomset.models import PowerModel
from randomset.power import power_grid

logger = logging.getLogger(__name__)


def _float_list(ctx, param, value):
    if value is None:
        return None
    try:
        return tuple(float(v) for v in value.split(',') if v.strip())
    except ValueError:
        raise click.BadParameter(f'expected comma-separated numbers, got {value!r}')


def run_power(config, workers=1):
    """Averaging vs selection power grid as CSV text."""
    base = PowerModel(pi=config.pi, pi_c=config.pi, m=config.m,
                      alpha=config.alpha, fdr_alpha=config.fdr)
    grid = power_grid(base, config.enrichment or None, config.delta or None, workers)
    logger.debug('power grid: %d cells, %d infeasible',
                  len(grid), int((grid['superior'] == 'infeasible').sum()))
    return render(grid, config.header_lines(), sep=',')


@click.command()
@click.option('--m', 'm', type=int, default=20, show_default=True, help='category size')
@click.option('--pi', type=float, default=0.2, show_default=True,
              help='fraction of affected genes overall')
@click.option('--alpha', type=float, default=None, help='level of the category test [0.05]')
@click.option('--fdr', type=float, default=None, help='FDR of the gene selection [0.05]')
@click.option('--enrichment', callback=_float_list, default=None,
              help='comma list of pi_c - pi values [0.01..0.80]')
@click.option('--delta', callback=_float_list, default=None,
              help='comma list of effect sizes [0.05..5.00]')
@click.option('--out', type=click.Path(dir_okay=False), default=None)
@click.option('--workers', type=int, default=None)
@click.pass_obj
@reports_errors
def power(settings, workers, **options):
    """Power of the averaging and selection tests over a grid."""
    config = build_config(settings, 'power', **options)
    write_output(run_power(config, workers or settings.WORKERS), config.out)
