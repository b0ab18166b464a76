"""Shared plumbing for the CLI commands: options, config assembly, error exit."""
import functools
import logging

import click

from randomset.catalog import bind
from randomset.errors import InputError, RandomSetError
from randomset.io import parse_gmt, parse_scores
from randomset.models import SelectionRule
from randomset.runconfig import RunConfig
from randomset.scoring import rank_table, select_genes

logger = logging.getLogger(__name__)

SELECT_KINDS = {
    'bh': 'fdr_bh',
    'storey': 'fdr_storey_fixed_lambda',
    'threshold': 'score_threshold',
    'top': 'top_n',
}

# Config attribute backing each option left unset on the command line
DEFAULTS = {
    'min_size': 'MIN_SIZE',
    'B': 'SIMULATIONS',
    'seed': 'SEED',
    'alpha': 'ALPHA',
    'fdr': 'FDR',
    'storey_lambda': 'STOREY_LAMBDA',
}


def reports_errors(func):
    """Turn a RandomSetError into one stderr line and the error's exit status."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except RandomSetError as err:
            logger.debug('run failed', exc_info=True)
            click.echo(err.reason.replace('\n', ' '), err=True)
            raise click.exceptions.Exit(err.exit_code)
    return wrapper


def build_config(settings, command, **options):
    for key, attr in DEFAULTS.items():
        if key in options and options[key] is None:
            options[key] = getattr(settings, attr)
    return RunConfig(command=command, **options)


def input_options(func):
    """Options shared by the commands that score categories."""
    decorators = [
        click.option('--scores', type=click.Path(dir_okay=False), required=True,
                     help='gene_id<TAB>score file'),
        click.option('--sets', type=click.Path(dir_okay=False), required=True,
                     help='GMT file of categories'),
        click.option('--universe', type=click.Choice(['all', 'annotated']), default='all',
                     show_default=True),
        click.option('--min-size', type=int, default=None, help='smallest category kept [10]'),
        click.option('--method', type=click.Choice(['ave', 'sel', 'rank']), default='ave',
                     show_default=True),
        click.option('--select', type=click.Choice(sorted(SELECT_KINDS)), default='bh',
                     show_default=True, help='gene selection rule for --method sel'),
        click.option('--fdr', type=float, default=None, help='FDR level of the gene list [0.05]'),
        click.option('--threshold', type=float, default=None, help='score threshold k'),
        click.option('--top', type=int, default=None, help='number of top genes'),
        click.option('--storey-lambda', type=float, default=None,
                     help='lambda of the fixed-lambda pi0 estimate [0.5]'),
        click.option('--negate', is_flag=True, help='test the lower tail of the scores'),
    ]
    for decorator in reversed(decorators):
        func = decorator(func)
    return func


def selection_rule(config):
    return SelectionRule(
        kind=SELECT_KINDS[config.select],
        level=config.fdr,
        threshold=config.threshold,
        n=config.top,
        storey_lambda=config.storey_lambda,
    )


def load_inputs(config):
    """Parse scores and sets, then bind. Returns (bound catalog, working universe)."""
    if not config.scores or not config.sets:
        raise InputError('--scores and --sets are required')
    table = parse_scores(config.scores)
    if config.negate:
        table = table.negated()
    catalog = bind(parse_gmt(config.sets, config.min_size), table, config.universe)
    logger.debug('G=%d, %d categories', catalog.table.universe_size, len(catalog))
    return catalog, catalog.table


def working_scores(universe, config):
    """The score table the categories are tested against, per --method."""
    if config.method == 'sel':
        return select_genes(universe, selection_rule(config))
    if config.method == 'rank':
        return rank_table(universe)
    return universe
