import logging

import click

from randomset.commands import reports_errors
from randomset.commands.adjust import run_adjust
from randomset.commands.correlate import run_correlate
from randomset.commands.power import run_power
from randomset.commands.score import run_score
from randomset.commands.simulate import run_simulate
from randomset.io import write_output
from randomset.runconfig import RunConfig

logger = logging.getLogger(__name__)

RUNNERS = {
    'score': run_score,
    'adjust': run_adjust,
    'simulate': lambda config, workers: run_simulate(config, workers)[0],
    'power': run_power,
    'correlate': run_correlate,
}


def replay_run(path, workers=1):
    """Re-run the command recorded in the header of ``path``; returns its output text."""
    config = RunConfig.from_header(path)
    logger.debug('replaying %s from %s', config.command, path)
    return RUNNERS[config.command](config, workers)


@click.command()
@click.argument('path', type=click.Path(dir_okay=False))
@click.option('--out', type=click.Path(dir_okay=False), default=None)
@click.option('--workers', type=int, default=None)
@click.pass_obj
@reports_errors
def replay(settings, path, out, workers):
    """Recompute an output from its own # header."""
    write_output(replay_run(path, workers or settings.WORKERS), out)
