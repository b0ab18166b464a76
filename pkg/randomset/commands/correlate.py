import click

from randomset.commands import build_config, reports_errors
from randomset.io import parse_covariate, parse_expression, render, write_output
from randomset.scoring import correlation_scores


def run_correlate(config, workers=1):
    """Gene scores from an expression matrix, ready for ``score --scores``."""
    table = correlation_scores(parse_expression(config.expression),
                               parse_covariate(config.covariate))
    frame = table.to_frame()
    return render(frame, config.header_lines(G=table.universe_size))


@click.command()
@click.option('--expression', type=click.Path(dir_okay=False), required=True,
              help='genes x samples matrix, tab-separated, sample names in the header')
@click.option('--covariate', type=click.Path(dir_okay=False), required=True,
              help='sample<TAB>value file')
@click.option('--out', type=click.Path(dir_okay=False), default=None)
@click.pass_obj
@reports_errors
def correlate(settings, **options):
    """Fisher-transformed Spearman scores against a sample covariate."""
    config = build_config(settings, 'correlate', **options)
    write_output(run_correlate(config), config.out)
