import logging
import os

import click
from dotenv import load_dotenv


def create_cli(config_name=None):
    """Build the ``randomset`` command group.

    The chosen Config class rides on ``ctx.obj`` and supplies every option
    the user leaves unset.
    """
    load_dotenv()
    from config import config

    name = config_name or os.environ.get('RANDOMSET_ENV') or 'default'
    settings = config.get(name, config['default'])

    logging.basicConfig(
        level=getattr(logging, str(settings.LOG_LEVEL).upper(), logging.WARNING),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )

    @click.group(context_settings={'help_option_names': ['-h', '--help']})
    @click.pass_context
    def cli(ctx):
        """Random-set enrichment scoring, maxT inference and power analysis."""
        ctx.obj = settings

    # Register commands
    from randomset.commands.score import score
    from randomset.commands.adjust import adjust
    from randomset.commands.simulate import simulate
    from randomset.commands.power import power
    from randomset.commands.correlate import correlate
    from randomset.commands.replay import replay
    for command in (score, adjust, simulate, power, correlate, replay):
        cli.add_command(command)

    return cli
