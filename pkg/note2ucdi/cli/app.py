from pathlib import Path
from typing import Optional

import click
from dotenv import load_dotenv

from note2ucdi import __version__
from note2ucdi.cli.commands import analyze, augment, batch, dedup, preprocess, split
from note2ucdi.cli.config import CliSettings, configure_logging, load_run_config
from note2ucdi.cli.context import CliContext, fail
from note2ucdi.exceptions import ConfigError

load_dotenv()


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="INI file with [enhance], [dedup], [augment], [align], [background], [damage], [ucdi] sections.",
)
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR.")
@click.version_option(__version__, prog_name="note2ucdi")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[Path], log_level: Optional[str]) -> None:
    """Banknote damage quantification and dataset curation."""
    settings = CliSettings()
    try:
        configure_logging(log_level or settings.log_level)
        config = load_run_config(config_path or settings.config)
    except ConfigError as e:
        fail(str(e))
    ctx.obj = CliContext(config, settings)


cli.add_command(dedup.dedup)
cli.add_command(split.split)
cli.add_command(preprocess.preprocess)
cli.add_command(augment.augment)
cli.add_command(analyze.analyze)
cli.add_command(batch.batch)


def main() -> None:
    cli()
