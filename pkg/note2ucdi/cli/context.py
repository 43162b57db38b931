import sys
from typing import NoReturn

import click

from note2ucdi.cli.config import CliSettings, RunConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ANALYSIS_FAILED = 3


class CliContext:
    def __init__(self, config: RunConfig, settings: CliSettings) -> None:
        self.config = config
        self.settings = settings


pass_cli_context = click.make_pass_decorator(CliContext)


def fail(message: str, code: int = EXIT_USAGE) -> NoReturn:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)
