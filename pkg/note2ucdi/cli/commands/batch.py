from pathlib import Path
from typing import Optional

import click

from note2ucdi.Note2UCDI import create_note2ucdi
from note2ucdi.cli.config import with_overrides
from note2ucdi.cli.context import CliContext, fail, pass_cli_context
from note2ucdi.exceptions import ConfigError
from note2ucdi.reports.schemas import write_text
from note2ucdi.workers.batch_worker import BatchWorker, collect_items, load_templates, summarize


@click.command()
@click.argument("source", type=click.Path(exists=True, path_type=Path))
@click.option(
    "--templates",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="JSON object mapping class names to reference images.",
)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--workers", type=click.IntRange(min=1), default=None)
@click.option("--with-timings", is_flag=True, help="Keep timestamps and stage timings.")
@click.option("--seed", type=int, default=None, help="Mixed into the RANSAC seed.")
@pass_cli_context
def batch(
    obj: CliContext,
    source: Path,
    templates: Path,
    out: Path,
    workers: Optional[int],
    with_timings: bool,
    seed: Optional[int],
) -> None:
    """Analyze a class-per-folder tree (or dedup manifest) into NDJSON reports.

    Output lines are sorted by input path whatever the worker count.
    """
    try:
        config = with_overrides(obj.config, "align", seed=seed)
        template_map = load_templates(templates)
        items = collect_items(source)
    except (ConfigError, ValueError) as e:
        fail(str(e))
    if not items:
        fail(f"no images found in {source}")

    worker = BatchWorker(create_note2ucdi(config), template_map, workers or obj.settings.workers)
    documents = worker.run(items)

    lines = [d.to_json(volatile=with_timings) for d in documents]
    write_text(out, "\n".join(lines))
    click.echo(summarize(documents).model_dump_json())
