import logging
from collections import Counter
from pathlib import Path
from typing import Optional, Tuple

import click

from note2ucdi.cli.config import resolve_workers, with_overrides
from note2ucdi.cli.context import CliContext, fail, pass_cli_context
from note2ucdi.dataprep.dedup import cross_dataset_dedup, deduplicate, scan_source
from note2ucdi.exceptions import ConfigError
from note2ucdi.reports.schemas import DedupManifest, write_text

logger = logging.getLogger(__name__)


@click.command()
@click.argument(
    "dirs", nargs=-1, required=True, type=click.Path(exists=True, file_okay=False, path_type=Path)
)
@click.option("--threshold", type=int, default=None, help="Hamming distance (inclusive), default 5.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--workers", type=int, default=None, help="Hashing threads.")
@pass_cli_context
def dedup(
    obj: CliContext,
    dirs: Tuple[Path, ...],
    threshold: Optional[int],
    out: Path,
    workers: Optional[int],
) -> None:
    """Remove near-duplicate images within and across class-per-folder sources.

    Sources listed first take precedence when the same image appears in several.
    """
    try:
        workers = resolve_workers(workers, obj.config.dedup, obj.settings)
        config = with_overrides(obj.config, "dedup", threshold=threshold, workers=workers).dedup
    except ConfigError as e:
        fail(str(e))

    datasets = [(str(d), scan_source(d)) for d in dirs]
    if not any(paths for _, dataset in datasets for paths in dataset.values()):
        fail("no images found in " + ", ".join(str(d) for d in dirs))

    results = [deduplicate(dataset, config, source=name) for name, dataset in datasets]
    result = cross_dataset_dedup(results[0], results[1:], config)

    manifest = DedupManifest.from_result(result, [name for name, _ in datasets], config.threshold)
    write_text(out, manifest.to_json())

    counts: Counter = Counter((e.label, e.status) for e in result.entries)
    click.echo("class\tretained\tdropped\tskipped")
    for label in sorted({e.label for e in result.entries}):
        click.echo(
            f"{label}\t{counts[(label, 'retained')]}\t{counts[(label, 'duplicate-of')]}"
            f"\t{counts[(label, 'skipped')]}"
        )
