import logging
from pathlib import Path
from typing import List, Tuple

import click

from note2ucdi.cli.context import CliContext, fail, pass_cli_context
from note2ucdi.enhance.pipeline import enhance_pipeline
from note2ucdi.exceptions import Note2UCDIException
from note2ucdi.imgcore.io import find_images, read_image, write_image

logger = logging.getLogger(__name__)


def output_pairs(inputs: Tuple[Path, ...], out_dir: Path) -> List[Tuple[Path, Path]]:
    """(source, destination) pairs; files under a directory keep their relative path."""
    pairs = []
    for given in inputs:
        for path in find_images([given]):
            relative = path.relative_to(given) if given.is_dir() else Path(path.name)
            pairs.append((path, out_dir / relative))
    return pairs


@click.command()
@click.argument(
    "inputs", nargs=-1, required=True, type=click.Path(exists=True, path_type=Path)
)
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@pass_cli_context
def preprocess(obj: CliContext, inputs: Tuple[Path, ...], out_dir: Path) -> None:
    """Run the enhancement chain (median, sharpen, stretch, CLAHE) over images."""
    pairs = output_pairs(inputs, out_dir)
    if not pairs:
        fail("no images found")

    failed = 0
    for source, destination in pairs:
        try:
            enhanced = enhance_pipeline(read_image(source), obj.config.enhance)
        except Note2UCDIException as e:
            logger.warning("skipping %s: %s", source, e)
            failed += 1
            continue
        write_image(enhanced, destination.with_suffix(".png"))

    click.echo(f"processed {len(pairs) - failed} images, {failed} failed")
