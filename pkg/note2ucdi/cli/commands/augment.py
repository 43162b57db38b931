import logging
from pathlib import Path
from typing import Optional, Tuple

import click
import numpy as np

from note2ucdi.cli.commands.preprocess import output_pairs
from note2ucdi.cli.context import CliContext, fail, pass_cli_context
from note2ucdi.dataprep.augment import augment as augment_image
from note2ucdi.exceptions import Note2UCDIException
from note2ucdi.imgcore.io import read_image, write_image

logger = logging.getLogger(__name__)


@click.command()
@click.argument(
    "inputs", nargs=-1, required=True, type=click.Path(exists=True, path_type=Path)
)
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--count", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--seed", type=int, default=None, help="Defaults to [augment] seed (0).")
@pass_cli_context
def augment(
    obj: CliContext,
    inputs: Tuple[Path, ...],
    out_dir: Path,
    count: int,
    seed: Optional[int],
) -> None:
    """Write COUNT randomly augmented 224x224 variants of every image."""
    config = obj.config.augment
    pairs = output_pairs(inputs, out_dir)
    if not pairs:
        fail("no images found")

    rng = np.random.default_rng(config.seed if seed is None else seed)
    written = 0
    for source, destination in pairs:
        try:
            img = read_image(source)
        except Note2UCDIException as e:
            logger.warning("skipping %s: %s", source, e)
            continue
        for i in range(count):
            variant = augment_image(img, config, rng)
            write_image(variant, destination.with_name(f"{destination.stem}_aug{i:03d}.png"))
            written += 1

    click.echo(f"wrote {written} augmented images")
