from pathlib import Path
from typing import Optional, Tuple

import click

from note2ucdi.cli.context import CliContext, fail, pass_cli_context
from note2ucdi.dataprep.split import SPLITS, stratified_split
from note2ucdi.reports.schemas import read_manifest, write_text


def _parse_ratios(raw: str) -> Tuple[float, float, float]:
    try:
        parts = tuple(float(p) for p in raw.split(","))
    except ValueError:
        raise click.BadParameter(f"expected three comma-separated numbers, got {raw}")
    if len(parts) != 3 or any(p < 0 for p in parts) or abs(sum(parts) - 1.0) > 1e-9:
        raise click.BadParameter("ratios must be three non-negative numbers summing to 1")
    return parts  # type: ignore[return-value]


@click.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--ratios", default="0.8,0.1,0.1", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Defaults to rewriting MANIFEST in place.",
)
@pass_cli_context
def split(obj: CliContext, manifest: Path, ratios: str, seed: int, out: Optional[Path]) -> None:
    """Stratified train/val/test split of the retained images of a dedup manifest."""
    parsed = _parse_ratios(ratios)
    try:
        document = read_manifest(manifest)
    except ValueError as e:
        fail(f"cannot read manifest {manifest}: {e}")

    retained = document.retained()
    if not retained:
        fail(f"manifest {manifest} has no retained images")

    result = stratified_split(retained, parsed, seed)
    write_text(out or manifest, document.with_split(result).to_json())

    click.echo("class\t" + "\t".join(SPLITS))
    for label, counts in sorted(result.counts.items()):
        click.echo(label + "\t" + "\t".join(str(counts[s]) for s in SPLITS))
    for warning in result.warnings:
        click.echo(f"warning: {warning}", err=True)
