import logging
from pathlib import Path
from typing import Optional

import click

from note2ucdi.Note2UCDI import create_note2ucdi
from note2ucdi.cli.config import with_overrides
from note2ucdi.cli.context import EXIT_ANALYSIS_FAILED, CliContext, fail, pass_cli_context
from note2ucdi.damage.models import DamageReport
from note2ucdi.damage.overlays import (
    render_cluster_annotations,
    render_damage_overlay,
    render_heatmap,
)
from note2ucdi.exceptions import ConfigError, Note2UCDIException
from note2ucdi.imgcore.io import read_image, write_image, write_mask
from note2ucdi.reports.schemas import write_text
from note2ucdi.workers.batch_worker import build_report

logger = logging.getLogger(__name__)


def write_overlays(report: DamageReport, out_dir: Path) -> None:
    artifacts = report.artifacts
    if artifacts is None:
        return
    write_mask(artifacts.damage_mask, out_dir / "damage_mask.png")
    write_image(
        render_damage_overlay(artifacts.warped, artifacts.damage_mask),
        out_dir / "damage_overlay.png",
    )
    write_image(
        render_heatmap(artifacts.heatmap, artifacts.reference_mask),
        out_dir / "rgb_heatmap.png",
    )
    write_image(
        render_cluster_annotations(artifacts.warped, report.cluster_matches),
        out_dir / "cluster_matches.png",
    )


@click.command()
@click.argument("ref_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--overlays", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.option("--seed", type=int, default=None, help="Mixed into the RANSAC seed.")
@pass_cli_context
def analyze(
    obj: CliContext,
    ref_path: Path,
    input_path: Path,
    out: Optional[Path],
    overlays: Optional[Path],
    seed: Optional[int],
) -> None:
    """Score INPUT_PATH against the clean reference REF_PATH and print its UCDI."""
    try:
        config = with_overrides(obj.config, "align", seed=seed)
        ref = read_image(ref_path)
        damaged = read_image(input_path)
    except (ConfigError, Note2UCDIException) as e:
        fail(str(e))

    engine = create_note2ucdi(config)
    document = build_report(engine, ref, damaged, str(ref_path), str(input_path))
    if out is not None:
        write_text(out, document.to_json(indent=2))

    if document.status == "error":
        fail(
            f"analysis failed at stage {document.stage}: {document.failure_reason}",
            EXIT_ANALYSIS_FAILED,
        )
    if document.status == "unalignable":
        fail(f"unalignable: {document.failure_reason}", EXIT_ANALYSIS_FAILED)

    assert document.report is not None and document.report.ucdi is not None
    if overlays is not None:
        write_overlays(document.report, overlays)
    click.echo(f"{document.report.ucdi:.4f}")
