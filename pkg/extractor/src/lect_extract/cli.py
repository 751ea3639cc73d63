"""Command-line front end for batch audio extraction."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .extractor import ExtractionConfig, ExtractionError, extract_corpus


@click.command()
@click.argument("audio_manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--model", "model_id", default="facebook/wav2vec2-large-xlsr-53",
              show_default=True, help="Encoder id, checkpoint path, or untrained:<seed>.")
@click.option("--output-dim", default=1024, show_default=True)
@click.option("--batch-seconds", default=30.0, show_default=True)
def main(audio_manifest, out_dir, model_id, output_dim, batch_seconds):
    """Encode every audio file in AUDIO_MANIFEST into an LFM corpus."""
    try:
        manifest = json.loads(Path(audio_manifest).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: cannot parse manifest: {exc}", err=True)
        sys.exit(1)
    try:
        config = ExtractionConfig(
            model_id=model_id, output_dim=output_dim, batch_seconds=batch_seconds
        )
        corpus_manifest, report = extract_corpus(manifest, config, out_dir)
    except (ExtractionError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    for file_id, reason in report.failed.items():
        click.echo(f"failed: {file_id}: {reason}", err=True)
    click.echo(
        f"extracted {len(report.succeeded)} of "
        f"{len(report.succeeded) + len(report.failed)} files to {out_dir}"
    )
    if corpus_manifest is None or not report.ok:
        sys.exit(1)


if __name__ == "__main__":
    main()
