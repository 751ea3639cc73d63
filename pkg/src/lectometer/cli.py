"""Command-line interface: corpus validation, synthetic corpus generation,
and protocol runs.

Every successful `run` leaves a TSV report, a JSON report, and a run
record holding the complete configuration, so the run can be replayed.
Warnings never abort; errors always exit nonzero with a diagnostic.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .corpus import (
    CorpusError,
    load_corpus,
    load_manifest,
    save_manifest,
    write_frame_matrix,
)
from .metrics import LabelDistribution
from .model import ModelError
from .protocols import (
    ProtocolError,
    run_file_control,
    run_group_control,
    run_identification,
    run_language_id_heldout,
    run_similarity,
)
from .snippets import SnippetError, build_dataset, segment_frames
from .synth import SynthError, generate_corpus, load_spec

_SETTINGS = (
    "dialect_id",
    "language_id",
    "language_id_heldout",
    "similarity",
    "control_file",
    "control_groups",
)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
@click.version_option(__version__)
def main():
    """Dialect/language identification and similarity from speech embeddings."""


@main.command()
@click.argument("manifest_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--window-seconds", default=5.0, show_default=True)
def validate(manifest_path, window_seconds):
    """Validate a manifest and every frame file it references."""
    try:
        manifest = load_manifest(manifest_path)
        corpus = load_corpus(manifest)
    except CorpusError as exc:
        _fail(str(exc))
    per_dialect: dict[str, dict[str, float]] = {}
    for m in corpus:
        stats = per_dialect.setdefault(m.dialect, {"files": 0, "seconds": 0.0})
        stats["files"] += 1
        stats["seconds"] += m.n_frames / m.frame_rate_hz
        if not segment_frames(m, window_seconds):
            click.echo(
                f"warning: {m.file_id} is shorter than half a window, "
                "yields no snippets"
            )
    click.echo("dialect\tlanguage\tfiles\tduration_s")
    lang_of = manifest.dialect_to_language()
    for d in manifest.dialects:
        stats = per_dialect[d]
        click.echo(f"{d}\t{lang_of[d]}\t{int(stats['files'])}\t{stats['seconds']:.1f}")
    click.echo(f"ok: {len(corpus)} files, {len(per_dialect)} dialects")


@main.command()
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def synth(spec_path, out_dir):
    """Generate a synthetic corpus (manifest + LFM files) from a spec."""
    try:
        spec = load_spec(spec_path)
        manifest, matrices = generate_corpus(spec)
    except SynthError as exc:
        _fail(str(exc))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for entry, matrix in zip(manifest.entries, matrices):
        write_frame_matrix(matrix, out / entry.path)
    save_manifest(manifest, out / "manifest.json")
    click.echo(f"wrote {len(matrices)} files + manifest.json to {out}")


@main.command()
@click.argument("run_spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=None, help="Override the run-spec seed.")
@click.option("--pooling", type=click.Choice(["max", "mean"]), default=None)
@click.option("--C", "reg_c", type=float, default=None, help="Override regularization strength.")
def run(run_spec_path, manifest_path, out_dir, seed, pooling, reg_c):
    """Execute one protocol run described by a run-spec JSON file."""
    try:
        run_spec = json.loads(Path(run_spec_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        _fail(f"cannot parse run spec: {exc}")
    setting = run_spec.get("setting")
    if setting not in _SETTINGS:
        _fail(f"run spec setting must be one of {_SETTINGS}, got {setting!r}")
    # Precedence: command-line flag > run-spec field > default.
    cfg = {
        "regime": run_spec.get("regime", "utterance"),
        "pooling": pooling or run_spec.get("pooling", "max"),
        "C": reg_c if reg_c is not None else run_spec.get("C", 1.0),
        "seed": seed if seed is not None else run_spec.get("seed", 0),
        "test_fraction": run_spec.get("test_fraction", 0.2),
    }
    try:
        manifest = load_manifest(manifest_path)
        corpus = load_corpus(manifest)
        dataset = build_dataset(corpus, pooling=cfg["pooling"])
    except (CorpusError, SnippetError) as exc:
        _fail(str(exc))
    for w in dataset.warnings:
        click.echo(f"warning: {w}", err=True)
    try:
        if setting in ("dialect_id", "language_id"):
            result = run_identification(
                dataset,
                label_level="dialect" if setting == "dialect_id" else "language",
                regime=cfg["regime"],
                C=cfg["C"],
                seed=cfg["seed"],
                test_fraction=cfg["test_fraction"],
            )
        elif setting == "language_id_heldout":
            result = run_language_id_heldout(dataset, C=cfg["C"], seed=cfg["seed"])
        elif setting == "similarity":
            result = run_similarity(
                dataset, C=cfg["C"], seed=cfg["seed"], dialect_order=manifest.dialects
            )
        elif setting == "control_file":
            result = run_file_control(
                dataset, C=cfg["C"], seed=cfg["seed"], test_fraction=cfg["test_fraction"]
            )
        else:
            group_sizes = run_spec.get("group_sizes")
            if not group_sizes:
                _fail("control_groups requires 'group_sizes' in the run spec")
            result = run_group_control(
                dataset,
                group_sizes=group_sizes,
                C=cfg["C"],
                seed=cfg["seed"],
                test_fraction=cfg["test_fraction"],
            )
    except (ProtocolError, ModelError) as exc:
        _fail(str(exc))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    run_id = f"{setting}_seed{cfg['seed']}"
    tsv_path = out / f"{run_id}.tsv"
    json_path = out / f"{run_id}.json"
    record_path = out / f"{run_id}.run.json"
    tsv_path.write_text(result.report.to_tsv(), encoding="utf-8")
    report_payload = {
        "setting": result.setting,
        "config": result.config,
        "train_sizes": result.train_sizes,
        "report": result.report.to_dict(),
        "report_kind": "label_distribution"
        if isinstance(result.report, LabelDistribution)
        else "eval",
    }
    json_path.write_text(
        json.dumps(report_payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    record = {
        "run_id": run_id,
        "config": result.config,
        "manifest": str(Path(manifest_path).resolve()),
        "outputs": [str(tsv_path), str(json_path)],
        "tool_version": __version__,
    }
    record_path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    click.echo(f"wrote {tsv_path} {json_path} {record_path}")


if __name__ == "__main__":
    main()
