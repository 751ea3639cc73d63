"""Turn audio files into frame-matrix (LFM) files with a speech encoder.

Audio is decoded, downmixed to mono, resampled to 16 kHz, and run through
a wav2vec2-family encoder; the final hidden states are written in the LFM
format the classification pipeline consumes.  The realized frame rate
(close to 50 Hz for these encoders at 16 kHz) is recorded in the header.

`model_id` is either a Hugging Face model id / local checkpoint path, or
"untrained:<seed>", which instantiates a randomly initialized encoder with
the standard 1024-dim architecture.  The untrained variant exists for
offline tests and produces deterministic output for a given seed.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from scipy.io import wavfile
from scipy.signal import resample_poly

from lectometer.corpus import (
    CorpusManifest,
    FrameMatrix,
    ManifestEntry,
    save_manifest,
    write_frame_matrix,
)

UNTRAINED_PREFIX = "untrained:"


class ExtractionError(Exception):
    pass


@dataclass(frozen=True)
class ExtractionConfig:
    model_id: str = "facebook/wav2vec2-large-xlsr-53"
    target_sample_rate: int = 16_000
    layer: str = "final_hidden"
    output_dim: int = 1024
    batch_seconds: float = 30.0

    def __post_init__(self):
        if self.layer != "final_hidden":
            raise ExtractionError(f"unsupported layer {self.layer!r}")
        if not (self.batch_seconds > 0):
            raise ExtractionError("batch_seconds must be positive")


@dataclass
class Encoder:
    """A loaded encoder plus the bookkeeping needed for extraction."""

    model: torch.nn.Module
    hidden_size: int

    @torch.no_grad()
    def encode(self, waveform: np.ndarray, sample_rate: int, batch_seconds: float) -> np.ndarray:
        """Final hidden states for a mono waveform, chunked along time."""
        chunk = max(int(batch_seconds * sample_rate), sample_rate)
        outputs = []
        for start in range(0, len(waveform), chunk):
            piece = waveform[start : start + chunk]
            if len(piece) < 640:  # below the conv stack's receptive stride
                continue
            x = torch.from_numpy(piece.astype(np.float32))[None, :]
            hidden = self.model(x).last_hidden_state[0]
            outputs.append(hidden.numpy())
        if not outputs:
            raise ExtractionError("audio too short to produce any frames")
        return np.concatenate(outputs, axis=0)


def load_encoder(config: ExtractionConfig) -> Encoder:
    from transformers import Wav2Vec2Config, Wav2Vec2Model

    if config.model_id.startswith(UNTRAINED_PREFIX):
        seed = int(config.model_id[len(UNTRAINED_PREFIX) :] or "0")
        torch.manual_seed(seed)
        # 1024-dim architecture, shallow transformer: the conv frontend and
        # hidden size (all the extraction contract depends on) are standard
        model_config = Wav2Vec2Config(
            hidden_size=config.output_dim,
            num_hidden_layers=2,
            num_attention_heads=16,
            intermediate_size=2 * config.output_dim,
        )
        model = Wav2Vec2Model(model_config)
    else:
        model = Wav2Vec2Model.from_pretrained(config.model_id)
    model.eval()
    hidden = model.config.hidden_size
    if hidden != config.output_dim:
        raise ExtractionError(
            f"encoder hidden size {hidden} != configured output_dim {config.output_dim}"
        )
    return Encoder(model=model, hidden_size=hidden)


def load_audio(path: str | Path, target_sample_rate: int) -> np.ndarray:
    """Decode a wav file to mono float at the target rate."""
    try:
        rate, raw = wavfile.read(path)
    except (OSError, ValueError) as exc:
        raise ExtractionError(f"cannot decode {path}: {exc}") from exc
    if raw.size == 0:
        raise ExtractionError(f"{path}: empty audio")
    data = raw.astype(np.float64)
    if np.issubdtype(raw.dtype, np.integer):
        data = data / np.iinfo(raw.dtype).max
    if data.ndim == 2:
        data = data.mean(axis=1)
    if rate != target_sample_rate:
        g = math.gcd(rate, target_sample_rate)
        data = resample_poly(data, target_sample_rate // g, rate // g)
    return data


def extract_file(
    audio_path: str | Path,
    config: ExtractionConfig,
    out_path: str | Path,
    encoder: Encoder | None = None,
    *,
    file_id: str = "",
    dialect: str = "",
    language: str = "",
    speaker: str | None = None,
    genre: str | None = None,
) -> FrameMatrix:
    """Encode one audio file and write the result as an LFM file.

    The write goes through a temp file and an atomic rename, so a crash
    never leaves a truncated LFM behind.
    """
    if encoder is None:
        encoder = load_encoder(config)
    waveform = load_audio(audio_path, config.target_sample_rate)
    duration = len(waveform) / config.target_sample_rate
    if duration < 1.0:
        raise ExtractionError(f"{audio_path}: duration {duration:.2f}s is under 1s")
    frames = encoder.encode(waveform, config.target_sample_rate, config.batch_seconds)
    realized_rate = frames.shape[0] / duration
    if not (45.0 <= realized_rate <= 52.0):
        raise ExtractionError(
            f"{audio_path}: realized frame rate {realized_rate:.1f}Hz outside [45, 52]"
        )
    matrix = FrameMatrix(
        file_id=file_id or Path(audio_path).stem,
        dialect=dialect,
        language=language,
        frames=frames.astype(np.float32),
        frame_rate_hz=realized_rate,
        speaker=speaker,
        genre=genre,
    )
    out_path = Path(out_path)
    fd, tmp = tempfile.mkstemp(dir=out_path.parent, suffix=".lfm.tmp")
    os.close(fd)
    try:
        write_frame_matrix(matrix, tmp)
        os.replace(tmp, out_path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
    return matrix


@dataclass
class ExtractionReport:
    succeeded: list[str] = field(default_factory=list)
    failed: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failed


def extract_corpus(
    audio_manifest: dict,
    config: ExtractionConfig,
    out_dir: str | Path,
) -> tuple[CorpusManifest | None, ExtractionReport]:
    """Encode every entry of an audio manifest into an LFM corpus.

    The audio manifest mirrors the corpus manifest schema, with `path`
    pointing at audio instead of LFM files.  Per-file failures are
    collected; the emitted manifest covers the successful files only.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    encoder = load_encoder(config)
    report = ExtractionReport()
    entries: list[ManifestEntry] = []
    for item in audio_manifest["entries"]:
        file_id = item["file_id"]
        lfm_name = f"{file_id}.lfm"
        try:
            extract_file(
                item["path"],
                config,
                out_dir / lfm_name,
                encoder=encoder,
                file_id=file_id,
                dialect=item["dialect"],
                language=item["language"],
                speaker=item.get("speaker"),
                genre=item.get("genre"),
            )
        except ExtractionError as exc:
            report.failed[file_id] = str(exc)
            continue
        report.succeeded.append(file_id)
        entries.append(
            ManifestEntry(
                path=lfm_name,
                file_id=file_id,
                dialect=item["dialect"],
                language=item["language"],
                speaker=item.get("speaker"),
                genre=item.get("genre"),
            )
        )
    manifest = None
    if entries:
        manifest = CorpusManifest(
            entries=tuple(entries), dim=encoder.hidden_size, base_dir=out_dir
        )
        save_manifest(manifest, out_dir / "manifest.json")
    return manifest, report
