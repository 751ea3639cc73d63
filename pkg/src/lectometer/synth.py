"""Synthetic corpora with controllable dialect/language cluster geometry.

Each language draws a centroid from an isotropic Gaussian, each dialect
adds a smaller Gaussian offset, and every frame is dialect mean plus
frame-level noise.  Because the cluster geometry is known exactly, every
protocol has a ground-truth oracle at desk scale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import CorpusManifest, FrameMatrix, ManifestEntry
from .protocols import sub_seed


class SynthError(Exception):
    pass


@dataclass(frozen=True)
class SynthSpec:
    languages: tuple[tuple[str, tuple[str, ...]], ...]
    dim: int = 32
    language_centroid_scale: float = 10.0
    dialect_offset_scale: float = 1.0
    within_dialect_noise: float = 0.2
    files_per_dialect: int = 2
    frames_per_file: int = 2350
    frame_rate_hz: float = 47.0
    seed: int = 0

    def __post_init__(self):
        all_dialects = [d for _, ds in self.languages for d in ds]
        if len(all_dialects) != len(set(all_dialects)):
            raise SynthError("dialect names must be globally unique")
        if not all_dialects:
            raise SynthError("spec has no dialects")
        for scale_name in ("language_centroid_scale", "dialect_offset_scale", "within_dialect_noise"):
            if not (getattr(self, scale_name) > 0):
                raise SynthError(f"{scale_name} must be positive")
        if self.dim <= 0:
            raise SynthError("dim must be positive")
        if self.files_per_dialect < 2:
            raise SynthError("files_per_dialect must be at least 2")
        if self.frames_per_file < 235:
            raise SynthError("frames_per_file must be at least 235")
        if not (self.frame_rate_hz > 0):
            raise SynthError("frame_rate_hz must be positive")

    @property
    def dialects(self) -> list[str]:
        return [d for _, ds in self.languages for d in ds]


def load_spec(path: str | Path) -> SynthSpec:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        languages = tuple(
            (item["name"], tuple(item["dialects"])) for item in raw.pop("languages")
        )
    except (KeyError, TypeError) as exc:
        raise SynthError(f"malformed languages list: {exc}") from exc
    try:
        return SynthSpec(languages=languages, **raw)
    except TypeError as exc:
        raise SynthError(f"bad spec field: {exc}") from exc


def dialect_centroids(spec: SynthSpec) -> dict[str, np.ndarray]:
    """Realized dialect cluster means, deterministic per spec seed."""
    centroids: dict[str, np.ndarray] = {}
    for lang, dialects in spec.languages:
        lang_rng = np.random.default_rng(sub_seed(spec.seed, "language_centroid", lang))
        lang_centroid = lang_rng.normal(0.0, spec.language_centroid_scale, spec.dim)
        for d in dialects:
            d_rng = np.random.default_rng(sub_seed(spec.seed, "dialect_offset", d))
            centroids[d] = lang_centroid + d_rng.normal(
                0.0, spec.dialect_offset_scale, spec.dim
            )
    return centroids


def generate_corpus(spec: SynthSpec) -> tuple[CorpusManifest, list[FrameMatrix]]:
    """Draw a full corpus: one frame matrix per (dialect, file)."""
    centroids = dialect_centroids(spec)
    entries: list[ManifestEntry] = []
    matrices: list[FrameMatrix] = []
    for lang, dialects in spec.languages:
        for d in dialects:
            for f in range(spec.files_per_dialect):
                file_id = f"{d}_{f:03d}"
                rng = np.random.default_rng(sub_seed(spec.seed, "file_frames", file_id))
                frames = centroids[d] + rng.normal(
                    0.0, spec.within_dialect_noise, (spec.frames_per_file, spec.dim)
                )
                matrices.append(
                    FrameMatrix(
                        file_id=file_id,
                        dialect=d,
                        language=lang,
                        frames=frames.astype(np.float32),
                        frame_rate_hz=spec.frame_rate_hz,
                    )
                )
                entries.append(
                    ManifestEntry(
                        path=f"{file_id}.lfm",
                        file_id=file_id,
                        dialect=d,
                        language=lang,
                    )
                )
    manifest = CorpusManifest(entries=tuple(entries), dim=spec.dim)
    return manifest, matrices


def oracle_nearest_sibling(
    spec: SynthSpec, realized_centroids: dict[str, np.ndarray]
) -> dict[str, str]:
    """For each dialect, the other dialect with the closest realized centroid.

    Ties break to the lexicographically first candidate.  Under easy
    geometry this is the expected plurality column of the similarity matrix.
    """
    dialects = spec.dialects
    if len(dialects) < 2:
        raise SynthError("need at least 2 dialects")
    nearest: dict[str, str] = {}
    for d in dialects:
        candidates = sorted(c for c in dialects if c != d)
        dists = [float(np.linalg.norm(realized_centroids[d] - realized_centroids[c])) for c in candidates]
        nearest[d] = candidates[int(np.argmin(dists))]
    return nearest
