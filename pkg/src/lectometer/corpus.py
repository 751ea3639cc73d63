"""Corpus data model and file I/O.

A corpus is a JSON manifest plus one binary frame-matrix file (LFM) per
audio file.  The LFM layout is:

    magic "LFM1" | version u32 LE | n_frames u32 LE | dim u32 LE |
    frame_rate_hz f32 LE | payload n_frames*dim f32 LE, row-major

No padding anywhere; the payload is bit-exact across write/read.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

LFM_MAGIC = b"LFM1"
LFM_VERSION = 1
_HEADER = struct.Struct("<4sIIIf")


class CorpusError(Exception):
    """Base class for corpus-level failures."""


class ManifestError(CorpusError):
    """Manifest cannot be parsed or violates an invariant."""


class FrameFileError(CorpusError):
    """LFM file is malformed, truncated, or inconsistent."""


@dataclass(frozen=True)
class FrameMatrix:
    """Frame-level embeddings for one audio file.

    `frames` is stored as float32 (the on-disk precision); computation
    downstream promotes to float64.
    """

    file_id: str
    dialect: str
    language: str
    frames: np.ndarray
    frame_rate_hz: float
    speaker: str | None = None
    genre: str | None = None

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float32)
        if frames.ndim != 2 or frames.shape[0] < 1 or frames.shape[1] < 1:
            raise FrameFileError(
                f"{self.file_id}: frames must be a non-empty 2-D matrix, "
                f"got shape {frames.shape}"
            )
        if not np.all(np.isfinite(frames)):
            raise FrameFileError(f"{self.file_id}: frames contain non-finite values")
        if not (self.frame_rate_hz > 0):
            raise FrameFileError(f"{self.file_id}: frame_rate_hz must be positive")
        object.__setattr__(self, "frames", frames)
        self.frames.setflags(write=False)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def dim(self) -> int:
        return self.frames.shape[1]


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    file_id: str
    dialect: str
    language: str
    speaker: str | None = None
    genre: str | None = None


@dataclass(frozen=True)
class CorpusManifest:
    entries: tuple[ManifestEntry, ...]
    dim: int
    base_dir: Path = field(default_factory=Path)

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim <= 0:
            raise ManifestError(f"dim must be a positive integer, got {self.dim!r}")
        if not self.entries:
            raise ManifestError("manifest has no entries")
        seen_ids: set[str] = set()
        dialect_language: dict[str, str] = {}
        for e in self.entries:
            if e.file_id in seen_ids:
                raise ManifestError(f"duplicate file_id {e.file_id!r}")
            seen_ids.add(e.file_id)
            prev = dialect_language.get(e.dialect)
            if prev is not None and prev != e.language:
                raise ManifestError(
                    f"dialect {e.dialect!r} mapped to both {prev!r} and {e.language!r}"
                )
            dialect_language[e.dialect] = e.language

    @property
    def dialects(self) -> list[str]:
        """Dialect names in first-appearance (manifest) order."""
        out: list[str] = []
        for e in self.entries:
            if e.dialect not in out:
                out.append(e.dialect)
        return out

    @property
    def languages(self) -> list[str]:
        out: list[str] = []
        for e in self.entries:
            if e.language not in out:
                out.append(e.language)
        return out

    def dialect_to_language(self) -> dict[str, str]:
        return {e.dialect: e.language for e in self.entries}

    def resolve_path(self, entry: ManifestEntry) -> Path:
        p = Path(entry.path)
        return p if p.is_absolute() else self.base_dir / p


def load_manifest(path: str | Path) -> CorpusManifest:
    """Load and validate a corpus manifest from a JSON file.

    Relative entry paths are resolved against the manifest's directory.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot parse manifest {path}: {exc}") from exc
    if not isinstance(raw, dict) or "dim" not in raw or "entries" not in raw:
        raise ManifestError(f"{path}: manifest must be an object with 'dim' and 'entries'")
    entries = []
    for i, item in enumerate(raw["entries"]):
        try:
            entries.append(
                ManifestEntry(
                    path=item["path"],
                    file_id=item["file_id"],
                    dialect=item["dialect"],
                    language=item["language"],
                    speaker=item.get("speaker"),
                    genre=item.get("genre"),
                )
            )
        except (KeyError, TypeError) as exc:
            raise ManifestError(f"{path}: entry {i} malformed: {exc}") from exc
    dim = raw["dim"]
    if not isinstance(dim, int):
        raise ManifestError(f"{path}: dim must be an integer, got {dim!r}")
    return CorpusManifest(entries=tuple(entries), dim=dim, base_dir=path.parent)


def save_manifest(manifest: CorpusManifest, path: str | Path) -> None:
    payload = {
        "dim": manifest.dim,
        "entries": [
            {
                "path": e.path,
                "file_id": e.file_id,
                "dialect": e.dialect,
                "language": e.language,
                **({"speaker": e.speaker} if e.speaker is not None else {}),
                **({"genre": e.genre} if e.genre is not None else {}),
            }
            for e in manifest.entries
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def write_frame_matrix(matrix: FrameMatrix, path: str | Path) -> None:
    """Write an LFM file; read_frame_matrix inverts this bit-exactly."""
    header = _HEADER.pack(
        LFM_MAGIC, LFM_VERSION, matrix.n_frames, matrix.dim, matrix.frame_rate_hz
    )
    payload = np.ascontiguousarray(matrix.frames, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_frame_matrix(
    path: str | Path,
    expected_dim: int,
    *,
    file_id: str = "",
    dialect: str = "",
    language: str = "",
    speaker: str | None = None,
    genre: str | None = None,
) -> FrameMatrix:
    """Read an LFM file, validating header, dimensions, and finiteness."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise FrameFileError(f"{path}: too short for LFM header")
    magic, version, n_frames, dim, frame_rate = _HEADER.unpack_from(data)
    if magic != LFM_MAGIC:
        raise FrameFileError(f"{path}: bad magic {magic!r}")
    if version != LFM_VERSION:
        raise FrameFileError(f"{path}: unsupported version {version}")
    if dim != expected_dim:
        raise FrameFileError(f"{path}: dim {dim} != expected {expected_dim}")
    expected_bytes = n_frames * dim * 4
    payload = data[_HEADER.size :]
    if len(payload) < expected_bytes:
        raise FrameFileError(
            f"{path}: truncated payload ({len(payload)} bytes, need {expected_bytes})"
        )
    if len(payload) > expected_bytes:
        raise FrameFileError(f"{path}: trailing bytes after payload")
    frames = np.frombuffer(payload, dtype="<f4").reshape(n_frames, dim)
    return FrameMatrix(
        file_id=file_id or path.stem,
        dialect=dialect,
        language=language,
        frames=frames,
        frame_rate_hz=float(frame_rate),
        speaker=speaker,
        genre=genre,
    )


def load_corpus(manifest: CorpusManifest) -> list[FrameMatrix]:
    """Read every frame matrix referenced by the manifest, in manifest order."""
    matrices = []
    for entry in manifest.entries:
        p = manifest.resolve_path(entry)
        if not p.exists():
            raise FrameFileError(f"missing frame file for {entry.file_id!r}: {p}")
        matrices.append(
            read_frame_matrix(
                p,
                manifest.dim,
                file_id=entry.file_id,
                dialect=entry.dialect,
                language=entry.language,
                speaker=entry.speaker,
                genre=entry.genre,
            )
        )
    return matrices
