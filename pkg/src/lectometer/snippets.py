"""Segmentation of frame matrices into fixed-duration snippets and pooling.

Each audio file is cut into consecutive non-overlapping windows of
`window_seconds`; a trailing partial window is kept only when it covers at
least half the window (configurable).  Each window is pooled component-wise
(max or mean) into a single vector, which is the classifier's input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import FrameMatrix

POOLINGS = ("max", "mean")


class SnippetError(Exception):
    pass


@dataclass(frozen=True)
class Snippet:
    file_id: str
    index: int
    vector: np.ndarray
    n_source_frames: int


@dataclass(frozen=True)
class SnippetDataset:
    """Pooled snippet vectors with per-snippet labels.

    `X` is an N x dim float64 matrix; dialects/languages/file_ids are
    parallel label sequences of length N.
    """

    X: np.ndarray
    dialects: tuple[str, ...]
    languages: tuple[str, ...]
    file_ids: tuple[str, ...]
    pooling: str
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        n = self.X.shape[0]
        if not (len(self.dialects) == len(self.languages) == len(self.file_ids) == n):
            raise SnippetError("label sequences must match the number of snippets")
        if self.pooling not in POOLINGS:
            raise SnippetError(f"unknown pooling {self.pooling!r}")
        self.X.setflags(write=False)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def labels(self, level: str) -> tuple[str, ...]:
        """Per-snippet labels at the requested level: dialect, language, or file."""
        if level == "dialect":
            return self.dialects
        if level == "language":
            return self.languages
        if level == "file":
            return self.file_ids
        raise SnippetError(f"unknown label level {level!r}")


def segment_frames(
    matrix: FrameMatrix,
    window_seconds: float = 5.0,
    keep_partial_if_at_least: float = 0.5,
) -> list[np.ndarray]:
    """Cut a frame matrix into consecutive non-overlapping windows.

    Window length is round(window_seconds * frame_rate_hz) frames.  The
    trailing remainder is kept iff it spans at least
    `keep_partial_if_at_least` of a full window.  May return an empty list
    for very short files; callers are expected to report those.
    """
    w = int(np.floor(window_seconds * matrix.frame_rate_hz + 0.5))
    if w < 1:
        raise SnippetError(
            f"window of {window_seconds}s at {matrix.frame_rate_hz}Hz is under one frame"
        )
    frames = matrix.frames
    n = frames.shape[0]
    slices = [frames[i : i + w] for i in range(0, n - w + 1, w)]
    tail = n - w * len(slices)
    if tail >= keep_partial_if_at_least * w and tail > 0:
        slices.append(frames[n - tail :])
    return slices


def pool_snippet(slice_frames: np.ndarray, pooling: str) -> np.ndarray:
    """Reduce a window of frames to one vector, component-wise."""
    if slice_frames.shape[0] < 1:
        raise SnippetError("cannot pool an empty slice")
    frames = np.asarray(slice_frames, dtype=np.float64)
    if pooling == "max":
        return frames.max(axis=0)
    if pooling == "mean":
        return frames.mean(axis=0)
    raise SnippetError(f"unknown pooling {pooling!r}")


def build_dataset(
    corpus: list[FrameMatrix],
    window_seconds: float = 5.0,
    pooling: str = "max",
    keep_partial_if_at_least: float = 0.5,
) -> SnippetDataset:
    """Segment and pool every file of a corpus into one labeled dataset.

    Ordering is deterministic: corpus order, then slice index.  Files that
    yield zero slices are excluded and listed in the dataset's warnings.
    """
    if not corpus:
        raise SnippetError("empty corpus")
    dim = corpus[0].dim
    vectors: list[np.ndarray] = []
    dialects: list[str] = []
    languages: list[str] = []
    file_ids: list[str] = []
    warnings: list[str] = []
    for matrix in corpus:
        if matrix.dim != dim:
            raise SnippetError(
                f"{matrix.file_id}: dim {matrix.dim} != corpus dim {dim}"
            )
        slices = segment_frames(matrix, window_seconds, keep_partial_if_at_least)
        if not slices:
            warnings.append(
                f"{matrix.file_id}: {matrix.n_frames} frames below half a window, "
                "no snippets produced"
            )
            continue
        for sl in slices:
            vectors.append(pool_snippet(sl, pooling))
            dialects.append(matrix.dialect)
            languages.append(matrix.language)
            file_ids.append(matrix.file_id)
    X = np.vstack(vectors) if vectors else np.empty((0, dim))
    return SnippetDataset(
        X=X,
        dialects=tuple(dialects),
        languages=tuple(languages),
        file_ids=tuple(file_ids),
        pooling=pooling,
        warnings=tuple(warnings),
    )
