"""Split regimes and experimental protocols over a snippet dataset.

All randomness is derived from a single run-level seed through a documented
scheme: sub_seed = first 8 bytes of sha256("{seed}:{procedure}:{key}"),
fed to numpy's default_rng.  Every protocol run is therefore reproducible
in isolation, independent of execution order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import model as probe
from .metrics import EvalReport, LabelDistribution, label_distribution, per_class_prf
from .snippets import SnippetDataset

REGIMES = ("utterance", "file", "heldout_dialects")


class ProtocolError(Exception):
    pass


@dataclass(frozen=True)
class SplitPlan:
    train_indices: frozenset[int]
    test_indices: frozenset[int]
    regime: str
    seed: int

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ProtocolError(f"unknown regime {self.regime!r}")
        if self.train_indices & self.test_indices:
            raise ProtocolError("train and test overlap")


@dataclass(frozen=True)
class ProtocolResult:
    setting: str
    report: EvalReport | LabelDistribution
    config: dict = field(default_factory=dict)
    train_sizes: dict[str, int] = field(default_factory=dict)
    notes: tuple[str, ...] = ()


def sub_seed(seed: int, procedure: str, key: str = "") -> int:
    digest = hashlib.sha256(f"{seed}:{procedure}:{key}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _clamped_test_count(n: int, fraction: float) -> int:
    return min(max(int(np.floor(fraction * n + 0.5)), 1), n - 1)


def _by_dialect(dataset: SnippetDataset) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {}
    for i, d in enumerate(dataset.dialects):
        groups.setdefault(d, []).append(i)
    return groups


def utterance_split(
    dataset: SnippetDataset, test_fraction: float = 0.2, seed: int = 0
) -> SplitPlan:
    """Per-dialect stratified random split at the snippet level."""
    train: set[int] = set()
    test: set[int] = set()
    for dialect, indices in _by_dialect(dataset).items():
        if len(indices) < 2:
            raise ProtocolError(f"dialect {dialect!r} has fewer than 2 snippets")
        rng = np.random.default_rng(sub_seed(seed, "utterance_split", dialect))
        order = rng.permutation(len(indices))
        n_test = _clamped_test_count(len(indices), test_fraction)
        for pos, j in enumerate(order):
            (test if pos < n_test else train).add(indices[j])
    return SplitPlan(frozenset(train), frozenset(test), "utterance", seed)


def file_split(
    dataset: SnippetDataset, test_fraction: float = 0.2, seed: int = 0
) -> SplitPlan:
    """Per-dialect random partition of whole files; snippets follow their file."""
    train: set[int] = set()
    test: set[int] = set()
    for dialect, indices in _by_dialect(dataset).items():
        files = sorted({dataset.file_ids[i] for i in indices})
        if len(files) < 2:
            raise ProtocolError(f"dialect {dialect!r} has a single file")
        rng = np.random.default_rng(sub_seed(seed, "file_split", dialect))
        order = rng.permutation(len(files))
        n_test = _clamped_test_count(len(files), test_fraction)
        test_files = {files[j] for j in order[:n_test]}
        for i in indices:
            (test if dataset.file_ids[i] in test_files else train).add(i)
    return SplitPlan(frozenset(train), frozenset(test), "file", seed)


def _fit_and_eval(
    dataset: SnippetDataset,
    labels: tuple[str, ...],
    plan: SplitPlan,
    C: float,
    seed: int,
) -> tuple[EvalReport, dict[str, int]]:
    train_idx = sorted(plan.train_indices)
    test_idx = sorted(plan.test_indices)
    y_train = [labels[i] for i in train_idx]
    fitted, _ = probe.fit(dataset.X[train_idx], y_train, C=C, seed=seed)
    pred = probe.predict_label(fitted, dataset.X[test_idx])
    gold = [labels[i] for i in test_idx]
    train_sizes: dict[str, int] = {}
    for label in y_train:
        train_sizes[label] = train_sizes.get(label, 0) + 1
    return per_class_prf(gold, pred), train_sizes


def run_identification(
    dataset: SnippetDataset,
    label_level: str = "dialect",
    regime: str = "utterance",
    C: float = 1.0,
    seed: int = 0,
    test_fraction: float = 0.2,
) -> ProtocolResult:
    """Dialect or language identification under the chosen split regime."""
    labels = dataset.labels(label_level)
    if regime == "utterance":
        plan = utterance_split(dataset, test_fraction, seed)
    elif regime == "file":
        plan = file_split(dataset, test_fraction, seed)
    else:
        raise ProtocolError(f"regime {regime!r} not valid for identification")
    report, train_sizes = _fit_and_eval(dataset, labels, plan, C, seed)
    setting = "dialect_id" if label_level == "dialect" else "language_id"
    config = {
        "setting": setting,
        "label_level": label_level,
        "regime": regime,
        "pooling": dataset.pooling,
        "C": C,
        "seed": seed,
        "test_fraction": test_fraction,
    }
    return ProtocolResult(setting, report, config, train_sizes)


def run_language_id_heldout(
    dataset: SnippetDataset, C: float = 1.0, seed: int = 0
) -> ProtocolResult:
    """Language ID evaluated on one held-out dialect per multi-dialect language."""
    lang_dialects: dict[str, list[str]] = {}
    for d, lang in zip(dataset.dialects, dataset.languages):
        dialects = lang_dialects.setdefault(lang, [])
        if d not in dialects:
            dialects.append(d)
    multi = {lang: sorted(ds) for lang, ds in lang_dialects.items() if len(ds) >= 2}
    if not multi:
        raise ProtocolError("no language has 2 or more dialects")
    held_out: dict[str, str] = {}
    for lang, dialects in sorted(multi.items()):
        rng = np.random.default_rng(sub_seed(seed, "heldout_dialect", lang))
        held_out[lang] = dialects[rng.integers(len(dialects))]
    held = set(held_out.values())
    train_idx = [i for i, d in enumerate(dataset.dialects) if d not in held]
    test_idx = [i for i, d in enumerate(dataset.dialects) if d in held]
    plan = SplitPlan(frozenset(train_idx), frozenset(test_idx), "heldout_dialects", seed)
    report, train_sizes = _fit_and_eval(dataset, dataset.languages, plan, C, seed)
    config = {
        "setting": "language_id_heldout",
        "pooling": dataset.pooling,
        "C": C,
        "seed": seed,
        "held_out": dict(sorted(held_out.items())),
    }
    return ProtocolResult("language_id_heldout", report, config, train_sizes)


def run_similarity(
    dataset: SnippetDataset,
    C: float = 1.0,
    seed: int = 0,
    dialect_order: list[str] | None = None,
) -> ProtocolResult:
    """Hold out each dialect in turn and record the predicted-label distribution.

    Each held-out classifier trains on all snippets of every other dialect;
    the held-out dialect can never be predicted, so its own column is
    structurally zero.
    """
    groups = _by_dialect(dataset)
    if dialect_order is None:
        dialect_order = list(dict.fromkeys(dataset.dialects))
    if len(dialect_order) < 3:
        raise ProtocolError("similarity protocol needs at least 3 dialects")
    rows: dict[str, dict[str, float]] = {}
    train_sizes: dict[str, int] = {}
    for held in dialect_order:
        train_idx = [i for d, idxs in groups.items() if d != held for i in idxs]
        train_idx.sort()
        test_idx = groups[held]
        y_train = [dataset.dialects[i] for i in train_idx]
        fitted, _ = probe.fit(dataset.X[train_idx], y_train, C=C, seed=seed)
        pred = probe.predict_label(fitted, dataset.X[test_idx])
        rows[held] = label_distribution(pred, dialect_order)
        train_sizes[held] = len(train_idx)
    report = LabelDistribution(rows=rows, columns=tuple(dialect_order))
    config = {
        "setting": "similarity",
        "pooling": dataset.pooling,
        "C": C,
        "seed": seed,
    }
    return ProtocolResult("similarity", report, config, train_sizes)


def run_file_control(
    dataset: SnippetDataset,
    C: float = 1.0,
    seed: int = 0,
    test_fraction: float = 0.2,
) -> ProtocolResult:
    """Control run predicting file names instead of dialect labels."""
    plan = utterance_split(dataset, test_fraction, seed)
    report, train_sizes = _fit_and_eval(dataset, dataset.file_ids, plan, C, seed)
    config = {
        "setting": "control_file",
        "regime": "utterance",
        "pooling": dataset.pooling,
        "C": C,
        "seed": seed,
        "test_fraction": test_fraction,
    }
    return ProtocolResult("control_file", report, config, train_sizes)


def run_group_control(
    dataset: SnippetDataset,
    group_sizes: list[int],
    C: float = 1.0,
    seed: int = 0,
    test_fraction: float = 0.2,
) -> ProtocolResult:
    """Control run with dialects shuffled into arbitrary groups of given sizes."""
    dialects = sorted(set(dataset.dialects))
    if sum(group_sizes) != len(dialects):
        raise ProtocolError(
            f"group sizes sum to {sum(group_sizes)}, corpus has {len(dialects)} dialects"
        )
    rng = np.random.default_rng(sub_seed(seed, "group_control"))
    order = [dialects[j] for j in rng.permutation(len(dialects))]
    group_of: dict[str, str] = {}
    pos = 0
    for g, size in enumerate(group_sizes):
        for d in order[pos : pos + size]:
            group_of[d] = f"group_{g}"
        pos += size
    labels = tuple(group_of[d] for d in dataset.dialects)
    plan = utterance_split(dataset, test_fraction, seed)
    report, train_sizes = _fit_and_eval(dataset, labels, plan, C, seed)
    config = {
        "setting": "control_groups",
        "regime": "utterance",
        "pooling": dataset.pooling,
        "C": C,
        "seed": seed,
        "test_fraction": test_fraction,
        "partition": {d: group_of[d] for d in dialects},
    }
    return ProtocolResult("control_groups", report, config, train_sizes)
