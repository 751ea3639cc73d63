"""Multi-class evaluation: per-class precision/recall/F1, macro averages,
and predicted-label distributions.

Conventions: a zero denominator yields a score of 0 (never NaN), and macro
averages run over the classes present in the gold labels only.  Display
rounding is 2 decimals for scores and 1 decimal for percentages; JSON
output keeps full precision.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass


class MetricsError(Exception):
    pass


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    per_class: dict[str, ClassScores]
    macro: tuple[float, float, float]
    n_test: int

    def to_dict(self) -> dict:
        return {
            "per_class": {
                c: {
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                    "support": s.support,
                }
                for c, s in self.per_class.items()
            },
            "macro": {
                "precision": self.macro[0],
                "recall": self.macro[1],
                "f1": self.macro[2],
            },
            "n_test": self.n_test,
        }

    def to_tsv(self) -> str:
        lines = ["class\tprecision\trecall\tf1\tsupport"]
        for c, s in self.per_class.items():
            lines.append(f"{c}\t{s.precision:.2f}\t{s.recall:.2f}\t{s.f1:.2f}\t{s.support}")
        p, r, f1 = self.macro
        lines.append(f"macro average\t{p:.2f}\t{r:.2f}\t{f1:.2f}\t{self.n_test}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LabelDistribution:
    """Row-normalized predicted-label percentages per held-out label."""

    rows: dict[str, dict[str, float]]
    columns: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "rows": self.rows}

    def to_tsv(self) -> str:
        lines = ["held_out\t" + "\t".join(self.columns)]
        for held_out, row in self.rows.items():
            cells = [
                "---" if col == held_out else f"{row[col]:.1f}" for col in self.columns
            ]
            lines.append(held_out + "\t" + "\t".join(cells))
        return "\n".join(lines) + "\n"


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def per_class_prf(gold: list[str], pred: list[str]) -> EvalReport:
    """Per-class P/R/F1 plus macro average over gold-present classes."""
    if len(gold) != len(pred):
        raise MetricsError(f"length mismatch: {len(gold)} gold vs {len(pred)} pred")
    if not gold:
        raise MetricsError("empty input")
    gold_classes = sorted(set(gold))
    tp: Counter = Counter()
    fp: Counter = Counter()
    fn: Counter = Counter()
    for g, p in zip(gold, pred):
        if g == p:
            tp[g] += 1
        else:
            fp[p] += 1
            fn[g] += 1
    support = Counter(gold)
    per_class = {}
    for c in gold_classes:
        precision, recall, f1 = _prf(tp[c], fp[c], fn[c])
        per_class[c] = ClassScores(precision, recall, f1, support[c])
    macro = macro_average([(s.precision, s.recall, s.f1) for s in per_class.values()])
    return EvalReport(per_class=per_class, macro=macro, n_test=len(gold))


def macro_average(per_class_scores: list[tuple[float, float, float]]) -> tuple[float, float, float]:
    """Unweighted component-wise mean of (precision, recall, f1) triples."""
    if not per_class_scores:
        raise MetricsError("empty score list")
    n = len(per_class_scores)
    sums = [0.0, 0.0, 0.0]
    for triple in per_class_scores:
        for i in range(3):
            sums[i] += triple[i]
    return (sums[0] / n, sums[1] / n, sums[2] / n)


def label_distribution(pred: list[str], columns: list[str]) -> dict[str, float]:
    """Percentage of predictions falling on each column label."""
    if not pred:
        raise MetricsError("empty prediction list")
    counts = Counter(pred)
    unknown = set(counts) - set(columns)
    if unknown:
        raise MetricsError(f"predicted labels outside columns: {sorted(unknown)}")
    return {c: 100.0 * counts[c] / len(pred) for c in columns}
