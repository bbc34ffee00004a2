"""AUROC / accuracy scoring of prediction files, plus a temperature sweep.

AUROC is the Mann-Whitney statistic with half credit for tied scores. It is
computed by sorting, with pair counts kept in integers (doubled, so the half
credits stay exact) until the final division.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .core import DEFAULT_DECISION_THRESHOLD, yes_probability
from .errors import DegenerateLabels, EmptySet, LabelMismatch


@dataclass(frozen=True)
class LabeledPrediction:
    id: str
    probability: float
    label: int

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability for {self.id!r} must be in [0, 1], got {self.probability}")
        if self.label not in (0, 1):
            raise ValueError(f"label for {self.id!r} must be 0 or 1, got {self.label}")


@dataclass(frozen=True)
class EvalReport:
    auroc: float
    accuracy: float
    n_pos: int
    n_neg: int
    threshold: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def table(self) -> str:
        rows = [
            ("AUROC", f"{self.auroc:.4f}"),
            ("accuracy", f"{self.accuracy:.4f}"),
            ("threshold", f"{self.threshold:g}"),
            ("positives", str(self.n_pos)),
            ("negatives", str(self.n_neg)),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def _arrays(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-d and the same length")
    if np.isnan(s).any():
        raise ValueError("scores contain NaN")
    return s, y


def auroc_scores(scores: Sequence[float], labels: Sequence[int]) -> float:
    s, y = _arrays(scores, labels)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels(f"AUROC needs both classes (positives={n_pos}, negatives={n_neg})")
    order = np.argsort(s, kind="stable")
    s, y = s[order], y[order]
    # group equal scores; walk groups in ascending order
    _, starts = np.unique(s, return_index=True)
    bounds = list(starts) + [len(s)]
    twice_correct = 0
    neg_below = 0
    for a, b in zip(bounds[:-1], bounds[1:]):
        group = y[a:b]
        pos = int(group.sum())
        neg = (b - a) - pos
        twice_correct += 2 * pos * neg_below + pos * neg
        neg_below += neg
    return twice_correct / (2 * n_pos * n_neg)


def auroc(preds: Sequence[LabeledPrediction]) -> float:
    return auroc_scores([p.probability for p in preds], [p.label for p in preds])


def accuracy_scores(scores: Sequence[float], labels: Sequence[int], threshold: float = DEFAULT_DECISION_THRESHOLD) -> float:
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    s, y = _arrays(scores, labels)
    if s.size == 0:
        raise EmptySet("accuracy of an empty prediction set is undefined")
    return float(((s > threshold).astype(np.int64) == y).mean())


def accuracy(preds: Sequence[LabeledPrediction], threshold: float = DEFAULT_DECISION_THRESHOLD) -> float:
    return accuracy_scores([p.probability for p in preds], [p.label for p in preds], threshold)


def evaluate(preds: Sequence[LabeledPrediction], threshold: float = DEFAULT_DECISION_THRESHOLD) -> EvalReport:
    labels = [p.label for p in preds]
    return EvalReport(
        auroc=auroc(preds),
        accuracy=accuracy(preds, threshold),
        n_pos=sum(labels),
        n_neg=len(labels) - sum(labels),
        threshold=threshold,
    )


def join_labels(probabilities: Mapping[str, float], labels: Mapping[str, int]) -> list[LabeledPrediction]:
    """Pair predictions with ground truth; every prediction id needs a label."""
    missing = [i for i in probabilities if i not in labels]
    if missing:
        raise LabelMismatch(f"{len(missing)} prediction ids have no label, e.g. {missing[:3]}")
    return [LabeledPrediction(i, float(p), int(labels[i])) for i, p in probabilities.items()]


def _read_rows(path: Union[str, Path], required: Sequence[str]) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        absent = [c for c in required if c not in header]
        if absent:
            raise ValueError(f"{path}: missing columns {absent}")
        return list(reader)


def _unique(rows: Iterable[dict], key: str, value, path) -> dict:
    out = {}
    for row in rows:
        k = row[key]
        if k in out:
            raise LabelMismatch(f"{path}: id {k!r} appears more than once")
        out[k] = value(row)
    return out


def _label(v: str) -> int:
    n = int(float(v))
    if n not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {v!r}")
    return n


def read_predictions(path: Union[str, Path]) -> dict[str, float]:
    rows = _read_rows(path, ("id", "probability"))
    return _unique(rows, "id", lambda r: float(r["probability"]), path)


def read_labels(path: Union[str, Path]) -> dict[str, int]:
    rows = _read_rows(path, ("id", "label"))
    return _unique(rows, "id", lambda r: _label(r["label"]), path)


def read_logits(path: Union[str, Path]) -> dict[str, tuple[float, float]]:
    rows = _read_rows(path, ("id", "logit_yes", "logit_no"))
    return _unique(rows, "id", lambda r: (float(r["logit_yes"]), float(r["logit_no"])), path)


def evaluate_files(
    preds_path: Union[str, Path], labels_path: Union[str, Path], threshold: float = DEFAULT_DECISION_THRESHOLD
) -> EvalReport:
    return evaluate(join_labels(read_predictions(preds_path), read_labels(labels_path)), threshold)


@dataclass(frozen=True)
class SweepRow:
    temperature: float
    auroc: float
    accuracy: float


def temperature_sweep(
    raw_logit_pairs: Sequence[tuple[float, float]],
    labels: Sequence[int],
    t_grid: Sequence[float],
    threshold: float = DEFAULT_DECISION_THRESHOLD,
) -> list[SweepRow]:
    """AUROC and accuracy of the Yes-probability at each temperature.

    Dividing by t > 0 preserves the order of the logit margins, so AUROC is
    computed once from the margins: probabilities can saturate to exactly
    0 or 1 for small t and would otherwise manufacture ties.
    """
    if len(raw_logit_pairs) != len(labels):
        raise ValueError("need one label per logit pair")
    bad = [t for t in t_grid if not (t > 0 and math.isfinite(t))]
    if bad:
        raise ValueError(f"temperatures must be positive and finite: {bad}")
    if not t_grid:
        return []
    margins = [y - n for y, n in raw_logit_pairs]
    rank_auc = auroc_scores(margins, labels)
    rows = []
    for t in t_grid:
        probs = [yes_probability(y, n, t) for y, n in raw_logit_pairs]
        rows.append(SweepRow(float(t), rank_auc, accuracy_scores(probs, labels, threshold)))
    return rows


def sweep_table(rows: Sequence[SweepRow]) -> str:
    lines = [f"{'t':>10}  {'auroc':>8}  {'accuracy':>8}"]
    lines += [f"{r.temperature:>10g}  {r.auroc:>8.4f}  {r.accuracy:>8.4f}" for r in rows]
    return "\n".join(lines)
