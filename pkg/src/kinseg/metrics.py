"""Extrinsic and intrinsic segmentation metrics.

Extrinsic: frame accuracy and normalized mutual information between a
predicted and a reference labeling. Intrinsic: a simplified silhouette
index that measures each sample against cluster means (not mean pairwise
distances), normalized to [0, 1]. Entropies use natural logs; NMI is
invariant to bijective relabelings of either sequence.
"""

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def _check_lengths(a, b):
    if len(a) != len(b):
        raise ValueError(f"sequence lengths differ: {len(a)} vs {len(b)}")


def accuracy(pred: Sequence, truth: Sequence) -> float:
    """Fraction of frames whose predicted label matches the reference."""
    _check_lengths(pred, truth)
    if len(pred) == 0:
        raise ValueError("empty sequences")
    matches = sum(p == t for p, t in zip(pred, truth))
    return matches / len(pred)


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(x: Sequence, y: Sequence) -> float:
    """I(X,Y) / sqrt(H(X) H(Y)) with natural-log entropies.

    If exactly one sequence is constant the score is 0 by convention; if
    both are constant their (single-block) partitions coincide and the
    score is 1.
    """
    _check_lengths(x, y)
    n = len(x)
    if n == 0:
        raise ValueError("empty sequences")
    xs = np.asarray(x, dtype=object)
    ys = np.asarray(y, dtype=object)
    _, xi = np.unique(xs, return_inverse=True)
    _, yi = np.unique(ys, return_inverse=True)
    kx, ky = xi.max() + 1, yi.max() + 1
    joint = np.zeros((kx, ky))
    np.add.at(joint, (xi, yi), 1.0)
    hx = _entropy(joint.sum(axis=1), n)
    hy = _entropy(joint.sum(axis=0), n)
    if hx == 0.0 or hy == 0.0:
        return 1.0 if hx == hy else 0.0
    px = joint.sum(axis=1) / n
    py = joint.sum(axis=0) / n
    pj = joint / n
    mask = pj > 0
    mi = float(np.sum(pj[mask] * (np.log(pj[mask]) - np.log(np.outer(px, py)[mask]))))
    value = mi / np.sqrt(hx * hy)
    return float(min(max(value, 0.0), 1.0))


def silhouette_samples(X, labels: Sequence) -> np.ndarray:
    """Raw per-sample silhouette values in [-1, 1] against cluster means.

    a(i): distance to the mean of the sample's own cluster; b(i): distance
    to the nearest mean of any other cluster; s = (b - a) / max(a, b),
    with s = 0 when the sample coincides with both means.
    """
    data = np.asarray(getattr(X, "values", X), dtype=float)
    labels = np.asarray(list(labels), dtype=object)
    if data.shape[0] != labels.shape[0]:
        raise ValueError("label count does not match row count")
    names, idx = np.unique(labels, return_inverse=True)
    if len(names) < 2:
        raise ValueError("need at least 2 distinct clusters")
    means = np.stack([data[idx == j].mean(axis=0) for j in range(len(names))])
    # differenced norms, not the expanded quadratic form: the latter loses
    # ~half the significant digits for samples sitting close to a mean
    dists = np.stack(
        [np.linalg.norm(data - m[None, :], axis=1) for m in means], axis=1
    )
    a = dists[np.arange(len(labels)), idx]
    others = dists.copy()
    others[np.arange(len(labels)), idx] = np.inf
    b = others.min(axis=1)
    denom = np.maximum(a, b)
    s = np.zeros(len(labels))
    nz = denom > 0
    s[nz] = (b[nz] - a[nz]) / denom[nz]
    return s


def silhouette_index(X, labels: Sequence) -> float:
    """Mean of the normalized per-sample silhouettes (s + 1) / 2, in [0, 1]."""
    s = silhouette_samples(X, labels)
    return float(np.mean((s + 1.0) / 2.0))


def per_label_accuracy(pred: Sequence, truth: Sequence) -> dict[str, float]:
    """Per reference label: correct frames / frames carrying that label."""
    _check_lengths(pred, truth)
    if len(pred) == 0:
        raise ValueError("empty sequences")
    correct: dict[str, int] = {}
    total: dict[str, int] = {}
    for p, t in zip(pred, truth):
        total[t] = total.get(t, 0) + 1
        if p == t:
            correct[t] = correct.get(t, 0) + 1
    return {t: correct.get(t, 0) / n for t, n in sorted(total.items())}


def confusion_matrix(pred: Sequence, truth: Sequence) -> tuple[list[str], np.ndarray]:
    """Counts over the sorted union of labels; rows = truth, cols = pred."""
    _check_lengths(pred, truth)
    names = sorted(set(pred) | set(truth))
    index = {name: i for i, name in enumerate(names)}
    counts = np.zeros((len(names), len(names)), dtype=int)
    for p, t in zip(pred, truth):
        counts[index[t], index[p]] += 1
    return names, counts


@dataclass
class EvaluationReport:
    """Pooled metrics of one segmentation run.

    accuracy is None when predictions carry no label identities (anonymous
    clusters); si_pred / si_truth are None when the corresponding labeling
    is degenerate (fewer than two clusters).
    """

    accuracy: float | None
    nmi: float | None
    si_pred: float | None
    si_truth: float | None
    per_label_accuracy: dict[str, float]
    confusion_labels: list[str]
    confusion: np.ndarray
    n_frames_evaluated: int

    def to_json(self) -> str:
        doc = {
            "accuracy": self.accuracy,
            "nmi": self.nmi,
            "si_pred": self.si_pred,
            "si_truth": self.si_truth,
            "per_label_accuracy": self.per_label_accuracy,
            "confusion": {
                "labels": self.confusion_labels,
                "counts": [[int(v) for v in row] for row in self.confusion],
            },
            "n_frames_evaluated": self.n_frames_evaluated,
        }
        return json.dumps(doc, indent=2) + "\n"


def evaluate(
    pred: Sequence,
    truth: Sequence,
    *,
    with_accuracy: bool = True,
    X=None,
    pred_rows: Sequence | None = None,
    truth_rows: Sequence | None = None,
) -> EvaluationReport:
    """Assemble the report from frame-level labelings and, optionally, the
    augmented sample matrix with row-level labelings for the silhouettes."""
    _check_lengths(pred, truth)
    names, counts = confusion_matrix(pred, truth)
    si_pred = si_truth = None
    if X is not None and pred_rows is not None:
        si_pred = _try_silhouette(X, pred_rows)
    if X is not None and truth_rows is not None:
        si_truth = _try_silhouette(X, truth_rows)
    return EvaluationReport(
        accuracy=accuracy(pred, truth) if with_accuracy else None,
        nmi=nmi(pred, truth),
        si_pred=si_pred,
        si_truth=si_truth,
        per_label_accuracy=per_label_accuracy(pred, truth) if with_accuracy else {},
        confusion_labels=names,
        confusion=counts,
        n_frames_evaluated=len(pred),
    )


def _try_silhouette(X, labels) -> float | None:
    try:
        return silhouette_index(X, labels)
    except ValueError:
        return None
