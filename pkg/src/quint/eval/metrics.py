"""Ranking and classification metrics."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from ..labels import LabelSet


def auc_roc(scores, labels) -> float:
    """Area under the ROC curve as the Mann-Whitney statistic.

    Ties between a positive and a negative count one half.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel().astype(bool)
    if len(scores) != len(labels):
        raise ValueError("scores and labels differ in length")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both positive and negative examples")
    ranks = rankdata(scores)
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _indicator(x, nodes=None) -> np.ndarray:
    if isinstance(x, LabelSet):
        return x.indicator(nodes)
    return np.asarray(x, dtype=bool)


def f1_from_indicators(pred: np.ndarray, truth: np.ndarray) -> tuple[float, float]:
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {truth.shape}")
    tp = (pred & truth).sum(axis=0).astype(np.float64)
    fp = (pred & ~truth).sum(axis=0).astype(np.float64)
    fn = (~pred & truth).sum(axis=0).astype(np.float64)
    denom = 2 * tp + fp + fn
    # classes with no true and no predicted members score 0
    per_class = np.divide(2 * tp, denom, out=np.zeros_like(tp), where=denom > 0)
    pooled = 2 * tp.sum() + fp.sum() + fn.sum()
    micro = 2 * tp.sum() / pooled if pooled > 0 else 0.0
    return float(micro), float(per_class.mean()) if len(per_class) else 0.0


def micro_macro_f1(predicted, truth, nodes=None) -> tuple[float, float]:
    """Micro- and macro-averaged F1 over (node, class) decisions.

    Accepts two :class:`LabelSet` objects (optionally restricted to
    ``nodes``) or two boolean indicator matrices.
    """
    if isinstance(predicted, LabelSet) and isinstance(truth, LabelSet):
        if predicted.num_classes != truth.num_classes:
            raise ValueError(f"class universes differ: {predicted.num_classes} vs {truth.num_classes}")
        if predicted.n != truth.n:
            raise ValueError(f"node universes differ: {predicted.n} vs {truth.n}")
    return f1_from_indicators(_indicator(predicted, nodes), _indicator(truth, nodes))
