"""Stratification and link-inference metrics."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import DegenerateLabels, UserSetMismatch


@dataclass(frozen=True)
class StratMetrics:
    accuracy: float
    mae: float
    mse: float
    r2: float | None  # None when the ground truth is constant

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LinkMetrics:
    auc: float | None = None
    precision_at_k: float | None = None
    precision: float | None = None
    recall: float | None = None
    f1: float | None = None

    def as_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def _classes(a) -> Mapping[str, int]:
    return getattr(a, "classes", a)


def _aligned(pred, truth):
    p, t = _classes(pred), _classes(truth)
    if set(p) != set(t):
        extra, missing = sorted(set(p) - set(t)), sorted(set(t) - set(p))
        raise UserSetMismatch(f"prediction/truth user sets differ (extra {extra[:3]}, missing {missing[:3]})")
    users = sorted(t)
    return [p[u] for u in users], [t[u] for u in users]


def strat_metrics(pred, truth) -> StratMetrics:
    p, t = _aligned(pred, truth)
    n = len(t)
    if n == 0:
        raise UserSetMismatch("no users to evaluate")
    acc = sum(a == b for a, b in zip(p, t)) / n
    mae = sum(abs(a - b) for a, b in zip(p, t)) / n
    sse = sum((a - b) ** 2 for a, b in zip(p, t))
    mean = sum(t) / n
    sst = sum((b - mean) ** 2 for b in t)
    r2 = None if sst == 0 else 1 - sse / sst
    return StratMetrics(acc, mae, sse / n, r2)


def per_class_pr(pred, truth, k: int) -> tuple[float | None, float | None]:
    p, t = _aligned(pred, truth)
    hit = sum(1 for a, b in zip(p, t) if a == k and b == k)
    npred = sum(1 for a in p if a == k)
    ntrue = sum(1 for b in t if b == k)
    return (hit / npred if npred else None, hit / ntrue if ntrue else None)


def rank_metrics(
    scored: Sequence[tuple[Hashable, float]],
    positives: Iterable[Hashable],
    k: int = 100,
) -> tuple[float, float]:
    """AUC (ties count one half) and precision among the top-k links.

    Top-k ties are broken by ascending link id.
    """
    if not scored:
        raise ValueError("nothing to rank")
    if k < 1:
        raise ValueError("k must be positive")
    pos = set(positives)
    links = {link for link, _ in scored}
    if not pos <= links:
        raise ValueError("every positive must be among the scored links")
    n_pos = len(pos)
    n_neg = len(scored) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels("AUC needs at least one positive and one negative")

    # Mann-Whitney with average ranks for ties
    order = sorted(scored, key=lambda x: x[1])
    rank_sum = 0.0
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and order[j + 1][1] == order[i][1]:
            j += 1
        avg = (i + j) / 2 + 1
        rank_sum += avg * sum(1 for x in order[i:j + 1] if x[0] in pos)
        i = j + 1
    auc = (rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)

    return auc, precision_at_k(scored, pos, k)


def precision_at_k(scored: Sequence[tuple[Hashable, float]], positives: Iterable[Hashable], k: int = 100) -> float:
    pos = set(positives)
    top = sorted(scored, key=lambda x: (-x[1], x[0]))[:k]
    return sum(1 for link, _ in top if link in pos) / len(top)


def label_metrics(
    labeled: Iterable[tuple[Hashable, int]],
    positives: Iterable[Hashable],
) -> tuple[float, float, float]:
    pos = set(positives)
    chosen = {link for link, lab in labeled if lab == 1}
    tp = len(chosen & pos)
    precision = tp / len(chosen) if chosen else 0.0
    recall = tp / len(pos) if pos else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1
