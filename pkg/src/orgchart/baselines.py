"""Unsupervised link predictors (CN, JC, AA) on the undirected follow graph."""
from __future__ import annotations

import math
from typing import Callable, Iterable

from .errors import EmptyClass, UnknownUser
from .esn import EsnNetwork, Pair
from .metapath import ScoredCandidateSet


class NeighborModel:
    """N(u) = followers(u) | followees(u)."""

    def __init__(self, net: EsnNetwork):
        self.neighbors: dict[str, frozenset[str]] = {
            u: net.followers_of[u] | net.followees_of[u] for u in net.users
        }

    def __getitem__(self, u: str) -> frozenset[str]:
        try:
            return self.neighbors[u]
        except KeyError:
            raise UnknownUser(u) from None

    def _pair(self, u, v):
        if u == v:
            raise ValueError("link endpoints must differ")
        return self[u], self[v]


def score_cn(model: NeighborModel, u: str, v: str) -> int:
    a, b = model._pair(u, v)
    return len(a & b)


def score_jc(model: NeighborModel, u: str, v: str) -> float:
    a, b = model._pair(u, v)
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def score_aa(model: NeighborModel, u: str, v: str) -> float:
    a, b = model._pair(u, v)
    total = 0.0
    for w in sorted(a & b):
        deg = len(model[w])
        if deg > 1:  # log(1) = 0 would divide by zero
            total += 1.0 / math.log(deg)
    return total


SCORERS: dict[str, Callable[[NeighborModel, str, str], float]] = {
    "cn": score_cn,
    "jc": score_jc,
    "aa": score_aa,
}


def score_pair_with(
    name: str,
    model: NeighborModel,
    upper: Iterable[str],
    lower: Iterable[str],
    upper_class: int | None = None,
) -> ScoredCandidateSet:
    up, lo = tuple(sorted(upper)), tuple(sorted(lower))
    if not up or not lo:
        raise EmptyClass("both classes of a candidate pair must be non-empty")
    fn = SCORERS[name]
    weights: dict[Pair, float] = {(m, s): float(fn(model, m, s)) for m in up for s in lo}
    return ScoredCandidateSet(up, lo, weights, None, upper_class)
