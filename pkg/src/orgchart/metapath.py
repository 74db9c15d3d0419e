"""Social meta paths between users and the DP-intimacy built on them.

The seven user-to-user meta paths, by index:

    1 follow                U -> U
    2 follower of follower  U -> U -> U
    3 common followee       U -> U <- U
    4 common follower       U <- U -> U
    5 common group          U -> G <- U
    6 reply post            U writes P1, P2 replies to P1, V wrote P2
    7 like post             U writes P, V likes P

Instances are walks. Intermediate nodes may coincide with the endpoints,
but the two endpoints must differ.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .errors import EmptyClass, UnknownUser
from .esn import EsnNetwork, Pair

META_PATHS = {
    1: "follow",
    2: "follower-of-follower",
    3: "common-followee",
    4: "common-follower",
    5: "common-group",
    6: "reply-post",
    7: "like-post",
}

UNIFORM = (Fraction(1, 7),) * 7


def _check_path(i: int) -> None:
    if i not in META_PATHS:
        raise ValueError(f"meta path index must be in 1..7, got {i}")


def _targets(net: EsnNetwork, i: int, u: str) -> Counter:
    """Instance counts of path ``i`` from ``u`` to every reachable user (u excluded)."""
    out: Counter = Counter()
    if i == 1:
        out.update(net.followees_of[u])
    elif i == 2:
        for a in net.followees_of[u]:
            out.update(net.followees_of[a])
    elif i == 3:
        for a in net.followees_of[u]:
            out.update(net.followers_of[a])
    elif i == 4:
        for a in net.followers_of[u]:
            out.update(net.followees_of[a])
    elif i == 5:
        for g in net.groups_of[u]:
            out.update(net.members_of[g])
    elif i == 6:
        for p in net.posts_of[u]:
            out.update(net.writer_of[r] for r in net.replies_to[p])
    elif i == 7:
        for p in net.posts_of[u]:
            out.update(net.likers_of[p])
    out.pop(u, None)
    return out


class MetaPathIndex:
    """Per-user instance counts for all seven paths, computed on first use."""

    def __init__(self, net: EsnNetwork):
        self.net = net
        self._rows: dict[tuple[int, str], Counter] = {}
        self._totals: dict[tuple[int, str], int] = {}

    def row(self, i: int, u: str) -> Counter:
        key = (i, u)
        row = self._rows.get(key)
        if row is None:
            row = self._rows[key] = _targets(self.net, i, u)
            self._totals[key] = sum(row.values())
        return row

    def count(self, i: int, u: str, v: str) -> int:
        return self.row(i, u)[v]

    def outgoing(self, i: int, u: str) -> int:
        self.row(i, u)
        return self._totals[(i, u)]

    def dp(self, i: int, u: str, v: str) -> Fraction:
        den = self.outgoing(i, u) + self.outgoing(i, v)
        if den == 0:
            return Fraction(0)
        return Fraction(self.count(i, u, v) + self.count(i, v, u), den)

    def dp_vector(self, u: str, v: str) -> tuple[Fraction, ...]:
        return tuple(self.dp(i, u, v) for i in range(1, 8))


def _need(net: EsnNetwork, *users: str) -> None:
    for u in users:
        if u not in net.users:
            raise UnknownUser(u)


def count_instances(net: EsnNetwork, i: int, u: str, v: str) -> int:
    _check_path(i)
    _need(net, u, v)
    if u == v:
        raise ValueError("meta path endpoints must differ")
    return _targets(net, i, u)[v]


def count_outgoing(net: EsnNetwork, i: int, u: str) -> int:
    _check_path(i)
    _need(net, u)
    return sum(_targets(net, i, u).values())


def dp_intimacy(net: EsnNetwork, i: int, u: str, v: str) -> Fraction:
    """Paths between u and v (both directions) over all paths leaving either; 0 when none leave."""
    _check_path(i)
    _need(net, u, v)
    if u == v:
        raise ValueError("meta path endpoints must differ")
    return MetaPathIndex(net).dp(i, u, v)


def check_weights(weights: Sequence) -> tuple[float, ...]:
    if len(weights) != 7:
        raise ValueError("need exactly 7 meta path weights")
    if any(w < 0 for w in weights):
        raise ValueError("meta path weights must be non-negative")
    if abs(sum(float(w) for w in weights) - 1.0) > 1e-9:
        raise ValueError(f"meta path weights must sum to 1, got {sum(float(w) for w in weights)}")
    return tuple(float(w) for w in weights)


def aggregate_intimacy(dp: Sequence, weights: Sequence = UNIFORM) -> float:
    w = check_weights(weights)
    if len(dp) != 7:
        raise ValueError("need exactly 7 DP-intimacy values")
    s = 0.0
    for wi, di in zip(w, dp):  # fixed summation order keeps scores bit-reproducible
        s += wi * float(di)
    # numerically stable logistic
    if s >= 0:
        return 1.0 / (1.0 + math.exp(-s))
    e = math.exp(s)
    return e / (1.0 + e)


@dataclass(frozen=True)
class ScoredCandidateSet:
    upper: tuple[str, ...]
    lower: tuple[str, ...]
    weights: dict[Pair, float]  # (manager, subordinate) -> intimacy
    features: dict[Pair, tuple] | None = None  # per-candidate dp vector, when kept
    upper_class: int | None = None

    @property
    def links(self) -> list[Pair]:
        return sorted(self.weights)

    def __len__(self) -> int:
        return len(self.weights)


def score_class_pair(
    net: EsnNetwork,
    upper: Iterable[str],
    lower: Iterable[str],
    weights: Sequence = UNIFORM,
    *,
    index: MetaPathIndex | None = None,
    upper_class: int | None = None,
) -> ScoredCandidateSet:
    up, lo = tuple(sorted(upper)), tuple(sorted(lower))
    if not up or not lo:
        raise EmptyClass("both classes of a candidate pair must be non-empty")
    if set(up) & set(lo):
        raise ValueError("upper and lower classes overlap")
    _need(net, *up, *lo)
    w = check_weights(weights)
    index = index or MetaPathIndex(net)
    scores, feats = {}, {}
    for m in up:
        for s in lo:
            dp = index.dp_vector(m, s)
            feats[(m, s)] = dp
            scores[(m, s)] = aggregate_intimacy(dp, w)
    return ScoredCandidateSet(up, lo, scores, feats, upper_class)
