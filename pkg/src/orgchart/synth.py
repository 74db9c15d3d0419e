"""Synthetic organizational charts and enterprise social networks with known truth.

Randomness comes from ``random.Random(seed)`` (Mersenne Twister MT19937). Only
``random()``, ``randrange()`` and ``shuffle()`` are used, so a seed gives the
same fixture on every CPython version.

Tree shape: levels are filled top-down. Every node above the bottom level gets
between ``bmin`` and ``bmax`` children, so all leaves sit on the deepest level.
Level sizes grow geometrically towards ``n_employees``.
Employee ids are shuffled so that id order carries no hierarchy information.
"""
from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass
from typing import Any

from .errors import UnsatisfiableShape
from .esn import EsnNetwork, OrgChart


@dataclass(frozen=True)
class GenConfig:
    n_employees: int = 200
    depth: int = 5
    bmin: int = 2
    bmax: int = 6
    p_follow_manager: float = 0.319
    p_follow_subordinate: float = 0.112
    p_follow_peer: float = 0.2
    p_follow_random: float = 0.01
    n_groups: int | None = None  # default: n_employees // 10
    posts_per_user: int = 2
    reply_rate: float = 0.3
    like_rate: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.n_employees < 1:
            raise ValueError("n_employees must be positive")
        if self.depth < 1:
            raise ValueError("depth must be positive")
        if not 1 <= self.bmin <= self.bmax:
            raise ValueError("branching range needs 1 <= bmin <= bmax")
        for name in ("p_follow_manager", "p_follow_subordinate", "p_follow_peer", "p_follow_random",
                     "reply_rate", "like_rate"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be a probability, got {p}")
        if self.posts_per_user < 0 or (self.n_groups is not None and self.n_groups < 0):
            raise ValueError("counts must be non-negative")

    @property
    def groups(self) -> int:
        return self.n_employees // 10 if self.n_groups is None else self.n_groups


# fixture parameters, not measured values; see README
PRESETS: dict[str, dict[str, Any]] = {
    "default": {},
    "high-signal": {
        "p_follow_manager": 0.95,
        "p_follow_subordinate": 0.05,
        "p_follow_peer": 0.15,
        "p_follow_random": 0.01,
    },
}


def preset(name: str, **overrides) -> GenConfig:
    try:
        base = dict(PRESETS[name])
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    base.update({k: v for k, v in overrides.items() if v is not None})
    return GenConfig(**base)


def _geo_sum(b: int, r: int) -> int:
    """b + b^2 + ... + b^r"""
    return sum(b ** j for j in range(1, r + 1))


def level_sizes(n: int, depth: int, bmin: int, bmax: int) -> list[int]:
    if n > 1 + _geo_sum(bmax, depth - 1):
        raise UnsatisfiableShape(
            f"{n} employees do not fit in {depth} levels with at most {bmax} children each"
        )
    levels = max(d for d in range(1, depth + 1) if 1 + _geo_sum(bmin, d - 1) <= n)
    if n > 1 + _geo_sum(bmax, levels - 1):
        raise UnsatisfiableShape(
            f"{n} employees need more than {levels} levels but branching >= {bmin} caps the depth"
        )
    sizes = [1]
    placed = 1
    for d in range(2, levels + 1):
        prev = sizes[-1]
        rest = levels - d  # levels still to fill after this one
        remaining = n - placed
        if rest == 0:
            sizes.append(remaining)
            break
        # x * (1 + sum bmin^j) <= remaining <= x * (1 + sum bmax^j)
        lo = max(bmin * prev, -(-remaining // (1 + _geo_sum(bmax, rest))))
        hi = min(bmax * prev, remaining // (1 + _geo_sum(bmin, rest)))
        # growth ratio g with prev * (g + g^2 + ... + g^(rest+1)) = remaining
        g_lo, g_hi = 0.0, float(bmax) + 1
        for _ in range(60):
            g = (g_lo + g_hi) / 2
            if prev * sum(g ** j for j in range(1, rest + 2)) < remaining:
                g_lo = g
            else:
                g_hi = g
        x = min(max(round(prev * g_lo), lo), hi)
        sizes.append(x)
        placed += x
    return sizes


def generate_chart(config: GenConfig) -> OrgChart:
    rng = random.Random(config.seed)
    n = config.n_employees
    sizes = level_sizes(n, config.depth, config.bmin, config.bmax)
    names = [f"u{i:0{len(str(n - 1))}d}" for i in range(n)]
    rng.shuffle(names)

    parent: dict[str, str] = {}
    nxt = 1
    prev_level = [names[0]]
    for size in sizes[1:]:
        counts = [config.bmin] * len(prev_level)
        extra = size - config.bmin * len(prev_level)
        while extra > 0:
            i = rng.randrange(len(prev_level))
            if counts[i] < config.bmax:
                counts[i] += 1
                extra -= 1
        level = []
        for mgr, c in zip(prev_level, counts):
            for _ in range(c):
                parent[names[nxt]] = mgr
                level.append(names[nxt])
                nxt += 1
        prev_level = level
    return OrgChart(frozenset(names), parent, names[0])


def generate_esn(chart: OrgChart, config: GenConfig) -> EsnNetwork:
    rng = random.Random(config.seed * 1_000_003 + 17)
    users = sorted(chart.employees)
    parent = chart.parent
    kids = chart.children()

    follows = set()
    for u in users:
        pu = parent.get(u)
        for v in users:
            if u == v:
                continue
            if pu == v:
                p = config.p_follow_manager
            elif parent.get(v) == u:
                p = config.p_follow_subordinate
            elif pu is not None and parent.get(v) == pu:
                p = config.p_follow_peer
            else:
                p = config.p_follow_random
            if p > 0 and rng.random() < p:
                follows.add((u, v))

    def local(u):
        """direct manager and direct reports"""
        out = list(kids.get(u, ()))
        if u in parent:
            out.append(parent[u])
        return sorted(out)

    # groups are anchored on managers and mostly hold the anchor's team
    managers = [u for u in users if kids.get(u)] or users
    groups, joins = [], set()
    for gi in range(config.groups):
        g = f"g{gi:03d}"
        groups.append(g)
        anchor = managers[rng.randrange(len(managers))]
        joins.add((anchor, g))
        for s in kids.get(anchor, ()):
            if rng.random() < 0.8:
                joins.add((s, g))
        for u in users:
            if rng.random() < 0.01:
                joins.add((u, g))

    posts, writes, replies, likes = [], [], set(), set()
    counter = 0

    def new_post(writer):
        nonlocal counter
        pid = f"p{counter:05d}"
        counter += 1
        posts.append(pid)
        writes.append((writer, pid))
        return pid

    outside = 0.01
    for u in users:
        for _ in range(config.posts_per_user):
            pid = new_post(u)
            near = set(local(u))
            for v in users:
                if v == u:
                    continue
                scale = 1.0 if v in near else outside
                if rng.random() < config.reply_rate * scale:
                    replies.add((new_post(v), pid))
                if rng.random() < config.like_rate * scale:
                    likes.add((v, pid))

    return EsnNetwork(
        users=frozenset(users),
        ceo=chart.root,
        groups=frozenset(groups),
        posts=frozenset(posts),
        follows=frozenset(follows),
        joins=frozenset(joins),
        writes=frozenset(writes),
        replies=frozenset(replies),
        likes=frozenset(likes),
    )


def generate(config: GenConfig) -> tuple[EsnNetwork, OrgChart]:
    chart = generate_chart(config)
    return generate_esn(chart, config), chart


def with_seed(config: GenConfig, seed: int) -> GenConfig:
    return dataclasses.replace(config, seed=seed)
