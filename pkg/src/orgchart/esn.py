"""Heterogeneous enterprise social network (ESN) and organizational chart types.

Both are immutable once built. The JSON document formats are:

network::

    {"users": [{"id": "u1", "ceo": true}, {"id": "u2"}],
     "groups": ["g1"],
     "posts": [{"id": "p1", "writer": "u1"}],
     "follows": [["u2", "u1"]],
     "joins": [["u1", "g1"]],
     "likes": [["u2", "p1"]],
     "replies": [["p2", "p1"]]}          # p2 is a reply to p1

chart::

    {"root": "u1", "links": [["u1", "u2"]]}   # [manager, subordinate]
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .errors import (
    DanglingEndpoint,
    MalformedDocument,
    MissingCeo,
    MultipleWriters,
    SelfLoop,
    UnknownUser,
)

Pair = tuple[str, str]


@dataclass(frozen=True)
class EsnNetwork:
    users: frozenset[str]
    ceo: str
    groups: frozenset[str] = frozenset()
    posts: frozenset[str] = frozenset()
    follows: frozenset[Pair] = frozenset()
    joins: frozenset[Pair] = frozenset()
    writes: frozenset[Pair] = frozenset()
    replies: frozenset[Pair] = frozenset()
    likes: frozenset[Pair] = frozenset()

    def __post_init__(self):
        for name in ("users", "groups", "posts", "follows", "joins", "writes", "replies", "likes"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        _check_network(self)

    # adjacency views, built lazily and cached on the instance

    @cached_property
    def followers_of(self) -> dict[str, frozenset[str]]:
        acc = defaultdict(set)
        for w, u in self.follows:
            acc[u].add(w)
        return {u: frozenset(acc.get(u, ())) for u in self.users}

    @cached_property
    def followees_of(self) -> dict[str, frozenset[str]]:
        acc = defaultdict(set)
        for u, v in self.follows:
            acc[u].add(v)
        return {u: frozenset(acc.get(u, ())) for u in self.users}

    @cached_property
    def groups_of(self) -> dict[str, frozenset[str]]:
        acc = defaultdict(set)
        for u, g in self.joins:
            acc[u].add(g)
        return {u: frozenset(acc.get(u, ())) for u in self.users}

    @cached_property
    def members_of(self) -> dict[str, frozenset[str]]:
        acc = defaultdict(set)
        for u, g in self.joins:
            acc[g].add(u)
        return {g: frozenset(acc.get(g, ())) for g in self.groups}

    @cached_property
    def writer_of(self) -> dict[str, str]:
        return {p: u for u, p in self.writes}

    @cached_property
    def posts_of(self) -> dict[str, frozenset[str]]:
        acc = defaultdict(set)
        for u, p in self.writes:
            acc[u].add(p)
        return {u: frozenset(acc.get(u, ())) for u in self.users}

    @cached_property
    def replies_to(self) -> dict[str, frozenset[str]]:
        """original post -> posts replying to it"""
        acc = defaultdict(set)
        for reply, original in self.replies:
            acc[original].add(reply)
        return {p: frozenset(acc.get(p, ())) for p in self.posts}

    @cached_property
    def likers_of(self) -> dict[str, frozenset[str]]:
        acc = defaultdict(set)
        for u, p in self.likes:
            acc[p].add(u)
        return {p: frozenset(acc.get(p, ())) for p in self.posts}

    def in_degree(self, u: str) -> int:
        return len(self.followers_of[u])


def _check_network(net: EsnNetwork) -> None:
    if not net.ceo:
        raise MissingCeo("network has no CEO")
    if net.ceo not in net.users:
        raise MissingCeo(f"CEO {net.ceo!r} is not a user")
    for kind, ids in (("user", net.users), ("group", net.groups), ("post", net.posts)):
        for i in ids:
            if not isinstance(i, str) or not i:
                raise MalformedDocument(f"{kind} id must be a non-empty string, got {i!r}")

    def need(ids, x, rel):
        if x not in ids:
            raise DanglingEndpoint(f"{rel} edge references unknown node {x!r}")

    for u, v in net.follows:
        need(net.users, u, "follow")
        need(net.users, v, "follow")
        if u == v:
            raise SelfLoop(f"user {u!r} follows itself")
    for u, g in net.joins:
        need(net.users, u, "join")
        need(net.groups, g, "join")
    for u, p in net.likes:
        need(net.users, u, "like")
        need(net.posts, p, "like")
    for a, b in net.replies:
        need(net.posts, a, "reply")
        need(net.posts, b, "reply")
    seen: dict[str, str] = {}
    for u, p in net.writes:
        need(net.users, u, "write")
        need(net.posts, p, "write")
        if p in seen and seen[p] != u:
            raise MultipleWriters(f"post {p!r} has writers {seen[p]!r} and {u!r}")
        seen[p] = u
    missing = net.posts - seen.keys()
    if missing:
        raise MalformedDocument(f"post {sorted(missing)[0]!r} has no writer")


def followers(net: EsnNetwork, u: str) -> frozenset[str]:
    if u not in net.users:
        raise UnknownUser(u)
    return net.followers_of[u]


def followees(net: EsnNetwork, u: str) -> frozenset[str]:
    if u not in net.users:
        raise UnknownUser(u)
    return net.followees_of[u]


# ---------------------------------------------------------------- network I/O


def _pairs(doc: dict, key: str) -> list[Pair]:
    raw = doc.get(key, [])
    if not isinstance(raw, list):
        raise MalformedDocument(f"{key!r} must be an array")
    out = []
    for item in raw:
        if not (isinstance(item, list) and len(item) == 2 and all(isinstance(x, str) for x in item)):
            raise MalformedDocument(f"{key!r} entries must be [src, dst] string pairs, got {item!r}")
        out.append((item[0], item[1]))
    return out


def _unique(ids: Iterable[str], kind: str) -> frozenset[str]:
    seen = set()
    for i in ids:
        if i in seen:
            raise MalformedDocument(f"duplicate {kind} id {i!r}")
        seen.add(i)
    return frozenset(seen)


def parse_network(raw: bytes | str) -> EsnNetwork:
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedDocument(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedDocument("top level must be an object")
    try:
        users_raw = doc.get("users", [])
        user_ids, ceos = [], []
        for entry in users_raw:
            if isinstance(entry, str):
                entry = {"id": entry}
            uid = entry["id"]
            user_ids.append(uid)
            if entry.get("ceo", False):
                ceos.append(uid)
        groups = doc.get("groups", [])
        groups = [g["id"] if isinstance(g, dict) else g for g in groups]
        post_ids, writes = [], []
        for entry in doc.get("posts", []):
            post_ids.append(entry["id"])
            writes.append((entry["writer"], entry["id"]))
    except (KeyError, TypeError, AttributeError) as exc:
        raise MalformedDocument(f"bad node entry: {exc}") from exc

    if not ceos:
        raise MissingCeo("no user is marked ceo")
    if len(ceos) > 1:
        raise MalformedDocument(f"several users marked ceo: {sorted(ceos)}")
    # a post listed twice with two different writers is a writer conflict, not a duplicate id
    by_post: dict[str, str] = {}
    for u, p in writes:
        if p in by_post and by_post[p] != u:
            raise MultipleWriters(f"post {p!r} has writers {by_post[p]!r} and {u!r}")
        by_post[p] = u
    return EsnNetwork(
        users=_unique(user_ids, "user"),
        ceo=ceos[0],
        groups=_unique(groups, "group"),
        posts=_unique(post_ids, "post"),
        follows=_pairs(doc, "follows"),
        joins=_pairs(doc, "joins"),
        writes=writes,
        replies=_pairs(doc, "replies"),
        likes=_pairs(doc, "likes"),
    )


def network_to_dict(net: EsnNetwork) -> dict:
    return {
        "users": [{"id": u, "ceo": True} if u == net.ceo else {"id": u} for u in sorted(net.users)],
        "groups": sorted(net.groups),
        "posts": [{"id": p, "writer": net.writer_of[p]} for p in sorted(net.posts)],
        "follows": [list(e) for e in sorted(net.follows)],
        "joins": [list(e) for e in sorted(net.joins)],
        "likes": [list(e) for e in sorted(net.likes)],
        "replies": [list(e) for e in sorted(net.replies)],
    }


def serialize_network(net: EsnNetwork) -> bytes:
    return (json.dumps(network_to_dict(net), indent=1, sort_keys=True) + "\n").encode()


# ---------------------------------------------------------------- org chart


@dataclass(frozen=True)
class OrgChart:
    employees: frozenset[str]
    parent: dict[str, str]
    root: str

    def __post_init__(self):
        object.__setattr__(self, "employees", frozenset(self.employees))
        object.__setattr__(self, "parent", dict(self.parent))

    @classmethod
    def from_links(cls, root: str, links: Iterable[Pair], employees: Iterable[str] = ()) -> "OrgChart":
        parent: dict[str, str] = {}
        emp = set(employees) | {root}
        for m, s in links:
            if s in parent and parent[s] != m:
                raise MalformedDocument(f"{s!r} has two managers: {parent[s]!r} and {m!r}")
            parent[s] = m
            emp.update((m, s))
        return cls(frozenset(emp), parent, root)

    @property
    def links(self) -> frozenset[Pair]:
        return frozenset((m, s) for s, m in self.parent.items())

    def children(self) -> dict[str, list[str]]:
        kids: dict[str, list[str]] = {e: [] for e in self.employees}
        for s, m in self.parent.items():
            kids.setdefault(m, []).append(s)
        for v in kids.values():
            v.sort()
        return kids

    def levels(self) -> dict[str, int]:
        """Depth of every employee reachable from the root; the root is level 1."""
        kids = self.children()
        out = {self.root: 1}
        stack = [self.root]
        while stack:
            m = stack.pop()
            for s in kids.get(m, ()):
                if s not in out:
                    out[s] = out[m] + 1
                    stack.append(s)
        return out

    @property
    def depth(self) -> int:
        return max(self.levels().values())


@dataclass(frozen=True)
class Violation:
    kind: str
    node: str
    detail: str = ""


def validate_chart(chart: OrgChart) -> list[Violation]:
    """Return every rooted-tree violation in ``chart``; empty means valid.

    Only root causes are reported: an orphan or a cycle is listed once, not
    once per descendant cut off by it.
    """
    report: list[Violation] = []
    emp = chart.employees
    if chart.root not in emp:
        report.append(Violation("root-missing", chart.root, "root is not an employee"))
    if chart.root in chart.parent:
        report.append(Violation("root-has-parent", chart.root, f"parent {chart.parent[chart.root]!r}"))
    for s, m in sorted(chart.parent.items()):
        if s not in emp:
            report.append(Violation("unknown-node", s, "subordinate is not an employee"))
        if m not in emp:
            report.append(Violation("unknown-node", m, "manager is not an employee"))
    for e in sorted(emp):
        if e != chart.root and e not in chart.parent:
            report.append(Violation("disconnected", e, "non-root employee without a manager"))

    # parent is a functional graph: colour walks to find each cycle exactly once
    state: dict[str, int] = {}  # 1 = on current walk, 2 = finished
    for e in sorted(emp):
        walk = []
        x = e
        while x not in state and x in chart.parent and x != chart.root:
            state[x] = 1
            walk.append(x)
            x = chart.parent[x]
        if state.get(x) == 1:
            cyc = walk[walk.index(x):]
            report.append(Violation("cycle", min(cyc), " -> ".join(cyc + [x])))
        for w in walk:
            state[w] = 2
    return report


def parse_chart(raw: bytes | str) -> OrgChart:
    try:
        doc = json.loads(raw)
        root = doc["root"]
        links = [(m, s) for m, s in doc.get("links", [])]
        employees = doc.get("employees", [])
    except (json.JSONDecodeError, UnicodeDecodeError, KeyError, TypeError, ValueError) as exc:
        raise MalformedDocument(f"bad chart document: {exc}") from exc
    if not isinstance(root, str) or not root:
        raise MalformedDocument("chart root must be a non-empty string")
    return OrgChart.from_links(root, links, employees)


def serialize_chart(chart: OrgChart) -> bytes:
    doc = {"root": chart.root, "links": [list(e) for e in sorted(chart.links)]}
    isolated = sorted(chart.employees - {chart.root} - set(chart.parent))
    if isolated:
        doc["employees"] = sorted(chart.employees)
    return (json.dumps(doc, indent=1, sort_keys=True) + "\n").encode()
