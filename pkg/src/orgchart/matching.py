"""K-to-one supervision matching between consecutive classes via min-cost flow.

For one class pair the flow graph is::

    s --[0, K]--> manager --[0, 1], cost 1 - intimacy--> subordinate --[1, 1]--> t

Every subordinate must receive exactly one unit, so a feasible flow picks one
manager per subordinate and at most K subordinates per manager.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import Infeasible, InvalidComposition
from .esn import OrgChart, Pair, validate_chart
from .metapath import ScoredCandidateSet
from .stratification import ClassAssignment


class _Terminal:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return f"<{self.name}>"


SOURCE = _Terminal("source")
SINK = _Terminal("sink")


@dataclass(frozen=True)
class Arc:
    tail: object
    head: object
    lb: int
    ub: int
    cost: object = 0


@dataclass(frozen=True)
class FlowNetwork:
    upper: tuple[str, ...]
    lower: tuple[str, ...]
    arcs: tuple[Arc, ...]
    K: int

    @property
    def nodes(self) -> list:
        return [SOURCE, *self.upper, *self.lower, SINK]


@dataclass(frozen=True)
class FlowResult:
    flow: dict[tuple, int]  # (tail, head) -> units
    cost: object
    status: str = "optimal"


@dataclass(frozen=True)
class MatchingResult:
    labels: dict[Pair, int]
    weights: dict[Pair, float] = field(default_factory=dict)

    @property
    def selected(self) -> set[Pair]:
        return {link for link, lab in self.labels.items() if lab == 1}


def build_flow_graph(candidates: ScoredCandidateSet, K: int) -> FlowNetwork:
    if K < 1:
        raise ValueError("management threshold K must be >= 1")
    arcs = [Arc(SOURCE, m, 0, K, 0) for m in candidates.upper]
    for m, s in sorted(candidates.weights):
        arcs.append(Arc(m, s, 0, 1, 1 - candidates.weights[(m, s)]))
    arcs += [Arc(s, SINK, 1, 1, 0) for s in candidates.lower]
    return FlowNetwork(tuple(candidates.upper), tuple(candidates.lower), tuple(arcs), K)


def min_cost_flow(H: FlowNetwork) -> FlowResult:
    """Successive shortest augmenting paths with Dijkstra and node potentials.

    Costs are never negative, so zero potentials are valid to start with.
    Arithmetic follows the cost type: pass Fractions to get exact totals.
    """
    nodes = H.nodes
    idx = {x: i for i, x in enumerate(nodes)}
    n = len(nodes)
    s, t = 0, n - 1
    zero = 0
    for a in H.arcs:
        if a.cost != 0:
            zero = a.cost * 0
            break
    # residual graph: to, cap, cost, rev, arc-index (None for reverse)
    graph: list[list[list]] = [[] for _ in range(n)]
    for k, a in enumerate(H.arcs):
        u, v = idx[a.tail], idx[a.head]
        graph[u].append([v, a.ub, a.cost, len(graph[v]), k])
        graph[v].append([u, 0, -a.cost, len(graph[u]) - 1, None])

    need = sum(a.lb for a in H.arcs if a.head is SINK)
    if len(H.upper) * H.K < len(H.lower):
        raise Infeasible(
            f"capacity deficit: {len(H.upper)} managers x K={H.K} < {len(H.lower)} subordinates"
        )
    pot = [zero] * n
    pushed = 0
    total = zero
    while pushed < need:
        dist = [None] * n
        prev = [None] * n
        dist[s] = zero
        heap = [(zero, s)]
        done = [False] * n
        while heap:
            d, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            for ei, e in enumerate(graph[u]):
                v, cap, cost = e[0], e[1], e[2]
                if cap <= 0 or done[v]:
                    continue
                rc = cost + pot[u] - pot[v]
                if rc < 0:  # float round-off only; exact types never get here
                    rc = zero
                nd = d + rc
                if dist[v] is None or nd < dist[v]:
                    dist[v] = nd
                    prev[v] = (u, ei)
                    heapq.heappush(heap, (nd, v))
        if dist[t] is None:
            covered = {a.head for a in H.arcs if a.tail is not SOURCE}
            lonely = [x for x in H.lower if x not in covered]
            why = f"subordinate {lonely[0]!r} has no candidate manager" if lonely else "no augmenting path"
            raise Infeasible(f"flow of {need} units impossible after {pushed}: {why}")
        for v in range(n):
            if dist[v] is not None:
                pot[v] = pot[v] + dist[v]
        # bottleneck along the path
        push = need - pushed
        v = t
        while v != s:
            u, ei = prev[v]
            push = min(push, graph[u][ei][1])
            v = u
        v = t
        while v != s:
            u, ei = prev[v]
            e = graph[u][ei]
            e[1] -= push
            graph[v][e[3]][1] += push
            total = total + push * e[2]
            v = u
        pushed += push

    flow = {}
    for u in range(n):
        for e in graph[u]:
            k = e[4]
            if k is not None:
                a = H.arcs[k]
                flow[(a.tail, a.head)] = a.ub - e[1]
    return FlowResult(flow, total)


def flow_violations(H: FlowNetwork, result: FlowResult) -> list[str]:
    """Bound, integrality and mass-balance problems of ``result`` on ``H``."""
    out = []
    balance: dict = {}
    for a in H.arcs:
        x = result.flow.get((a.tail, a.head), 0)
        if x != int(x):
            out.append(f"non-integral flow on {a.tail}->{a.head}")
        if not a.lb <= x <= a.ub:
            out.append(f"flow {x} on {a.tail}->{a.head} outside [{a.lb}, {a.ub}]")
        balance[a.head] = balance.get(a.head, 0) + x
        balance[a.tail] = balance.get(a.tail, 0) - x
    for node, b in balance.items():
        if node is not SOURCE and node is not SINK and b != 0:
            out.append(f"mass imbalance {b} at {node}")
    return out


def match_classes(candidates: ScoredCandidateSet, K: int) -> MatchingResult:
    H = build_flow_graph(candidates, K)
    try:
        res = min_cost_flow(H)
    except Infeasible as exc:
        where = f"classes {candidates.upper_class}/{candidates.upper_class + 1}: " if candidates.upper_class else ""
        raise Infeasible(where + str(exc)) from exc
    labels = {link: (1 if res.flow.get(link, 0) == 1 else -1) for link in candidates.weights}
    return MatchingResult(labels, dict(candidates.weights))


def assemble_chart(
    assignment: ClassAssignment,
    matchings: Sequence[MatchingResult] | Iterable[MatchingResult],
    root: str,
) -> OrgChart:
    classes = assignment.classes
    if classes.get(root) != 1:
        raise InvalidComposition(f"root {root!r} must be in class 1")
    present = set(classes.values())
    for c in present:
        if c > 1 and c - 1 not in present:
            raise InvalidComposition(f"class {c} is occupied but class {c - 1} is empty")
    parent: dict[str, str] = {}
    for mr in matchings:
        for m, s in sorted(mr.selected):
            if m not in classes or s not in classes:
                raise InvalidComposition(f"link {m}->{s} references an unclassified user")
            if classes[s] != classes[m] + 1:
                raise InvalidComposition(f"link {m}->{s} does not join consecutive classes")
            if s in parent:
                raise InvalidComposition(f"{s!r} matched to both {parent[s]!r} and {m!r}")
            parent[s] = m
    missing = sorted(u for u in classes if u != root and u not in parent)
    if missing:
        raise InvalidComposition(f"{len(missing)} users unmatched, e.g. {missing[0]!r}")
    chart = OrgChart(frozenset(classes), parent, root)
    problems = validate_chart(chart)
    if problems:
        raise InvalidComposition(f"assembled chart is not a rooted tree: {problems[0]}")
    return chart
