"""End-to-end inference: stratify, score candidate links, match.

Methods:

create      stratify -> meta-path scores -> K-to-one matching -> chart
create-sl   stratify -> meta-path scores (no labels)
create-sm   stratify -> matching over follow links (weight 1 if a follow link
            joins the pair, 0 otherwise) -> chart
create-s    stratify -> every cross-class follow link is predicted
asd         agony stratification only
cn/jc/aa    stratify (CREATE or agony strata) -> neighbour-based scores

Candidate links join consecutive *occupied* classes. The solver may leave a
class value unused. Two occupied classes with nothing between them then count
as consecutive.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .baselines import NeighborModel, score_pair_with
from .esn import EsnNetwork, OrgChart, Pair
from .matching import MatchingResult, assemble_chart, match_classes
from .metapath import UNIFORM, MetaPathIndex, ScoredCandidateSet, score_class_pair
from .stratification import (
    ClassAssignment,
    StratificationConfig,
    build_program,
    solve_program,
    stratify_agony,
)

METHODS = ("create", "create-sl", "create-sm", "create-s", "asd", "cn", "jc", "aa")


@dataclass
class InferenceResult:
    method: str
    assignment: ClassAssignment
    candidates: list[ScoredCandidateSet] = field(default_factory=list)
    labels: dict[Pair, int] | None = None
    chart: OrgChart | None = None
    objective: int | None = None

    @property
    def weights(self) -> dict[Pair, float]:
        out: dict[Pair, float] = {}
        for cs in self.candidates:
            out.update(cs.weights)
        return out

    def ranking(self) -> list[tuple[Pair, float]]:
        """Link scores for ranking metrics; matched links outrank all others."""
        w = self.weights
        labels = self.labels or {}
        return [(link, w[link] + (1.0 if labels.get(link) == 1 else 0.0)) for link in sorted(w)]


def class_pairs(assignment: ClassAssignment) -> list[tuple[int, list[str], list[str]]]:
    strata = [(k + 1, members) for k, members in enumerate(assignment.strata()) if members]
    return [(k, a, b) for (k, a), (_, b) in zip(strata, strata[1:])]


def compact(assignment: ClassAssignment) -> ClassAssignment:
    """Renumber occupied classes to 1..D, keeping their order."""
    used = sorted(set(assignment.classes.values()))
    remap = {c: i + 1 for i, c in enumerate(used)}
    return ClassAssignment({u: remap[c] for u, c in assignment.classes.items()})


def _follow_candidates(net: EsnNetwork, upper, lower, k) -> ScoredCandidateSet:
    f = net.follows
    w = {(m, s): (1.0 if (m, s) in f or (s, m) in f else 0.0) for m in sorted(upper) for s in sorted(lower)}
    return ScoredCandidateSet(tuple(sorted(upper)), tuple(sorted(lower)), w, None, k)


def run_method(
    net: EsnNetwork,
    method: str = "create",
    *,
    alpha=5.5,
    K: int = 15,
    cmax: int | None = None,
    weights: Sequence = UNIFORM,
    strata: str = "create",
    on_incumbent=None,
) -> InferenceResult:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    config = StratificationConfig(alpha=alpha, cmax=cmax)
    objective = None
    if method == "asd" or (method in ("cn", "jc", "aa") and strata == "asd"):
        assignment = stratify_agony(net, config.cmax, on_incumbent=on_incumbent)
    else:
        sol = solve_program(build_program(net, config), on_incumbent=on_incumbent)
        assignment, objective = sol.assignment, sol.objective
    result = InferenceResult(method, assignment, objective=objective)
    if method == "asd":
        return result

    pairs = class_pairs(assignment)
    if method in ("create", "create-sl"):
        index = MetaPathIndex(net)
        result.candidates = [score_class_pair(net, a, b, weights, index=index, upper_class=k) for k, a, b in pairs]
    elif method in ("create-sm", "create-s"):
        result.candidates = [_follow_candidates(net, a, b, k) for k, a, b in pairs]
    else:
        model = NeighborModel(net)
        result.candidates = [score_pair_with(method, model, a, b, k) for k, a, b in pairs]

    if method == "create-s":
        result.labels = {link: (1 if w > 0 else -1) for link, w in result.weights.items()}
    elif method in ("create", "create-sm"):
        matchings: list[MatchingResult] = [match_classes(cs, K) for cs in result.candidates]
        result.labels = {}
        for mr in matchings:
            result.labels.update(mr.labels)
        result.chart = assemble_chart(compact(assignment), matchings, net.ceo)
    return result
