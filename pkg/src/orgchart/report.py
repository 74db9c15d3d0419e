"""Metric reports for one inference run against a ground-truth chart."""
from __future__ import annotations

import json
from pathlib import Path

from . import io
from .errors import DegenerateLabels
from .esn import OrgChart
from .evaluation import (
    LinkMetrics,
    label_metrics,
    per_class_pr,
    precision_at_k,
    rank_metrics,
    strat_metrics,
)
from .pipeline import InferenceResult
from .stratification import ClassAssignment


def build_report(
    assignment: ClassAssignment,
    truth: OrgChart,
    *,
    weights: dict | None = None,
    labels: dict | None = None,
    k: int = 100,
) -> dict:
    truth_classes = ClassAssignment(truth.levels())
    sm = strat_metrics(assignment, truth_classes)
    depth = max(assignment.depth, truth_classes.depth)
    per_class = {}
    for c in range(1, depth + 1):
        p, r = per_class_pr(assignment, truth_classes, c)
        per_class[str(c)] = {"precision": p, "recall": r}
    out = {"stratification": sm.as_dict(), "per_class": per_class}

    if weights:
        positives = truth.links
        lab = labels or {}
        scored = [(link, w + (1.0 if lab.get(link) == 1 else 0.0)) for link, w in sorted(weights.items())]
        pool_pos = positives & {link for link, _ in scored}
        try:
            auc, pk = rank_metrics(scored, pool_pos, k)
        except DegenerateLabels:
            auc, pk = None, precision_at_k(scored, pool_pos, k)
        lm = LinkMetrics(auc=auc, precision_at_k=pk)
        if labels is not None:
            p, r, f = label_metrics(labels.items(), positives)
            lm = LinkMetrics(auc, pk, p, r, f)
        out["links"] = {"auc": auc, **lm.as_dict()}
    return out


def report_for_result(result: InferenceResult, truth: OrgChart, k: int = 100) -> dict:
    return build_report(result.assignment, truth, weights=result.weights or None, labels=result.labels, k=k)


def report_for_dir(outdir, truth: OrgChart, k: int = 100) -> tuple[str, dict]:
    out = Path(outdir)
    meta = json.loads((out / io.RUN).read_text()) if (out / io.RUN).exists() else {}
    method = meta.get("method", out.name)
    assignment = io.read_assignment(out / io.ASSIGNMENT)
    weights = io.read_scores(out / io.SCORES) if (out / io.SCORES).exists() else None
    labels = None
    if (out / io.LABELS).exists():
        labels = {link: lab for link, (_, lab) in io.read_labels(out / io.LABELS).items()}
    return method, build_report(assignment, truth, weights=weights, labels=labels, k=k)


def flatten(report: dict, method: str, param: str = "") -> list[tuple[str, str, str, object]]:
    rows = []
    for family in ("stratification", "links"):
        for metric, value in report.get(family, {}).items():
            rows.append((param, method, metric, value))
    for c, pr in report.get("per_class", {}).items():
        for metric, value in pr.items():
            rows.append((param, method, f"class{c}_{metric}", value))
    return rows
