"""CSV/JSON readers and writers for pipeline outputs."""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .esn import EsnNetwork, OrgChart, parse_chart, parse_network, serialize_chart, serialize_network
from .errors import MalformedDocument
from .pipeline import InferenceResult
from .stratification import ClassAssignment

ASSIGNMENT = "assignment.csv"
SCORES = "scores.csv"
LABELS = "labels.csv"
CHART = "chart.json"
RUN = "run.json"


def read_network(path) -> EsnNetwork:
    return parse_network(Path(path).read_bytes())


def write_network(path, net: EsnNetwork) -> None:
    Path(path).write_bytes(serialize_network(net))


def read_chart(path) -> OrgChart:
    return parse_chart(Path(path).read_bytes())


def write_chart(path, chart: OrgChart) -> None:
    Path(path).write_bytes(serialize_chart(chart))


def write_assignment(path, assignment: ClassAssignment) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["user_id", "class"])
        for u in sorted(assignment.classes):
            w.writerow([u, assignment.classes[u]])


def read_assignment(path) -> ClassAssignment:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return ClassAssignment({r["user_id"]: int(r["class"]) for r in rows})
    except (KeyError, ValueError) as exc:
        raise MalformedDocument(f"{path}: bad assignment row ({exc})") from exc


def write_scores(path, result: InferenceResult) -> None:
    with_phi = any(cs.features for cs in result.candidates)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["manager_id", "subordinate_id"]
                   + ([f"phi{i}" for i in range(1, 8)] if with_phi else []) + ["intimacy"])
        for cs in result.candidates:
            for link in cs.links:
                phi = [repr(float(x)) for x in cs.features[link]] if with_phi else []
                w.writerow([*link, *phi, repr(cs.weights[link])])


def write_labels(path, result: InferenceResult) -> None:
    weights = result.weights
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["manager_id", "subordinate_id", "intimacy", "label"])
        for link in sorted(result.labels):
            w.writerow([*link, repr(weights[link]), result.labels[link]])


def _read_links(path, extra: str) -> dict:
    out = {}
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            try:
                out[(r["manager_id"], r["subordinate_id"])] = r if extra is None else float(r[extra])
            except (KeyError, ValueError) as exc:
                raise MalformedDocument(f"{path}: bad row ({exc})") from exc
    return out


def read_scores(path) -> dict[tuple[str, str], float]:
    return _read_links(path, "intimacy")


def read_labels(path) -> dict[tuple[str, str], tuple[float, int]]:
    rows = _read_links(path, None)
    try:
        return {k: (float(r["intimacy"]), int(r["label"])) for k, r in rows.items()}
    except (KeyError, ValueError) as exc:
        raise MalformedDocument(f"{path}: bad label row ({exc})") from exc


def write_result(outdir, result: InferenceResult, params: dict) -> list[Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / ASSIGNMENT]
    write_assignment(out / ASSIGNMENT, result.assignment)
    if result.candidates:
        write_scores(out / SCORES, result)
        written.append(out / SCORES)
    if result.labels is not None:
        write_labels(out / LABELS, result)
        written.append(out / LABELS)
    if result.chart is not None:
        write_chart(out / CHART, result.chart)
        written.append(out / CHART)
    meta = {"method": result.method, "objective": result.objective, **params}
    (out / RUN).write_text(json.dumps(meta, indent=1, sort_keys=True, default=str) + "\n")
    written.append(out / RUN)
    return written
