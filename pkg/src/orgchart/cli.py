"""Command-line entry point: ``orgchart {synth,infer,evaluate,sweep}``.

Every flag can also come from ``--config FILE``. That file holds one
``key = value`` pair per line, where the key is the long flag name without
leading dashes (``k-threshold = 6``). Lines starting with ``#`` are ignored.
Command-line flags override the file.

Exit codes: 0 success, 2 usage, 3 infeasible model, 4 I/O or unreadable input.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import io
from .errors import (
    DanglingEndpoint,
    Infeasible,
    InvalidComposition,
    MalformedDocument,
    MissingCeo,
    MultipleWriters,
    OrgChartError,
    ResourceBudgetExceeded,
    SelfLoop,
    UnsatisfiableShape,
)
from .pipeline import METHODS, run_method
from .report import flatten, report_for_dir, report_for_result
from .synth import PRESETS, generate, preset

log = logging.getLogger("orgchart")

ALPHA_GRID = "1,2,3,4,5,5.1,5.3,5.5,5.7,5.9,6,7,8,9"
K_GRID = "5,10,15,20,25"
EXIT_USAGE, EXIT_INFEASIBLE, EXIT_IO = 2, 3, 4


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _branching(text: str) -> tuple[int, int]:
    parts = [int(x) for x in text.split(",")]
    if len(parts) == 1:
        parts = [1, parts[0]]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("branching is MIN,MAX")
    return parts[0], parts[1]


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {v}")
    return v


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=METHODS, default="create")
    p.add_argument("--alpha", type=float, default=5.5, help="depth-regulation coefficient")
    p.add_argument("--k-threshold", dest="k_threshold", type=_positive, default=15,
                   help="management threshold K (max direct reports)")
    p.add_argument("--cmax", type=_positive, default=None, help="largest class value (default from alpha)")
    p.add_argument("--weights", type=_floats, default=None, help="7 comma-separated meta path weights")
    p.add_argument("--strata", choices=("create", "asd"), default="create",
                   help="stratification used by the cn/jc/aa baselines")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orgchart", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key = value file mirroring the flags")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic network and its ground-truth chart")
    p.add_argument("--preset", choices=sorted(PRESETS), default="default")
    p.add_argument("--n", dest="n_employees", type=int, default=200)
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--branching", type=_branching, default=(2, 6), help="MIN,MAX direct reports")
    p.add_argument("--p-follow-manager", type=float, default=None)
    p.add_argument("--p-follow-subordinate", type=float, default=None)
    p.add_argument("--p-follow-peer", type=float, default=None)
    p.add_argument("--p-follow-random", type=float, default=None)
    p.add_argument("--groups", dest="n_groups", type=int, default=None)
    p.add_argument("--posts-per-user", type=int, default=None)
    p.add_argument("--reply-rate", type=float, default=None)
    p.add_argument("--like-rate", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory (network.json, chart.json)")

    p = sub.add_parser("infer", help="infer strata, supervision links and chart")
    p.add_argument("--in", dest="inp", required=True, help="network JSON")
    _add_model_flags(p)
    p.add_argument("--seed", type=int, default=0, help="accepted for symmetry; inference is deterministic")
    p.add_argument("--solver-log", default=None, help="write one line per incumbent improvement")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("evaluate", help="score inference outputs against a ground-truth chart")
    p.add_argument("--in", dest="inp", action="append", required=True,
                   help="inference output directory (repeat to compare methods)")
    p.add_argument("--truth", required=True, help="ground-truth chart JSON")
    p.add_argument("--top-k", dest="top_k", type=_positive, default=100, help="k of precision@k")
    p.add_argument("--out", default=None, help="JSON report path (default: stdout)")
    p.add_argument("--csv", default=None, help="also write flat param,method,metric,value rows")

    p = sub.add_parser("sweep", help="evaluate one method over a grid of alpha or K values")
    p.add_argument("--in", dest="inp", required=True, help="network JSON")
    p.add_argument("--truth", required=True, help="ground-truth chart JSON")
    p.add_argument("--param", choices=("alpha", "K"), required=True)
    p.add_argument("--values", type=_floats, default=None,
                   help=f"comma-separated grid (alpha default {ALPHA_GRID}; K default {K_GRID})")
    _add_model_flags(p)
    p.add_argument("--top-k", dest="top_k", type=_positive, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV path")
    return parser


def read_config(path) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.lstrip("-")] = value
    return out


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("-v", "--verbose", action="store_true")
    known, rest = pre.parse_known_args(argv)
    subparsers = parser._subparsers._group_actions[0].choices
    if not known.config or not rest or rest[0] not in subparsers:
        return parser.parse_args(argv)
    command = rest[0]
    sub = subparsers[command]
    by_flag = {}
    for action in sub._actions:
        for opt in action.option_strings:
            by_flag[opt.lstrip("-")] = action
    defaults = {}
    for key, value in read_config(known.config).items():
        action = by_flag.get(key) or by_flag.get(key.replace("_", "-"))
        if action is None or action.dest == "help":
            raise UsageError(f"unknown config key {key!r} for {command}")
        if action.nargs == 0:  # store_true style switches
            defaults[action.dest] = value.lower() in ("1", "true", "yes", "on")
        elif isinstance(action, argparse._AppendAction):
            defaults[action.dest] = [v.strip() for v in value.split(";")]
        else:
            # string defaults still go through the option's type converter
            defaults[action.dest] = value
        action.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def cmd_synth(args) -> int:
    bmin, bmax = args.branching
    config = preset(
        args.preset,
        n_employees=args.n_employees,
        depth=args.depth,
        bmin=bmin,
        bmax=bmax,
        p_follow_manager=args.p_follow_manager,
        p_follow_subordinate=args.p_follow_subordinate,
        p_follow_peer=args.p_follow_peer,
        p_follow_random=args.p_follow_random,
        n_groups=args.n_groups,
        posts_per_user=args.posts_per_user,
        reply_rate=args.reply_rate,
        like_rate=args.like_rate,
        seed=args.seed,
    )
    net, chart = generate(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_network(out / "network.json", net)
    io.write_chart(out / "chart.json", chart)
    log.info("wrote %d users, %d follow links to %s", len(net.users), len(net.follows), out)
    return 0


def _model_kwargs(args) -> dict:
    kw = {"alpha": args.alpha, "K": args.k_threshold, "cmax": args.cmax, "strata": args.strata}
    if args.weights is not None:
        kw["weights"] = args.weights
    return kw


def cmd_infer(args) -> int:
    net = io.read_network(args.inp)
    log_fh = open(args.solver_log, "w") if args.solver_log else None
    try:
        def on_incumbent(obj, classes):
            if log_fh:
                log_fh.write(f"incumbent objective={obj} depth={max(classes.values())}\n")

        try:
            result = run_method(net, args.method, on_incumbent=on_incumbent, **_model_kwargs(args))
        except OrgChartError as exc:
            raise type(exc)(f"{args.method}: {exc}") from exc
    finally:
        if log_fh:
            log_fh.close()
    params = _model_kwargs(args)
    params["input"] = str(args.inp)
    for path in io.write_result(args.out, result, params):
        log.info("wrote %s", path)
    return 0


def cmd_evaluate(args) -> int:
    truth = io.read_chart(args.truth)
    report, rows = {}, []
    for d in args.inp:
        if not Path(d).is_dir():
            raise FileNotFoundError(f"no inference output directory at {d}")
        method, rep = report_for_dir(d, truth, args.top_k)
        if method in report:
            method = f"{method}@{d}"
        report[method] = rep
        rows += flatten(rep, method)
    text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.csv:
        _write_rows(args.csv, rows)
    return 0


def _write_rows(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["param", "method", "metric", "value"])
        for param, method, metric, value in rows:
            w.writerow([param, method, metric, "" if value is None else value])


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def sweep(net, truth, param: str, values, method: str, top_k: int = 100, **model) -> list[tuple]:
    """Evaluate ``method`` once per distinct value; rows are (param, method, metric, value)."""
    seen, grid = set(), []
    for v in values:
        if v not in seen:
            seen.add(v)
            grid.append(v)
    if not grid:
        raise UsageError("sweep needs at least one value")
    rows = []
    for v in grid:
        kw = dict(model)
        if param == "alpha":
            kw["alpha"] = v
        else:
            if not float(v).is_integer() or v < 1:
                raise UsageError(f"K must be a positive integer, got {v}")
            kw["K"] = int(v)
        result = run_method(net, method, **kw)
        rows += flatten(report_for_result(result, truth, top_k), method, f"{param}={_fmt(v)}")
    return rows


def cmd_sweep(args) -> int:
    net = io.read_network(args.inp)
    truth = io.read_chart(args.truth)
    values = args.values if args.values is not None else _floats(ALPHA_GRID if args.param == "alpha" else K_GRID)
    kw = _model_kwargs(args)
    rows = sweep(net, truth, args.param, values, args.method, args.top_k, **kw)
    _write_rows(args.out, rows)
    return 0


COMMANDS = {"synth": cmd_synth, "infer": cmd_infer, "evaluate": cmd_evaluate, "sweep": cmd_sweep}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"orgchart: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"orgchart: error: {exc}", file=sys.stderr)
        return EXIT_IO
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (Infeasible, InvalidComposition, ResourceBudgetExceeded) as exc:
        print(f"orgchart: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, MalformedDocument, DanglingEndpoint, MissingCeo, MultipleWriters, SelfLoop) as exc:
        print(f"orgchart: input error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, UnsatisfiableShape, ValueError, OrgChartError) as exc:
        print(f"orgchart: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
