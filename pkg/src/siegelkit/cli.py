"""Command line front end: ``siegelkit <verb> ...``.

JSON results go to stdout. With ``--out DIR`` the verbs that produce tables
also write CSV files there. Errors print a one-line message and exit with 2;
``suite`` exits with 1 when a non-heuristic check fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from pathlib import Path

from .cm import cm_survey
from .counting import PredicateSpec, count_series
from .errors import MalformedInputError, SiegelError
from .fits import BoundFit, fit_loglog
from .formats import (
    matrix_to_dict,
    parse_chart,
    parse_matrix,
    parse_point,
    point_to_dict,
)
from .geometry import act, in_fundamental_domain
from .harness import (
    CHECKS,
    Scoreboard,
    SuiteConfig,
    export_report,
    run_suite,
    to_jsonable,
)
from .reduction import siegel_reduce
from .volume import (
    METHODS,
    SamplingConfig,
    boundary_volume_rows,
    curve_volume_in_domain,
)

SUITE_OVERRIDES = ("action_tol", "membership_tol", "fit_tolerance", "trials", "cm_bound")


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _ints(s: str) -> list[int]:
    return [int(v) for v in s.split(",") if v.strip()]


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: list, rows: list) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _config(args) -> SuiteConfig:
    base = {}
    if args.config:
        base = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        base["seed"] = args.seed
    if args.out is not None:
        base["out"] = args.out
    for key in SUITE_OVERRIDES:
        v = getattr(args, key, None)
        if v is not None:
            base[key] = v
    return SuiteConfig.from_dict(base)


def cmd_reduce(args, cfg):
    Z = parse_point(args.point)
    res = siegel_reduce(Z)
    _emit({
        "gamma": matrix_to_dict(res.gamma),
        "reduced_point": point_to_dict(res.reduced_point),
        "steps": res.steps,
        "height_in": res.height_in,
        "height_gamma": res.height_gamma,
        "heuristic": res.heuristic,
        "domain": in_fundamental_domain(res.reduced_point).to_dict(),
    })


def cmd_act(args, cfg):
    M = parse_matrix(args.matrix)
    Z = parse_point(args.point)
    _emit(point_to_dict(act(M, Z)))


def cmd_volume(args, cfg):
    chart = parse_chart(args.chart)
    budget = SamplingConfig(seed=int(cfg.seed) % 2**32, method=args.method, target_rel_se=args.target)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        if args.boundary:
            rows = boundary_volume_rows(chart, _floats(args.boundary), budget)
            vols = [e.value for _, e in rows]
            fit = (BoundFit.degenerate_fit(len(rows)) if all(v == 0 for v in vols)
                   else fit_loglog([M for M, _ in rows], vols))
            out = {"fit": fit.to_dict(), "rows": [{"M": M, **e.to_dict()} for M, e in rows]}
            if args.out:
                _write_csv(Path(args.out) / "boundary_volume.csv",
                           ["M", "value", "standard_error", "samples_or_cells", "converged"],
                           [[M, e.value, e.standard_error, e.samples_or_cells, e.converged] for M, e in rows])
        else:
            out = curve_volume_in_domain(chart, budget).to_dict()
    out["warnings"] = sorted({str(w.message) for w in caught})
    _emit(out)


def cmd_count(args, cfg):
    chart = parse_chart(args.chart) if args.chart else None
    spec = PredicateSpec(args.predicate, chart, args.samples)
    if args.series:
        Ts = _ints(args.series)
    elif args.T is not None:
        Ts = [args.T]
    else:
        raise MalformedInputError("count needs --T or --series")
    series = count_series(args.g, Ts, spec)
    _emit(series.to_dict())
    if args.out:
        _write_csv(Path(args.out) / "count.csv", ["T", "count"], [list(r) for r in series.rows])


def cmd_cm(args, cfg):
    s = cm_survey(args.bound)
    d = s.to_dict()
    rows = d.pop("records")
    _emit(d)
    if args.out:
        _write_csv(Path(args.out) / "cm_survey.csv", ["D", "class_number", "max_height"],
                   [[r["D"], r["class_number"], r["max_height"]] for r in rows])


def cmd_suite(args, cfg):
    board = run_suite(cfg, only=args.only.split(",") if args.only else None)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    export_report(board, "json", out / "scoreboard.json")
    export_report(board, "csv", out / "scoreboard.csv")
    for r in board.rows:
        print(f"{r.check_id:32s} {r.status:9s} {r.runtime:7.2f}s", file=sys.stderr)
    sys.stdout.write(board.to_json())
    return 1 if board.failed else 0


def cmd_export(args, cfg):
    board = Scoreboard.from_json(Path(args.board).read_text())
    suffix = {"json": "json", "csv": "csv", "markdown": "md"}[args.format]
    target = Path(args.out) if args.out else Path(f"scoreboard.{suffix}")
    if target.is_dir():
        target = target / f"scoreboard.{suffix}"
    export_report(board, args.format, target)
    print(str(target))


def build_parser() -> argparse.ArgumentParser:
    def globals_parser(default):
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument("--seed", type=int, default=default, help="master seed (overrides config)")
        common.add_argument("--config", default=default, help="suite configuration JSON file")
        common.add_argument("--out", default=default, help="output directory (or file for export)")
        return common

    # global flags work before or after the verb; the verb's copy must not reset them
    common = globals_parser(argparse.SUPPRESS)
    ap = argparse.ArgumentParser(prog="siegelkit", parents=[globals_parser(None)],
                                 description="Siegel upper half-space toolkit")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("reduce", parents=[common], help="reduce a point into the fundamental domain")
    p.add_argument("--point", required=True, help="point literal or file")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("act", parents=[common], help="apply a symplectic matrix to a point")
    p.add_argument("--matrix", required=True, help="matrix literal or file")
    p.add_argument("--point", required=True, help="point literal or file")
    p.set_defaults(func=cmd_act)

    p = sub.add_parser("volume", parents=[common], help="curve volume in the domain or boundary profile")
    p.add_argument("--chart", required=True, help="chart literal or file")
    p.add_argument("--boundary", default=None, help="comma separated M values")
    p.add_argument("--method", default="monte_carlo", choices=METHODS)
    p.add_argument("--target", type=float, default=1e-3, help="target relative standard error")
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("count", parents=[common], help="count Sp(2g, Z) elements of bounded height")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--series", default=None, help="comma separated T values")
    p.add_argument("--predicate", default="all")
    p.add_argument("--chart", default=None, help="chart for translate predicates")
    p.add_argument("--samples", type=int, default=4096, help="chart samples for translate predicates")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("cm-survey", parents=[common], help="class numbers and CM point heights")
    p.add_argument("--bound", type=int, required=True)
    p.set_defaults(func=cmd_cm)

    p = sub.add_parser("suite", parents=[common], help="run the scoreboard suite")
    p.add_argument("--only", default=None, help=f"comma separated subset of {sorted(CHECKS)}")
    for key in SUITE_OVERRIDES:
        typ = int if key in ("trials", "cm_bound") else float
        p.add_argument(f"--{key}", type=typ, default=None)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("export", parents=[common], help="convert a scoreboard JSON file")
    p.add_argument("--board", required=True, help="scoreboard JSON written by 'suite'")
    p.add_argument("--format", required=True, choices=("json", "csv", "markdown"))
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _config(args)
        rc = args.func(args, cfg)
    except (SiegelError, ValueError, KeyError, OSError) as exc:
        print(f"siegelkit {args.verb}: error: {exc}", file=sys.stderr)
        return 2
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
