"""Command-line entry point: ``check``, ``sweep`` and ``report``.

Exit codes: 0 when every checked property holds, 1 when one fails, 2 for
usage or configuration errors. Outputs are byte-stable for a fixed config:
floats are written as shortest round-trip decimals and lines end in '\\n'.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from .analysis import (
    SWEEP_COLUMNS, lemma_suite, ordered_map, report_instance, sharpness_sweep, thread_count,
)
from .config import GROUPS, RunConfig, load_config
from .errors import ConfigError, WorkbenchError
from .weights import ExponentSystem

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _json_text(data) -> str:
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


def cmd_check(rc: RunConfig, out: str, only, seeds) -> int:
    if seeds is not None:
        rc = rc.with_overrides(suite={g: min(c, seeds) for g, c in rc.suite.items()})
    groups = only or rc.groups or GROUPS
    results = lemma_suite(rc, groups)
    failed = [r for r in results if r.status != "pass"]
    summary = {
        "status": "fail" if failed else "pass",
        "groups": [g for g in GROUPS if g in groups],
        "checks": [r.to_dict() for r in results],
    }
    _write(os.path.join(out, "check.json"), _json_text(summary))
    for r in results:
        print(f"{r.status.upper():4s} {r.check_name}: value={_fmt(r.value)} bound={_fmt(r.bound)} "
              f"n={r.instances}")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_sweep(rc: RunConfig, out: str) -> int:
    exps = ExponentSystem(rc.sweep_exponents)
    rows, fits = sharpness_sweep(exps, rc.eps_list, rc.sweep_L, rc.slope_tolerance)
    text = _csv_text(SWEEP_COLUMNS, [r.values() for r in rows])
    text += "\n" + _csv_text(
        ("fit", "quantity", "slope", "target", "relation", "max_residual", "status"),
        [("fit", f.quantity, f.slope, f.target, f.relation, f.max_residual,
          "pass" if f.passed else "fail") for f in fits])
    _write(os.path.join(out, "sweep.csv"), text)
    bad = [f for f in fits if not f.passed]
    for f in fits:
        print(f"{'PASS' if f.passed else 'FAIL'} slope {f.quantity}: {f.slope:.4f} "
              f"({f.relation} {f.target:.4f})")
    for f in bad:
        print(f"slope outside tolerance: {f.quantity}", file=sys.stderr)
    return EXIT_FAIL if bad else EXIT_OK


REPORT_COLUMNS = (
    "seed", "kind", "lhs", "rhs", "ratio", "apbar", "ainfty_v", "ainfty_sigma1", "ainfty_sigma2",
    "norm1", "norm2", "norm_sigma1", "norm_sigma2", "t_star", "W", "easy_ratio", "p1", "p2",
    "family_size",
)


def cmd_report(rc: RunConfig, out: str, seeds) -> int:
    count = rc.seeds if seeds is None else seeds
    seed_list = [rc.seed + k for k in range(count)]
    results = ordered_map(lambda s: report_instance(s, rc), seed_list)
    rows = []
    worst = {"strong": 0.0, "weak": 0.0, "testing_C": 0.0, "testing_easy": 0.0}
    for seed, (strong, weak, testing) in zip(seed_list, results):
        meta = strong.metadata
        for rep in (strong, weak):
            f = rep.rhs_factors
            rows.append([seed, rep.kind, rep.lhs, rep.rhs, rep.ratio, f["apbar"], f["ainfty_v"],
                         f["ainfty_sigma1"], f["ainfty_sigma2"], f["norm1"], f["norm2"],
                         f["norm_sigma1"], f["norm_sigma2"], "", "", "", meta["p1"], meta["p2"],
                         meta["family_size"]])
            worst[rep.kind] = max(worst[rep.kind], rep.ratio)
        rhs = testing.t_star + testing.apbar ** (1.0 / ExponentSystem((meta["p1"], meta["p2"])).p)
        f = strong.rhs_factors
        rows.append([seed, "testing", testing.W, rhs, testing.C, testing.apbar, f["ainfty_v"],
                     f["ainfty_sigma1"], f["ainfty_sigma2"], "", "", "", "", testing.t_star,
                     testing.W, testing.easy_ratio, meta["p1"], meta["p2"], meta["family_size"]])
        worst["testing_C"] = max(worst["testing_C"], testing.C)
        worst["testing_easy"] = max(worst["testing_easy"], testing.easy_ratio)
    _write(os.path.join(out, "report.csv"), _csv_text(REPORT_COLUMNS, rows))
    cap = rc.ratio_cap
    checks = {
        "strong_ratio": (worst["strong"], cap),
        "weak_ratio": (worst["weak"], cap),
        "testing_C": (worst["testing_C"], cap),
        "testing_easy_direction": (worst["testing_easy"], 1.0 + 1e-9),
    }
    summary = {
        "instances": count,
        "checks": [{"check_name": k, "status": "pass" if v <= b else "fail", "value": v, "bound": b,
                    "slack": b - v} for k, (v, b) in checks.items()],
    }
    failed = [c for c in summary["checks"] if c["status"] != "pass"]
    summary["status"] = "fail" if failed else "pass"
    _write(os.path.join(out, "report_summary.json"), _json_text(summary))
    for c in summary["checks"]:
        print(f"{c['status'].upper():4s} max {c['check_name']}: {_fmt(c['value'])} (bound {_fmt(c['bound'])})")
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dyadicbench", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("check", "run the lemma suite"), ("sweep", "run the sharpness sweep"),
                        ("report", "inequality reports over the seeded suite")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON config (default: bundled config)")
        p.add_argument("--out", default=".", help="existing output directory")
        p.add_argument("--seeds", type=int, help="number of seeded instances")
        if name == "check":
            p.add_argument("--only", action="append", choices=GROUPS, metavar="GROUP",
                           help=f"check group to run, repeatable ({', '.join(GROUPS)})")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = load_config(args.config)
        if args.seeds is not None and args.seeds < 1:
            raise ConfigError("--seeds must be at least 1")
        if not os.path.isdir(args.out):
            raise ConfigError(f"output directory {args.out!r} does not exist")
        thread_count()
        if args.command == "check":
            return cmd_check(rc, args.out, args.only, args.seeds)
        if args.command == "sweep":
            return cmd_sweep(rc, args.out)
        return cmd_report(rc, args.out, args.seeds)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WorkbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
