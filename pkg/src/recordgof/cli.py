"""Command-line interface: ``recordgof {extract,fit,test,glr,simulate}``.

Standard output carries machine-readable summaries only (JSON or CSV);
progress and warnings go to standard error. Exit status is 0 whenever the
requested computation completed, whether or not a test rejected.
"""

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dist import weibull_sf
from .estimate import EstimationError, SolverRangeError, fit_exponential, fit_weibull, loglik_grid, npmle
from .gof import STATISTICS, GofError, decide, glr_test, gof_statistics
from .mc import PUBLISHED_GAMMAS, PUBLISHED_NS, CriticalTable, TableLookupError, build_table, published_table
from .records import RecordDataError, dump_records, extract_records, load_records, read_complete_sample

log = logging.getLogger("recordgof")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class CliError(Exception):
    """Failure that should end the command with a message and nonzero exit."""


def _sig10(value):
    if isinstance(value, float) and math.isfinite(value):
        return float(f"{value:.10g}")
    if isinstance(value, dict):
        return {k: _sig10(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_sig10(v) for v in value]
    return value


def _emit(payload, fmt, out=None):
    out = out or sys.stdout
    payload = _sig10(payload)
    if fmt == "json":
        out.write(json.dumps(payload, indent=2) + "\n")
        return
    rows = payload if isinstance(payload, list) else [payload]
    if not rows:
        return
    fields = []
    for row in rows:
        fields.extend(f for f in row if f not in fields)
    w = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (json.dumps(v) if isinstance(v, (dict, list)) else v) for k, v in row.items()})


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _range(text):
    try:
        lo, hi = (float(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if not 0 < lo < hi:
        raise argparse.ArgumentTypeError(f"range must satisfy 0 < LO < HI, got {text!r}")
    return lo, hi


def _input_descriptor(path, rs):
    return {"path": str(path), "scheme": rs.scheme, "n": rs.n, "m": rs.m}


def _load(path):
    try:
        return load_records(path)
    except OSError as exc:
        raise CliError(f"cannot read record file {path}: {exc.strerror}") from exc


def cmd_extract(args, report):
    try:
        values = read_complete_sample(args.input)
    except OSError as exc:
        raise CliError(f"cannot read {args.input}: {exc.strerror}") from exc
    rs = extract_records(values)
    if args.records_out:
        dump_records(rs, args.records_out)
    report["input"] = _input_descriptor(args.input, rs)
    report["records"] = rs.to_dict()
    return {"input": str(args.input), "output": args.records_out, "m": rs.m, "n": rs.n}


def cmd_fit(args, report):
    rs = _load(args.records)
    report["input"] = _input_descriptor(args.records, rs)
    models = ["weibull", "exponential"] if args.model == "both" else [args.model]
    fits = []
    for model in models:
        if model == "weibull":
            if rs.m < 2:
                raise CliError(f"Weibull fit needs at least 2 records; {args.records} has m={rs.m}")
            fits.append(fit_weibull(rs).to_dict())
        else:
            fits.append(fit_exponential(rs).to_dict())
    report["fits"].extend(fits)
    if args.emit_loglik_grid:
        a_rng, s_rng, steps = args.emit_loglik_grid
        steps = int(steps)
        if steps < 2:
            raise CliError("--emit-loglik-grid needs at least 2 steps")
        alphas = np.linspace(*_range(a_rng), steps)
        sigmas = np.linspace(*_range(s_rng), steps)
        grid = loglik_grid(rs, alphas, sigmas)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "sigma", "loglik"])
        for i, a in enumerate(alphas):
            for j, s in enumerate(sigmas):
                w.writerow([repr(float(a)), repr(float(s)), repr(float(grid[i, j]))])
        Path(args.grid_file).write_text(buf.getvalue())
        report["artifacts"].append({"kind": "loglik_grid", "path": str(args.grid_file)})
    return fits if len(fits) > 1 else fits[0]


def _resolve_table(source):
    if source == "published":
        return published_table(), "published"
    try:
        return CriticalTable.load(source), str(source)
    except OSError as exc:
        raise CliError(f"cannot read table file {source}: {exc.strerror}") from exc
    except (KeyError, ValueError) as exc:
        raise CliError(f"malformed table file {source}: {exc}") from exc


def _write_steps(path, rs, params):
    step = npmle(rs)
    before = step.before()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "phi", "surv_before", "surv", "fitted_surv"])
    for x, phi, sb, s in zip(step.jumps, step.phi, before, step.surv):
        w.writerow([repr(float(x)), repr(float(phi)), repr(float(sb)), repr(float(s)), repr(weibull_sf(params, x))])
    Path(path).write_text(buf.getvalue())


def cmd_test(args, report):
    rs = _load(args.records)
    report["input"] = _input_descriptor(args.records, rs)
    wanted = [s.strip().lower() for s in args.stats.split(",") if s.strip()]
    for s in wanted:
        if s not in STATISTICS:
            raise CliError(f"unknown statistic {s!r}; choose from {', '.join(STATISTICS)}")
    if not wanted:
        log.warning("no statistics requested; nothing to do")
        return []
    if rs.m < 2:
        raise CliError(f"GOF tests fit a Weibull model and need at least 2 records; m={rs.m}")
    table, provenance = _resolve_table(args.table)
    report["table"] = {"path": provenance, "meta": table.meta}
    fit = fit_weibull(rs)
    report["fits"].append(fit.to_dict())
    stats = gof_statistics(rs, fit).as_dict()
    table_n = args.table_n or rs.n
    results = []
    for s in wanted:
        try:
            res = decide(stats[s], table, s, table_n, args.gamma, interpolate=args.interpolate_n)
        except TableLookupError as exc:
            raise CliError(f"critical table {provenance}: {exc}") from exc
        frag = res.to_dict()
        frag["n"] = rs.n
        frag["table_n"] = table_n
        results.append(frag)
    report["tests"].extend(results)
    if args.emit_steps:
        _write_steps(args.emit_steps, rs, fit.params)
        report["artifacts"].append({"kind": "npmle_steps", "path": str(args.emit_steps)})
    return results


def cmd_glr(args, report):
    rs = _load(args.records)
    report["input"] = _input_descriptor(args.records, rs)
    if rs.m < 2:
        raise CliError(f"GLR test needs at least 2 records; m={rs.m}")
    res = glr_test(rs)
    report["fits"].append(res.weibull_fit.to_dict())
    report["fits"].append(fit_exponential(rs).to_dict())
    frag = res.to_dict(args.gamma)
    report["tests"].append(frag)
    return frag


def cmd_simulate(args, report):
    if args.reps < 1:
        raise CliError("--reps must be >= 1")
    if any(n < 2 for n in args.n):
        raise CliError("every n must be >= 2")
    if any(not 0 < g < 1 for g in args.gammas):
        raise CliError("quantile levels must lie in (0, 1)")
    for target in (args.out, args.csv):
        if target and not Path(target).resolve().parent.is_dir():
            raise CliError(f"output directory for {target} does not exist")

    def progress(n, sims):
        print(
            f"n={n}: {sims.M} replicates, {sims.discarded} redrawn (m<2), {sims.solver_failures} solver redraws",
            file=sys.stderr,
        )

    stamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()) if args.timestamp else None
    table = build_table(args.n, args.gammas, args.reps, args.seed, args.workers, progress=progress, timestamp=stamp)
    try:
        table.save(args.out)
        if args.csv:
            Path(args.csv).write_text(table.to_csv())
    except OSError as exc:
        raise CliError(f"cannot write table: {exc}") from exc
    report["table"] = {"path": str(args.out), "meta": table.meta}
    return {"output": str(args.out), "csv": args.csv, "cells": len(table.rows), "M": args.reps, "seed": args.seed}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json", help="stdout format")
    common.add_argument("--output", metavar="REPORT", help="write a JSON run report here")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="recordgof",
        description="Goodness-of-fit tests for Weibull and exponential models on lower-record data.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common], help="extract lower records from a complete sample")
    p.add_argument("input", help="one positive number per line, or single-column CSV")
    p.add_argument("records_out", nargs="?", help="record file to write (JSON)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("fit", parents=[common], help="maximum-likelihood fit from a record file")
    p.add_argument("records")
    p.add_argument("--model", choices=("weibull", "exponential", "both"), default="weibull")
    p.add_argument(
        "--emit-loglik-grid",
        nargs=3,
        metavar=("ALPHA_LO:HI", "SIGMA_LO:HI", "STEPS"),
        help="write the log-likelihood over an (alpha, sigma) grid as CSV",
    )
    p.add_argument("--grid-file", default="loglik_grid.csv", help="destination for --emit-loglik-grid")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("test", parents=[common], help="GOF tests of the fitted Weibull model")
    p.add_argument("records")
    p.add_argument("--stats", default="ks,cm,ds", help="comma-separated subset of ks,cm,ds")
    p.add_argument("--gamma", type=float, default=0.05, help="significance level")
    p.add_argument("--table", default="published", help="critical-value table file, or 'published'")
    p.add_argument("--table-n", type=int, help="table row to use instead of the sample's n")
    p.add_argument("--interpolate-n", action="store_true", help="interpolate linearly between tabulated n")
    p.add_argument("--emit-steps", metavar="CSV", help="write the NPMLE step function and fitted survival")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("glr", parents=[common], help="likelihood-ratio test of exponentiality")
    p.add_argument("records")
    p.add_argument("--gamma", type=float, default=0.05)
    p.set_defaults(func=cmd_glr)

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo critical-value table")
    p.add_argument("--n", type=_int_list, default=list(PUBLISHED_NS), help="sample sizes, e.g. 5,10,20,50")
    p.add_argument("--gammas", type=_float_list, default=list(PUBLISHED_GAMMAS), help="quantile levels")
    p.add_argument("--reps", type=int, default=100_000, help="replicates per sample size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="table file to write (JSON)")
    p.add_argument("--csv", help="also write the table in wide CSV layout")
    p.add_argument("--timestamp", action="store_true", help="record generation time in the table metadata")
    p.set_defaults(func=cmd_simulate)
    return parser


def _configure_logging(verbose):
    # bound to the current stderr on every run so embedding callers see the messages
    pkg_log = logging.getLogger("recordgof")
    for h in list(pkg_log.handlers):
        pkg_log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    pkg_log.addHandler(handler)
    pkg_log.setLevel(logging.DEBUG if verbose else logging.WARNING)
    pkg_log.propagate = False


def run(argv):
    """Parse and execute ``argv``; returns (exit status, stdout payload, report)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    report = {
        "tool": {"name": "recordgof", "version": __version__},
        "command": args.command,
        "argv": list(argv),
        "format": args.format,
        "input": None,
        "fits": [],
        "tests": [],
        "table": None,
        "artifacts": [],
    }
    started = time.perf_counter()
    try:
        payload = args.func(args, report)
    except (CliError, RecordDataError, EstimationError, SolverRangeError, GofError) as exc:
        print(f"recordgof {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE, None, report
    report["meta"] = {"duration_s": time.perf_counter() - started}
    if args.output:
        Path(args.output).write_text(json.dumps(report, indent=2) + "\n")
    return EXIT_OK, payload, report


def rerun(report):
    """Re-execute the command echoed in a run report; returns the new report."""
    argv = list(report["argv"])
    if "--output" in argv:
        i = argv.index("--output")
        del argv[i : i + 2]
    status, _, new = run(argv)
    if status != EXIT_OK:
        raise CliError(f"re-run of {argv} failed with status {status}")
    return new


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    status, payload, report = run(argv)
    if status == EXIT_OK and payload is not None:
        _emit(payload, report["format"])
    return status


if __name__ == "__main__":
    sys.exit(main())
