"""Command-line interface.

Subcommands: ``sample`` (emit sampled objects as CSV), ``verify <theorem-id>``
(run one registered experiment, write a JSON/CSV report), ``list`` (registry),
``shape`` (shape-function estimates as CSV), ``report`` (run many experiments
and aggregate).  Exit codes: 0 all checks passed, 1 a check failed, 2 usage
error.

An optional flat key=value config file supplies experiment parameters; flags
override config values.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .registry import REGISTRY, export_plotdata, list_experiments, report_set_json, run_experiment
from .sampling import (RngStream, sample_brownian_grid, sample_gaussian_seq, sample_gue,
                       sample_pm1_chain, sample_poisson_path, sample_srw_path)
from .shape import estimate_brownian_shape, estimate_poisson_shape
from .spectra import eigenvalues


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _load_config(path) -> dict:
    params = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line is not key=value: {line!r}")
            key, value = line.split("=", 1)
            params[key.strip()] = _parse_value(value.strip())
    return params


def _collect_params(args) -> dict:
    params = {}
    if getattr(args, "config", None):
        params.update(_load_config(args.config))
    for flag in ("samples", "dt", "window"):
        value = getattr(args, flag, None)
        if value is not None:
            params[flag] = value
    for item in getattr(args, "param", None) or []:
        if "=" not in item:
            raise ValueError(f"--param needs key=value, got {item!r}")
        key, value = item.split("=", 1)
        params[key] = _parse_value(value)
    return params


def _cmd_sample(args) -> int:
    stream = RngStream(args.seed, 0)
    out = args.out
    if args.kind == "poisson":
        path = sample_poisson_path(args.rate, (0.0, args.window), stream)
        path.to_csv(out)
    elif args.kind == "brownian":
        path = sample_brownian_grid(args.drift, args.dt, args.steps, stream)
        path.to_csv(out)
    elif args.kind == "srw":
        sample_srw_path(args.p_up, args.steps, stream).to_csv(out)
    elif args.kind == "pm1":
        sample_pm1_chain(args.a, args.b, args.steps, stream).to_csv(out)
    elif args.kind == "gue":
        spec = eigenvalues(sample_gue(args.dim, stream))
        spec.to_csv(out)
    elif args.kind == "gaussian":
        seq = sample_gaussian_seq(args.length, stream)
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "value"])
            for i, v in enumerate(seq):
                w.writerow([i, repr(float(v))])
    print(f"wrote {out}")
    return 0


def _cmd_list(_args) -> int:
    for exp in list_experiments():
        print(f"{exp.theorem_id:26s} {exp.title}")
        print(f"{'':26s} {exp.citation}")
    return 0


def _print_reports(rs) -> None:
    for r in rs.reports:
        status = "PASS" if r.passed else "FAIL"
        pv = "" if r.p_value is None else f" p={r.p_value:.4g}"
        flag = " [truncated]" if r.truncation_flag else ""
        print(f"  [{status}] {r.statistic_name}: value={r.value:.6g} "
              f"threshold={r.threshold:.6g}{pv}{flag}")


def _cmd_verify(args) -> int:
    if args.theorem_id not in REGISTRY:
        print(f"error: unknown theorem id {args.theorem_id!r}; "
              f"see `pathlab list`", file=sys.stderr)
        return 2
    params = _collect_params(args)
    rs = run_experiment(args.theorem_id, params, master_seed=args.seed)
    print(f"{rs.theorem_id}: {'PASS' if rs.passed else 'FAIL'}")
    _print_reports(rs)
    if args.out:
        if args.format == "csv":
            export_plotdata([rs], args.out)
        else:
            with open(args.out, "w") as fh:
                fh.write(report_set_json(rs))
        print(f"wrote {args.out}")
    return 0 if rs.passed else 1


def _cmd_report(args) -> int:
    ids = args.ids.split(",") if args.ids else [e.theorem_id for e in list_experiments()]
    runs = []
    for tid in ids:
        if tid not in REGISTRY:
            print(f"error: unknown theorem id {tid!r}", file=sys.stderr)
            return 2
        rs = run_experiment(tid, None, master_seed=args.seed)
        runs.append(rs)
        print(f"{tid}: {'PASS' if rs.passed else 'FAIL'}")
        if args.verbose:
            _print_reports(rs)
    if args.out:
        if args.format == "csv":
            export_plotdata(runs, args.out)
        else:
            with open(args.out, "w") as fh:
                fh.write(report_set_json(runs))
        print(f"wrote {args.out}")
    return 0 if all(rs.passed for rs in runs) else 1


def _cmd_shape(args) -> int:
    stream = RngStream(args.seed, 0)
    xs = [float(v) for v in args.x.split(",")]
    if args.kind == "poisson":
        est = estimate_poisson_shape(xs, args.n, args.replicates, stream)
    else:
        est = estimate_brownian_shape(xs, args.n, args.dt, args.replicates, stream)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "estimate", "stderr", "reference"])
        for x, e, s, ref in zip(est.x_values, est.estimates, est.stderr, est.reference):
            w.writerow([repr(float(x)), repr(float(e)), repr(float(s)), repr(float(ref))])
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pathlab",
                                description="Distributional checks for queueing "
                                            "path transforms and random-matrix laws")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("sample", help="sample an object and write CSV")
    ps.add_argument("kind", choices=["poisson", "brownian", "srw", "pm1", "gue", "gaussian"])
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out", required=True)
    ps.add_argument("--rate", type=float, default=1.0)
    ps.add_argument("--window", type=float, default=10.0)
    ps.add_argument("--drift", type=float, default=0.0)
    ps.add_argument("--dt", type=float, default=0.01)
    ps.add_argument("--steps", type=int, default=100)
    ps.add_argument("--p-up", dest="p_up", type=float, default=0.6)
    ps.add_argument("--a", type=float, default=0.7)
    ps.add_argument("--b", type=float, default=0.4)
    ps.add_argument("--dim", type=int, default=4)
    ps.add_argument("--length", type=int, default=100)
    ps.set_defaults(func=_cmd_sample)

    pv = sub.add_parser("verify", help="run one registered experiment")
    pv.add_argument("theorem_id")
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--samples", type=int)
    pv.add_argument("--dt", type=float)
    pv.add_argument("--window", type=float)
    pv.add_argument("--param", action="append", metavar="KEY=VALUE")
    pv.add_argument("--config", help="flat key=value parameter file")
    pv.add_argument("--out")
    pv.add_argument("--format", choices=["json", "csv"], default="json")
    pv.set_defaults(func=_cmd_verify)

    pl = sub.add_parser("list", help="list registered experiments")
    pl.set_defaults(func=_cmd_list)

    pr = sub.add_parser("report", help="run experiments and aggregate reports")
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--ids", help="comma-separated theorem ids (default: all)")
    pr.add_argument("--out")
    pr.add_argument("--format", choices=["json", "csv"], default="json")
    pr.add_argument("--verbose", action="store_true")
    pr.set_defaults(func=_cmd_report)

    ph = sub.add_parser("shape", help="shape-function estimates as CSV")
    ph.add_argument("--kind", choices=["poisson", "brownian"], default="poisson")
    ph.add_argument("--x", default="2.0,4.0")
    ph.add_argument("--n", type=int, default=100)
    ph.add_argument("--replicates", type=int, default=32)
    ph.add_argument("--dt", type=float, default=1e-3)
    ph.add_argument("--seed", type=int, default=0)
    ph.add_argument("--out", required=True)
    ph.set_defaults(func=_cmd_shape)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
