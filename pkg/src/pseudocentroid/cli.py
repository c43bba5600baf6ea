"""Command-line front end.

Subcommands::

    pseudocentroid run INPUT -k 3 --start adaptive -o report.json
    pseudocentroid run --config report.json -o again.json
    pseudocentroid compare INPUT --starts primary simple --trials 3
    pseudocentroid sweep INPUT --k-range 1:8
    pseudocentroid oracle --trials 500

Exit codes: 0 success, 2 configuration error, 3 input parse error,
4 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
from pathlib import Path

from ._errors import CombinatorialBlowupError, ConfigError, ParseError, PseudoCentroidError
from .distance import DistanceMatrix
from .diversity import DiversityState, mind_trace_report, simple_diversity
from .engine import span_objective
from .intensity import IntensityState
from .io import SCHEMA_VERSION, clusters_payload, dump_json, read_matrix, write_csv
from .pipeline import _CHOICES, START_METHODS, RunConfig, RunOutcome, default_gap_threshold, execute, resolve
from .verify import run_oracle_suite

log = logging.getLogger("pseudocentroid")

EXIT_OK, EXIT_CONFIG, EXIT_PARSE, EXIT_VERIFY = 0, 2, 3, 4

_INT = {"k", "seed_point", "max_restarts", "k_check", "global_min_size", "max_iterations", "max_select", "restarts", "rng_seed"}
_FLOAT = {"p", "T", "T0", "f", "lam", "partial_fraction"}
_BOOL = {"u_mode", "iterate", "allow_absorb", "multi_centroid", "reassign_all", "accelerated"}
_SKIP = {"input", "output", "seeds", "F"}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    """One flag per :class:`RunConfig` field; unset flags stay out of the namespace."""
    g = p.add_argument_group("run configuration")
    for f in dataclasses.fields(RunConfig):
        if f.name in _SKIP:
            continue
        flag = "--" + f.name.replace("_", "-")
        kw = dict(dest=f.name, default=argparse.SUPPRESS)
        if f.name in _BOOL:
            g.add_argument(flag, action=argparse.BooleanOptionalAction, **kw)
        elif f.name in _INT:
            g.add_argument(*(["-k"] if f.name == "k" else []), flag, type=int, **kw)
        elif f.name in _FLOAT:
            g.add_argument(flag, type=float, **kw)
        elif f.name == "start":
            g.add_argument(flag, choices=START_METHODS, **kw)
        else:
            g.add_argument(flag, choices=_CHOICES[f.name], **kw)
    g.add_argument("--seeds", type=int, nargs="+", default=argparse.SUPPRESS, help="seed indices for --start explicit")
    g.add_argument("--F", dest="F", type=float, nargs="+", default=argparse.SUPPRESS, help="regret fraction schedule")
    p.add_argument("--config", help="JSON config, or a report whose embedded config is reused")


def _load_config(args) -> RunConfig:
    base = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ParseError(f"cannot read {args.config}: {exc.strerror or exc}") from None
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.config}: line {exc.lineno}: {exc.msg}") from None
        base = data.get("config", data) if isinstance(data, dict) else None
        if not isinstance(base, dict):
            raise ConfigError(f"{args.config} does not hold a config object")
    cfg = RunConfig.from_dict(base)
    names = {f.name for f in dataclasses.fields(RunConfig)}
    overrides = {k: v for k, v in vars(args).items() if k in names and k not in ("input", "output")}
    cfg = dataclasses.replace(cfg, **overrides)
    if getattr(args, "input", None):
        cfg.input = args.input
    if getattr(args, "output", None):
        cfg.output = args.output
    if not cfg.input:
        raise ConfigError("no input file given")
    return cfg.validate()


def _matrix(cfg: RunConfig) -> DistanceMatrix:
    return read_matrix(cfg.input, cfg.format, cfg.metric)


def _start_section(out: RunOutcome) -> dict:
    st = out.start_state
    sec = {"method": out.config.start}
    if isinstance(st, DiversityState):
        sec.update(seeds=st.seeds, mind_trace=[float(v) for v in st.mind_trace], mind_flags=out.mind_flags)
        if st.k_too_large:
            sec["k_too_large"] = True
    elif isinstance(st, IntensityState):
        sec.update(centroids=[s.centroid for s in st.steps], sizes=st.sizes)
    else:
        sec.update(seeds=out.config.seeds)
    return sec


def build_report(out: RunOutcome, n: int) -> dict:
    """Report dictionary for one run (see :func:`dump_json`)."""
    r = out.report
    cfg = dataclasses.replace(out.config, output=None)
    if out.quality is not None:
        qual = {"value": out.quality.value, "D_o": out.quality.D_o, "mean_o": out.quality.mean_o}
    else:
        qual = {"value": None, "note": "single cluster: the margin-based value needs at least two clusters"}
    return {
        "schema": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "n": n,
        "clusters": clusters_payload(r.final),
        "objective": span_objective(r.final, out.config.objective),
        "objective_trace": r.objective_trace,
        "reassigned_counts": r.reassigned_counts,
        "selected_counts": r.selected_counts,
        "iterations": r.iterations,
        "terminated_by": r.terminated_by,
        "rejected_objective": r.rejected_objective,
        "k_initial": r.k_initial,
        "k_final": r.k_final,
        "quality": qual,
        "start": _start_section(out),
        "restart_objectives": out.restart_objectives,
        "timings": out.timings,
    }


def cmd_run(args) -> int:
    cfg = _load_config(args)
    m = _matrix(cfg)
    cfg = resolve(cfg, m.n)
    out = execute(cfg, m)
    text = dump_json(build_report(out, m.n), cfg.output)
    if cfg.output is None:
        sys.stdout.write(text)
    return EXIT_OK


def _emit_csv(header, rows, path) -> None:
    text = write_csv(header, rows, path)
    if path is None:
        sys.stdout.write(text)


def cmd_compare(args) -> int:
    if len(args.starts) < 2:
        raise ConfigError("compare needs at least two start methods")
    if args.trials < 1:
        raise ConfigError("trials must be >= 1")
    cfg = _load_config(args)
    m = _matrix(cfg)
    header = ["start", "trial", "k", "iterations", "objective", "value", "terminated_by"]
    if not args.no_timing:
        header.append("seconds")
    rows = []
    for s in args.starts:
        scfg = resolve(dataclasses.replace(cfg, start=s), m.n)
        for t in range(args.trials):
            t0 = time.perf_counter()
            out = execute(scfg, m)
            secs = time.perf_counter() - t0
            r = out.report
            row = [s, t, scfg.k, r.iterations, span_objective(r.final, scfg.objective), r.value_metric, r.terminated_by]
            if not args.no_timing:
                row.append(round(secs, 6))
            rows.append(row)
    _emit_csv(header, rows, cfg.output)
    return EXIT_OK


def _k_range(text: str) -> list[int]:
    try:
        if ":" in text:
            a, b = text.split(":")
            return list(range(int(a), int(b) + 1))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad k range {text!r}; use A:B or a comma list") from None


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    ks = _k_range(args.k_range)
    if not ks:
        raise ConfigError("empty k range")
    m = _matrix(cfg)
    if min(ks) < 1 or max(ks) > m.n:
        raise ConfigError(f"k range must lie within [1, {m.n}]")
    base = resolve(dataclasses.replace(cfg, k=max(ks)), m.n)
    trace = simple_diversity(m, max(ks), base.seed_point)
    thr = default_gap_threshold(trace.mind_trace) if args.gap_threshold is None else args.gap_threshold
    flagged = set(mind_trace_report(trace, thr))
    rows = []
    for k in ks:
        kcfg = resolve(dataclasses.replace(base, k=k, k_check=min(base.k_check, k - 1) if base.k_check else None), m.n)
        out = execute(kcfg, m)
        r = out.report
        mind = trace.mind_trace[k - 2] if k >= 2 else None
        rows.append([k, span_objective(r.final, kcfg.objective), r.value_metric, r.iterations, r.terminated_by, mind, int(k in flagged)])
    _emit_csv(["k", "objective", "value", "iterations", "terminated_by", "mind", "mind_flag"], rows, cfg.output)
    return EXIT_OK


def cmd_oracle(args) -> int:
    suites = ["primary", "adaptive"] if args.suite == "both" else [args.suite]
    ok = True
    for s in suites:
        k_max = args.k_max if args.k_max is not None else (4 if s == "primary" else 3)
        summary = run_oracle_suite(s, args.trials, args.n_min, args.n_max, k_max, args.seed)
        print(summary.line(s))
        for line in summary.failures[:10]:
            print("  " + line)
        ok &= summary.ok
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pseudocentroid", description="Pseudo-centroid clustering on distance tables.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="cluster one input and write a JSON report")
    p.add_argument("input", nargs="?")
    p.add_argument("-o", "--output")
    _add_config_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="compare start methods on one input (CSV)")
    p.add_argument("input", nargs="?")
    p.add_argument("-o", "--output")
    p.add_argument("--starts", nargs="+", required=True, choices=START_METHODS)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--no-timing", action="store_true", help="omit the wall-time column")
    _add_config_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="run every k in a range (CSV)")
    p.add_argument("input", nargs="?")
    p.add_argument("-o", "--output")
    p.add_argument("--k-range", required=True, help="A:B (inclusive) or a comma list")
    p.add_argument("--gap-threshold", type=float, default=None, help="flag MinD drops larger than this")
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="randomised equivalence checks for the intensity starts")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--n-min", type=int, default=6)
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--suite", choices=("primary", "adaptive", "both"), default="both")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ConfigError, CombinatorialBlowupError, PseudoCentroidError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
