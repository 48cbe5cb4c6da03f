"""Command line entry point: ``gstrsim {run,sweep,plot,cases}``.

Exit codes: 0 on success, 2 for configuration problems, 3 when a simulation
fails at runtime.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import CASES, PROTOCOLS, ScenarioConfig, SweepSpec, dump_config, parse_config, parse_sweep
from .engine import run_scenario, write_event_log
from .errors import ConfigError, GstrError, ScenarioError
from .metrics import CSV_HEADER, RunRecord, read_records, write_records
from .plot import METRICS, EmptySelectionError, emit_plot

log = logging.getLogger("gstrsim")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
CASE_STUDIES = ("single_connected", "multi_connected", "none_connected")


class SweepError(GstrError):
    """A single sweep point failed; carries the offending configuration."""


def default_parallelism() -> int:
    raw = os.environ.get("GSTR_SIM_THREADS")
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"GSTR_SIM_THREADS must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError("GSTR_SIM_THREADS must be >= 1")
    return value


def _run_point(cfg: ScenarioConfig) -> RunRecord:
    try:
        return run_scenario(cfg, record_events=False).record
    except Exception as exc:  # echo the failing point, whatever went wrong
        raise SweepError(f"run failed ({type(exc).__name__}: {exc}) for config:\n{dump_config(cfg)}") from exc


def run_sweep(spec: SweepSpec, parallelism: int = 1) -> list[RunRecord]:
    """Run every sweep point; the result does not depend on ``parallelism``."""
    points = spec.validate().points()
    if parallelism <= 1 or len(points) == 1:
        records = [_run_point(cfg) for cfg in points]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            records = list(pool.map(_run_point, points))
    return sorted(records, key=lambda r: r.sort_key)


def _split(text: str | None) -> list[str] | None:
    if text is None:
        return None
    return [x for x in text.replace(",", " ").split() if x]


def _overrides(args) -> dict[str, str]:
    out = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    if args.seed is not None:
        out["seed"] = str(args.seed)
    return out


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in _split(text)]
    except ValueError:
        raise ConfigError(f"expected comma separated integers, got {text!r}") from None


def _apply_axes(spec: SweepSpec, args) -> SweepSpec:
    if getattr(args, "densities", None):
        spec.densities = _ints(args.densities)
    if getattr(args, "protocols", None):
        spec.protocols = _split(args.protocols)
    if getattr(args, "cases", None):
        spec.cases = _split(args.cases)
    if getattr(args, "seeds", None) is not None:
        spec.seeds_per_point = args.seeds
    return spec.validate()


def cmd_run(args) -> int:
    cfg = parse_config(args.config, _overrides(args))
    result = run_scenario(cfg, record_events=args.event_log is not None)
    rec = result.record
    if args.out:
        write_records([rec], args.out)
    else:
        print(CSV_HEADER)
        print(",".join(rec.csv_row()))
    if args.event_log:
        write_event_log(result, args.event_log)
    if result.audit_violations:
        for line in result.audit_violations[:10]:
            log.error("custody audit: %s", line)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _apply_axes(parse_sweep(args.config, _overrides(args)), args)
    parallel = args.parallel if args.parallel is not None else default_parallelism()
    records = run_sweep(spec, parallel)
    out = args.out or "sweep.csv"
    write_records(records, out)
    print(f"wrote {len(records)} records to {out}")
    return EXIT_OK


def cmd_plot(args) -> int:
    if args.metric not in METRICS:
        raise ConfigError(f"unknown metric {args.metric!r}; valid metrics: {', '.join(METRICS)}")
    records = read_records(args.csv)
    out = args.out or f"{args.metric}_{args.case}.svg"
    emit_plot(records, args.metric, args.case, out)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_cases(args) -> int:
    """Run the three connectivity case studies and chart every metric."""
    base = parse_config(args.config, _overrides(args))
    spec = SweepSpec(
        densities=_ints(args.densities),
        protocols=_split(args.protocols),
        cases=list(CASE_STUDIES),
        seeds_per_point=args.seeds,
        base=base,
    )
    parallel = args.parallel if args.parallel is not None else default_parallelism()
    records = run_sweep(spec, parallel)
    outdir = Path(args.out or "cases")
    outdir.mkdir(parents=True, exist_ok=True)
    write_records(records, outdir / "cases.csv")
    for case in CASE_STUDIES:
        for metric in METRICS:
            emit_plot(records, metric, case, outdir / f"{case}_{metric}.svg")
    print(f"wrote {len(records)} records and {len(CASE_STUDIES) * len(METRICS)} charts to {outdir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gstrsim", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", type=Path, help="key = value config file")
        sp.add_argument("--seed", type=int, help="override the base seed")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key (use section.key for nested groups)")
        sp.add_argument("--out", help="output path")

    sp = sub.add_parser("run", help="simulate one scenario")
    common(sp)
    sp.add_argument("--event-log", type=Path, help="write the event log here")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="run a density/protocol/case sweep to CSV")
    common(sp)
    sp.add_argument("--parallel", type=int, help="worker processes (default: $GSTR_SIM_THREADS or 1)")
    sp.add_argument("--densities", help="comma separated node counts")
    sp.add_argument("--protocols", help=f"comma separated, from {', '.join(PROTOCOLS)}")
    sp.add_argument("--cases", help=f"comma separated, from {', '.join(CASES)}")
    sp.add_argument("--seeds", type=int, help="seeds per point")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("plot", help="chart a metric from a sweep CSV as SVG")
    sp.add_argument("csv", type=Path)
    sp.add_argument("--metric", default="delivery_ratio", help=f"one of {', '.join(METRICS)}")
    sp.add_argument("--case", default="free")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_plot)

    sp = sub.add_parser("cases", help="reproduce the three connectivity case studies")
    common(sp)
    sp.add_argument("--parallel", type=int)
    sp.add_argument("--densities", default="40,80,120,160,200")
    sp.add_argument("--protocols", default=",".join(PROTOCOLS))
    sp.add_argument("--seeds", type=int, default=10)
    sp.set_defaults(func=cmd_cases)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ScenarioError, EmptySelectionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GstrError, OSError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
