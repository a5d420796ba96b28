"""Command-line entry point: ``snnc <subcommand> ...``.

Exit status is 0 on success, 2 for configuration or input errors and 3 when
a computation fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .discrete import PmfError
from .dmn import NetworkError, evaluate, load_network, optimize_inputs, theorem2_rate, theorem3_rates
from .gaussian import DegenerateCovarianceError
from .optimize import ObjectiveError
from .plotting import PlotError, emit_plot
from .sweep import (
    RELAY_HEADER, TWRC_HEADER, ConfigError, SweepConfig, atomic_write, compute_rows, render_csv, run_sweep,
)

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 2, 3
SWEEP_KEYS = ("p1", "p2", "p3", "n1", "n2", "n3", "gamma", "d_min", "d_max", "steps",
              "schemes", "grid", "refine_iters", "out", "meta", "jobs")


def _add_channel_flags(p):
    g = p.add_argument_group("channel")
    for name in ("p1", "p2", "p3"):
        g.add_argument(f"--{name}", type=float, help=f"power {name.upper()}")
    for name in ("n1", "n2", "n3"):
        g.add_argument(f"--{name}", type=float, help=f"noise variance {name.upper()}")
    g.add_argument("--gamma", type=float, help="path-loss exponent (two-way mode)")
    o = p.add_argument_group("optimizer")
    o.add_argument("--schemes", help="comma-separated subset of snnc,nnc,cf,cutset")
    o.add_argument("--grid", type=int, help="grid points per dimension")
    o.add_argument("--refine-iters", type=int, help="coordinate refinement cycles (default 50)")
    o.add_argument("--jobs", type=int, help="worker processes for sweep positions")
    p.add_argument("--config", help="JSON file with the same keys; flags take precedence")


def _add_sweep_flags(p):
    _add_channel_flags(p)
    p.add_argument("--d-min", type=float)
    p.add_argument("--d-max", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--out", help="CSV output path (stdout when omitted)")
    p.add_argument("--meta", help="metadata sidecar path (default: OUT with .meta suffix)")
    p.add_argument("--no-plot", action="store_true", help="skip the SVG/PNG figures written next to --out")


def build_parser() -> argparse.ArgumentParser:
    # argparse exits with status 2 on usage errors, matching EXIT_CONFIG
    ap = argparse.ArgumentParser(prog="snnc", description="Achievable-rate sweeps for relay networks.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    _add_sweep_flags(sub.add_parser("relay-sweep", help="single relay channel versus relay position"))
    _add_sweep_flags(sub.add_parser("twrc-sweep", help="two-way relay channel versus relay position"))

    pt = sub.add_parser("point", help="evaluate the schemes at one relay position")
    pt.add_argument("--mode", choices=("relay", "twrc"), default="relay")
    pt.add_argument("--d", type=float, required=True)
    _add_channel_flags(pt)

    dm = sub.add_parser("dmn-eval", help="cut-set evaluation of a discrete network file")
    dm.add_argument("network", help="network description (JSON)")
    dm.add_argument("--out", help="write the report as JSON")
    dm.add_argument("--bound", choices=("auto", "single", "multi"), default="auto",
                    help="single-source or multi-source bound (auto picks by source count)")
    dm.add_argument("--literal-indexing", action="store_true",
                    help="condition the compression term on V_{k-1}..V_N only")
    dm.add_argument("--optimize", action="append", default=[], metavar="VAR",
                    help="grid-search this unconditioned input pmf (repeatable)")
    dm.add_argument("--step", type=float, default=1 / 8, help="simplex grid step for --optimize")

    pl = sub.add_parser("plot", help="render a sweep CSV as SVG (plus PNG)")
    pl.add_argument("csv")
    pl.add_argument("svg")
    pl.add_argument("--no-png", action="store_true")
    return ap


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be an object")
    return {k.replace("-", "_"): v for k, v in doc.items()}


def sweep_config(mode: str, args, keys=SWEEP_KEYS) -> SweepConfig:
    values = _load_config(getattr(args, "config", None))
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            values[k] = v
    return SweepConfig.from_mapping(mode, values)


def _cmd_sweep(mode, args) -> int:
    cfg = sweep_config(mode, args)
    text = run_sweep(cfg)
    if cfg.out:
        if not args.no_plot:
            emit_plot(cfg.out, Path(cfg.out).with_suffix(".svg"))
        print(f"wrote {cfg.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_point(args) -> int:
    values = _load_config(args.config)
    for k in ("p1", "p2", "p3", "n1", "n2", "n3", "gamma", "schemes", "grid", "refine_iters"):
        v = getattr(args, k, None)
        if v is not None:
            values[k] = v
    values.update(d_min=args.d, d_max=args.d, steps=1)
    values.pop("out", None)
    values.pop("meta", None)
    cfg = SweepConfig.from_mapping(args.mode, values)
    header = RELAY_HEADER if args.mode == "relay" else TWRC_HEADER
    sys.stdout.write(render_csv(header, compute_rows(cfg)))
    return EXIT_OK


def format_report(report, title: str = "") -> str:
    lines = []
    if title:
        lines.append(title)
    lines.append(f"bound: {'single-source' if report.theorem == 2 else 'multi-source'}"
                 + ("  (literal V indexing)" if report.literal_indexing else ""))
    if report.decode_terms:
        lines.append("decode terms R' per node:")
        for k, v in report.decode_terms.items():
            lines.append(f"  node {k:<3d} {v:12.6f}")
    lines.append(f"{'dest':>4}  {'cut':<16}{'R_prime':>12}{'R_dprime':>12}{'flow':>12}{'cost':>12}")
    for c in report.cuts:
        cut = "{" + ",".join(map(str, c.cut)) + "}"
        lines.append(f"{c.destination:>4}  {cut:<16}{c.r_prime:12.6f}{c.r_dprime:12.6f}"
                     f"{c.flow:12.6f}{c.compress_cost:12.6f}")
    lines.append(f"R' = {report.r_prime:.6f}  binding: {', '.join(report.binding_prime)}")
    bind = ", ".join(f"dest {k} cut {{{','.join(map(str, s))}}}" for k, s in report.binding_dprime)
    lines.append(f"R'' = {report.r_dprime:.6f}  binding: {bind}")
    lines.append(f"total = {report.total:.6f} bits/channel use")
    return "\n".join(lines) + "\n"


def run_dmn_eval(path, out=None, bound="auto", literal_indexing=False, optimize=(), step=1 / 8) -> str:
    spec = load_network(path)
    theorem = {"auto": None, "single": 2, "multi": 3}[bound]
    extra = {}
    if optimize:
        report, tables = optimize_inputs(spec, optimize, step, theorem, literal_indexing)
        extra["optimized_inputs"] = {k: list(v) for k, v in tables.items()}
    elif theorem == 2:
        report = theorem2_rate(spec, literal_indexing)
    elif theorem == 3:
        report = theorem3_rates(spec, literal_indexing)
    else:
        report = evaluate(spec, literal_indexing)
    text = format_report(report, spec.name)
    for k, v in extra.get("optimized_inputs", {}).items():
        text += f"best p({k}) = [{', '.join(f'{x:g}' for x in v)}]\n"
    if out:
        doc = {"network": spec.name, **report.to_dict(), **extra}
        atomic_write(out, json.dumps(doc, indent=2) + "\n")
    return text


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd in ("relay-sweep", "twrc-sweep"):
            return _cmd_sweep(args.cmd.split("-")[0], args)
        if args.cmd == "point":
            return _cmd_point(args)
        if args.cmd == "dmn-eval":
            sys.stdout.write(run_dmn_eval(args.network, args.out, args.bound, args.literal_indexing,
                                          args.optimize, args.step))
            return EXIT_OK
        emit_plot(args.csv, args.svg, png=not args.no_png)
        return EXIT_OK
    except (ConfigError, NetworkError, PlotError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ObjectiveError, DegenerateCovarianceError, PmfError, ArithmeticError, ValueError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
