"""Relay-position sweeps written as CSV with a JSON metadata sidecar."""

from __future__ import annotations

import csv
import io
import json
import os
import platform
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .relay import GaussianRelaySpec, cf_rate, cutset_point, optimize_nnc, optimize_snnc
from .twrc import TwrcSpec, optimize_twrc_nnc, optimize_twrc_snnc, twrc_cutset_point

RELAY_SCHEMES = ("snnc", "nnc", "cf", "cutset")
TWRC_SCHEMES = ("snnc", "nnc", "cutset")
RELAY_HEADER = ("d", "scheme", "rate", "binding")
TWRC_HEADER = ("d", "scheme", "r1", "r2", "sum", "binding")

# values left open by the figures; recorded in every sidecar
MODE_DEFAULTS = {
    "relay": {"p1": 5.0, "p2": 5.0, "n1": 1.0, "n2": 1.0, "d_min": 0.05, "d_max": 0.95, "steps": 50},
    "twrc": {"p1": 10.0, "p2": 10.0, "p3": 10.0, "n1": 1.0, "n2": 1.0, "n3": 1.0, "gamma": 3.0,
             "d_min": 0.1, "d_max": 0.9, "steps": 25},
}
UNSTATED = {"relay": ["n1", "n2"], "twrc": ["n1", "n2", "n3", "gamma"]}
DEFAULT_GRID = {"relay": {"snnc": 21, "nnc": 21}, "twrc": {"snnc": 9, "nnc": 21}}


class ConfigError(ValueError):
    """Invalid sweep configuration; the message starts with the field name."""


@dataclass
class SweepConfig:
    mode: str = "relay"
    p1: float | None = None
    p2: float | None = None
    p3: float | None = None
    n1: float | None = None
    n2: float | None = None
    n3: float | None = None
    gamma: float | None = None
    d_min: float | None = None
    d_max: float | None = None
    steps: int | None = None
    schemes: tuple[str, ...] | None = None
    grid: int | None = None
    refine_iters: int = 50
    out: str | None = None
    meta: str | None = None
    jobs: int = 1
    user_set: tuple[str, ...] = field(default=(), repr=False)

    @classmethod
    def from_mapping(cls, mode: str, values: dict) -> "SweepConfig":
        names = {f.name for f in fields(cls)} - {"mode", "user_set"}
        unknown = sorted(set(values) - names)
        if unknown:
            raise ConfigError(f"{unknown[0]}: unknown configuration key")
        given = {k: v for k, v in values.items() if v is not None}
        if isinstance(given.get("schemes"), str):
            given["schemes"] = tuple(s.strip() for s in given["schemes"].split(",") if s.strip())
        elif "schemes" in given:
            given["schemes"] = tuple(given["schemes"])
        for k, v in list(given.items()):
            kind = {"steps": int, "grid": int, "refine_iters": int, "jobs": int,
                    "out": str, "meta": str, "schemes": tuple}.get(k, float)
            if kind is tuple:
                continue
            if isinstance(v, bool) or (kind is int and isinstance(v, float) and not v.is_integer()):
                raise ConfigError(f"{k}: expected {kind.__name__}, got {v!r}")
            try:
                given[k] = kind(v)
            except (TypeError, ValueError):
                raise ConfigError(f"{k}: expected {kind.__name__}, got {v!r}") from None
        cfg = cls(mode=mode, **given, user_set=tuple(sorted(given)))
        return cfg.resolved()

    def resolved(self) -> "SweepConfig":
        if self.mode not in MODE_DEFAULTS:
            raise ConfigError(f"mode: unknown mode {self.mode!r}")
        for k, v in MODE_DEFAULTS[self.mode].items():
            if getattr(self, k) is None:
                setattr(self, k, v)
        allowed = RELAY_SCHEMES if self.mode == "relay" else TWRC_SCHEMES
        if self.schemes is None:
            self.schemes = allowed
        self.validate()
        return self

    def validate(self):
        for k in ("p1", "p2", "p3"):
            v = getattr(self, k)
            if v is not None and not (np.isfinite(v) and v >= 0):
                raise ConfigError(f"{k}: power must be a finite nonnegative number, got {v}")
        for k in ("n1", "n2", "n3", "gamma"):
            v = getattr(self, k)
            if v is not None and not (np.isfinite(v) and v > 0):
                raise ConfigError(f"{k}: must be positive, got {v}")
        if not 0 < self.d_min < 1:
            raise ConfigError(f"d_min: must lie in (0, 1), got {self.d_min}")
        if not 0 < self.d_max < 1:
            raise ConfigError(f"d_max: must lie in (0, 1), got {self.d_max}")
        if not isinstance(self.steps, int) or self.steps < 1:
            raise ConfigError(f"steps: must be a positive integer, got {self.steps}")
        if self.steps > 1 and not self.d_min < self.d_max:
            raise ConfigError(f"d_min: must be below d_max ({self.d_min} >= {self.d_max})")
        allowed = RELAY_SCHEMES if self.mode == "relay" else TWRC_SCHEMES
        if not self.schemes:
            raise ConfigError("schemes: at least one scheme is required")
        for s in self.schemes:
            if s not in allowed:
                raise ConfigError(f"schemes: {s!r} not available in {self.mode} mode (choose from {','.join(allowed)})")
        if len(set(self.schemes)) != len(self.schemes):
            raise ConfigError("schemes: duplicate entry")
        if self.grid is not None and (not isinstance(self.grid, int) or self.grid < 2):
            raise ConfigError(f"grid: must be an integer >= 2, got {self.grid}")
        if not isinstance(self.refine_iters, int) or self.refine_iters < 1:
            raise ConfigError(f"refine_iters: must be a positive integer, got {self.refine_iters}")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigError(f"jobs: must be a positive integer, got {self.jobs}")

    def grid_for(self, scheme: str) -> int:
        return self.grid if self.grid is not None else DEFAULT_GRID[self.mode][scheme]

    def positions(self) -> list[float]:
        if self.steps == 1:
            return [float(self.d_min)]
        return [float(x) for x in np.linspace(self.d_min, self.d_max, self.steps)]

    def relay_spec(self, d: float) -> GaussianRelaySpec:
        return GaussianRelaySpec.at(d, P1=self.p1, P2=self.p2, N1=self.n1, N2=self.n2)

    def twrc_spec(self, d: float) -> TwrcSpec:
        return TwrcSpec(d, self.p1, self.p2, self.p3, self.n1, self.n2, self.n3, self.gamma)


def fmt(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def relay_rows(spec: GaussianRelaySpec, d: float, schemes, grids: dict, refine_iters: int) -> list[list[str]]:
    rows = []
    for s in schemes:
        if s == "snnc":
            pt, _ = optimize_snnc(spec, grids["snnc"], refine_iters)
        elif s == "nnc":
            pt, _ = optimize_nnc(spec, grids["nnc"], refine_iters)
        elif s == "cf":
            pt = cf_rate(spec)
        else:
            pt = cutset_point(spec)
        rows.append([fmt(d), s, fmt(pt.total), ";".join(pt.binding_terms)])
    return rows


def twrc_rows(spec: TwrcSpec, d: float, schemes, grids: dict, refine_iters: int) -> list[list[str]]:
    rows = []
    for s in schemes:
        if s == "snnc":
            pt, _ = optimize_twrc_snnc(spec, grids["snnc"], refine_iters)
        elif s == "nnc":
            pt, _ = optimize_twrc_nnc(spec, grids["nnc"], refine_iters)
        else:
            pt = twrc_cutset_point(spec)
        rows.append([fmt(d), s, fmt(pt.r1), fmt(pt.r2), fmt(pt.sum), ";".join(pt.binding_terms)])
    return rows


def _point_job(args):
    cfg, d = args
    grids = {s: cfg.grid_for(s) for s in ("snnc", "nnc")}
    if cfg.mode == "relay":
        return relay_rows(cfg.relay_spec(d), d, cfg.schemes, grids, cfg.refine_iters)
    return twrc_rows(cfg.twrc_spec(d), d, cfg.schemes, grids, cfg.refine_iters)


def compute_rows(cfg: SweepConfig) -> list[list[str]]:
    """Rows in d-order; with ``jobs > 1`` positions are computed in worker processes."""
    jobs = [(cfg, d) for d in cfg.positions()]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(_point_job, jobs))
    else:
        chunks = [_point_job(j) for j in jobs]
    return [row for chunk in chunks for row in chunk]


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def atomic_write(path, text: str):
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def meta_path(out) -> Path:
    return Path(out).with_suffix(".meta")


def metadata(cfg: SweepConfig) -> dict:
    consts = {k: getattr(cfg, k) for k in MODE_DEFAULTS[cfg.mode] if k not in ("d_min", "d_max", "steps")}
    return {
        "mode": cfg.mode,
        "constants": consts,
        "d_min": cfg.d_min,
        "d_max": cfg.d_max,
        "steps": cfg.steps,
        "positions": [fmt(d) for d in cfg.positions()],
        "schemes": list(cfg.schemes),
        "optimizer": {
            "grid_points_per_dim": {s: cfg.grid_for(s) for s in ("snnc", "nnc")},
            "refine_iters": cfg.refine_iters,
            "stop_tol_bits": 1e-6,
        },
        "unstated_defaults": {k: getattr(cfg, k) for k in UNSTATED[cfg.mode] if k not in cfg.user_set},
        "float_format": "%.6f",
        "versions": {
            "snnc": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }


def run_sweep(cfg: SweepConfig) -> str:
    """Compute the sweep and write CSV plus sidecar when ``cfg.out`` is set.

    Returns the CSV text.
    """
    header = RELAY_HEADER if cfg.mode == "relay" else TWRC_HEADER
    text = render_csv(header, compute_rows(cfg))
    if cfg.out:
        atomic_write(cfg.out, text)
        meta = cfg.meta or meta_path(cfg.out)
        atomic_write(meta, json.dumps(metadata(cfg), indent=2, sort_keys=True) + "\n")
    return text


def run_relay_sweep(cfg: SweepConfig) -> str:
    if cfg.mode != "relay":
        raise ConfigError(f"mode: expected relay, got {cfg.mode}")
    return run_sweep(cfg)


def run_twrc_sweep(cfg: SweepConfig) -> str:
    if cfg.mode != "twrc":
        raise ConfigError(f"mode: expected twrc, got {cfg.mode}")
    return run_sweep(cfg)


def read_rows(path) -> tuple[list[str], list[dict]]:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None:
            return [], []
        return header, [dict(zip(header, row)) for row in r if row]
