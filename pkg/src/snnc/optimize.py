"""Deterministic derivative-free maximization over box-constrained parameters.

A full factorial grid pass locates an incumbent, then cyclic coordinate-wise
golden-section searches polish it. Rate objectives are minima of smooth terms,
so the search never relies on derivatives and ties resolve by scan order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

Objective = Callable[[Mapping[str, float]], float]


class ObjectiveError(RuntimeError):
    """The objective raised at a specific parameter point."""

    def __init__(self, params: Mapping[str, float], cause: BaseException):
        self.params = dict(params)
        super().__init__(f"objective failed at {self.params}: {cause!r}")


@dataclass(frozen=True)
class Dim:
    name: str
    lower: float
    upper: float
    scale: str = "linear"

    def __post_init__(self):
        if self.scale not in ("linear", "log"):
            raise ValueError(f"unknown scale {self.scale!r}")
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: lower must be < upper")
        if self.scale == "log" and self.lower <= 0:
            raise ValueError(f"{self.name}: log scale needs a positive lower bound")

    def to_internal(self, x: float) -> float:
        return math.log10(x) if self.scale == "log" else x

    def to_value(self, t: float) -> float:
        if self.scale == "log":
            return 10.0 ** t
        return t

    @property
    def span(self) -> tuple[float, float]:
        return self.to_internal(self.lower), self.to_internal(self.upper)


@dataclass(frozen=True)
class SearchBox:
    dims: tuple[Dim, ...]

    def __init__(self, dims: Sequence[Dim]):
        object.__setattr__(self, "dims", tuple(dims))
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise ValueError("dimension names must be unique")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dims)


@dataclass
class SearchResult:
    best_params: dict[str, float]
    best_value: float
    evaluations: int
    trace: list[tuple[dict[str, float], float]] | None = field(default=None, repr=False)


class _Counter:
    def __init__(self, objective: Objective, box: SearchBox, record: bool):
        self.objective = objective
        self.box = box
        self.count = 0
        self.trace = [] if record else None

    def __call__(self, internal: Sequence[float]) -> tuple[dict[str, float], float]:
        params = {d.name: d.to_value(t) for d, t in zip(self.box.dims, internal)}
        try:
            value = float(self.objective(params))
        except Exception as exc:  # noqa: BLE001 - re-raised with context
            raise ObjectiveError(params, exc) from exc
        if math.isnan(value):
            raise ObjectiveError(params, ValueError("objective returned NaN"))
        self.count += 1
        if self.trace is not None:
            self.trace.append((params, value))
        return params, value


def _golden_max(f, lo: float, hi: float, xtol: float):
    """Golden-section maximization on [lo, hi]; returns (t, params, value) of the best probe."""
    best = None
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    pc, fc = f(c)
    pd, fd = f(d)
    for t, p, v in ((c, pc, fc), (d, pd, fd)):
        if best is None or v > best[2]:
            best = (t, p, v)
    while hi - lo > xtol:
        if fc >= fd:
            hi, d, pd, fd = d, c, pc, fc
            c = hi - INV_PHI * (hi - lo)
            pc, fc = f(c)
            if fc > best[2]:
                best = (c, pc, fc)
        else:
            lo, c, pc, fc = c, d, pd, fd
            d = lo + INV_PHI * (hi - lo)
            pd, fd = f(d)
            if fd > best[2]:
                best = (d, pd, fd)
    return best


def grid_refine(
    objective: Objective,
    box: SearchBox,
    grid_points_per_dim: int = 21,
    refine_iters: int = 50,
    tol: float = 1e-6,
    xtol: float = 1e-10,
    record_trace: bool = False,
    seeds: Sequence[Mapping[str, float]] = (),
) -> SearchResult:
    """Maximize ``objective`` over ``box``.

    The grid is scanned in ``itertools.product`` order and only a strictly
    larger value replaces the incumbent, so the first maximizer found wins.
    Each refinement cycle runs a golden-section search along every coordinate
    within one grid step of the incumbent; cycles stop once a full cycle gains
    less than ``tol``. ``xtol`` is relative to each dimension's internal span.
    ``seeds`` are extra in-box points scanned before the grid.
    """
    if grid_points_per_dim < 2:
        raise ValueError("grid_points_per_dim must be >= 2")
    if refine_iters < 0:
        raise ValueError("refine_iters must be >= 0")
    evaluate = _Counter(objective, box, record_trace)
    spans = [d.span for d in box.dims]
    axes = []
    for lo, hi in spans:
        step = (hi - lo) / (grid_points_per_dim - 1)
        pts = [lo + i * step for i in range(grid_points_per_dim)]
        pts[-1] = hi
        axes.append(pts)

    best_t: list[float] | None = None
    best_p: dict[str, float] = {}
    best_v = -math.inf
    seeded = [tuple(d.to_internal(s[d.name]) for d in box.dims) for s in seeds]
    for point in itertools.chain(seeded, itertools.product(*axes)):
        p, v = evaluate(point)
        if v > best_v:
            best_t, best_p, best_v = list(point), p, v

    steps = [(hi - lo) / (grid_points_per_dim - 1) for lo, hi in spans]
    for _ in range(refine_iters):
        start = best_v
        for i, (lo, hi) in enumerate(spans):
            a = max(lo, best_t[i] - steps[i])
            b = min(hi, best_t[i] + steps[i])

            def line(t, i=i):
                probe = list(best_t)
                probe[i] = t
                return evaluate(probe)

            t, p, v = _golden_max(line, a, b, xtol * (hi - lo))
            if v > best_v:
                best_t[i], best_p, best_v = t, p, v
        if best_v - start < tol:
            break

    return SearchResult(dict(best_p), best_v, evaluate.count, evaluate.trace)
