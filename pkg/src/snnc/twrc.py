"""Achievable sum rates on the AWGN two-way relay channel.

Nodes 1 and 2 exchange messages through relay 3 placed on the segment
between them::

    Y1 = X2 + g31*X3 + Z1
    Y2 = X1 + g32*X3 + Z2
    Y3 = g13*X1 + g23*X2 + Z3

with ``g13 = d**(-gamma/2)`` and ``g23 = (1-d)**(-gamma/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .gaussian import StructuralEquation as Eq
from .gaussian import build_system, capacity, mutual_info
from .optimize import Dim, SearchBox, grid_refine
from .relay import BINDING_ATOL, Q_RANGE


@dataclass(frozen=True)
class TwrcSpec:
    d: float = 0.5
    P1: float = 10.0
    P2: float = 10.0
    P3: float = 10.0
    N1: float = 1.0
    N2: float = 1.0
    N3: float = 1.0
    gamma: float = 3.0

    def __post_init__(self):
        if min(self.P1, self.P2, self.P3) < 0:
            raise ValueError("powers must be nonnegative")
        if not min(self.N1, self.N2, self.N3) > 0:
            raise ValueError("noise variances must be positive")
        if not 0 < self.d < 1:
            raise ValueError(f"relay position d must lie in (0, 1), got {self.d}")
        if not self.gamma > 0:
            raise ValueError("path-loss exponent must be positive")
        try:
            finite = math.isfinite(self.g13) and math.isfinite(self.g23)
        except OverflowError:
            finite = False
        if not finite:
            raise ValueError(f"relay gain overflows at d={self.d}")

    @property
    def g12(self) -> float:
        return 1.0

    @property
    def g13(self) -> float:
        return self.d ** (-self.gamma / 2)

    @property
    def g23(self) -> float:
        return (1 - self.d) ** (-self.gamma / 2)

    def mirrored(self) -> "TwrcSpec":
        """Same channel with the roles of nodes 1 and 2 exchanged."""
        return TwrcSpec(1 - self.d, self.P2, self.P1, self.P3, self.N2, self.N1, self.N3, self.gamma)


@dataclass(frozen=True)
class TwrcSnncParams:
    alpha1: float = 0.0
    alpha2: float = 0.0
    alpha3: float = 0.0
    q: float = 1.0

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "alpha3"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not self.q > 0:
            raise ValueError("compression noise variance must be positive")

    def mirrored(self) -> "TwrcSnncParams":
        return TwrcSnncParams(self.alpha2, self.alpha1, self.alpha3, self.q)


@dataclass(frozen=True)
class TwrcRatePoint:
    r1_prime: float
    r2_prime: float
    r1_dprime: float
    r2_dprime: float
    r1: float
    r2: float
    sum: float
    binding_terms: tuple[str, ...] = ()
    terms: dict[str, float] = field(default_factory=dict, compare=False)


def twrc_system(spec: TwrcSpec, params: TwrcSnncParams):
    g13, g23 = spec.g13, spec.g23
    a1, a2, a3 = params.alpha1, params.alpha2, params.alpha3
    return build_system(
        [
            ("U1", a1 * spec.P1), ("S1", (1 - a1) * spec.P1),
            ("U2", a2 * spec.P2), ("S2", (1 - a2) * spec.P2),
            ("V3", a3 * spec.P3), ("S3", (1 - a3) * spec.P3),
            ("Z1", spec.N1), ("Z2", spec.N2), ("Z3", spec.N3),
            ("Zq", params.q),
        ],
        [
            Eq("X1", ((1, "U1"), (1, "S1"))),
            Eq("X2", ((1, "U2"), (1, "S2"))),
            Eq("X3", ((1, "V3"), (1, "S3"))),
            Eq("Y1", ((spec.g12, "X2"), (g13, "X3"), (1, "Z1"))),
            Eq("Y2", ((spec.g12, "X1"), (g23, "X3"), (1, "Z2"))),
            Eq("Y3", ((g13, "X1"), (g23, "X2"), (1, "Z3"))),
            Eq("Yh3", ((1, "Y3"), (1, "Zq"))),
        ],
    )


def split_prime_rates(cap1: float, cap2: float, cap_sum: float) -> tuple[float, float]:
    """Max-sum point of ``{r1 <= cap1, r2 <= cap2, r1 + r2 <= cap_sum}``.

    When the sum constraint binds, the point on the dominant face closest to
    an equal split is returned.
    """
    cap1, cap2, cap_sum = max(cap1, 0.0), max(cap2, 0.0), max(cap_sum, 0.0)
    if cap1 + cap2 <= cap_sum:
        return cap1, cap2
    lo, hi = max(0.0, cap_sum - cap2), min(cap1, cap_sum)
    r1 = min(max(0.5 * cap_sum, lo), hi)
    return r1, cap_sum - r1


def _min_label(values: dict[str, float]) -> tuple[float, list[str]]:
    lo = min(values.values())
    return lo, [k for k, v in values.items() if v <= lo + BINDING_ATOL]


def twrc_snnc_rate(spec: TwrcSpec, params: TwrcSnncParams) -> TwrcRatePoint:
    """Evaluate the six-inequality superposition inner bound at fixed parameters."""
    g = twrc_system(spec, params)
    mi = mutual_info
    comp1 = mi(g, ["Y3"], ["Yh3"], ["X1", "X2", "X3", "Y2", "U1", "U2"])
    comp2 = mi(g, ["Y3"], ["Yh3"], ["X1", "X2", "X3", "Y1", "U1", "U2"])
    t = {
        "R1':at-2": mi(g, ["U1"], ["Y2"], ["U2", "V3", "X3"]),
        "R1':with-relay-at-2": mi(g, ["U1", "V3"], ["Y2"], ["U2", "X2"]),
        "R2':at-1": mi(g, ["U2"], ["Y1"], ["U1", "V3", "X3"]),
        "R2':with-relay-at-1": mi(g, ["U2", "V3"], ["Y1"], ["U1", "X1"]),
        "R1'+R2':at-relay": mi(g, ["U1", "U2"], ["Y3"], ["V3", "X3"]),
        "R1'':bcast-cut": mi(g, ["X1"], ["Y2", "Yh3"], ["X2", "X3", "U1", "U2"]),
        "R1'':mac-cut": mi(g, ["X1", "X3"], ["Y2"], ["X2", "U1", "V3"]) - comp1,
        "R2'':bcast-cut": mi(g, ["X2"], ["Y1", "Yh3"], ["X1", "X3", "U1", "U2"]),
        "R2'':mac-cut": mi(g, ["X2", "X3"], ["Y1"], ["X1", "U2", "V3"]) - comp2,
    }
    cap1, lab1 = _min_label({k: t[k] for k in ("R1':at-2", "R1':with-relay-at-2")})
    cap2, lab2 = _min_label({k: t[k] for k in ("R2':at-1", "R2':with-relay-at-1")})
    cap_sum = t["R1'+R2':at-relay"]
    r1p, r2p = split_prime_rates(cap1, cap2, cap_sum)
    labels = []
    if r1p >= max(cap1, 0.0) - BINDING_ATOL:
        labels += lab1
    if r2p >= max(cap2, 0.0) - BINDING_ATOL:
        labels += lab2
    if r1p + r2p >= max(cap_sum, 0.0) - BINDING_ATOL:
        labels.append("R1'+R2':at-relay")
    r1pp, l1 = _min_label({k: t[k] for k in ("R1'':bcast-cut", "R1'':mac-cut")})
    r2pp, l2 = _min_label({k: t[k] for k in ("R2'':bcast-cut", "R2'':mac-cut")})
    r1pp, r2pp = max(r1pp, 0.0), max(r2pp, 0.0)
    r1, r2 = r1p + r1pp, r2p + r2pp
    t["compress-cost-1"], t["compress-cost-2"] = comp1, comp2
    return TwrcRatePoint(r1p, r2p, r1pp, r2pp, r1, r2, r1 + r2, tuple(labels + l1 + l2), t)


def twrc_nnc_rate(spec: TwrcSpec, q: float) -> TwrcRatePoint:
    """Noisy network coding: no decoded layers."""
    pt = twrc_snnc_rate(spec, TwrcSnncParams(0.0, 0.0, 0.0, q))
    return replace(pt, binding_terms=tuple(b for b in pt.binding_terms if "'':" in b))


def twrc_cutset(spec: TwrcSpec) -> tuple[float, float]:
    """Per-direction cut-set bounds for independent Gaussian inputs.

    Direction 1->2 is limited by the broadcast cut ``I(X1; Y2, Y3 | X2, X3)``
    and the multiple-access cut ``I(X1, X3; Y2 | X2)``; symmetrically for 2->1.
    """
    g12, g13, g23 = spec.g12, spec.g13, spec.g23
    r1 = min(
        capacity(spec.P1 * (g12 ** 2 / spec.N2 + g13 ** 2 / spec.N3)),
        capacity((g12 ** 2 * spec.P1 + g23 ** 2 * spec.P3) / spec.N2),
    )
    r2 = min(
        capacity(spec.P2 * (g12 ** 2 / spec.N1 + g23 ** 2 / spec.N3)),
        capacity((g12 ** 2 * spec.P2 + g13 ** 2 * spec.P3) / spec.N1),
    )
    return r1, r2


def twrc_cutset_point(spec: TwrcSpec) -> TwrcRatePoint:
    r1, r2 = twrc_cutset(spec)
    return TwrcRatePoint(0.0, 0.0, r1, r2, r1, r2, r1 + r2, ("cutset",))


def twrc_snnc_box() -> SearchBox:
    return SearchBox([
        Dim("alpha1", 0.0, 1.0),
        Dim("alpha2", 0.0, 1.0),
        Dim("alpha3", 0.0, 1.0),
        Dim("q", *Q_RANGE, "log"),
    ])


def twrc_nnc_box() -> SearchBox:
    return SearchBox([Dim("q", *Q_RANGE, "log")])


def _canonical(spec: TwrcSpec) -> tuple[TwrcSpec, bool]:
    """Left-half equivalent of ``spec`` and whether nodes 1 and 2 were swapped.

    The position is rounded to 1e-12 so that ``d`` and ``1 - d`` map onto the
    same floating-point problem; the optimum in ``q`` is flat, and a one-ulp
    change in the gains would otherwise move the reported rate split.
    """
    left = round(min(spec.d, 1.0 - spec.d), 12)
    if spec.d <= 0.5:
        return replace(spec, d=left), False
    return replace(spec.mirrored(), d=left), True


def optimize_twrc_nnc(spec: TwrcSpec, grid: int = 21, refine_iters: int = 50):
    """Best NNC sum rate over the compression variance."""
    canon, _ = _canonical(spec)
    res = grid_refine(lambda p: twrc_nnc_rate(canon, p["q"]).sum, twrc_nnc_box(), grid, refine_iters)
    return twrc_nnc_rate(spec, res.best_params["q"]), res


def optimize_twrc_snnc(spec: TwrcSpec, grid: int = 9, refine_iters: int = 50):
    """Best superposition sum rate over the three power splits and ``q``.

    Relay positions right of the midpoint are solved on the mirrored channel
    so that exchanging the two sources exchanges the reported rates. The NNC
    optimum seeds the search.
    """
    canon, swapped = _canonical(spec)
    _, base = optimize_twrc_nnc(canon, max(grid, 21), refine_iters)
    seed = {"alpha1": 0.0, "alpha2": 0.0, "alpha3": 0.0, "q": base.best_params["q"]}

    def objective(p):
        return twrc_snnc_rate(canon, TwrcSnncParams(p["alpha1"], p["alpha2"], p["alpha3"], p["q"])).sum

    res = grid_refine(objective, twrc_snnc_box(), grid, refine_iters, seeds=[seed])
    b = res.best_params
    if swapped:
        b["alpha1"], b["alpha2"] = b["alpha2"], b["alpha1"]
    return twrc_snnc_rate(spec, TwrcSnncParams(b["alpha1"], b["alpha2"], b["alpha3"], b["q"])), res
