"""Achievable rates on the AWGN single relay channel.

Channel::

    Y2 = a*X1 + Z1          (relay)
    Y3 = X1 + b*X2 + Z2     (destination)

The superposition scheme splits the source power between a layer ``U1`` that
the relay decodes and forwards through ``V2`` and a remaining layer that the
relay compresses as ``Yh2 = Y2 + Zq`` with ``Zq ~ N(0, q)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .gaussian import StructuralEquation as Eq
from .gaussian import build_system, capacity, mutual_info
from .optimize import Dim, SearchBox, grid_refine

# label tolerance for reporting which terms attain a minimum
BINDING_ATOL = 1e-9


@dataclass(frozen=True)
class GaussianRelaySpec:
    P1: float = 5.0
    P2: float = 5.0
    N1: float = 1.0
    N2: float = 1.0
    a: float = 1.0
    b: float = 1.0
    d: float | None = None

    def __post_init__(self):
        if self.P1 < 0 or self.P2 < 0:
            raise ValueError("powers must be nonnegative")
        if not (self.N1 > 0 and self.N2 > 0):
            raise ValueError("noise variances must be positive")
        if self.a < 0 or self.b < 0:
            raise ValueError("channel gains must be nonnegative")
        if self.d is not None:
            if not 0 < self.d < 1:
                raise ValueError(f"relay position d must lie in (0, 1), got {self.d}")
            if not (math.isclose(self.a, 1 / self.d, rel_tol=1e-12)
                    and math.isclose(self.b, 1 / (1 - self.d), rel_tol=1e-12)):
                raise ValueError("gains a, b inconsistent with d; use GaussianRelaySpec.at()")

    @classmethod
    def at(cls, d: float, P1: float = 5.0, P2: float = 5.0, N1: float = 1.0, N2: float = 1.0):
        """Relay on the source-destination segment at distance ``d`` from the source."""
        if not 0 < d < 1:
            raise ValueError(f"relay position d must lie in (0, 1), got {d}")
        return cls(P1=P1, P2=P2, N1=N1, N2=N2, a=1 / d, b=1 / (1 - d), d=d)

    def direct_rate(self) -> float:
        return capacity(self.P1 / self.N2)


@dataclass(frozen=True)
class RelaySnncParams:
    alpha: float = 0.0
    beta: float = 0.0
    q: float = 1.0

    def __post_init__(self):
        if not (0 <= self.alpha <= 1 and 0 <= self.beta <= 1):
            raise ValueError("power fractions must lie in [0, 1]")
        if not self.q > 0:
            raise ValueError("compression noise variance must be positive")


@dataclass(frozen=True)
class RatePoint:
    r_prime: float
    r_dprime: float
    total: float
    binding_terms: tuple[str, ...] = ()
    terms: dict[str, float] = field(default_factory=dict, compare=False)


def _binding(values: dict[str, float]) -> tuple[float, tuple[str, ...]]:
    lo = min(values.values())
    return lo, tuple(k for k, v in values.items() if v <= lo + BINDING_ATOL)


def relay_system(spec: GaussianRelaySpec, params: RelaySnncParams):
    al, be = params.alpha, params.beta
    return build_system(
        [
            ("U1", al * spec.P1),
            ("S1", (1 - al) * spec.P1),
            ("V2", be * spec.P2),
            ("S2", (1 - be) * spec.P2),
            ("Z1", spec.N1),
            ("Z2", spec.N2),
            ("Zq", params.q),
        ],
        [
            Eq("X1", ((1, "U1"), (1, "S1"))),
            Eq("X2", ((1, "V2"), (1, "S2"))),
            Eq("Y2", ((spec.a, "X1"), (1, "Z1"))),
            Eq("Y3", ((1, "X1"), (spec.b, "X2"), (1, "Z2"))),
            Eq("Yh2", ((1, "Y2"), (1, "Zq"))),
        ],
    )


def snnc_rate(spec: GaussianRelaySpec, params: RelaySnncParams) -> RatePoint:
    """Superposition noisy network coding rate ``R' + R''`` at fixed parameters."""
    g = relay_system(spec, params)
    prime = {
        "relay-decode": mutual_info(g, ["U1"], ["Y2"], ["X2"]),
        "dest-decode": mutual_info(g, ["U1", "V2"], ["Y3"]),
    }
    compress_cost = mutual_info(g, ["Yh2"], ["Y2"], ["U1", "X1", "X2", "Y3"])
    dprime = {
        "bcast-cut": mutual_info(g, ["X1"], ["Yh2", "Y3"], ["X2", "U1"]),
        "mac-cut": mutual_info(g, ["X1", "X2"], ["Y3"], ["U1", "V2"]) - compress_cost,
    }
    rp, bp = _binding(prime)
    rpp, bpp = _binding(dprime)
    rp, rpp = max(rp, 0.0), max(rpp, 0.0)
    labels = tuple("R':" + t for t in bp) + tuple("R'':" + t for t in bpp)
    return RatePoint(rp, rpp, rp + rpp, labels, {**prime, **dprime, "compress-cost": compress_cost})


def nnc_rate(spec: GaussianRelaySpec, q: float) -> RatePoint:
    """Noisy network coding: the superposition scheme with empty decoded layers."""
    pt = snnc_rate(spec, RelaySnncParams(0.0, 0.0, q))
    # the empty layer's terms are all zero and carry no binding information
    return replace(pt, binding_terms=tuple(b for b in pt.binding_terms if not b.startswith("R':")))


def cf_compression_variance(spec: GaussianRelaySpec) -> float:
    """Smallest compression noise meeting the Wyner-Ziv constraint.

    Returns ``inf`` when the relay-destination link carries nothing.
    """
    if spec.P2 == 0 or spec.b == 0:
        return math.inf
    # var(Y2 | X2, Y3)
    resid = spec.N1 + spec.a ** 2 * spec.P1 * spec.N2 / (spec.P1 + spec.N2)
    return resid * (spec.P1 + spec.N2) / (spec.b ** 2 * spec.P2)


def cf_rate(spec: GaussianRelaySpec) -> RatePoint:
    """Classical compress-forward with Wyner-Ziv binning, closed form."""
    q = cf_compression_variance(spec)
    relay_snr = 0.0 if math.isinf(q) else spec.a ** 2 * spec.P1 / (spec.N1 + q)
    r = capacity(spec.P1 / spec.N2 + relay_snr)
    return RatePoint(0.0, r, r, ("wyner-ziv",), {"q": q})


def _cutset_terms(spec: GaussianRelaySpec, rho: float) -> tuple[float, float]:
    bc = capacity((1 - rho * rho) * spec.P1 * (spec.a ** 2 / spec.N1 + 1 / spec.N2))
    mac = capacity(
        (spec.P1 + spec.b ** 2 * spec.P2 + 2 * rho * spec.b * math.sqrt(spec.P1 * spec.P2)) / spec.N2
    )
    return bc, mac


def cutset_rho(spec: GaussianRelaySpec) -> float:
    """Source-relay correlation maximizing the cut-set bound.

    The broadcast cut decreases and the multiple-access cut increases in
    ``rho``, so the maximizer is ``0`` or the crossing point.
    """
    bc0, mac0 = _cutset_terms(spec, 0.0)
    if bc0 <= mac0:
        return 0.0
    bc1, mac1 = _cutset_terms(spec, 1.0)
    if bc1 >= mac1:
        return 1.0

    def gap(rho):
        bc, mac = _cutset_terms(spec, rho)
        return bc - mac

    return brentq(gap, 0.0, 1.0, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)


def cutset_bound(spec: GaussianRelaySpec) -> float:
    return min(_cutset_terms(spec, cutset_rho(spec)))


def cutset_point(spec: GaussianRelaySpec) -> RatePoint:
    rho = cutset_rho(spec)
    bc, mac = _cutset_terms(spec, rho)
    r, labels = _binding({"bcast-cut": bc, "mac-cut": mac})
    return RatePoint(0.0, r, r, labels, {"rho": rho})


# compression variances beyond ~1e6 matter only as the relay power vanishes
Q_RANGE = (1e-3, 1e9)


def snnc_box() -> SearchBox:
    return SearchBox([Dim("alpha", 0.0, 1.0), Dim("beta", 0.0, 1.0), Dim("q", *Q_RANGE, "log")])


def nnc_box() -> SearchBox:
    return SearchBox([Dim("q", *Q_RANGE, "log")])


def optimize_nnc(spec: GaussianRelaySpec, grid: int = 21, refine_iters: int = 50):
    """Best noisy network coding rate over the compression variance."""
    res = grid_refine(lambda p: nnc_rate(spec, p["q"]).total, nnc_box(), grid, refine_iters)
    return nnc_rate(spec, res.best_params["q"]), res


def optimize_snnc(spec: GaussianRelaySpec, grid: int = 21, refine_iters: int = 50):
    """Best superposition rate over power splits and compression variance.

    The NNC optimum is scanned first as a seed: it is a feasible point of the
    superposition search (zero power fractions), which keeps the optimized
    superposition rate at or above the optimized NNC rate.
    """
    _, base = optimize_nnc(spec, grid, refine_iters)
    seed = {"alpha": 0.0, "beta": 0.0, "q": base.best_params["q"]}

    def objective(p):
        return snnc_rate(spec, RelaySnncParams(p["alpha"], p["beta"], p["q"])).total

    res = grid_refine(objective, snnc_box(), grid, refine_iters, seeds=[seed])
    best = res.best_params
    return snnc_rate(spec, RelaySnncParams(best["alpha"], best["beta"], best["q"])), res
