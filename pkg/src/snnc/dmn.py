"""Cut-set evaluation of superposition noisy network coding on small discrete networks.

Each node ``k`` owns up to four variables named ``V{k}`` (decoded layer),
``X{k}`` (channel input), ``Y{k}`` (channel output) and ``Yh{k}`` (compressed
observation). Variables a network leaves undeclared are constants. The order
in which nodes are listed is the decode-forward route order.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .discrete import JointPmf, PmfError, PmfFactor, compose, mutual_info_d

MAX_NODES = 10
ROLES = ("V", "X", "Y", "Yh")


class NetworkError(ValueError):
    """Invalid network description; the message names the offending field."""


def var(role: str, node: int) -> str:
    return f"{role}{node}"


@dataclass(frozen=True)
class DiscreteNetworkSpec:
    nodes: tuple[int, ...]
    sources: tuple[int, ...]
    destinations: tuple[int, ...]
    factors: tuple[PmfFactor, ...]
    name: str = ""

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if len(set(nodes)) != len(nodes) or not nodes:
            raise NetworkError("nodes: must be a nonempty list of distinct ids")
        if len(nodes) > MAX_NODES:
            raise NetworkError(f"nodes: {len(nodes)} nodes exceeds limit {MAX_NODES}")
        for key in ("sources", "destinations"):
            ids = tuple(getattr(self, key))
            if not ids or not set(ids) <= set(nodes):
                raise NetworkError(f"{key}: must be a nonempty subset of nodes")
            object.__setattr__(self, key, ids)
        object.__setattr__(self, "nodes", nodes)
        targets = {t for f in self.factors for t in f.targets}
        for s in self.sources:
            if var("Yh", s) in targets:
                raise NetworkError(f"factors: source node {s} may not act as a relay (has Yh{s})")
        # undeclared node variables are constants
        extra = []
        for k in nodes:
            for role in ROLES:
                if var(role, k) not in targets:
                    extra.append(PmfFactor([var(role, k)], [], [1.0], label=f"const {var(role, k)}"))
        object.__setattr__(self, "factors", tuple(self.factors) + tuple(extra))

    @cached_property
    def joint(self) -> JointPmf:
        return compose(self.factors)

    def pos(self, k: int) -> int:
        return self.nodes.index(k)

    def vs(self, ks) -> list[str]:
        return [var("V", k) for k in ks]

    def xs(self, ks) -> list[str]:
        return [var("X", k) for k in ks]

    def ys(self, ks) -> list[str]:
        return [var("Y", k) for k in ks]

    def yhs(self, ks) -> list[str]:
        return [var("Yh", k) for k in ks]


@dataclass(frozen=True)
class CutTerm:
    destination: int
    cut: tuple[int, ...]
    r_prime: float
    r_dprime: float
    flow: float
    compress_cost: float


@dataclass
class CutReport:
    theorem: int
    cuts: list[CutTerm]
    r_prime: float
    r_dprime: float
    binding_prime: list[str]
    binding_dprime: list[tuple[int, tuple[int, ...]]]
    decode_terms: dict[int, float] = field(default_factory=dict)
    literal_indexing: bool = False

    @property
    def total(self) -> float:
        return self.r_prime + self.r_dprime

    def cuts_for(self, destination: int) -> list[CutTerm]:
        return [c for c in self.cuts if c.destination == destination]

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "literal_indexing": self.literal_indexing,
            "r_prime": self.r_prime,
            "r_dprime": self.r_dprime,
            "total": self.total,
            "binding_prime": self.binding_prime,
            "binding_dprime": [{"destination": k, "cut": list(s)} for k, s in self.binding_dprime],
            "decode_terms": {str(k): v for k, v in self.decode_terms.items()},
            "cuts": [
                {
                    "destination": c.destination,
                    "cut": list(c.cut),
                    "r_prime": c.r_prime,
                    "r_dprime": c.r_dprime,
                    "flow": c.flow,
                    "compress_cost": c.compress_cost,
                }
                for c in self.cuts
            ],
        }


def enumerate_cuts(nodes: Sequence[int], must: Sequence[int], exclude: Sequence[int],
                   require_any: Sequence[int] = ()) -> list[tuple[int, ...]]:
    """Node subsets containing ``must``, avoiding ``exclude``, in bitmask order.

    Bit ``i`` of the mask selects the ``i``-th free node in route order.
    ``require_any`` additionally demands at least one of those nodes.
    """
    free = [k for k in nodes if k not in must and k not in exclude]
    out = []
    for mask in range(1 << len(free)):
        chosen = set(must) | {k for i, k in enumerate(free) if mask >> i & 1}
        if require_any and not chosen & set(require_any):
            continue
        out.append(tuple(k for k in nodes if k in chosen))
    return out


def _v_cond(spec: DiscreteNetworkSpec, k: int, literal: bool) -> list[str]:
    if not literal:
        return spec.vs(spec.nodes)
    start = max(spec.pos(k) - 1, 0)
    return spec.vs(spec.nodes[start:])


def _dprime_terms(spec: DiscreteNetworkSpec, k: int, cut: tuple[int, ...], literal: bool):
    p = spec.joint
    comp = [j for j in spec.nodes if j not in cut]
    flow = mutual_info_d(
        p, spec.xs(cut), spec.yhs(comp) + [var("Y", k)], spec.xs(comp) + spec.vs(spec.nodes)
    )
    v_cond = [v for v in _v_cond(spec, k, literal)]
    cost = mutual_info_d(
        p, spec.yhs(cut), spec.ys(cut), spec.xs(spec.nodes) + spec.yhs(comp) + [var("Y", k)] + v_cond
    )
    return flow, cost


def _binding_cuts(cuts: list[CutTerm], value: float, attr: str):
    return [(c.destination, c.cut) for c in cuts if getattr(c, attr) <= value + 1e-12]


def theorem2_rate(spec: DiscreteNetworkSpec, literal_indexing: bool = False) -> CutReport:
    """Single-source multicast rate ``R' + R''``.

    ``R'`` is the minimum over route nodes ``k`` (up to the last destination)
    of ``I(V^{k-1}; Y_k | X_k, V_k^N)``. ``R''`` is the minimum over
    destinations and cuts containing the source but not the destination.
    """
    if len(spec.sources) != 1:
        raise NetworkError("sources: the single-source evaluation needs exactly one source")
    src = spec.sources[0]
    if spec.nodes[0] != src:
        raise NetworkError("nodes: the source must come first in route order")
    p = spec.joint
    last = max(spec.pos(k) for k in spec.destinations)
    decode = {}
    for i in range(1, last + 1):
        k = spec.nodes[i]
        decode[k] = mutual_info_d(
            p, spec.vs(spec.nodes[:i]), [var("Y", k)], [var("X", k)] + spec.vs(spec.nodes[i:])
        )
    cuts = []
    for k in spec.destinations:
        for cut in enumerate_cuts(spec.nodes, [src], [k]):
            flow, cost = _dprime_terms(spec, k, cut, literal_indexing)
            cuts.append(CutTerm(k, cut, decode[k], flow - cost, flow, cost))
    r_prime = max(min(decode.values()), 0.0)
    r_dprime = max(min(c.r_dprime for c in cuts), 0.0)
    lo = min(decode.values())
    return CutReport(
        theorem=2,
        cuts=cuts,
        r_prime=r_prime,
        r_dprime=r_dprime,
        binding_prime=[f"node {k}" for k, v in decode.items() if v <= lo + 1e-12],
        binding_dprime=_binding_cuts(cuts, min(c.r_dprime for c in cuts), "r_dprime"),
        decode_terms=decode,
        literal_indexing=literal_indexing,
    )


def theorem3_rates(spec: DiscreteNetworkSpec, literal_indexing: bool = False) -> CutReport:
    """Multiple-source multicast bounds, one row per (destination, cut)."""
    p = spec.joint
    cuts = []
    for k in spec.destinations:
        for cut in enumerate_cuts(spec.nodes, [], [k], require_any=spec.sources):
            comp = [j for j in spec.nodes if j not in cut]
            rp = mutual_info_d(p, spec.vs(cut), [var("Y", k)], [var("X", k)] + spec.vs(comp))
            flow, cost = _dprime_terms(spec, k, cut, literal_indexing)
            cuts.append(CutTerm(k, cut, rp, flow - cost, flow, cost))
    if not cuts:
        raise NetworkError("destinations: no cut separates a source from a destination")
    min_p = min(c.r_prime for c in cuts)
    min_pp = min(c.r_dprime for c in cuts)
    return CutReport(
        theorem=3,
        cuts=cuts,
        r_prime=max(min_p, 0.0),
        r_dprime=max(min_pp, 0.0),
        binding_prime=[f"dest {k} cut {set(s)}" for k, s in _binding_cuts(cuts, min_p, "r_prime")],
        binding_dprime=_binding_cuts(cuts, min_pp, "r_dprime"),
        literal_indexing=literal_indexing,
    )


def evaluate(spec: DiscreteNetworkSpec, literal_indexing: bool = False) -> CutReport:
    """Single-source networks use the multicast bound, others the multi-source one."""
    if len(spec.sources) == 1 and spec.nodes[0] == spec.sources[0]:
        return theorem2_rate(spec, literal_indexing)
    return theorem3_rates(spec, literal_indexing)


def simplex_grid(size: int, step: float = 1 / 8) -> list[tuple[float, ...]]:
    """All pmfs on ``size`` letters whose entries are multiples of ``step``."""
    m = round(1 / step)
    if abs(m * step - 1) > 1e-12:
        raise ValueError("step must divide 1")
    pts = []
    for cut in itertools.combinations(range(m + size - 1), size - 1):
        parts, prev = [], -1
        for c in cut + (m + size - 1,):
            parts.append((c - prev - 1) / m)
            prev = c
        pts.append(tuple(parts))
    return pts


def optimize_inputs(spec: DiscreteNetworkSpec, free: Sequence[str], step: float = 1 / 8,
                    theorem: int | None = None, literal_indexing: bool = False):
    """Grid search over unconditioned single-variable factors named in ``free``.

    Returns ``(best_report, best_tables)``; ties keep the first candidate in
    enumeration order.
    """
    lookup = {f.targets: f for f in spec.factors}
    chosen = []
    for name in free:
        f = lookup.get((name,))
        if f is None or f.given:
            raise NetworkError(f"optimize: {name!r} is not an unconditioned single-variable factor")
        if f.table.shape[0] > 3:
            raise NetworkError(f"optimize: alphabet of {name!r} exceeds 3")
        chosen.append(f)
    run = {2: theorem2_rate, 3: theorem3_rates, None: evaluate}[theorem]
    best = None
    for combo in itertools.product(*(simplex_grid(f.table.shape[0], step) for f in chosen)):
        swap = {f.targets: PmfFactor(f.targets, (), list(t), f.label) for f, t in zip(chosen, combo)}
        factors = [swap.get(f.targets, f) for f in spec.factors if not f.label.startswith("const ")]
        report = run(replace(spec, factors=tuple(factors)), literal_indexing)
        if best is None or report.total > best[0].total:
            best = (report, {f.targets[0]: t for f, t in zip(chosen, combo)})
    return best


def _parse_prob(x, where: str):
    if isinstance(x, bool):
        raise NetworkError(f"{where}: invalid probability {x!r}")
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            return float(Fraction(x.strip()))
        except (ValueError, ZeroDivisionError):
            pass
    raise NetworkError(f"{where}: invalid probability {x!r}")


def _parse_table(raw, shape: tuple[int, ...], where: str) -> np.ndarray:
    def walk(node, path):
        if isinstance(node, list):
            return [walk(v, f"{path}[{i}]") for i, v in enumerate(node)]
        return _parse_prob(node, path)

    values = walk(raw, where)
    try:
        arr = np.array(values, dtype=float)
    except ValueError:
        raise NetworkError(f"{where}: ragged nested table") from None
    # flat and (given configurations x target configurations) layouts are row-major views
    if arr.shape != shape and arr.ndim <= 2:
        if arr.size != int(np.prod(shape)):
            raise NetworkError(f"{where}: {arr.size} entries, expected {int(np.prod(shape))} for shape {shape}")
        arr = arr.reshape(shape)
    if arr.shape != shape:
        raise NetworkError(f"{where}: table shape {arr.shape} != expected {shape}")
    return arr


def network_from_dict(doc: dict) -> DiscreteNetworkSpec:
    """Build a network from the parsed JSON document (see README for the schema)."""
    if not isinstance(doc, dict):
        raise NetworkError("document: top level must be an object")
    for key in ("nodes", "sources", "destinations", "alphabets", "factors"):
        if key not in doc:
            raise NetworkError(f"{key}: missing required field")
    nodes = doc["nodes"]
    if not isinstance(nodes, list) or not all(isinstance(k, int) and not isinstance(k, bool) for k in nodes):
        raise NetworkError("nodes: must be a list of integer ids")
    alphabets = doc["alphabets"]
    if not isinstance(alphabets, dict):
        raise NetworkError("alphabets: must map variable names to sizes")
    for name, n in alphabets.items():
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise NetworkError(f"alphabets.{name}: size must be a positive integer")
    factors = []
    for i, raw in enumerate(doc["factors"]):
        where = f"factors[{i}]"
        if not isinstance(raw, dict) or "target" not in raw or "table" not in raw:
            raise NetworkError(f"{where}: needs 'target' and 'table'")
        targets = [raw["target"]] if isinstance(raw["target"], str) else list(raw["target"])
        given = raw.get("given", [])
        given = [given] if isinstance(given, str) else list(given)
        for v in targets + given:
            if v not in alphabets:
                raise NetworkError(f"{where}: variable {v!r} has no entry in alphabets")
        shape = tuple(alphabets[v] for v in given + targets)
        table = _parse_table(raw["table"], shape, f"{where}.table")
        label = raw.get("name", f"{where} p({','.join(targets)}|{','.join(given)})")
        try:
            factors.append(PmfFactor(targets, given, table, label=label))
        except PmfError as exc:
            raise NetworkError(f"{where}: {exc}") from None
    produced = {t for f in factors for t in f.targets}
    for name in alphabets:
        if name not in produced:
            raise NetworkError(f"alphabets.{name}: no factor generates this variable")
    try:
        spec = DiscreteNetworkSpec(
            tuple(nodes), tuple(doc["sources"]), tuple(doc["destinations"]),
            tuple(factors), str(doc.get("name", "")),
        )
        spec.joint  # noqa: B018 - validate the factorization eagerly
    except PmfError as exc:
        raise NetworkError(f"factors: {exc}") from None
    return spec


def load_network(path) -> DiscreteNetworkSpec:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return network_from_dict(doc)
