"""Finite-alphabet joint pmfs built from conditional factors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_STATES = 2 ** 24
PROB_FLOOR = 1e-15
NORM_ATOL = 1e-12


class PmfError(ValueError):
    pass


def _names(x) -> list[str]:
    if isinstance(x, str):
        return [x]
    return list(x)


@dataclass(frozen=True)
class PmfFactor:
    """Conditional table ``p(targets | given)``.

    ``table`` has shape ``given_sizes + target_sizes`` (row-major, conditioning
    variables outermost), so every slice ``table[g]`` is a distribution.
    """

    targets: tuple[str, ...]
    given: tuple[str, ...]
    table: np.ndarray
    label: str = ""

    def __init__(self, targets, given, table, label: str = ""):
        targets, given = tuple(_names(targets)), tuple(_names(given))
        table = np.asarray(table, dtype=float)
        if not targets:
            raise PmfError("factor needs at least one target variable")
        if set(targets) & set(given) or len(set(targets + given)) != len(targets + given):
            raise PmfError(f"factor {label or targets}: repeated variable")
        if table.ndim != len(given) + len(targets):
            raise PmfError(
                f"factor {label or targets}: table has {table.ndim} axes, "
                f"expected {len(given) + len(targets)}"
            )
        if np.any(table < 0) or not np.all(np.isfinite(table)):
            raise PmfError(f"factor {label or targets}: negative or non-finite entry")
        rows = table.reshape(int(np.prod(table.shape[: len(given)], dtype=np.int64)), -1).sum(axis=1)
        bad = np.flatnonzero(np.abs(rows - 1.0) > NORM_ATOL)
        if bad.size:
            raise PmfError(
                f"factor {label or targets}: conditional row {int(bad[0])} sums to {rows[bad[0]]:.12g}"
            )
        table = table.copy()
        table.setflags(write=False)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "given", given)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "label", label or ",".join(targets))

    @property
    def sizes(self) -> dict[str, int]:
        return dict(zip(self.given + self.targets, self.table.shape))


@dataclass(frozen=True)
class JointPmf:
    variables: tuple[tuple[str, int], ...]
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        shape = tuple(n for _, n in self.variables)
        if probs.shape != shape:
            raise PmfError(f"probability tensor shape {probs.shape} != {shape}")
        if np.any(probs < 0):
            raise PmfError("negative probability")
        if abs(probs.sum() - 1.0) > NORM_ATOL:
            raise PmfError(f"probabilities sum to {probs.sum():.15g}")
        probs = probs.copy()
        probs.setflags(write=False)
        object.__setattr__(self, "variables", tuple((str(v), int(n)) for v, n in self.variables))
        object.__setattr__(self, "probs", probs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.variables)

    def axes(self, names: Iterable[str]) -> list[int]:
        lookup = {v: i for i, v in enumerate(self.names)}
        out = []
        for n in names:
            if n not in lookup:
                raise PmfError(f"unknown variable {n!r}")
            out.append(lookup[n])
        return out


def compose(factors: Sequence[PmfFactor]) -> JointPmf:
    """Product of conditional factors forming a valid factorization."""
    order: list[str] = []
    sizes: dict[str, int] = {}
    for f in factors:
        for t in f.targets:
            if t in sizes:
                raise PmfError(f"variable {t!r} is the target of more than one factor")
            sizes[t] = f.sizes[t]
            order.append(t)
    for f in factors:
        for g in f.given:
            if g not in sizes:
                raise PmfError(f"factor {f.label}: conditioning variable {g!r} is never generated")
            if sizes[g] != f.sizes[g]:
                raise PmfError(
                    f"factor {f.label}: alphabet of {g!r} is {f.sizes[g]}, declared {sizes[g]}"
                )

    # a valid generation order must exist
    produced: set[str] = set()
    pending = list(factors)
    while pending:
        ready = [f for f in pending if set(f.given) <= produced]
        if not ready:
            raise PmfError("factors admit no valid topological order (cyclic conditioning)")
        for f in ready:
            produced.update(f.targets)
        pending = [f for f in pending if f not in ready]

    shape = tuple(sizes[v] for v in order)
    if np.prod(shape, dtype=np.float64) > MAX_STATES:
        raise PmfError(f"joint state space {int(np.prod(shape, dtype=np.float64))} exceeds limit {MAX_STATES}")
    pos = {v: i for i, v in enumerate(order)}
    probs = np.ones(shape)
    for f in factors:
        own = f.given + f.targets
        perm = sorted(range(len(own)), key=lambda k: pos[own[k]])
        tab = np.transpose(f.table, perm)
        view = [1] * len(order)
        for k in perm:
            view[pos[own[k]]] = sizes[own[k]]
        probs = probs * tab.reshape(view)
    return JointPmf(tuple((v, sizes[v]) for v in order), probs)


def marginalize(pmf: JointPmf, keep) -> JointPmf:
    keep = _names(keep)
    axes = pmf.axes(keep)
    kept = sorted(set(axes))
    drop = tuple(i for i in range(len(pmf.variables)) if i not in kept)
    probs = pmf.probs.sum(axis=drop) if drop else pmf.probs
    return JointPmf(tuple(pmf.variables[i] for i in kept), probs)


def _grouped(pmf: JointPmf, groups: Sequence[list[str]]) -> np.ndarray:
    """Marginal over the union of groups, reshaped to one axis per group."""
    flat = [n for g in groups for n in g]
    axes = pmf.axes(flat)
    drop = tuple(i for i in range(len(pmf.variables)) if i not in axes)
    marg = pmf.probs.sum(axis=drop) if drop else pmf.probs
    # remaining axes are in pmf order; bring them into group order
    remaining = sorted(axes)
    marg = np.transpose(marg, [remaining.index(i) for i in axes])
    dims = []
    for g in groups:
        dims.append(int(np.prod([pmf.probs.shape[i] for i in pmf.axes(g)], dtype=np.int64)))
    return marg.reshape(dims)


def entropy(pmf: JointPmf, A) -> float:
    p = _grouped(pmf, [_names(A)]).ravel()
    p = p[p > PROB_FLOOR]
    return float(-(p * np.log2(p)).sum())


def mutual_info_d(pmf: JointPmf, A, B, C=()) -> float:
    """``I(A; B | C)`` in bits, with ``0 log 0 = 0``."""
    a, b, c = _names(A), _names(B), _names(C)
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise PmfError("variable sets must be pairwise disjoint")
    pmf.axes(a + b + c)
    if not a or not b:
        return 0.0
    p_abc = _grouped(pmf, [a, b, c])
    p_ac = p_abc.sum(axis=1, keepdims=True)
    p_bc = p_abc.sum(axis=0, keepdims=True)
    p_c = p_abc.sum(axis=(0, 1), keepdims=True)
    mask = p_abc > PROB_FLOOR
    num = p_abc * p_c
    den = p_ac * p_bc
    ratio = np.divide(num, den, out=np.ones_like(num), where=mask)
    val = float(np.sum(np.where(mask, p_abc * np.log2(ratio), 0.0)))
    return max(0.0, val)
