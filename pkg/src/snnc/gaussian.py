"""Mutual information between jointly Gaussian variables.

Systems are declared as independent exogenous sources plus linear structural
equations evaluated in order; the resulting covariance drives every
conditional mutual information used by the Gaussian rate evaluators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg.lapack import dpotrf

LOG2 = np.log(2.0)

# eigenvalues below this fraction of the (unit) mean variance count as zero
EIG_RTOL = 1e-12


class GaussianSystemError(ValueError):
    """Invalid system declaration (cycle, unknown name, negative variance)."""


class DegenerateCovarianceError(ArithmeticError):
    """Mutual information is unbounded or the covariance is inconsistent."""


@dataclass(frozen=True)
class StructuralEquation:
    """``target = sum(coef * source) + N(0, noise_var)``."""

    target: str
    terms: tuple[tuple[float, str], ...] = ()
    noise_var: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((float(c), str(s)) for c, s in self.terms))


@dataclass(frozen=True)
class GaussianSystem:
    variables: tuple[str, ...]
    cov: np.ndarray = field(repr=False)

    def __post_init__(self):
        names = tuple(self.variables)
        if len(set(names)) != len(names):
            raise GaussianSystemError("variable names must be unique")
        cov = np.array(self.cov, dtype=float)
        n = len(names)
        if cov.shape != (n, n):
            raise GaussianSystemError(f"covariance shape {cov.shape} does not match {n} variables")
        scale = max(np.abs(cov).max(initial=0.0), 1e-300)
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * scale):
            raise GaussianSystemError("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        if n and np.linalg.eigvalsh(cov)[0] < -1e-9 * max(np.trace(cov), 1e-300):
            raise GaussianSystemError("covariance is not positive semidefinite")
        cov.setflags(write=False)
        object.__setattr__(self, "variables", names)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(names)})

    @classmethod
    def _trusted(cls, names: tuple[str, ...], cov: np.ndarray) -> "GaussianSystem":
        # symmetric PSD by construction (L D L^T); skip the eigen check
        self = object.__new__(cls)
        cov = 0.5 * (cov + cov.T)
        cov.setflags(write=False)
        object.__setattr__(self, "variables", names)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(names)})
        return self

    def index(self, names: Iterable[str]) -> list[int]:
        try:
            return [self._index[v] for v in names]
        except KeyError as exc:
            raise GaussianSystemError(f"unknown variable {exc.args[0]!r}") from None

    def var(self, name: str) -> float:
        i = self._index[name]
        return float(self.cov[i, i])

    def covariance(self, a: str, b: str) -> float:
        return float(self.cov[self._index[a], self._index[b]])


def build_system(
    exogenous: Sequence[tuple[str, float]],
    equations: Sequence[StructuralEquation] = (),
) -> GaussianSystem:
    """Forward-substitute structural equations into a joint covariance.

    Exogenous variables are mutually independent. Each equation may only
    reference exogenous names or earlier targets. An equation's ``noise_var``
    adds a private independent noise that is not itself exposed as a variable.
    """
    names: list[str] = []
    seen: set[str] = set()
    variances: list[float] = []
    for name, v in exogenous:
        if name in seen:
            raise GaussianSystemError(f"duplicate variable {name!r}")
        if not v >= 0:
            raise GaussianSystemError(f"negative variance for {name!r}: {v}")
        names.append(name)
        seen.add(name)
        variances.append(float(v))
    n_exo = len(names)
    n_basis = n_exo + sum(1 for eq in equations if eq.noise_var > 0)
    loadings = np.zeros((n_exo + len(equations), n_basis))
    loadings[np.arange(n_exo), np.arange(n_exo)] = 1.0
    row_of = {name: i for i, name in enumerate(names)}

    declared = {eq.target for eq in equations} | seen
    hidden = n_exo
    for k, eq in enumerate(equations):
        if eq.target in seen:
            raise GaussianSystemError(f"duplicate variable {eq.target!r}")
        if not eq.noise_var >= 0:
            raise GaussianSystemError(f"negative noise variance for {eq.target!r}")
        row = loadings[n_exo + k]
        for coef, src in eq.terms:
            if src not in row_of:
                if src in declared:
                    raise GaussianSystemError(f"cycle or forward reference: {eq.target!r} uses {src!r}")
                raise GaussianSystemError(f"unknown source {src!r} in equation for {eq.target!r}")
            row += coef * loadings[row_of[src]]
        if eq.noise_var > 0:
            variances.append(float(eq.noise_var))
            row[hidden] = 1.0
            hidden += 1
        names.append(eq.target)
        seen.add(eq.target)
        row_of[eq.target] = n_exo + k

    weighted = loadings * np.asarray(variances)
    return GaussianSystem._trusted(tuple(names), weighted @ loadings.T)


def _positive_part(cov: np.ndarray) -> np.ndarray:
    """Whitening map onto the positive eigenspace of a correlation-scale matrix."""
    if cov.shape[0] == 0:
        return np.zeros((0, 0))
    w, v = np.linalg.eigh(cov)
    keep = w > EIG_RTOL
    return (v[:, keep] / np.sqrt(w[keep])).T


def _cond_logvars(cov: np.ndarray, order: list[int]):
    """Log conditional variances along ``order``, or None if any is degenerate."""
    sub = cov.take(order, 0).take(order, 1)
    chol, info = dpotrf(sub, lower=1, clean=0, overwrite_a=1)
    if info != 0:
        return None
    piv = np.diagonal(chol) ** 2
    if not np.all(piv > EIG_RTOL * np.diagonal(cov)[order]):
        return None
    return np.log(piv)


def _cholesky_mi(cov, ia, ib, ic):
    """Nondegenerate shortcut: ``h(A|C) - h(A|B,C)`` from two factorizations."""
    nc, na, nb = len(ic), len(ia), len(ib)
    first = _cond_logvars(cov, ic + ia + ib)
    if first is None:
        return None
    second = _cond_logvars(cov, ic + ib + ia)
    if second is None:
        return None
    val = 0.5 * (first[nc:nc + na].sum() - second[nc + nb:].sum()) / LOG2
    return max(0.0, float(val))


def _as_names(names) -> list[str]:
    if isinstance(names, str):
        return [names]
    return list(names)


def mutual_info(sys: GaussianSystem, A, B, C=()) -> float:
    """Conditional mutual information ``I(A; B | C)`` in bits.

    Equivalent to ``0.5*log2(det S_AC det S_BC / (det S_C det S_ABC))`` for
    nonsingular covariances. Degenerate directions (zero conditional variance)
    are projected out before the ratio is formed, so boundary parameter values
    evaluate to their limits. A direction of ``A`` that ``B`` determines given
    ``C`` makes the information unbounded and raises
    :class:`DegenerateCovarianceError`.
    """
    a, b, c = _as_names(A), _as_names(B), _as_names(C)
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise GaussianSystemError("variable sets must be pairwise disjoint")
    ia, ib, ic = sys.index(a), sys.index(b), sys.index(c)
    if not ia or not ib:
        return 0.0

    fast = _cholesky_mi(sys.cov, ia, ib, ic)
    if fast is not None:
        return fast

    idx = ia + ib + ic
    sub = sys.cov[np.ix_(idx, idx)]
    sd = np.sqrt(np.clip(np.diag(sub), 0.0, None))
    live = sd > 0
    inv_sd = np.where(live, 1.0 / np.where(live, sd, 1.0), 0.0)
    corr = sub * inv_sd[:, None] * inv_sd[None, :]
    na, nb = len(ia), len(ib)
    nab = na + nb

    m = corr[:nab, :nab]
    if len(ic):
        wc = _positive_part(corr[nab:, nab:])
        proj = corr[:nab, nab:] @ wc.T
        m = m - proj @ proj.T

    wa = _positive_part(m[:na, :na])
    wb = _positive_part(m[na:, na:])
    if wa.shape[0] == 0 or wb.shape[0] == 0:
        return 0.0
    k = wa @ m[:na, na:] @ wb.T
    s = np.linalg.svd(k, compute_uv=False)
    resid = 1.0 - s * s
    if np.any(resid < 1e3 * EIG_RTOL):
        raise DegenerateCovarianceError(
            f"I({','.join(a)};{','.join(b)}|{','.join(c)}) is unbounded: "
            "a direction is determined by the other side"
        )
    return max(0.0, float(-0.5 * np.sum(np.log1p(-s * s)) / LOG2))


def capacity(snr: float) -> float:
    """``0.5*log2(1 + snr)``."""
    return 0.5 * np.log1p(snr) / LOG2
