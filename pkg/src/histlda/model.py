"""Observed collection, count statistics and the collapsed joint log-probability.

Arrays use 0-based indices throughout: ``Collection.unit[j]`` is in
``[0, U)``, ``GibbsState.z[j]`` is in ``[0, K)`` and column ``l`` of
``SuffStats.n_kl`` is bin ``l + 1``. Bin counts ``W_k`` are counts, not
indices, so they keep their natural range ``[1, W_max]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .histogram import Range, _bins0
from .numerics import ln_gamma


@dataclass(frozen=True)
class Collection:
    """Continuous observations ``t`` tagged with the unit that produced them."""

    range: Range
    t: np.ndarray = field(repr=False)
    unit: np.ndarray = field(repr=False)
    n_units: int
    unit_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        t = np.array(self.t, dtype=np.float64).ravel()
        unit = np.array(self.unit, dtype=np.int64).ravel()
        if t.shape != unit.shape:
            raise ValueError("t and unit must have the same length")
        if self.n_units < 1:
            raise ValueError("need at least one unit")
        bad = np.flatnonzero(~self.range.contains(t))
        if bad.size:
            raise ValueError(f"observation {bad[0]} (t={t[bad[0]]!r}) outside [{self.range.t0}, {self.range.t1})")
        if unit.size and (unit.min() < 0 or unit.max() >= self.n_units):
            raise ValueError("unit index out of range")
        if self.unit_ids is not None and len(self.unit_ids) != self.n_units:
            raise ValueError("unit_ids must name every unit")
        t.flags.writeable = False
        unit.flags.writeable = False
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "unit", unit)
        if self.unit_ids is not None:
            object.__setattr__(self, "unit_ids", tuple(self.unit_ids))

    @classmethod
    def from_units(cls, per_unit, range: Range = Range(), unit_ids=None) -> "Collection":
        """Build from a list of per-unit sequences of values."""
        per_unit = [np.asarray(x, dtype=np.float64).ravel() for x in per_unit]
        t = np.concatenate(per_unit) if per_unit else np.empty(0)
        unit = np.repeat(np.arange(len(per_unit)), [x.size for x in per_unit])
        return cls(range, t, unit, len(per_unit), unit_ids)

    @property
    def size(self) -> int:
        return self.t.size

    @property
    def n_u(self) -> np.ndarray:
        return np.bincount(self.unit, minlength=self.n_units)

    def unit_values(self, u: int) -> np.ndarray:
        return self.t[self.unit == u]


@dataclass
class SuffStats:
    """Assignment counts. ``n_kl`` is padded to ``W_max`` columns with zeros."""

    n_ku: np.ndarray
    n_kl: np.ndarray
    n_k: np.ndarray
    n_u: np.ndarray

    def copy(self) -> "SuffStats":
        return SuffStats(self.n_ku.copy(), self.n_kl.copy(), self.n_k.copy(), self.n_u.copy())

    def __eq__(self, other):
        if not isinstance(other, SuffStats):
            return NotImplemented
        return all(
            np.array_equal(a, b)
            for a, b in zip(
                (self.n_ku, self.n_kl, self.n_k, self.n_u),
                (other.n_ku, other.n_kl, other.n_k, other.n_u),
            )
        )

    def check_marginals(self) -> None:
        """Raise AssertionError if the four count identities do not hold."""
        assert np.array_equal(self.n_ku.sum(axis=1), self.n_k)
        assert np.array_equal(self.n_kl.sum(axis=1), self.n_k)
        assert np.array_equal(self.n_ku.sum(axis=0), self.n_u)
        assert self.n_k.sum() == self.n_u.sum()
        assert (self.n_ku >= 0).all() and (self.n_kl >= 0).all()


def recount(z, w_bins, c: Collection, w_max: int | None = None) -> SuffStats:
    """Count statistics from scratch for assignments ``z`` (0-based) and bin counts ``w_bins``."""
    z = np.asarray(z, dtype=np.int64)
    w_bins = np.asarray(w_bins, dtype=np.int64)
    k = w_bins.size
    w_max = int(w_bins.max()) if w_max is None else int(w_max)
    if z.shape != c.t.shape:
        raise ValueError("z must have one entry per observation")
    if k < 1 or (z.size and (z.min() < 0 or z.max() >= k)):
        raise ValueError("basis index out of range")
    if w_bins.min() < 1 or w_bins.max() > w_max:
        raise ValueError("bin counts must lie in [1, w_max]")
    n_ku = np.zeros((k, c.n_units), dtype=np.int64)
    np.add.at(n_ku, (z, c.unit), 1)
    n_kl = np.zeros((k, w_max), dtype=np.int64)
    for b in range(k):
        members = c.t[z == b]
        n_kl[b, : w_bins[b]] = np.bincount(
            _bins0(members, int(w_bins[b]), c.range.t0, c.range.t1), minlength=w_bins[b]
        )
    return SuffStats(n_ku, n_kl, n_ku.sum(axis=1), c.n_u)


@dataclass
class GibbsState:
    """Mutable sampler state owned by one chain.

    ``bins[k, j]`` caches the 0-based bin of observation ``j`` under
    basis ``k``'s current bin count.
    """

    z: np.ndarray
    w_bins: np.ndarray
    alpha: float
    beta: float
    w_max: int
    stats: SuffStats
    bins: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, c: Collection, z, w_bins, alpha: float, beta: float, w_max: int) -> "GibbsState":
        z = np.array(z, dtype=np.int64)
        w_bins = np.array(w_bins, dtype=np.int64)
        if not (alpha > 0 and beta > 0):
            raise ValueError("alpha and beta must be positive")
        stats = recount(z, w_bins, c, w_max)
        bins = np.empty((w_bins.size, c.size), dtype=np.int64)
        for k in range(w_bins.size):
            bins[k] = _bins0(c.t, int(w_bins[k]), c.range.t0, c.range.t1)
        return cls(z, w_bins, float(alpha), float(beta), int(w_max), stats, bins)

    @property
    def k(self) -> int:
        return self.w_bins.size

    def copy(self) -> "GibbsState":
        return GibbsState(
            self.z.copy(), self.w_bins.copy(), self.alpha, self.beta, self.w_max,
            self.stats.copy(), self.bins.copy(),
        )


@numba.njit(cache=True)
def _lgamma_rise(a, n):
    # ln Gamma(a + n) - ln Gamma(a); exactly zero for n == 0
    if n == 0:
        return 0.0
    return ln_gamma(a + n) - ln_gamma(a)


@numba.njit(cache=True)
def _log_joint(n_ku, n_u, n_kl, n_k, w_bins, alpha, beta, w_max, width):
    k_count, n_units = n_ku.shape
    n_terms = 1 + k_count * n_units + n_units + k_count * (n_kl.shape[1] + 2)
    terms = np.zeros(n_terms)
    i = 0
    terms[i] = -k_count * math.log(w_max)
    i += 1
    ka = k_count * alpha
    for u in range(n_units):
        for k in range(k_count):
            terms[i] = _lgamma_rise(alpha, n_ku[k, u])
            i += 1
        terms[i] = -_lgamma_rise(ka, n_u[u])
        i += 1
    for k in range(k_count):
        wb = w_bins[k] * beta
        for l in range(w_bins[k]):
            terms[i] = _lgamma_rise(beta, n_kl[k, l])
            i += 1
        terms[i] = -_lgamma_rise(wb, n_k[k])
        i += 1
        if n_k[k] > 0:
            terms[i] = n_k[k] * math.log(w_bins[k] / width)
        i += 1
    # sorting makes the sum independent of basis and unit ordering
    return np.sort(terms[:i]).sum()


def log_joint(state: GibbsState, c: Collection, alpha: float | None = None, beta: float | None = None) -> float:
    """Log of the collapsed joint p(t, z, W | alpha, beta).

    ``alpha``/``beta`` override the state's hyperparameters, which is
    handy when scanning the marginal likelihood at fixed (z, W).
    """
    s = state.stats
    return float(
        _log_joint(
            s.n_ku, s.n_u, s.n_kl, s.n_k, state.w_bins,
            state.alpha if alpha is None else float(alpha),
            state.beta if beta is None else float(beta),
            float(state.w_max), c.range.width,
        )
    )
