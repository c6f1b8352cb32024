"""Piecewise-constant densities on a half-open interval [t0, t1).

Bin indices returned by :func:`bin_index` are 1-based. Arrays of bin
indices produced by :func:`bin_indices` are 0-based so they can index numpy
arrays directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .numerics import Rng

_MASS_TOL = 1e-12


@dataclass(frozen=True)
class Range:
    t0: float = 0.0
    t1: float = 2.0

    def __post_init__(self):
        if not (math.isfinite(self.t0) and math.isfinite(self.t1)) or not self.t0 < self.t1:
            raise ValueError(f"invalid range [{self.t0}, {self.t1})")

    @property
    def width(self) -> float:
        return self.t1 - self.t0

    def contains(self, t) -> bool | np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        return (t >= self.t0) & (t < self.t1)

    def check(self, t) -> None:
        if not np.all(self.contains(t)):
            raise ValueError(f"value outside half-open range [{self.t0}, {self.t1})")

    def grid(self, n: int) -> np.ndarray:
        """``n`` evenly spaced points from t0 to t1.

        The closing point is nudged to the largest double below t1, so a
        density evaluated there reports its limit from the left.
        """
        if n < 2:
            raise ValueError("grid needs at least two points")
        g = np.linspace(self.t0, self.t1, n)
        g[-1] = np.nextafter(self.t1, self.t0)
        return g


@numba.njit(cache=True)
def _bin0(t, w, t0, t1):
    b = int(math.floor(w * (t - t0) / (t1 - t0)))
    # rounding just below t1 can land on w
    if b >= w:
        b = w - 1
    return b


@numba.njit(cache=True)
def _bins0(ts, w, t0, t1):
    out = np.empty(ts.size, dtype=np.int64)
    for i in range(ts.size):
        out[i] = _bin0(ts[i], w, t0, t1)
    return out


def bin_index(t: float, bin_count: int, rng: Range) -> int:
    """Discretize ``t`` into one of ``bin_count`` equal bins (1-based)."""
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    if not rng.t0 <= t < rng.t1:
        raise ValueError(f"t={t!r} outside [{rng.t0}, {rng.t1})")
    return _bin0(float(t), int(bin_count), rng.t0, rng.t1) + 1


def bin_indices(ts, bin_count: int, rng: Range) -> np.ndarray:
    """Vectorized 0-based :func:`bin_index`."""
    ts = np.ascontiguousarray(ts, dtype=np.float64)
    rng.check(ts)
    return _bins0(ts.ravel(), int(bin_count), rng.t0, rng.t1).reshape(ts.shape)


def bin_counts(ts, bin_count: int, rng: Range) -> np.ndarray:
    return np.bincount(bin_indices(ts, bin_count, rng).ravel(), minlength=bin_count)


@dataclass(frozen=True)
class Histogram:
    """Regular histogram with ``bin_count`` bins and per-bin probability masses."""

    range: Range
    masses: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.masses, dtype=np.float64).ravel()
        if m.size < 1:
            raise ValueError("histogram needs at least one bin")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValueError("masses must be finite and nonnegative")
        if abs(m.sum() - 1.0) > _MASS_TOL:
            raise ValueError(f"masses sum to {m.sum()!r}, expected 1")
        m.flags.writeable = False
        object.__setattr__(self, "masses", m)

    @property
    def bin_count(self) -> int:
        return self.masses.size

    @property
    def edges(self) -> np.ndarray:
        return self.range.t0 + np.arange(self.bin_count + 1) * (self.range.width / self.bin_count)

    @property
    def heights(self) -> np.ndarray:
        return self.masses * (self.bin_count / self.range.width)

    def __eq__(self, other):
        if not isinstance(other, Histogram):
            return NotImplemented
        return self.range == other.range and np.array_equal(self.masses, other.masses)

    __hash__ = None


def density(h: Histogram, t):
    """Evaluate the piecewise-constant density of ``h`` at ``t`` (scalar or array)."""
    t_arr = np.asarray(t, dtype=np.float64)
    idx = bin_indices(t_arr, h.bin_count, h.range)
    out = h.heights[idx]
    return float(out) if out.ndim == 0 else out


def sample(h: Histogram, rng: Rng, size: int | None = None, return_bins: bool = False):
    """Draw a bin from the masses, then a uniform point inside that bin.

    With ``return_bins`` the 1-based bin indices are returned alongside the
    values; ``bin_index`` of each value always recovers its bin.
    """
    n = 1 if size is None else int(size)
    cdf = np.cumsum(h.masses)
    # zero-mass bins have a flat cdf step, so side="right" never lands on them
    bins = np.searchsorted(cdf / cdf[-1], rng.random(n), side="right")
    bins = np.minimum(bins, h.bin_count - 1)
    width = h.range.width / h.bin_count
    t = h.range.t0 + (bins + rng.random(n)) * width
    t = np.minimum(t, np.nextafter(h.range.t1, h.range.t0))
    # floating edges: move stragglers one ulp at a time into their bin
    got = _bins0(t, h.bin_count, h.range.t0, h.range.t1)
    while np.any(got != bins):
        off = got != bins
        t[off] = np.nextafter(t[off], np.where(got[off] < bins[off], np.inf, -np.inf))
        got = _bins0(t, h.bin_count, h.range.t0, h.range.t1)
    if size is None:
        return (float(t[0]), int(bins[0]) + 1) if return_bins else float(t[0])
    return (t, bins + 1) if return_bins else t


@dataclass(frozen=True)
class MixtureDensity:
    bases: tuple[Histogram, ...]
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        bases = tuple(self.bases)
        w = np.array(self.weights, dtype=np.float64).ravel()
        if len(bases) == 0 or w.size != len(bases):
            raise ValueError("need one weight per basis")
        if np.any(w < 0) or abs(w.sum() - 1.0) > _MASS_TOL:
            raise ValueError("weights must be nonnegative and sum to 1")
        if any(b.range != bases[0].range for b in bases):
            raise ValueError("bases must share one range")
        w.flags.writeable = False
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "weights", w)

    @property
    def range(self) -> Range:
        return self.bases[0].range

    def __call__(self, t):
        return mixture_density(self, t)


def mixture_density(m: MixtureDensity, t):
    t_arr = np.asarray(t, dtype=np.float64)
    m.range.check(t_arr)
    out = np.zeros(t_arr.shape)
    for w, b in zip(m.weights, m.bases):
        if w > 0:
            out = out + w * density(b, t_arr)
    return float(out) if out.ndim == 0 else out


def breakpoints(obj) -> np.ndarray:
    """Sorted bin edges of a Histogram, or the union of edges of a mixture's bases."""
    if isinstance(obj, Histogram):
        return obj.edges
    if isinstance(obj, MixtureDensity):
        return np.unique(np.concatenate([b.edges for b in obj.bases]))
    raise TypeError("expected a Histogram or MixtureDensity")


def trapezoid_mass(obj, n_points: int = 100_000) -> float:
    """Trapezoid-rule integral of a piecewise-constant density over its range.

    The ``n_points`` nodes are spread over the constant pieces in proportion
    to their length with nodes on every edge. Edge nodes take the one-sided
    limit from inside their piece, so the rule is exact up to rounding.
    """
    fn = (lambda t: density(obj, t)) if isinstance(obj, Histogram) else obj
    edges = breakpoints(obj)
    lengths = np.diff(edges)
    n_seg = lengths.size
    if n_points < 2 * n_seg:
        raise ValueError(f"need at least {2 * n_seg} points for {n_seg} pieces")
    alloc = 2 + np.floor((n_points - 2 * n_seg) * lengths / lengths.sum()).astype(int)
    alloc[: n_points - alloc.sum()] += 1
    total = 0.0
    for lo, hi, n in zip(edges[:-1], edges[1:], alloc):
        x = np.linspace(lo, hi, n)
        if n > 2:
            y = fn(x[1:-1])
            y = np.concatenate([y[:1], y, y[-1:]])
        else:
            y = np.full(2, fn(np.array([0.5 * (lo + hi)]))[0])
        total += np.trapezoid(y, x)
    return float(total)
