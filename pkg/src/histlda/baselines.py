"""Single-histogram bin selection: Knuth's Bayesian binning and Birge-Rozenholc.

Knuth's score is the one-basis case of the bin-count conditional used by the
Gibbs sampler (Jeffreys concentration 1/2); it is computed by the same
kernel. The Birge-Rozenholc score is penalized log-likelihood with penalty
``W - 1 + (ln W)^2.5``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .gibbs import _rise_table, _w_log_scores
from .histogram import Histogram, Range, bin_counts

KNUTH_BETA = 0.5


@dataclass(frozen=True)
class BinScoreTable:
    """Log-scores for W = 1..w_max (entry ``i`` is W = i + 1)."""

    scores: np.ndarray
    method: Literal["knuth", "br"]

    @property
    def best(self) -> int:
        # np.argmax returns the first maximum, i.e. ties go to the smaller W
        return int(np.argmax(self.scores)) + 1


def _prepare(data, rng: Range, w_max: int) -> np.ndarray:
    data = np.ascontiguousarray(data, dtype=np.float64).ravel()
    if data.size == 0:
        raise ValueError("need at least one observation")
    if w_max < 1:
        raise ValueError("w_max must be >= 1")
    rng.check(data)
    return data


def knuth_scores(data, rng: Range, w_max: int) -> BinScoreTable:
    data = _prepare(data, rng, w_max)
    rise = _rise_table(KNUTH_BETA, data.size)
    return BinScoreTable(_w_log_scores(data, rng.t0, rng.t1, int(w_max), KNUTH_BETA, rise), "knuth")


def knuth_bin_number(data, rng: Range, w_max: int) -> int:
    return knuth_scores(data, rng, w_max).best


def knuth_histogram(data, rng: Range, w_max: int) -> Histogram:
    """Knuth-selected W with posterior-mean masses ``(n_l + 1/2) / (N + W/2)``."""
    data = _prepare(data, rng, w_max)
    w = knuth_bin_number(data, rng, w_max)
    n = bin_counts(data, w, rng)
    return Histogram(rng, (n + KNUTH_BETA) / (data.size + w * KNUTH_BETA))


def br_penalty(w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    return w - 1.0 + np.log(w) ** 2.5


def br_scores(data, rng: Range, w_max: int) -> BinScoreTable:
    data = _prepare(data, rng, w_max)
    n_total = data.size
    scores = np.empty(w_max)
    for w in range(1, w_max + 1):
        n = bin_counts(data, w, rng)
        n = n[n > 0].astype(np.float64)
        # empty bins contribute 0 * ln 0 = 0
        scores[w - 1] = np.sum(n * np.log(n * w / (n_total * rng.width))) - br_penalty(w)
    return BinScoreTable(scores, "br")


def br_bin_number(data, rng: Range, w_max: int) -> int:
    return br_scores(data, rng, w_max).best


def br_histogram(data, rng: Range, w_max: int) -> Histogram:
    """BR-selected W with maximum-likelihood masses ``n_l / N``."""
    data = _prepare(data, rng, w_max)
    w = br_bin_number(data, rng, w_max)
    return Histogram(rng, bin_counts(data, w, rng) / data.size)
