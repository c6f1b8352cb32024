"""Shared state builders for the sampler tests."""

import numpy as np

import oracles
from histlda.histogram import Histogram, Range, sample
from histlda.model import Collection, GibbsState
from histlda.numerics import make_rng

R02 = Range(0.0, 2.0)
GRID = np.logspace(-3, 3, 200)


def generative_state(seed, k=2, n_units=3, n=20, alpha=0.3, beta=0.4, w_max=8):
    """Counts drawn from the generative model itself, so the (alpha, beta) optimum is usually finite."""
    g = np.random.default_rng(seed)
    w = g.integers(2, w_max + 1, k)
    theta = g.dirichlet(np.full(k, alpha), n_units)
    unit = np.sort(g.integers(0, n_units, n))
    z = np.array([g.choice(k, p=theta[u]) for u in unit])
    t = np.empty(n)
    for kk in range(k):
        h = Histogram(R02, g.dirichlet(np.full(w[kk], beta)))
        sel = z == kk
        if sel.any():
            t[sel] = sample(h, make_rng(seed * 7 + kk), size=int(sel.sum()))
    c = Collection(R02, t, unit, n_units)
    return c, GibbsState.build(c, z, w, 0.5, 0.5, w_max)


def exclude(state, c, j):
    """Remove observation j from the counts (the decrement step of a sweep)."""
    k = state.z[j]
    s = state.stats
    s.n_ku[k, c.unit[j]] -= 1
    s.n_kl[k, state.bins[k, j]] -= 1
    s.n_k[k] -= 1


def interior_grid_states(count=5, seeds=range(60)):
    out = []
    for seed in seeds:
        c, s = generative_state(seed)
        rows = [s.stats.n_kl[k, : s.w_bins[k]] for k in range(s.k)]
        lj = oracles.log_joint_grid(s.stats.n_ku, rows, GRID, GRID, s.w_max, 2.0)
        i, j = np.unravel_index(np.argmax(lj), lj.shape)
        # a boundary argmax means the optimum lies outside the grid
        if 0 < i < len(GRID) - 1 and 0 < j < len(GRID) - 1:
            out.append((c, s, GRID[i], GRID[j]))
        if len(out) == count:
            return out
    raise AssertionError("not enough interior states")
