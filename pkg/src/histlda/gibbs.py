"""Collapsed Gibbs sampling for the histogram mixture model.

One sweep redraws every basis's bin count, then every observation's basis
assignment, then (optionally) refits the two Dirichlet concentrations by
fixed-point iteration at the current sample. ``fit`` runs a burn-in of such
sweeps, freezes the bin counts and concentrations, and averages the
posterior-mean weights and masses over further assignment-only sweeps.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numba
import numpy as np

from .histogram import Histogram, MixtureDensity, Range, _bin0
from .model import Collection, GibbsState, _lgamma_rise, log_joint
from .numerics import Rng, categorical_from_log, digamma, make_rng

log = logging.getLogger(__name__)

HYPER_MIN = 1e-6
HYPER_MAX = 1e6


class FitError(RuntimeError):
    """Numerical failure inside a sweep; the message names the sweep."""


@dataclass(frozen=True)
class FitConfig:
    k_bases: int = 3
    w_max: int = 200
    burn_in_sweeps: int = 500
    posterior_samples: int = 100
    alpha0: float = 0.5
    beta0: float = 0.5
    hyper_update: bool = True
    fixed_point_tol: float = 1e-6
    fixed_point_max_iters: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.k_bases < 1 or self.w_max < 1 or self.posterior_samples < 1:
            raise ValueError("k_bases, w_max and posterior_samples must be >= 1")
        if self.burn_in_sweeps < 0:
            raise ValueError("burn_in_sweeps must be >= 0")
        if not (self.alpha0 > 0 and self.beta0 > 0 and self.fixed_point_tol > 0):
            raise ValueError("alpha0, beta0 and fixed_point_tol must be positive")
        if self.fixed_point_max_iters < 1:
            raise ValueError("fixed_point_max_iters must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FitResult:
    theta_hat: np.ndarray = field(repr=False)
    bases: tuple[Histogram, ...]
    alpha_hat: float
    beta_hat: float
    log_joint_trace: np.ndarray = field(repr=False)
    w_trace: np.ndarray = field(repr=False)
    alpha_trace: np.ndarray = field(repr=False)
    beta_trace: np.ndarray = field(repr=False)
    config: FitConfig | None = None

    @property
    def w_hat(self) -> np.ndarray:
        return np.array([b.bin_count for b in self.bases])

    @property
    def range(self) -> Range:
        return self.bases[0].range

    @property
    def n_units(self) -> int:
        return self.theta_hat.shape[0]


# ---------------------------------------------------------------- kernels


@numba.njit(cache=True)
def _z_log_weights(j, unit_j, z_bins, n_ku, n_kl, n_k, w_bins, alpha, beta):
    k_count = w_bins.size
    lw = np.empty(k_count)
    for k in range(k_count):
        w = w_bins[k]
        lw[k] = (
            math.log(alpha + n_ku[k, unit_j])
            + math.log(beta + n_kl[k, z_bins[k, j]])
            - math.log(w * beta + n_k[k])
            + math.log(w)
        )
    return lw


@numba.njit(cache=True)
def _z_sweep(z, unit, bins, n_ku, n_kl, n_k, w_bins, alpha, beta, uniforms):
    for j in range(z.size):
        k = z[j]
        u = unit[j]
        n_ku[k, u] -= 1
        n_kl[k, bins[k, j]] -= 1
        n_k[k] -= 1
        lw = _z_log_weights(j, u, bins, n_ku, n_kl, n_k, w_bins, alpha, beta)
        k = categorical_from_log(lw, uniforms[j])
        z[j] = k
        n_ku[k, u] += 1
        n_kl[k, bins[k, j]] += 1
        n_k[k] += 1


@numba.njit(cache=True)
def _rise_table(a, n_max):
    table = np.empty(n_max + 1)
    for n in range(n_max + 1):
        table[n] = _lgamma_rise(a, n)
    return table


@numba.njit(cache=True)
def _w_log_scores(members_t, t0, t1, w_max, beta, rise):
    n = members_t.size
    scores = np.empty(w_max)
    counts = np.zeros(w_max, dtype=np.int64)
    for w in range(1, w_max + 1):
        counts[:w] = 0
        for i in range(n):
            counts[_bin0(members_t[i], w, t0, t1)] += 1
        s = 0.0
        for l in range(w):
            if counts[l] > 0:
                s += rise[counts[l]]
        if n > 0:
            s += -_lgamma_rise(w * beta, n) + n * math.log(w)
        scores[w - 1] = s
    return scores


@numba.njit(cache=True)
def _redraw_w(k, t, z, bins, n_kl, w_bins, w_max, t0, t1, beta, rise, u):
    members = t[z == k]
    scores = _w_log_scores(members, t0, t1, w_max, beta, rise)
    w = categorical_from_log(scores, u) + 1
    w_bins[k] = w
    for i in range(t.size):
        bins[k, i] = _bin0(t[i], w, t0, t1)
    n_kl[k, :] = 0
    for i in range(t.size):
        if z[i] == k:
            n_kl[k, bins[k, i]] += 1
    return w


@numba.njit(cache=True)
def _fixed_point(n_ku, n_u, n_kl, n_k, w_bins, alpha, beta, tol, max_iters, lo, hi):
    k_count, n_units = n_ku.shape
    a_done = False
    b_done = False
    for it in range(max_iters):
        if not a_done:
            num = 0.0
            da = digamma(alpha)
            for u in range(n_units):
                for k in range(k_count):
                    if n_ku[k, u] > 0:
                        num += digamma(alpha + n_ku[k, u]) - da
            ka = k_count * alpha
            dka = digamma(ka)
            den = 0.0
            for u in range(n_units):
                den += k_count * (digamma(ka + n_u[u]) - dka)
            if den == 0.0 or num == den:
                a_done = True
            else:
                new = alpha * num / den
                if not math.isfinite(new):
                    raise FloatingPointError("alpha update is not finite")
                new = min(max(new, lo), hi)
                a_done = abs(new - alpha) < tol * alpha
                alpha = new
        if not b_done:
            num = 0.0
            db = digamma(beta)
            den = 0.0
            for k in range(k_count):
                for l in range(w_bins[k]):
                    if n_kl[k, l] > 0:
                        num += digamma(beta + n_kl[k, l]) - db
                wb = w_bins[k] * beta
                den += w_bins[k] * (digamma(wb + n_k[k]) - digamma(wb))
            if den == 0.0 or num == den:
                b_done = True
            else:
                new = beta * num / den
                if not math.isfinite(new):
                    raise FloatingPointError("beta update is not finite")
                new = min(max(new, lo), hi)
                b_done = abs(new - beta) < tol * beta
                beta = new
        if a_done and b_done:
            return alpha, beta, it + 1
    return alpha, beta, max_iters


# ---------------------------------------------------------- public steps


def z_probabilities(j: int, state: GibbsState, c: Collection) -> np.ndarray:
    """Normalized conditional over bases for observation ``j`` (counts must exclude ``j``)."""
    s = state.stats
    lw = _z_log_weights(j, c.unit[j], state.bins, s.n_ku, s.n_kl, s.n_k, state.w_bins, state.alpha, state.beta)
    p = np.exp(lw - lw.max())
    return p / p.sum()


def sample_z_j(j: int, state: GibbsState, c: Collection, rng: Rng) -> int:
    """Draw a 1-based basis for observation ``j``. The state is not modified.

    The caller must have removed ``j`` from the counts beforehand.
    """
    s = state.stats
    lw = _z_log_weights(j, c.unit[j], state.bins, s.n_ku, s.n_kl, s.n_k, state.w_bins, state.alpha, state.beta)
    return int(categorical_from_log(lw, rng.random())) + 1


def w_log_scores(k: int, state: GibbsState, c: Collection) -> np.ndarray:
    """Unnormalized log conditional of basis ``k``'s bin count over ``1..W_max``."""
    members = c.t[state.z == k]
    rise = _rise_table(state.beta, members.size)
    return _w_log_scores(members, c.range.t0, c.range.t1, state.w_max, state.beta, rise)


def sample_W_k(k: int, state: GibbsState, c: Collection, rng: Rng) -> int:
    """Redraw the bin count of basis ``k`` (0-based) in place and return it."""
    rise = _rise_table(state.beta, int(state.stats.n_k[k]))
    return int(
        _redraw_w(
            k, c.t, state.z, state.bins, state.stats.n_kl, state.w_bins, state.w_max,
            c.range.t0, c.range.t1, state.beta, rise, rng.random(),
        )
    )


def update_hyperparameters(state: GibbsState, cfg: FitConfig) -> tuple[float, float]:
    """Fixed-point maximization of the joint over (alpha, beta) at the current (z, W).

    Replaces ``state.alpha`` and ``state.beta`` and returns the new pair.
    """
    s = state.stats
    alpha, beta, iters = _fixed_point(
        s.n_ku, s.n_u, s.n_kl, s.n_k, state.w_bins, state.alpha, state.beta,
        cfg.fixed_point_tol, cfg.fixed_point_max_iters, HYPER_MIN, HYPER_MAX,
    )
    if iters == cfg.fixed_point_max_iters:
        log.debug("hyperparameter fixed point hit %d iterations", iters)
    state.alpha, state.beta = float(alpha), float(beta)
    return state.alpha, state.beta


def sweep(state: GibbsState, c: Collection, cfg: FitConfig, rng: Rng, *, resample_w: bool = True) -> float:
    """One full Gibbs pass, in place. Returns the log joint after the pass."""
    s = state.stats
    k_count = state.k
    if resample_w:
        rise = _rise_table(state.beta, int(s.n_k.max()) if k_count else 0)
        uw = rng.random(k_count)
        for k in range(k_count):
            _redraw_w(
                k, c.t, state.z, state.bins, s.n_kl, state.w_bins, state.w_max,
                c.range.t0, c.range.t1, state.beta, rise, uw[k],
            )
    _z_sweep(state.z, c.unit, state.bins, s.n_ku, s.n_kl, s.n_k, state.w_bins, state.alpha, state.beta, rng.random(c.size))
    if resample_w and cfg.hyper_update:
        update_hyperparameters(state, cfg)
    return log_joint(state, c)


def initial_state(c: Collection, cfg: FitConfig, rng: Rng) -> GibbsState:
    """Unit bin counts; assignments drawn i.i.d. from one symmetric-Dirichlet draw."""
    theta0 = rng.dirichlet(np.full(cfg.k_bases, cfg.alpha0))
    z = rng.choice(cfg.k_bases, size=c.size, p=theta0)
    return GibbsState.build(c, z, np.ones(cfg.k_bases, dtype=np.int64), cfg.alpha0, cfg.beta0, cfg.w_max)


def fit(c: Collection, cfg: FitConfig, rng: Rng | None = None, state: GibbsState | None = None) -> FitResult:
    """Burn in, then average posterior-mean weights and masses over frozen-W sweeps."""
    if c.size == 0:
        raise ValueError("cannot fit an empty collection")
    rng = make_rng(cfg.seed) if rng is None else rng
    state = initial_state(c, cfg, rng) if state is None else state
    k_count, n_units = cfg.k_bases, c.n_units

    lj_trace, w_trace, a_trace, b_trace = [], [], [], []
    for i in range(cfg.burn_in_sweeps):
        try:
            lj = sweep(state, c, cfg, rng)
        except (FloatingPointError, ValueError, ZeroDivisionError) as exc:
            raise FitError(f"numerical failure in burn-in sweep {i + 1}: {exc}") from exc
        lj_trace.append(lj)
        w_trace.append(state.w_bins.copy())
        a_trace.append(state.alpha)
        b_trace.append(state.beta)

    alpha, beta, w_hat = state.alpha, state.beta, state.w_bins.copy()
    n_u = state.stats.n_u.astype(np.float64)
    theta_sum = np.zeros((n_units, k_count))
    phi_sum = [np.zeros(w) for w in w_hat]
    s = state.stats
    for p in range(cfg.posterior_samples):
        try:
            lj = sweep(state, c, cfg, rng, resample_w=False)
        except (FloatingPointError, ValueError, ZeroDivisionError) as exc:
            raise FitError(f"numerical failure in sampling sweep {p + 1}: {exc}") from exc
        lj_trace.append(lj)
        theta_sum += ((alpha + s.n_ku) / (k_count * alpha + n_u)).T
        for k, w in enumerate(w_hat):
            phi_sum[k] += (beta + s.n_kl[k, :w]) / (w * beta + s.n_k[k])

    theta_hat = theta_sum / cfg.posterior_samples
    bases = tuple(Histogram(c.range, ph / cfg.posterior_samples) for ph in phi_sum)
    return FitResult(
        theta_hat=theta_hat,
        bases=bases,
        alpha_hat=alpha,
        beta_hat=beta,
        log_joint_trace=np.array(lj_trace),
        w_trace=np.array(w_trace, dtype=np.int64).reshape(-1, k_count),
        alpha_trace=np.array(a_trace),
        beta_trace=np.array(b_trace),
        config=cfg,
    )


def unit_density(result: FitResult, u: int) -> MixtureDensity:
    """Mixture density of unit ``u`` (1-based)."""
    if not 1 <= u <= result.n_units:
        raise IndexError(f"unit {u} outside [1, {result.n_units}]")
    return MixtureDensity(result.bases, result.theta_hat[u - 1])
