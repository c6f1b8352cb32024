"""Special functions and seeded random streams.

``ln_gamma`` uses the Lanczos approximation (g=7, 9 coefficients) with the
recurrence ``lnG(x) = lnG(x+1) - ln x`` below 0.5. ``digamma`` shifts the
argument above 10 by recurrence and then applies the asymptotic series.
Both are compiled with numba so the Gibbs kernels can call them directly.

Random numbers come from numpy's PCG64 bit generator. Streams are seeded
through ``numpy.random.SeedSequence`` so a (seed, stream key) pair always
reproduces the same sequence, and distinct keys give independent streams.
"""

from __future__ import annotations

import math

import numba
import numpy as np

Rng = np.random.Generator

_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array(
    [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ]
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@numba.njit(cache=True)
def ln_gamma(x):
    """Natural log of the gamma function for ``x > 0``."""
    if not x > 0.0:
        raise ValueError("ln_gamma: argument must be positive")
    if x < 0.5:
        return ln_gamma(x + 1.0) - math.log(x)
    y = x - 1.0
    a = _LANCZOS_COEF[0]
    for i in range(1, 9):
        a += _LANCZOS_COEF[i] / (y + i)
    t = y + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (y + 0.5) * math.log(t) - t + math.log(a)


@numba.njit(cache=True)
def digamma(x):
    """Derivative of ``ln_gamma`` for ``x > 0``."""
    if not x > 0.0:
        raise ValueError("digamma: argument must be positive")
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    r = 1.0 / (x * x)
    # Bernoulli-number tail, Horner form in 1/x^2
    series = r * (
        1.0 / 12.0
        - r
        * (
            1.0 / 120.0
            - r
            * (
                1.0 / 252.0
                - r
                * (
                    1.0 / 240.0
                    - r * (1.0 / 132.0 - r * (691.0 / 32760.0 - r / 12.0))
                )
            )
        )
    )
    return acc + math.log(x) - 0.5 / x - series


@numba.njit(cache=True)
def ln_gamma_array(xs):
    out = np.empty(xs.size)
    flat = xs.ravel()
    for i in range(flat.size):
        out[i] = ln_gamma(flat[i])
    return out.reshape(xs.shape)


@numba.njit(cache=True)
def digamma_array(xs):
    out = np.empty(xs.size)
    flat = xs.ravel()
    for i in range(flat.size):
        out[i] = digamma(flat[i])
    return out.reshape(xs.shape)


@numba.njit(cache=True)
def categorical_from_log(log_weights, u):
    """Inverse-CDF draw (0-based) from unnormalized log weights.

    ``u`` is a uniform variate on [0, 1). Weights are shifted by their
    maximum before exponentiation; ``-inf`` entries are never selected.
    """
    n = log_weights.size
    top = -np.inf
    for i in range(n):
        if log_weights[i] > top:
            top = log_weights[i]
    total = 0.0
    probs = np.empty(n)
    for i in range(n):
        probs[i] = math.exp(log_weights[i] - top)
        total += probs[i]
    target = u * total
    cum = 0.0
    last = 0
    for i in range(n):
        if probs[i] > 0.0:
            cum += probs[i]
            last = i
            if cum > target:
                return i
    return last


def sample_categorical_log(log_weights, rng: Rng) -> int:
    """Draw a 1-based index with probability proportional to ``exp(log_weights)``.

    Raises
    ------
    ValueError
        If the vector is empty, contains NaN or ``+inf``, or every entry
        is ``-inf``.
    """
    lw = np.asarray(log_weights, dtype=np.float64).ravel()
    if lw.size == 0:
        raise ValueError("log_weights must be non-empty")
    if np.isnan(lw).any() or np.isposinf(lw).any():
        raise ValueError("log_weights contains NaN or +inf")
    if np.isneginf(lw).all():
        raise ValueError("log_weights has no finite entry")
    return int(categorical_from_log(lw, rng.random())) + 1


def make_rng(seed: int) -> Rng:
    """PCG64 generator for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def child_rng(seed: int, *stream: int) -> Rng:
    """Independent PCG64 stream identified by ``(seed, *stream)``.

    Equivalent to what ``SeedSequence.spawn`` would hand out, but keyed
    explicitly so the same cell of a benchmark always gets the same stream
    regardless of execution order.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))
