import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from histlda.histogram import Range
from histlda.model import Collection, GibbsState, SuffStats, log_joint, recount

R02 = Range(0.0, 2.0)

TINY_T = [0.15, 0.45, 1.2, 1.85]
TINY_UNIT = [0, 0, 1, 1]


def random_collection(seed, n=50, n_units=4, rng_=R02):
    g = np.random.default_rng(seed)
    t = g.uniform(rng_.t0, rng_.t1, n)
    unit = g.integers(0, n_units, n)
    return Collection(rng_, t, unit, n_units)


def random_state(seed, c, k=3, w_max=12, alpha=0.7, beta=0.3):
    g = np.random.default_rng(seed + 1000)
    z = g.integers(0, k, c.size)
    w = g.integers(1, w_max + 1, k)
    return GibbsState.build(c, z, w, alpha, beta, w_max)


def test_collection_validation():
    with pytest.raises(ValueError):
        Collection(R02, [0.1, 2.0], [0, 0], 1)
    with pytest.raises(ValueError):
        Collection(R02, [0.1], [3], 2)
    c = Collection.from_units([[0.1, 0.1], [], [1.5]])
    assert c.n_units == 3 and c.size == 3
    assert list(c.n_u) == [2, 0, 1]
    with pytest.raises(ValueError):
        c.t[0] = 0.5


def test_recount_empty():
    c = Collection(R02, [], [], 3)
    s = recount(np.array([], dtype=int), [2, 5], c, 5)
    assert s.n_ku.shape == (2, 3) and not s.n_ku.any() and not s.n_kl.any()
    assert not s.n_k.any() and not s.n_u.any()


def test_recount_single_cell():
    c = random_collection(1)
    s = recount(np.zeros(c.size, dtype=int), [1], c, 4)
    assert s.n_kl[0, 0] == c.size
    assert np.array_equal(s.n_ku[0], c.n_u)


@pytest.mark.parametrize("seed", range(5))
def test_recount_matches_naive(seed):
    c = random_collection(seed)
    z = np.random.default_rng(seed).integers(0, 3, c.size)
    w = [3, 1, 7]
    s = recount(z, w, c, 8)
    n_ku, n_kl = oracles.naive_counts(c.t, c.unit, z, w, c.n_units, 0.0, 2.0, 8)
    assert np.array_equal(s.n_ku, n_ku)
    assert np.array_equal(s.n_kl, n_kl)
    s.check_marginals()


def test_recount_argument_errors():
    c = random_collection(0, n=5)
    with pytest.raises(ValueError):
        recount([0, 0, 0, 0, 3], [1, 1, 1], c, 2)
    with pytest.raises(ValueError):
        recount([0] * 5, [3], c, 2)
    with pytest.raises(ValueError):
        recount([0] * 4, [1], c, 2)


def test_log_joint_empty():
    c = Collection(R02, [], [], 2)
    st_ = GibbsState.build(c, [], [1, 3], 0.5, 0.5, 7)
    assert log_joint(st_, c) == pytest.approx(-2 * math.log(7), abs=1e-14)


def test_log_joint_single_observation():
    c = Collection(R02, [0.3], [0], 1)
    st_ = GibbsState.build(c, [0], [1], 0.5, 0.5, 5)
    assert log_joint(st_, c) == pytest.approx(-math.log(5) + math.log(0.5), abs=1e-13)


@pytest.mark.parametrize("seed", range(6))
def test_log_joint_matches_gamma_and_urn_oracles(seed):
    c = random_collection(seed, n=40)
    s = random_state(seed, c)
    args = (c.t, c.unit, s.z, s.w_bins, c.n_units, s.alpha, s.beta, s.w_max, 0.0, 2.0)
    assert log_joint(s, c) == pytest.approx(oracles.log_joint_gamma(*args), abs=1e-9)
    assert log_joint(s, c) == pytest.approx(oracles.log_joint_urn(*args), abs=1e-9)


def test_tiny_instance_total_probability():
    """exp(log_joint) summed over all 144 (z, W) equals the urn-oracle total."""
    c = Collection(R02, TINY_T, TINY_UNIT, 2)
    total, ref = 0.0, 0.0
    configs = 0
    for z in itertools.product(range(2), repeat=4):
        for w in itertools.product(range(1, 4), repeat=2):
            s = GibbsState.build(c, z, w, 0.5, 0.5, 3)
            total += math.exp(log_joint(s, c))
            ref += math.exp(oracles.log_joint_urn(c.t, c.unit, z, w, 2, 0.5, 0.5, 3, 0.0, 2.0))
            configs += 1
    assert configs == 144
    assert total == pytest.approx(ref, rel=1e-12)


def test_log_joint_alpha_beta_override():
    c = random_collection(3)
    s = random_state(3, c)
    s2 = s.copy()
    s2.alpha, s2.beta = 2.0, 0.1
    assert log_joint(s, c, alpha=2.0, beta=0.1) == log_joint(s2, c)


@given(st.integers(0, 10_000))
def test_log_joint_exchangeable(seed):
    c = random_collection(seed % 50, n=30)
    s = random_state(seed, c)
    perm = np.random.default_rng(seed).permutation(c.size)
    c2 = Collection(c.range, c.t[perm], c.unit[perm], c.n_units)
    s2 = GibbsState.build(c2, s.z[perm], s.w_bins, s.alpha, s.beta, s.w_max)
    assert log_joint(s, c) == log_joint(s2, c2)


@given(st.integers(0, 10_000))
def test_log_joint_relabel_invariant(seed):
    c = random_collection(seed % 50, n=30)
    s = random_state(seed, c, k=4)
    perm = np.random.default_rng(seed).permutation(4)
    inv = np.argsort(perm)
    s2 = GibbsState.build(c, inv[s.z], s.w_bins[perm], s.alpha, s.beta, s.w_max)
    assert log_joint(s, c) == log_joint(s2, c)


def test_suffstats_equality_and_copy():
    c = random_collection(2)
    s = random_state(2, c)
    cp = s.stats.copy()
    assert cp == s.stats
    cp.n_k[0] += 1
    assert cp != s.stats
    assert isinstance(cp, SuffStats)


def test_state_rejects_bad_hyperparameters():
    c = random_collection(2, n=3)
    with pytest.raises(ValueError):
        GibbsState.build(c, [0, 0, 0], [1], 0.0, 1.0, 3)
