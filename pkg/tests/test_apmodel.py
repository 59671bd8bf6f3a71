import math
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from conftest import exact_multinomial_probs
from corestrip import (Configuration, DomainError, SaturationError, degree_stats,
                       is_simple, load_configuration, rho_check, sample_ap,
                       sample_simple, sample_truncated_multinomial,
                       save_configuration, small_component_certificate)
from corestrip.apmodel import DegreeStats


def test_sample_ap_empty_and_single_bin():
    cfg = sample_ap(5, 0, 3, 1)
    assert cfg.live_tuple_count == 0
    assert cfg.degree.sum() == 0
    cfg = sample_ap(1, 4, 3, 1)
    assert cfg.degree[0] == 12
    assert cfg.live_tuple_count == 4


def test_sample_ap_validation():
    with pytest.raises(DomainError):
        sample_ap(0, 3, 3, 1)
    with pytest.raises(DomainError):
        sample_ap(5, -1, 3, 1)
    with pytest.raises(DomainError):
        sample_ap(5, 3, 1, 1)


def test_sample_ap_degree_sum_and_determinism():
    for seed in range(5):
        cfg = sample_ap(50, 30, 3, seed)
        assert cfg.degree.sum() == 90
        cfg.check()
    a = sample_ap(100, 60, 3, 7)
    b = sample_ap(100, 60, 3, 7)
    assert np.array_equal(a.tuples, b.tuples)


def test_sample_ap_mean_degree_concentration():
    vals = [sample_ap(10 ** 4, 8 * 10 ** 3, 3, s).degree.mean() for s in range(10)]
    assert abs(np.mean(vals) - 2.4) < 0.05


def test_sample_ap_degree_distribution_poisson():
    # bin degrees of AP(n, cn) converge to Poisson(rc)
    n, c, r = 10 ** 5, 0.8, 3
    cfg = sample_ap(n, int(c * n), r, 123)
    lam = r * c
    counts = np.bincount(cfg.degree, minlength=16)[:16]
    probs = np.array([np.exp(-lam) * lam ** j / math.factorial(j) for j in range(16)])
    expected = probs / probs.sum() * counts.sum()
    stat, p = chisquare(counts, expected)
    assert p > 0.001


def test_is_simple_cases():
    assert is_simple(Configuration.from_tuples(3, 3, [[0, 1, 2]]))
    assert not is_simple(Configuration.from_tuples(3, 3, [[0, 0, 1]]))
    assert not is_simple(Configuration.from_tuples(3, 3, [[0, 1, 2], [2, 1, 0]]))
    assert is_simple(Configuration.from_tuples(3, 2, []))


def test_sample_simple():
    rejections = []
    for seed in range(20):
        cfg = sample_simple(100, 50, 3, seed)
        assert is_simple(cfg)
        rejections.append(cfg.rejections)
    # acceptance probability is bounded away from zero: typically <= 10 tries
    assert np.median(rejections) <= 10
    assert max(rejections) <= 100
    cfg = sample_simple(3, 1, 3, 0)
    assert sorted(cfg.tuples[0].tolist()) == [0, 1, 2]


def test_sample_simple_saturates():
    import corestrip.apmodel as apmodel
    old = apmodel.SIMPLE_REJECTION_CAP
    apmodel.SIMPLE_REJECTION_CAP = 50
    try:
        with pytest.raises(SaturationError):
            sample_simple(1, 1, 3, 0)  # no simple tuple exists on one bin
    finally:
        apmodel.SIMPLE_REJECTION_CAP = old


def test_degree_stats_cases():
    empty = sample_ap(4, 0, 2, 0)
    st = degree_stats(empty, 2)
    assert (st.N, st.D, st.L) == (0, 0, 0)
    k4 = Configuration.from_tuples(4, 2, [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]])
    st = degree_stats(k4, 3)
    assert (st.N, st.D, st.L) == (4, 12, 0)
    assert st.zeta == 3.0
    assert st.rho == {3: 1.0}
    path = Configuration.from_tuples(3, 2, [[0, 1], [1, 2]])
    st = degree_stats(path, 2)
    assert (st.N, st.D, st.L) == (1, 2, 2)


def test_truncated_multinomial_edges():
    assert sample_truncated_multinomial(4, 8, 2, 0).tolist() == [2, 2, 2, 2]
    assert sample_truncated_multinomial(1, 7, 2, 0).tolist() == [7]
    with pytest.raises(DomainError):
        sample_truncated_multinomial(2, 3, 2, 0)
    with pytest.raises(DomainError):
        sample_truncated_multinomial(0, 3, 2, 0)


def test_truncated_multinomial_two_bins_balance():
    counts = Counter(tuple(sample_truncated_multinomial(2, 5, 2, s)) for s in range(10 ** 4))
    assert set(counts) == {(2, 3), (3, 2)}
    assert abs(counts[(2, 3)] / 10 ** 4 - 0.5) < 0.02


@pytest.mark.parametrize("N,D,k", [(2, 5, 2), (3, 7, 1), (3, 9, 2), (2, 6, 1)])
def test_truncated_multinomial_matches_enumeration(N, D, k):
    probs = exact_multinomial_probs(N, D, k)
    draws = 10 ** 5
    counts = Counter(tuple(sample_truncated_multinomial(N, D, k, 40_000 + s))
                     for s in range(draws))
    assert set(counts) <= set(probs)
    tv = 0.5 * sum(abs(counts.get(d, 0) / draws - p) for d, p in probs.items())
    assert tv <= 0.02


def _stats_from_vector(deg: np.ndarray, k: int) -> DegreeStats:
    vals, cnts = np.unique(deg, return_counts=True)
    return DegreeStats(degrees=deg, N=len(deg), D=int(deg.sum()), L=0,
                       zeta=float(deg.mean()),
                       rho={int(v): c / len(deg) for v, c in zip(vals, cnts)})


def test_rho_check_degenerate_and_sampled():
    st = _stats_from_vector(np.full(100, 2), 2)
    rep = rho_check(st, 2)
    assert rep.max_abs_dev == 0.0
    deg = sample_truncated_multinomial(10 ** 4, 3 * 10 ** 4, 2, 5)
    rep = rho_check(_stats_from_vector(deg, 2), 2)
    assert rep.max_abs_dev <= 0.02
    # adversarial profile: reported, not rejected
    bad = np.concatenate([np.full(50, 2), np.full(50, 20)])
    rep = rho_check(_stats_from_vector(bad, 2), 2)
    assert rep.max_abs_dev > 0.1


def test_small_component_certificate():
    assert small_component_certificate({1: 1.0}, k=2, K=10.0)
    # all mass on degree 2 at k=2: the j=2 coefficient vanishes and the strict
    # inequality 0 > 0 fails
    assert not small_component_certificate({2: 1.0}, k=2, K=1.0)
    assert not small_component_certificate({1: 0.1, 3: 0.9}, k=2, K=2.0)
    with pytest.raises(DomainError):
        small_component_certificate({1: 0.4}, k=2)


def test_save_load_roundtrip(tmp_path):
    cfg = sample_ap(30, 20, 3, 9)
    path = tmp_path / "cfg.txt"
    save_configuration(cfg, path)
    back = load_configuration(path)
    assert back.n == cfg.n and back.r == cfg.r
    assert np.array_equal(back.tuples, cfg.tuples)
    header = path.read_text().splitlines()[0]
    assert header == "30 20 3"
