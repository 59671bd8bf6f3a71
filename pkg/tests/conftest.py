"""Shared oracles and corpus builders for the test suite."""

import itertools
import math

import numpy as np
import pytest

from corestrip import Configuration, sample_ap


def brute_force_core(cfg: Configuration, k: int) -> set:
    """Largest vertex subset closed under degree >= k, by exhaustive search.

    Only the tuples fully inside the subset count toward degrees.  The union
    of closed subsets is closed, so the unique maximum is found by scanning
    all 2^n subsets; capped to tiny n by cost.
    """
    live = cfg.tuples[cfg.tuple_alive]
    n = cfg.n
    best: set = set()
    for mask in range(1 << n):
        subset = {v for v in range(n) if (mask >> v) & 1}
        deg = dict.fromkeys(subset, 0)
        for t in live:
            bins = [int(b) for b in t]
            if all(b in subset for b in bins):
                for b in bins:
                    deg[b] += 1
        if all(d >= k for d in deg.values()) and len(subset) > len(best):
            best = subset
    return best


def core_vertex_set(cfg: Configuration) -> set:
    return set(np.nonzero(cfg.vertex_alive)[0].tolist())


def core_tuple_set(cfg: Configuration) -> set:
    return set(np.nonzero(cfg.tuple_alive)[0].tolist())


def small_instances(count: int, seed: int = 0, n_max: int = 10, m_max: int = 6):
    """Yield (cfg, k) over random tiny instances with r in {2,3}, k in {2,3}."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(3, n_max + 1))
        m = int(rng.integers(0, m_max + 1))
        r = int(rng.choice([2, 3]))
        k = int(rng.choice([2, 3]))
        yield sample_ap(n, m, r, int(rng.integers(2 ** 31))), k


def exact_multinomial_probs(N: int, D: int, k: int) -> dict:
    """Enumerated truncated-multinomial law: weights proportional to
    prod 1/d_i! over vectors with sum D and min >= k."""
    vectors = [d for d in itertools.product(range(k, D + 1), repeat=N) if sum(d) == D]
    weights = np.array([np.prod([1.0 / math.factorial(x) for x in d]) for d in vectors])
    weights /= weights.sum()
    return dict(zip(vectors, weights))
