"""Random points-in-bins multihypergraphs (allocation + r-partition).

A configuration has rm points allocated uniformly into n bins and partitioned
into m parts of size exactly r; bins play the role of vertices and parts the
role of r-tuples (hyperedges, with repeats allowed).  Conditioned on being
simple this generates the uniform r-uniform hypergraph, so every process in
this package runs on configurations.

The partition is realized as consecutive blocks of r allocated points, which
has the same distribution as allocating points and then partitioning them
uniformly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DomainError, SaturationError, SchemaError
from .thresholds import lambda_of_mean, poisson_tail

__all__ = [
    "Configuration",
    "DegreeStats",
    "sample_ap",
    "is_simple",
    "sample_simple",
    "degree_stats",
    "sample_truncated_multinomial",
    "rho_check",
    "RhoReport",
    "small_component_certificate",
    "save_configuration",
    "load_configuration",
]

SIMPLE_REJECTION_CAP = 10 ** 6
MULTINOMIAL_RESTART_CAP = 10 ** 7


@dataclass
class Configuration:
    """Mutable peeling state: bins, r-tuples, and liveness bookkeeping.

    ``tuples`` never shrinks; removal is expressed through ``tuple_alive`` and
    ``vertex_alive``.  ``degree[v]`` counts the live points of bin v (its slots
    among live tuples), so live points are exactly the slots of live tuples.
    """

    n: int
    r: int
    tuples: np.ndarray                    # (m, r) bin ids, int32
    tuple_alive: np.ndarray               # (m,) bool
    vertex_alive: np.ndarray              # (n,) bool
    degree: np.ndarray                    # (n,) int64
    rejections: int = 0                   # simplicity rejections, set by sample_simple

    @classmethod
    def from_tuples(cls, n: int, r: int, tuples) -> "Configuration":
        arr = np.asarray(tuples, dtype=np.int32).reshape(-1, r)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise DomainError("tuple bin ids must lie in [0, n)")
        degree = np.bincount(arr.ravel(), minlength=n).astype(np.int64)
        return cls(n=n, r=r, tuples=arr,
                   tuple_alive=np.ones(arr.shape[0], dtype=bool),
                   vertex_alive=np.ones(n, dtype=bool),
                   degree=degree)

    @property
    def m(self) -> int:
        return int(self.tuples.shape[0])

    @property
    def live_tuple_count(self) -> int:
        return int(self.tuple_alive.sum())

    @property
    def live_point_count(self) -> int:
        return self.r * self.live_tuple_count

    @property
    def vertex_count(self) -> int:
        return int(self.vertex_alive.sum())

    def total_degree(self) -> int:
        return int(self.degree[self.vertex_alive].sum())

    def live_tuple_ids(self) -> np.ndarray:
        return np.nonzero(self.tuple_alive)[0]

    def copy(self) -> "Configuration":
        return Configuration(n=self.n, r=self.r, tuples=self.tuples,
                             tuple_alive=self.tuple_alive.copy(),
                             vertex_alive=self.vertex_alive.copy(),
                             degree=self.degree.copy(),
                             rejections=self.rejections)

    def check(self) -> None:
        """Assert the structural invariants; test helper."""
        live = self.tuples[self.tuple_alive]
        deg = np.bincount(live.ravel(), minlength=self.n).astype(np.int64)
        if not np.array_equal(deg, self.degree):
            raise AssertionError("degree array inconsistent with live tuples")
        if int(self.degree.sum()) != self.live_point_count:
            raise AssertionError("degree sum != r * live tuple count")
        if live.size and not self.vertex_alive[live.ravel()].all():
            raise AssertionError("live tuple touches a removed vertex")


@dataclass(frozen=True)
class DegreeStats:
    """Heavy/light degree bookkeeping of one configuration at a given k."""

    degrees: np.ndarray      # live degrees of the alive bins
    N: int                   # heavy bins (degree >= k)
    D: int                   # total heavy degree
    L: int                   # total light degree
    zeta: float              # D / N, nan when N == 0
    rho: dict                # heavy degree j -> proportion of heavy bins


def _allocate(rng: np.random.Generator, n: int, m: int, r: int) -> Configuration:
    tuples = rng.integers(0, n, size=(m, r), dtype=np.int32)
    degree = np.bincount(tuples.ravel(), minlength=n).astype(np.int64)
    return Configuration(n=n, r=r, tuples=tuples,
                         tuple_alive=np.ones(m, dtype=bool),
                         vertex_alive=np.ones(n, dtype=bool),
                         degree=degree)


def _validate_nmr(n: int, m: int, r: int) -> None:
    if n < 1:
        raise DomainError(f"need at least one bin (n={n}) to allocate points")
    if m < 0:
        raise DomainError(f"tuple count m={m} must be nonnegative")
    if r < 2:
        raise DomainError(f"tuple arity r={r} must be at least 2")


def sample_ap(n: int, m: int, r: int, seed) -> Configuration:
    """Uniform configuration: rm points allocated u.a.r. into n bins,
    partitioned as consecutive blocks of r."""
    _validate_nmr(n, m, r)
    return _allocate(np.random.default_rng(seed), n, m, r)


def is_simple(cfg: Configuration) -> bool:
    """True iff no live tuple repeats a bin and no two live tuples share the
    same bin multiset."""
    live = cfg.tuples[cfg.tuple_alive]
    if live.shape[0] == 0:
        return True
    rows = np.sort(live, axis=1)
    if (rows[:, 1:] == rows[:, :-1]).any():
        return False
    return np.unique(rows, axis=0).shape[0] == rows.shape[0]


def sample_simple(n: int, m: int, r: int, seed) -> Configuration:
    """Rejection-sample configurations until simple; cap after 10^6 rejections.

    The accepted configuration carries the rejection count in ``rejections``.
    """
    _validate_nmr(n, m, r)
    rng = np.random.default_rng(seed)
    for rejections in range(SIMPLE_REJECTION_CAP + 1):
        cfg = _allocate(rng, n, m, r)
        if is_simple(cfg):
            cfg.rejections = rejections
            return cfg
    raise SaturationError(
        f"no simple configuration found in {SIMPLE_REJECTION_CAP} rejections "
        f"(n={n}, m={m}, r={r}); parameters are far from the m=O(n) regime")


def degree_stats(cfg: Configuration, k: int) -> DegreeStats:
    """Exact heavy/light counts of the live structure."""
    if k < 1:
        raise DomainError(f"k={k} must be at least 1")
    degrees = cfg.degree[cfg.vertex_alive]
    heavy = degrees >= k
    n_heavy = int(heavy.sum())
    d_heavy = int(degrees[heavy].sum())
    l_light = int(degrees[~heavy].sum())
    if n_heavy > 0:
        vals, counts = np.unique(degrees[heavy], return_counts=True)
        rho = {int(j): c / n_heavy for j, c in zip(vals, counts)}
        zeta = d_heavy / n_heavy
    else:
        rho = {}
        zeta = float("nan")
    return DegreeStats(degrees=degrees, N=n_heavy, D=d_heavy, L=l_light,
                       zeta=zeta, rho=rho)


def _truncated_poisson_pmf(lam: float, k: int) -> np.ndarray:
    """pmf table of the Poisson(lam) conditioned on >= k on support k, k+1, ...

    Extended until the remaining tail mass is below float resolution, then
    normalized, so draws from the table are exact up to 2^-52.
    """
    norm = poisson_tail(k, lam)
    pmf = []
    term = math.exp(-lam) * lam ** k / math.factorial(k)
    j = k
    total = 0.0
    cap = k + max(2000, int(20 * lam))
    while total < 1.0 - 1e-16 or len(pmf) < 4:
        pmf.append(term / norm)
        total += term / norm
        j += 1
        term *= lam / j
        if j > cap:
            break
    arr = np.asarray(pmf)
    return arr / arr.sum()


def sample_truncated_multinomial(N: int, D: int, k: int, seed) -> np.ndarray:
    """One draw from the truncated multinomial Multi(N, D, k): D points in
    N bins conditioned on every bin holding at least k.

    Sampled as N iid Poissons conditioned >= k with the rate matching mean
    D/N, restarting until the components sum to exactly D.  Each restart
    draws the iid vector through its value counts (a multinomial over the
    truncated support, which is all the sum test needs); the accepted
    multiset is then arranged uniformly, which is exactly the conditional
    law of the iid vector given its counts.
    """
    if N < 1:
        raise DomainError(f"need N >= 1 bins, got {N}")
    if D < k * N:
        raise DomainError(f"infeasible: D={D} < k*N={k * N}")
    if D == k * N:
        return np.full(N, k, dtype=np.int64)
    lam = lambda_of_mean(D / N, k)
    pmf = _truncated_poisson_pmf(lam, k)
    values = np.arange(k, k + len(pmf), dtype=np.int64)
    rng = np.random.default_rng(seed)
    for _ in range(MULTINOMIAL_RESTART_CAP):
        counts = rng.multinomial(N, pmf)
        if int(counts @ values) == D:
            return rng.permutation(np.repeat(values, counts))
    raise SaturationError(
        f"truncated multinomial: no sum match in {MULTINOMIAL_RESTART_CAP} restarts "
        f"(N={N}, D={D}, k={k})")


@dataclass(frozen=True)
class RhoReport:
    """Deviation of observed heavy-degree proportions from the truncated
    Poisson profile implied by their mean."""

    lam: float                      # matched rate, nan in the degenerate case
    max_abs_dev: float
    dev_by_degree: dict


def rho_check(stats: DegreeStats, k: int) -> RhoReport:
    """Compare stats.rho against the truncated-Poisson proportions with the
    same mean; diagnostic only, never raises on large deviations."""
    if stats.N <= 0:
        raise DomainError("rho_check needs at least one heavy bin")
    degs = sorted(stats.rho)
    if stats.zeta <= k:
        devs = {j: abs(stats.rho[j] - (1.0 if j == k else 0.0)) for j in degs}
        return RhoReport(lam=float("nan"), max_abs_dev=max(devs.values()), dev_by_degree=devs)
    lam = lambda_of_mean(stats.zeta, k)
    fk = poisson_tail(k, lam)
    jmax = max(degs)
    expected = {}
    term = math.exp(-lam) * lam ** k / math.factorial(k)
    j = k
    while j <= jmax or term / fk > 1e-9:
        expected[j] = term / fk
        j += 1
        term *= lam / j
        if j > jmax + 2000:
            break
    devs = {j: abs(stats.rho.get(j, 0.0) - expected.get(j, 0.0))
            for j in sorted(set(degs) | set(expected))}
    return RhoReport(lam=lam, max_abs_dev=max(devs.values()), dev_by_degree=devs)


def small_component_certificate(rho: Mapping[int, float], k: int, K: float = 2.0) -> bool:
    """Degree-profile certificate that all components are logarithmically
    small: rho(1) must strictly dominate K * sum_{j>=2} ((k-1)j(j-1) - j) rho(j).
    """
    total = float(sum(rho.values()))
    if abs(total - 1.0) > 1e-6:
        raise DomainError(f"degree proportions must sum to 1, got {total}")
    rhs = sum(((k - 1) * j * (j - 1) - j) * p for j, p in rho.items() if j >= 2)
    return float(rho.get(1, 0.0)) > K * rhs


def save_configuration(cfg: Configuration, path) -> None:
    """Line-oriented text format: header ``n m r``, then one live tuple per
    line as space-separated bin ids."""
    live = cfg.tuples[cfg.tuple_alive]
    with open(path, "w") as fh:
        fh.write(f"{cfg.n} {live.shape[0]} {cfg.r}\n")
        for row in live:
            fh.write(" ".join(str(int(b)) for b in row) + "\n")


def load_configuration(path) -> Configuration:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise SchemaError(f"{path}: header must be 'n m r'")
        try:
            n, m, r = (int(x) for x in header)
        except ValueError as exc:
            raise SchemaError(f"{path}: non-integer header") from exc
        rows = []
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != r:
                raise SchemaError(f"{path}:{lineno}: expected {r} bin ids")
            rows.append([int(x) for x in parts])
    if len(rows) != m:
        raise SchemaError(f"{path}: header promised {m} tuples, found {len(rows)}")
    arr = np.asarray(rows, dtype=np.int32).reshape(m, r) if m else np.empty((0, r), dtype=np.int32)
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise SchemaError(f"{path}: bin id outside [0, {n})")
    return Configuration.from_tuples(n, r, arr)
