"""Two-configuration coupling and the slowed-down stripping construction.

A denser configuration H' is sampled first; H is obtained by deleting a
uniform random batch of its tuples, so H is marginally a plain sample at the
smaller density while H is a sub-configuration of H'.  Rounds of the
synchronous process on H' are mirrored onto H until the round tau'(B) at
which H's light layer first drops below n*xi'; the mirrored state at that
round is the handoff configuration G0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .apmodel import Configuration, degree_stats, sample_ap
from .errors import DomainError
from .peeling import point_incidence
from .thresholds import core_threshold

__all__ = ["CouplingReport", "couple_pair", "slowed_strip", "strip_round"]


def _nearest_int(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass
class CouplingReport:
    n: int
    r: int
    k: int
    B: int
    c: float                   # realized density of H
    c_prime: float             # realized density of H'
    xi: float                  # |c - c_rk|
    xi_prime: float            # c' - c_rk
    deletions: int             # tuples deleted to produce H from H'
    tau_prime_B: int
    X: int                     # deleted tuples still present in H'_{tau'(B)}
    L0: int                    # light degree mass of G0
    zeta0: float               # heavy-side mean degree of G0
    G0: Configuration
    degenerate: bool           # H' ran out before the stopping rule fired
    condc_ok: bool             # finite-n surrogate of the density-gap condition
    s_prime_sizes: np.ndarray = field(default=None, repr=False)  # |S'_t| per round

    def summary(self) -> dict:
        gap = self.c_prime - self.c
        scale = gap * self.n
        return {
            "n": self.n, "r": self.r, "k": self.k, "B": self.B,
            "c": self.c, "c_prime": self.c_prime,
            "xi": self.xi, "xi_prime": self.xi_prime,
            "deletions": self.deletions, "tau_prime_B": self.tau_prime_B,
            "X": self.X, "L0": self.L0, "zeta0": self.zeta0,
            "X_ratio": self.X / scale if scale else float("nan"),
            "L0_ratio": self.L0 / scale if scale else float("nan"),
            "degenerate": self.degenerate, "condc_ok": self.condc_ok,
        }


def couple_pair(n: int, c: float, c_prime: float, r: int, seed
                ) -> tuple[Configuration, Configuration]:
    """Sample H' at density c' and delete round((c'-c)n) uniform tuples to get
    H; returns (H_prime, H) sharing one tuple table."""
    if c_prime <= c:
        raise DomainError(f"need c_prime > c, got c={c}, c_prime={c_prime}")
    if c < 0:
        raise DomainError(f"density c={c} must be nonnegative")
    m_prime = _nearest_int(c_prime * n)
    deletions = _nearest_int((c_prime - c) * n)
    if deletions > m_prime:
        raise DomainError(f"deletion count {deletions} exceeds m'={m_prime}")
    rng = np.random.default_rng(seed)
    h_prime = sample_ap(n, m_prime, r, rng)
    h = h_prime.copy()
    if deletions:
        doomed = rng.choice(m_prime, size=deletions, replace=False)
        h.tuple_alive[doomed] = False
        h.degree -= np.bincount(h_prime.tuples[doomed].ravel(), minlength=n)
    return h_prime, h


def _remove_round(cfg: Configuration, vertices: np.ndarray,
                  order: np.ndarray, indptr: np.ndarray) -> None:
    """Delete a vertex batch with its incident live tuples, in place."""
    counts = indptr[vertices + 1] - indptr[vertices]
    total = int(counts.sum())
    if total:
        ends = np.cumsum(counts)
        offsets = np.arange(total, dtype=np.int64) - np.repeat(ends - counts, counts)
        points = order[np.repeat(indptr[vertices], counts) + offsets]
        tids = points // cfg.r
        tids = np.unique(tids[cfg.tuple_alive[tids]])
        cfg.tuple_alive[tids] = False
        if tids.size:
            cfg.degree -= np.bincount(cfg.tuples[tids].ravel(), minlength=cfg.n)
    cfg.vertex_alive[vertices] = False


def slowed_strip(h_prime: Configuration, h: Configuration, k: int, B: int,
                 sigma_unused: float | None = None) -> CouplingReport:
    """Mirror synchronous rounds of H' onto H up to tau'(B) and report the
    handoff state.

    tau'(B) is the first round t >= B whose light layer in H' has at most
    n*xi' vertices; if H' runs out first, tau' is the final round and the
    report is flagged degenerate.
    """
    if B < 1:
        raise DomainError(f"B={B} must be at least 1")
    if h_prime.tuples is not h.tuples and not np.array_equal(h_prime.tuples, h.tuples):
        raise DomainError("H is not a sub-configuration of H': tuple tables differ")
    if np.any(h.tuple_alive & ~h_prime.tuple_alive):
        raise DomainError("H is not a sub-configuration of H': extra live tuples")
    n, r = h.n, h.r
    deleted = h_prime.tuple_alive & ~h.tuple_alive
    c_prime = h_prime.live_tuple_count / n
    c = h.live_tuple_count / n
    c_rk, _ = core_threshold(r, k)
    xi_prime = c_prime - c_rk
    hp = h_prime.copy()
    hh = h.copy()
    order, indptr = point_incidence(hp)
    threshold = n * xi_prime
    sizes = []
    t = 0
    degenerate = False
    while True:
        light = np.nonzero(hp.vertex_alive & (hp.degree < k))[0]
        if light.size == 0:
            degenerate = True
            break
        if t >= B and light.size <= threshold:
            break
        sizes.append(int(light.size))
        _remove_round(hp, light, order, indptr)
        _remove_round(hh, light, order, indptr)
        t += 1
    stats = degree_stats(hh, k)
    x_surviving = int((deleted & hp.tuple_alive).sum())
    gap = c_prime - c
    return CouplingReport(
        n=n, r=r, k=k, B=B, c=c, c_prime=c_prime,
        xi=abs(c - c_rk), xi_prime=xi_prime,
        deletions=int(deleted.sum()), tau_prime_B=t, X=x_surviving,
        L0=stats.L, zeta0=stats.zeta, G0=hh, degenerate=degenerate,
        condc_ok=bool(xi_prime > 0 and gap <= 0.1 * math.sqrt(xi_prime)),
        s_prime_sizes=np.asarray(sizes, dtype=np.int64))


def strip_round(cfg: Configuration, k: int) -> Configuration:
    """One synchronous round: remove every light vertex with its tuples."""
    out = cfg.copy()
    order, indptr = point_incidence(out)
    light = np.nonzero(out.vertex_alive & (out.degree < k))[0]
    if light.size:
        _remove_round(out, light, order, indptr)
    return out
