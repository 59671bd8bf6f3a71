"""Bins-only auxiliary removal process.

Points are allocated to bins conditioned on every bin holding at least k;
each step deletes one uniformly random live point, and a bin dropping below
k is deleted together with its remaining points.  The trace of (N_hat, D_hat)
isolates the drift of the heavy-side mean degree zeta_hat from everything
else the stripping engines do.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

from .apmodel import sample_truncated_multinomial
from .errors import DomainError
from .thresholds import theta_of_zeta_vec

__all__ = ["BinTrace", "run_bin_process"]


@njit(cache=True)
def _bin_kernel(deg, pts, u, k, stop_below, rec_n, rec_d):
    nbins = deg.shape[0]
    live_bins = nbins
    d_tot = 0
    for b in range(nbins):
        d_tot += deg[b]
    plen = d_tot
    t = 0
    rec_n[0] = live_bins
    rec_d[0] = d_tot
    ui = 0
    while live_bins >= stop_below and live_bins > 0:
        while True:
            idx = np.int64(u[ui] * plen)
            ui += 1
            if idx >= plen:
                idx = plen - 1
            b = pts[idx]
            plen -= 1
            pts[idx] = pts[plen]
            if deg[b] > 0:
                break
            # stale entry of an already-deleted bin: compacted, draw again
        db = deg[b] - 1
        if db < k:
            deg[b] = 0
            live_bins -= 1
            d_tot -= db + 1
        else:
            deg[b] = db
            d_tot -= 1
        t += 1
        rec_n[t] = live_bins
        rec_d[t] = d_tot
    return t


@dataclass
class BinTrace:
    """Per-step record of the bins-only process; row t is the state after t
    removals (row 0 is the initial allocation)."""

    N_hat: np.ndarray
    D_hat: np.ndarray
    tau_1_sigma: int           # last t with N_hat >= sigma * n_ref
    k: int
    r: int
    sigma: float
    n_ref: int

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.N_hat.shape[0], dtype=np.int64)

    @cached_property
    def zeta_hat(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.N_hat > 0, self.D_hat / np.maximum(self.N_hat, 1), np.nan)

    @cached_property
    def theta_hat(self) -> np.ndarray:
        """Drift parameter at each step; nan where zeta_hat is degenerate."""
        return theta_of_zeta_vec(self.zeta_hat, self.r, self.k)

    @cached_property
    def zeta_cap_violation(self) -> np.ndarray:
        """Steps where zeta_hat leaves the analysable band below r(k-1)."""
        with np.errstate(invalid="ignore"):
            return self.zeta_hat >= self.r * (self.k - 1) - 0.01


def run_bin_process(N: int, D: int, k: int, r: int, sigma: float, n_ref: int,
                    seed) -> BinTrace:
    """Run the process from a fresh Multi(N, D, k) allocation until fewer than
    sigma * n_ref bins remain."""
    if N < 1:
        raise DomainError(f"need N >= 1 bins, got {N}")
    if D < k * N:
        raise DomainError(f"infeasible: D={D} < k*N={k * N}")
    if not 0 < sigma < 1:
        raise DomainError(f"sigma={sigma} must lie in (0, 1)")
    if n_ref < 1:
        raise DomainError(f"n_ref={n_ref} must be positive")
    if k < 1 or r < 2:
        raise DomainError(f"need k >= 1 and r >= 2, got k={k}, r={r}")
    init_seq, run_seq = np.random.SeedSequence(seed).spawn(2)
    deg = sample_truncated_multinomial(N, D, k, init_seq).astype(np.int64)
    pts = np.repeat(np.arange(N, dtype=np.int64), deg)
    u = np.random.default_rng(run_seq).random(2 * D + 2)
    rec_n = np.empty(D + 1, dtype=np.int64)
    rec_d = np.empty(D + 1, dtype=np.int64)
    steps = _bin_kernel(deg, pts, u, k, sigma * n_ref, rec_n, rec_d)
    n_hat = rec_n[:steps + 1].copy()
    thresh = sigma * n_ref
    below = np.nonzero(n_hat < thresh)[0]
    tau_1 = int(below[0]) - 1 if below.size else steps
    return BinTrace(N_hat=n_hat, D_hat=rec_d[:steps + 1].copy(),
                    tau_1_sigma=tau_1, k=k, r=r, sigma=sigma, n_ref=n_ref)


def write_bin_trace_csv(trace: BinTrace, path) -> None:
    """Trace as CSV with columns t,Nhat,Dhat,zetahat,thetahat."""
    zeta = trace.zeta_hat
    theta = trace.theta_hat
    with open(path, "w") as fh:
        fh.write("t,Nhat,Dhat,zetahat,thetahat\n")
        for i in range(trace.N_hat.shape[0]):
            fh.write(f"{i},{trace.N_hat[i]},{trace.D_hat[i]},{zeta[i]!r},{theta[i]!r}\n")
