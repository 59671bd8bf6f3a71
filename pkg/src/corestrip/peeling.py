"""The two stripping engines and k-core extraction.

parallel_strip removes, in rounds, every light vertex (degree < k) together
with its incident tuples; the number of rounds is the stripping number s.
slow_strip is the sequential variant: a FIFO queue of light vertices, one
point of the front vertex (plus its r-1 tuple partners) removed per step,
pointless vertices dequeued.  Both terminate with the same k-core.

The sequential engine is the expensive one (one step per point), so its hot
loop is a numba kernel working on flat arrays; the parallel engine is plain
vectorized numpy per round.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .apmodel import Configuration
from .errors import DomainError
from .thresholds import theta_of_zeta, theta_of_zeta_vec

__all__ = [
    "PeelResult",
    "SlowTrace",
    "parallel_strip",
    "slow_strip",
    "k_core",
    "drift_prediction",
    "point_incidence",
]

TRACE_FULL_BELOW = 10 ** 4


def point_incidence(cfg: Configuration) -> tuple[np.ndarray, np.ndarray]:
    """CSR point lists per bin: (order, indptr) with order holding point ids
    (tuple_id * r + slot) sorted by bin, ascending point id within a bin."""
    flat = cfg.tuples.ravel()
    order = np.argsort(flat, kind="stable").astype(np.int64)
    counts = np.bincount(flat, minlength=cfg.n)
    indptr = np.empty(cfg.n + 1, dtype=np.int64)
    indptr[0] = 0
    np.cumsum(counts, out=indptr[1:])
    return order, indptr


def _gather_points(order: np.ndarray, indptr: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Concatenate CSR slices order[indptr[v]:indptr[v+1]] for all v in rows."""
    counts = indptr[rows + 1] - indptr[rows]
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=order.dtype)
    ends = np.cumsum(counts)
    offsets = np.arange(total, dtype=np.int64) - np.repeat(ends - counts, counts)
    return order[np.repeat(indptr[rows], counts) + offsets]


@dataclass
class PeelResult:
    """Outcome of a stripping run."""

    core: Configuration        # terminal configuration, min degree >= k or empty
    s: int                     # stripping number: rounds with a nonempty light set
    layer_sizes: np.ndarray    # |S_0|, ..., |S_{s-1}|
    layer_of: np.ndarray       # per-vertex round index, -1 for core / untouched
    i_max: int                 # last iteration index (== s)
    tuple_round: np.ndarray    # per-tuple deletion round, -1 if never deleted


@dataclass
class SlowTrace:
    """Per-step observables of one slow run.

    ev_vertex/ev_tuple form the removal log: at step t the front vertex
    ev_vertex[t] was processed and tuple ev_tuple[t] deleted (-1 for a
    dequeue step).  step_* arrays are the subsampled state records, taken
    before the step executes, plus one final row.
    """

    psi: np.ndarray            # vertices in removal (dequeue) order
    ev_vertex: np.ndarray
    ev_tuple: np.ndarray
    t_of_round: dict           # round i -> step at which its first vertex hit the front
    step_t: np.ndarray
    step_L: np.ndarray
    step_N: np.ndarray
    step_D: np.ndarray
    step_degk: np.ndarray      # alive heavy bins with degree exactly k
    step_round: np.ndarray
    total_steps: int
    r: int
    k: int

    @property
    def step_zeta(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.step_N > 0, self.step_D / np.maximum(self.step_N, 1), np.nan)

    @property
    def step_theta_psi(self) -> np.ndarray:
        return theta_of_zeta_vec(self.step_zeta, self.r, self.k)

    @property
    def step_theta_emp(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            pbar = np.where(self.step_D > 0, self.k * self.step_degk / np.maximum(self.step_D, 1), np.nan)
        return -1.0 + (self.r - 1) * (self.k - 1) * pbar


def parallel_strip(cfg: Configuration, k: int) -> PeelResult:
    """Run the round-synchronous stripping process to the k-core."""
    if k < 1:
        raise DomainError(f"k={k} must be at least 1")
    work = cfg.copy()
    n = work.n
    order, indptr = point_incidence(work)
    layer_of = np.full(n, -1, dtype=np.int64)
    tuple_round = np.full(work.m, -1, dtype=np.int64)
    layer_sizes = []
    light = np.nonzero(work.vertex_alive & (work.degree < k))[0]
    i = 0
    while light.size:
        layer_of[light] = i
        layer_sizes.append(int(light.size))
        work.vertex_alive[light] = False
        points = _gather_points(order, indptr, light)
        tids = points // work.r
        tids = np.unique(tids[work.tuple_alive[tids]])
        work.tuple_alive[tids] = False
        tuple_round[tids] = i
        slots = work.tuples[tids].ravel()
        work.degree -= np.bincount(slots, minlength=n)
        touched = np.unique(slots)
        light = touched[work.vertex_alive[touched] & (work.degree[touched] < k)]
        i += 1
    return PeelResult(core=work, s=i, layer_sizes=np.asarray(layer_sizes, dtype=np.int64),
                      layer_of=layer_of, i_max=i, tuple_round=tuple_round)


@njit(cache=True)
def _slow_kernel(tuples, order, indptr, tuple_alive, vertex_alive, degree, k,
                 queue, cursor, enqueued, psi_out, layer_of,
                 ev_vertex, ev_tuple, t_of_round, rec_stride,
                 rec_t, rec_L, rec_N, rec_D, rec_degk, rec_round):
    n = degree.shape[0]
    r = tuples.shape[1]
    tail = 0
    L = 0
    N = 0
    D = 0
    degk = 0
    for v in range(n):
        if vertex_alive[v]:
            d = degree[v]
            if d < k:
                queue[tail] = v
                tail += 1
                enqueued[v] = True
                L += d
            else:
                N += 1
                D += d
                if d == k:
                    degk += 1
    head = 0
    t = 0
    nrem = 0
    rec_i = 0
    cur_round = -1
    next_boundary = 0
    while head < tail:
        force = False
        if head == next_boundary:
            cur_round += 1
            t_of_round[cur_round] = t
            next_boundary = tail
            force = True
        if force or t % rec_stride == 0:
            rec_t[rec_i] = t
            rec_L[rec_i] = L
            rec_N[rec_i] = N
            rec_D[rec_i] = D
            rec_degk[rec_i] = degk
            rec_round[rec_i] = cur_round
            rec_i += 1
        v = queue[head]
        if degree[v] == 0:
            head += 1
            vertex_alive[v] = False
            psi_out[nrem] = v
            layer_of[v] = cur_round
            nrem += 1
            ev_vertex[t] = v
            ev_tuple[t] = -1
            t += 1
        else:
            cu = cursor[v]
            while not tuple_alive[order[cu] // r]:
                cu += 1
            cursor[v] = cu
            tid = order[cu] // r
            tuple_alive[tid] = False
            for j in range(r):
                u = tuples[tid, j]
                du = degree[u]
                degree[u] = du - 1
                if du > k:
                    D -= 1
                    if du == k + 1:
                        degk += 1
                elif du == k:
                    N -= 1
                    D -= k
                    degk -= 1
                    L += k - 1
                    if not enqueued[u]:
                        enqueued[u] = True
                        queue[tail] = u
                        tail += 1
                else:
                    L -= 1
            ev_vertex[t] = v
            ev_tuple[t] = tid
            t += 1
    rec_t[rec_i] = t
    rec_L[rec_i] = L
    rec_N[rec_i] = N
    rec_D[rec_i] = D
    rec_degk[rec_i] = degk
    rec_round[rec_i] = cur_round
    rec_i += 1
    return t, nrem, cur_round + 1, rec_i


def slow_strip(cfg: Configuration, k: int, trace_every: int | None = None
               ) -> tuple[PeelResult, SlowTrace]:
    """Run the sequential engine; returns the peel result plus the full trace.

    trace_every overrides the state-record stride (default: every step for
    n <= 1e4, every ceil(n / 1e4) steps above; round starts and the final
    state are always recorded).
    """
    if k < 1:
        raise DomainError(f"k={k} must be at least 1")
    work = cfg.copy()
    n, m, r = work.n, work.m, work.r
    order, indptr = point_incidence(work)
    stride = trace_every if trace_every is not None else max(1, -(-n // TRACE_FULL_BELOW))
    if stride < 1:
        raise DomainError("trace_every must be >= 1")
    max_steps = n + m + 1
    nrec = max_steps // stride + n + 4
    queue = np.empty(n, dtype=np.int64)
    cursor = indptr[:n].copy()
    enqueued = np.zeros(n, dtype=np.bool_)
    psi_out = np.empty(n, dtype=np.int64)
    layer_of = np.full(n, -1, dtype=np.int64)
    ev_vertex = np.empty(max_steps, dtype=np.int64)
    ev_tuple = np.empty(max_steps, dtype=np.int64)
    t_of_round = np.full(n + 2, -1, dtype=np.int64)
    rec = [np.empty(nrec, dtype=np.int64) for _ in range(6)]
    total, nrem, rounds, rec_n = _slow_kernel(
        work.tuples, order, indptr, work.tuple_alive, work.vertex_alive,
        work.degree, k, queue, cursor, enqueued, psi_out, layer_of,
        ev_vertex, ev_tuple, t_of_round, stride, *rec)
    layer_sizes = (np.bincount(layer_of[layer_of >= 0], minlength=rounds)
                   if rounds else np.empty(0, dtype=np.int64))
    # tuple deletion rounds, replayed from the log
    tuple_round = np.full(m, -1, dtype=np.int64)
    kills = ev_tuple[:total] >= 0
    if np.any(kills):
        killed_at = np.nonzero(kills)[0]
        round_of_step = np.searchsorted(t_of_round[:rounds], killed_at, side="right") - 1
        tuple_round[ev_tuple[killed_at]] = round_of_step
    result = PeelResult(core=work, s=rounds, layer_sizes=layer_sizes,
                        layer_of=layer_of, i_max=rounds, tuple_round=tuple_round)
    trace = SlowTrace(psi=psi_out[:nrem].copy(),
                      ev_vertex=ev_vertex[:total].copy(),
                      ev_tuple=ev_tuple[:total].copy(),
                      t_of_round={int(i): int(t_of_round[i]) for i in range(rounds)},
                      step_t=rec[0][:rec_n].copy(), step_L=rec[1][:rec_n].copy(),
                      step_N=rec[2][:rec_n].copy(), step_D=rec[3][:rec_n].copy(),
                      step_degk=rec[4][:rec_n].copy(), step_round=rec[5][:rec_n].copy(),
                      total_steps=int(total), r=r, k=k)
    return result, trace


def k_core(cfg: Configuration, k: int) -> Configuration:
    """Maximum sub-configuration with minimum degree >= k (possibly empty)."""
    return parallel_strip(cfg, k).core


def write_trace_csv(trace: SlowTrace, path) -> None:
    """Step-state records as CSV with columns t,L,N,D,zeta,theta_psi,theta_emp,round."""
    zeta = trace.step_zeta
    th_psi = trace.step_theta_psi
    th_emp = trace.step_theta_emp
    with open(path, "w") as fh:
        fh.write("t,L,N,D,zeta,theta_psi,theta_emp,round\n")
        for i in range(trace.step_t.shape[0]):
            fh.write(f"{trace.step_t[i]},{trace.step_L[i]},{trace.step_N[i]},"
                     f"{trace.step_D[i]},{zeta[i]!r},{th_psi[i]!r},{th_emp[i]!r},"
                     f"{trace.step_round[i]}\n")


def write_layers_csv(result: PeelResult, path) -> None:
    """Round sizes as CSV with columns i,size."""
    with open(path, "w") as fh:
        fh.write("i,size\n")
        for i, size in enumerate(result.layer_sizes):
            fh.write(f"{i},{int(size)}\n")


def drift_prediction(L: int, N: int, D: int, r: int, k: int) -> float:
    """Expected one-step change of the light degree mass in the sequential
    engine at state (L, N, D): theta - (theta + r) * L / (L + D), with theta
    evaluated at the heavy-side mean degree D/N."""
    if L <= 0 or N <= 0:
        raise DomainError("drift_prediction needs L > 0 and N > 0")
    if D <= k * N:
        raise DomainError(f"degenerate heavy-side mean: D={D} <= k*N={k * N}")
    theta = theta_of_zeta(D / N, r, k)
    return theta - (theta + r) * L / (L + D)
