"""Depth analysis of non-core vertices.

The stripping digraph has an edge u -> v whenever, at the step the sequential
engine removed a tuple while processing v, the bin u sat in that tuple.  The
forward closure R+(v) is then a stripping sequence ending at v, so |R+(v)|
upper-bounds the depth of v, while v's round index + 1 lower-bounds it.  A
branch-and-bound oracle computes the exact depth on tiny instances.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from numba import njit

from .apmodel import Configuration
from .errors import DomainError
from .peeling import PeelResult, SlowTrace, parallel_strip, point_incidence, slow_strip

__all__ = [
    "StripDigraph",
    "LayeredReach",
    "build_strip_digraph",
    "reach_set",
    "max_reach",
    "layered_reach",
    "exact_depth",
    "neighborhood",
    "replay_is_valid_sequence",
]

EXACT_DEPTH_BIN_CAP = 12


@dataclass
class StripDigraph:
    """Removal-dependency digraph of one sequential stripping run.

    Edges are stored per source in CSR form (indptr, dst), deduplicated per
    (source, target) pair.  Targets are always non-core vertices.
    """

    n: int
    indptr: np.ndarray
    dst: np.ndarray
    core_mask: np.ndarray      # True where the vertex survived to the core
    layer_of: np.ndarray       # parallel round of each removed vertex, -1 for core

    @property
    def edge_count(self) -> int:
        return int(self.dst.shape[0])

    def out_neighbors(self, v: int) -> np.ndarray:
        return self.dst[self.indptr[v]:self.indptr[v + 1]]


def build_strip_digraph(cfg: Configuration, k: int,
                        slow: tuple[PeelResult, SlowTrace] | None = None) -> StripDigraph:
    """Replay a sequential run's removal log into the dependency digraph.

    ``slow`` short-circuits the internal slow_strip when the caller already
    ran it on the same configuration.
    """
    result, trace = slow if slow is not None else slow_strip(cfg, k)
    n, r = cfg.n, cfg.r
    kills = np.nonzero(trace.ev_tuple >= 0)[0]
    if kills.size:
        tids = trace.ev_tuple[kills]
        tgt = np.repeat(trace.ev_vertex[kills], r)
        src = cfg.tuples[tids].ravel().astype(np.int64)
        keep = src != tgt
        keys = np.unique(src[keep] * n + tgt[keep])
        src = keys // n
        dst = (keys % n).astype(np.int64)
    else:
        src = np.empty(0, dtype=np.int64)
        dst = np.empty(0, dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return StripDigraph(n=n, indptr=indptr, dst=dst,
                        core_mask=result.core.vertex_alive.copy(),
                        layer_of=result.layer_of)


@njit(cache=True)
def _collect_reach(indptr, dst, v, mark, stack):
    top = 0
    stack[top] = v
    top += 1
    mark[v] = True
    cnt = 0
    while top > 0:
        top -= 1
        x = stack[top]
        cnt += 1
        for e in range(indptr[x], indptr[x + 1]):
            w = dst[e]
            if not mark[w]:
                mark[w] = True
                stack[top] = w
                top += 1
    return cnt


@njit(cache=True)
def _max_reach_kernel(indptr, dst, cands, visited, stack):
    best_v = -1
    best = 0
    for ci in range(cands.shape[0]):
        v = cands[ci]
        top = 0
        stack[top] = v
        top += 1
        visited[v] = ci
        cnt = 0
        while top > 0:
            top -= 1
            x = stack[top]
            cnt += 1
            for e in range(indptr[x], indptr[x + 1]):
                w = dst[e]
                if visited[w] != ci:
                    visited[w] = ci
                    stack[top] = w
                    top += 1
        if cnt > best:
            best = cnt
            best_v = v
    return best_v, best


def reach_set(dg: StripDigraph, v: int) -> np.ndarray:
    """Forward closure of v in the digraph, including v, as a sorted array."""
    if not 0 <= v < dg.n:
        raise DomainError(f"vertex {v} out of range")
    if dg.core_mask[v]:
        raise DomainError(f"vertex {v} is in the core; it was never stripped")
    mark = np.zeros(dg.n, dtype=np.bool_)
    stack = np.empty(dg.n, dtype=np.int64)
    _collect_reach(dg.indptr, dg.dst, v, mark, stack)
    return np.nonzero(mark)[0]


def max_reach(cfg: Configuration, k: int,
              slow: tuple[PeelResult, SlowTrace] | None = None,
              dg: StripDigraph | None = None) -> tuple[int | None, int]:
    """Maximum forward-closure size over all non-core vertices.

    Closures overlap, so sizes are computed per start vertex; the scan is
    restricted to vertices with no incoming edge from another non-core vertex,
    since any other vertex's closure is strictly contained in a dominator's.
    """
    if dg is None:
        dg = build_strip_digraph(cfg, k, slow=slow)
    non_core = ~dg.core_mask
    if not np.any(non_core):
        return None, 0
    src = np.repeat(np.arange(dg.n, dtype=np.int64), np.diff(dg.indptr))
    dominated = np.zeros(dg.n, dtype=bool)
    dominated[dg.dst[non_core[src]]] = True
    cands = np.nonzero(non_core & ~dominated)[0]
    visited = np.full(dg.n, -1, dtype=np.int64)
    stack = np.empty(dg.n, dtype=np.int64)
    best_v, best = _max_reach_kernel(dg.indptr, dg.dst, cands, visited, stack)
    return int(best_v), int(best)


@dataclass
class LayeredReach:
    """Layer-by-layer reach envelope of one removed vertex."""

    vertex: int
    round_index: int
    layer_ids: list            # j values, from the vertex's round down to 0
    members: list              # per layer: sorted vertex array R_j
    dminus: list               # per layer: total inbound point count D^-(R_j)

    def union(self) -> np.ndarray:
        if not self.members:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(self.members))


class _DSU:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        while p != self.parent[p]:
            self.parent[p] = self.parent[self.parent[p]]
            p = self.parent[p]
        self.parent[x] = p
        return p

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def layered_reach(cfg: Configuration, k: int, v: int,
                  peel: PeelResult | None = None) -> LayeredReach:
    """Construct the layered sets R_j(v) and their inbound point counts.

    Walking j from the vertex's round down to 0: R_j is the union of the
    components, inside the round-j layer graph, that touch the frontier
    carried over from the layer above; the next frontier is every round-(j-1)
    vertex sharing a then-live tuple with the accumulated set.
    """
    if peel is None:
        peel = parallel_strip(cfg, k)
    if not 0 <= v < cfg.n:
        raise DomainError(f"vertex {v} out of range")
    if peel.layer_of[v] < 0:
        raise DomainError(f"vertex {v} is in the core; it was never stripped")
    i = int(peel.layer_of[v])
    layer_of = peel.layer_of
    tuple_round = peel.tuple_round
    order, indptr = point_incidence(cfg)
    r = cfg.r

    # tuples deleted at round j, for the layer graphs and the d^- counts
    by_round = [np.nonzero(tuple_round == j)[0] for j in range(i + 1)]

    def dminus_of(members: np.ndarray, j: int) -> int:
        if j == 0 or members.size == 0:
            return 0
        prev = set(by_round[j - 1])
        total = 0
        for u in members:
            pts = order[indptr[u]:indptr[u + 1]]
            total += sum(1 for p in pts if int(p) // r in prev)
        return total

    frontier = {v}
    incident_tuples: set[int] = set()
    layer_ids, members_out, dminus_out = [], [], []
    for j in range(i, -1, -1):
        # components of the round-j layer graph come only from round-j tuples
        dsu = _DSU()
        for tid in by_round[j]:
            bins = [int(b) for b in cfg.tuples[tid] if layer_of[b] == j]
            for a, b in zip(bins, bins[1:]):
                dsu.union(a, b)
        roots = {dsu.find(u) for u in frontier}
        members = np.asarray(sorted(u for u in dsu.parent if dsu.find(u) in roots),
                             dtype=np.int64)
        layer_ids.append(j)
        members_out.append(members)
        dminus_out.append(dminus_of(members, j))
        # extend tuple incidence by the new members, then pick the next frontier
        for u in members:
            for p in order[indptr[u]:indptr[u + 1]]:
                incident_tuples.add(int(p) // r)
        if j == 0:
            break
        frontier = set()
        for tid in incident_tuples:
            if tuple_round[tid] >= j - 1 or tuple_round[tid] == -1:
                for b in cfg.tuples[tid]:
                    if layer_of[b] == j - 1:
                        frontier.add(int(b))
        if not frontier:
            # remaining layers contribute nothing
            for jj in range(j - 1, -1, -1):
                layer_ids.append(jj)
                members_out.append(np.empty(0, dtype=np.int64))
                dminus_out.append(0)
            break
    return LayeredReach(vertex=v, round_index=i, layer_ids=layer_ids,
                        members=members_out, dminus=dminus_out)


def exact_depth(cfg: Configuration, k: int, v: int) -> int:
    """Minimum position of v over all stripping sequences, by breadth-first
    search over removed-vertex subsets.  Hard-capped at 12 bins."""
    if cfg.n > EXACT_DEPTH_BIN_CAP:
        raise DomainError(f"exact_depth is capped at {EXACT_DEPTH_BIN_CAP} bins, got n={cfg.n}")
    if not 0 <= v < cfg.n:
        raise DomainError(f"vertex {v} out of range")
    if not cfg.vertex_alive[v]:
        raise DomainError(f"vertex {v} is not present")
    core = parallel_strip(cfg, k)
    if core.layer_of[v] < 0:
        raise DomainError(f"vertex {v} is in the core; it was never stripped")
    live = np.nonzero(cfg.tuple_alive)[0]
    tuple_bits = [int(np.bitwise_or.reduce([1 << int(b) for b in cfg.tuples[t]]))
                  for t in live]
    slots = [[int(b) for b in cfg.tuples[t]] for t in live]
    alive0 = int(sum(1 << u for u in range(cfg.n) if cfg.vertex_alive[u]))

    def light_vertices(removed: int) -> list[int]:
        deg = [0] * cfg.n
        for bits, bins in zip(tuple_bits, slots):
            if bits & removed == 0:
                for b in bins:
                    deg[b] += 1
        return [u for u in range(cfg.n)
                if (alive0 >> u) & 1 and not (removed >> u) & 1 and deg[u] < k]

    seen = {0}
    queue = deque([0])
    while queue:
        state = queue.popleft()
        light = light_vertices(state)
        if v in light:
            return bin(state).count("1") + 1
        for u in light:
            nxt = state | (1 << u)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    raise DomainError(f"vertex {v} is never removable")  # unreachable for non-core v


def neighborhood(cfg: Configuration, A, s: int) -> np.ndarray:
    """All vertices within hypergraph distance <= s of A over live tuples."""
    if s < 0:
        raise DomainError(f"radius s={s} must be nonnegative")
    frontier = np.unique(np.asarray(list(A), dtype=np.int64))
    if frontier.size and (frontier.min() < 0 or frontier.max() >= cfg.n):
        raise DomainError("vertex id out of range in A")
    order, indptr = point_incidence(cfg)
    visited = np.zeros(cfg.n, dtype=bool)
    visited[frontier] = True
    for _ in range(s):
        if frontier.size == 0:
            break
        counts = indptr[frontier + 1] - indptr[frontier]
        total = int(counts.sum())
        if total == 0:
            break
        ends = np.cumsum(counts)
        offsets = np.arange(total, dtype=np.int64) - np.repeat(ends - counts, counts)
        points = order[np.repeat(indptr[frontier], counts) + offsets]
        tids = points // cfg.r
        tids = np.unique(tids[cfg.tuple_alive[tids]])
        bins = np.unique(cfg.tuples[tids].ravel()).astype(np.int64)
        frontier = bins[~visited[bins]]
        visited[frontier] = True
    return np.nonzero(visited)[0]


def replay_is_valid_sequence(cfg: Configuration, k: int, sequence) -> bool:
    """True iff the vertices can be removed in the given order with every one
    light (degree < k) at its removal moment."""
    work = cfg.copy()
    order, indptr = point_incidence(work)
    for v in sequence:
        v = int(v)
        if not work.vertex_alive[v] or work.degree[v] >= k:
            return False
        pts = order[indptr[v]:indptr[v + 1]]
        tids = pts // work.r
        tids = np.unique(tids[work.tuple_alive[tids]])
        work.tuple_alive[tids] = False
        if tids.size:
            work.degree -= np.bincount(work.tuples[tids].ravel(), minlength=work.n)
        work.vertex_alive[v] = False
    return True
