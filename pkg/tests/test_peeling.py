import numpy as np
import pytest

from conftest import brute_force_core, core_tuple_set, core_vertex_set, small_instances
from corestrip import (Configuration, DomainError, core_threshold, drift_prediction,
                       k_core, parallel_strip, sample_ap, slow_strip, theta_of_zeta)
from corestrip.peeling import write_layers_csv, write_trace_csv
from corestrip.thresholds import theta_of_zeta_vec


def test_triangle_is_its_own_2core():
    tri = Configuration.from_tuples(3, 2, [[0, 1], [1, 2], [0, 2]])
    res = parallel_strip(tri, 2)
    assert res.s == 0
    assert core_vertex_set(res.core) == {0, 1, 2}


def test_path3_layers():
    path = Configuration.from_tuples(3, 2, [[0, 1], [1, 2]])
    res = parallel_strip(path, 2)
    assert res.s == 2
    assert res.layer_sizes.tolist() == [2, 1]
    assert res.layer_of.tolist() == [0, 1, 0]
    assert res.core.vertex_count == 0


def test_k4_3core():
    k4 = Configuration.from_tuples(4, 2, [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]])
    res = parallel_strip(k4, 3)
    assert res.s == 0
    assert core_vertex_set(res.core) == {0, 1, 2, 3}


def test_slow_strip_path4_by_hand():
    # queue starts [0, 3]; processing removes tuple {0,1}, dequeues 0, removes
    # {2,3}, dequeues 3, removes {1,2}, dequeues 1 then 2
    path4 = Configuration.from_tuples(4, 2, [[0, 1], [1, 2], [2, 3]])
    res, trace = slow_strip(path4, 2)
    assert trace.psi.tolist() == [0, 3, 1, 2]
    assert trace.step_L[0] == 2
    assert res.core.vertex_count == 0
    assert res.layer_of.tolist() == [0, 1, 1, 0]
    assert trace.t_of_round == {0: 0, 1: 4}
    # conservation: a tuple step frees r points, a dequeue step frees none
    live_points = [path4.live_point_count]
    for et in trace.ev_tuple:
        live_points.append(live_points[-1] - (path4.r if et >= 0 else 0))
    assert live_points[-1] == 0


def test_slow_strip_no_light_vertices():
    tri = Configuration.from_tuples(3, 2, [[0, 1], [1, 2], [0, 2]])
    res, trace = slow_strip(tri, 2)
    assert trace.total_steps == 0
    assert trace.psi.size == 0
    assert res.s == 0


def test_k_core_examples():
    empty = sample_ap(4, 0, 2, 0)
    assert k_core(empty, 2).vertex_count == 0
    single = Configuration.from_tuples(3, 3, [[0, 1, 2]])
    core = k_core(single, 1)
    assert core_vertex_set(core) == {0, 1, 2}
    assert core.live_tuple_count == 1


def test_engines_agree_with_brute_force():
    for cfg, k in small_instances(250, seed=11):
        p = parallel_strip(cfg, k)
        s, _ = slow_strip(cfg, k)
        expected = brute_force_core(cfg, k)
        assert core_vertex_set(p.core) == core_vertex_set(s.core) == expected
        assert core_tuple_set(p.core) == core_tuple_set(s.core)
        assert np.array_equal(p.layer_of, s.layer_of)
        assert np.array_equal(p.tuple_round, s.tuple_round)


def test_engine_equivalence_medium():
    c_rk, _ = core_threshold(3, 2)
    for seed in range(5):
        cfg = sample_ap(10 ** 4, int(0.9 * 10 ** 4), 3, seed)
        p = parallel_strip(cfg, 2)
        s, trace = slow_strip(cfg, 2)
        assert np.array_equal(p.core.vertex_alive, s.core.vertex_alive)
        assert np.array_equal(p.core.tuple_alive, s.core.tuple_alive)
        assert p.s == s.s
        assert np.array_equal(p.layer_sizes, s.layer_sizes)
        # layer partition: sum of layers plus core is everything
        assert p.layer_sizes.sum() + p.core.vertex_count == cfg.n
        trace_L = trace.step_L
        assert np.all(np.abs(np.diff(trace_L)) <= cfg.r * 2)


def test_removal_moment_degrees_are_light():
    # replaying the log, every processed vertex is light at each of its steps
    for cfg, k in small_instances(100, seed=23):
        _, trace = slow_strip(cfg, k)
        work = cfg.copy()
        for v, tid in zip(trace.ev_vertex, trace.ev_tuple):
            assert work.degree[v] < k
            if tid >= 0:
                assert work.tuple_alive[tid]
                work.tuple_alive[tid] = False
                work.degree -= np.bincount(work.tuples[tid].ravel(), minlength=work.n)
            else:
                assert work.degree[v] == 0
                work.vertex_alive[v] = False


def test_layer_correctness_against_removal_log():
    # layer_of(v) == i iff v light in H_i and heavy in H_{i-1}; reconstruct
    # the round-start configurations from tuple_round
    for cfg, k in small_instances(100, seed=31):
        res = parallel_strip(cfg, k)
        for i in range(res.s):
            alive_i = (res.layer_of < 0) | (res.layer_of >= i)
            tuples_i = (res.tuple_round < 0) | (res.tuple_round >= i)
            deg_i = np.bincount(cfg.tuples[tuples_i & cfg.tuple_alive].ravel(),
                                minlength=cfg.n)
            light_i = alive_i & cfg.vertex_alive & (deg_i < k)
            assert set(np.nonzero(res.layer_of == i)[0]) == set(np.nonzero(light_i)[0])


def test_trace_subsampling_and_round_boundaries():
    cfg = sample_ap(5 * 10 ** 4, 4 * 10 ** 4, 3, 3)
    res, trace = slow_strip(cfg, 2)
    stride = -(-cfg.n // 10 ** 4)
    assert stride == 5
    recorded = set(trace.step_t.tolist())
    assert all(t in recorded for t in trace.t_of_round.values())
    assert trace.step_t[-1] == trace.total_steps


def test_drift_prediction_values():
    # theta vanishes at the critical zeta, so prediction reduces to -r L/B
    pred = drift_prediction(1000, 10 ** 4, 25129, 3, 2)
    assert abs(pred + 3 * 1000 / (1000 + 25129)) < 5e-3
    # positive theta with vanishing light share: prediction approaches theta
    theta = theta_of_zeta(2.4, 3, 2)
    assert theta > 0
    assert abs(drift_prediction(1, 10 ** 6, 2400000, 3, 2) - theta) < 1e-5
    with pytest.raises(DomainError):
        drift_prediction(10, 100, 150, 3, 2)
    with pytest.raises(DomainError):
        drift_prediction(0, 100, 300, 3, 2)


def test_drift_matches_simulation_batches():
    # observed one-step light-mass increments vs prediction, mid-run window
    c_rk, _ = core_threshold(3, 2)
    n = 10 ** 5
    cfg = sample_ap(n, round((c_rk - n ** -0.2) * n), 3, 17)
    _, trace = slow_strip(cfg, 2, trace_every=1)
    L, N, D = trace.step_L, trace.step_N, trace.step_D
    dL = np.diff(L)
    eligible = (trace.ev_tuple >= 0) & (L[:-1] > 0) & (N[:-1] > 0) & (D[:-1] > 2 * N[:-1])
    idx = np.nonzero(eligible)[0]
    win = idx[len(idx) // 3: len(idx) // 3 + 10 ** 4]
    theta = theta_of_zeta_vec(D[win] / N[win], 3, 2)
    pred = theta - (theta + 3) * L[win] / (L[win] + D[win])
    resid = dL[win] - pred
    se = resid.std(ddof=1) / np.sqrt(len(win))
    assert abs(resid.mean()) <= 3 * se


def test_subcritical_layer_shape():
    # near-critical subcritical run: layer sizes fall, flatten, then rise
    # until the remaining-vertex count drops below sigma*n (the endgame
    # collapse past that point is excluded)
    c_rk, _ = core_threshold(3, 2)
    n, delta, sigma = 10 ** 6, 0.2, 0.1
    cfg = sample_ap(n, round((c_rk - n ** -delta) * n), 3, 1)
    res = parallel_strip(cfg, 2)
    sizes = res.layer_sizes.astype(float)
    remaining = n - np.concatenate([[0], np.cumsum(sizes)])[:-1]
    i_sigma = int(np.nonzero(remaining >= sigma * n)[0][-1])
    b = 1
    window = int(np.ceil(n ** (delta / 2) / 2))
    lo = b + int(np.argmin(sizes[b:i_sigma + 1]))
    assert b < lo < i_sigma
    y_small, y_big = 0.05, 20.0
    checked = ok = 0
    for i in range(b, i_sigma):
        if lo - window <= i <= lo + window:
            continue
        rate = np.sqrt(sizes[i] / n)
        ratio = sizes[i + 1] / sizes[i]
        checked += 1
        if i < lo - window:
            ok += (1 - y_big * rate) <= ratio <= (1 - y_small * rate)
        else:
            ok += (1 + y_small * rate) <= ratio <= (1 + y_big * rate)
    assert checked >= 5
    assert ok >= 0.95 * checked


def test_trace_csv_writers(tmp_path):
    cfg = sample_ap(200, 150, 3, 2)
    res, trace = slow_strip(cfg, 2)
    tpath = tmp_path / "trace.csv"
    write_trace_csv(trace, tpath)
    lines = tpath.read_text().splitlines()
    assert lines[0] == "t,L,N,D,zeta,theta_psi,theta_emp,round"
    assert len(lines) == trace.step_t.shape[0] + 1
    lpath = tmp_path / "layers.csv"
    write_layers_csv(res, lpath)
    assert lpath.read_text().splitlines()[0] == "i,size"
