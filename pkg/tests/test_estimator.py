import math

import numpy as np
import pytest

from cascade_msprt import cascade as C
from cascade_msprt import estimator as E
from cascade_msprt import graph as G
from cascade_msprt import obs_model as O
from cascade_msprt.harness import direct_pairwise_llr


def make_state(g, center, n, radius, alpha):
    cands = G.candidate_set(g, center, n)
    cfg = E.MsprtConfig(cands, radius, alpha)
    state = E.init(cfg)
    state._ensure_structs(g)
    return cands, cfg, state


def test_threshold_values():
    g = G.build_line(3000)
    cands = G.candidate_set(g, 1500, 1000)
    assert E.MsprtConfig(cands, 0, 0.1).threshold == pytest.approx(math.log(10000))
    assert math.log(10000) == pytest.approx(9.210340, abs=1e-6)
    cands = G.candidate_set(g, 1500, 500)
    assert E.MsprtConfig(cands, 0, 0.2).threshold == pytest.approx(math.log(2500))
    assert math.log(2500) == pytest.approx(7.824046, abs=1e-6)


def test_config_validation():
    g = G.build_line(9)
    cands = G.candidate_set(g, 4, 5)
    with pytest.raises(ValueError):
        E.MsprtConfig(cands, 0, 0.0)
    with pytest.raises(ValueError):
        E.MsprtConfig(cands, -1, 0.1)


def test_single_candidate_stops_immediately():
    g = G.build_line(9)
    cands, cfg, state = make_state(g, 4, 1, 0, 0.1)
    run = C.start(g, 4, O.gaussian(0, 2), 3)
    E.update(state, C.step(run), g)
    assert state.stopped and state.stopping_time == 0 and state.decision == 4


def test_statistic_infinite_when_ball_covers_candidates():
    g = G.build_line(3)
    cands, cfg, state = make_state(g, 1, 3, 1, 0.1)
    state.a_stat[:] = [5.0, 1.0, 3.0]
    assert E.statistic(state, 1, g) == math.inf


def test_statistic_all_equal_is_zero():
    g = G.build_line(30)
    cands, cfg, state = make_state(g, 15, 9, 0, 0.1)
    assert E.statistic(state, 15, g) == 0.0


def test_statistic_radius_zero_top_two_gap():
    # with R=0 the max statistic is the gap between the two largest A values
    g = G.build_line(30)
    cands, cfg, state = make_state(g, 15, 9, 0, 0.1)
    rng = np.random.default_rng(2)
    state.a_stat[:] = rng.standard_normal(9)
    top = np.sort(state.a_stat)[::-1]
    best_pos = int(state.a_stat.argmax())
    v = int(cands.ordered_vertices[best_pos])
    assert E.statistic(state, v, g) == pytest.approx(top[0] - top[1])
    best, vid = E._max_statistic(state)
    assert best == pytest.approx(top[0] - top[1]) and vid == v


def test_statistic_non_candidate_rejected():
    g = G.build_line(30)
    cands, cfg, state = make_state(g, 15, 5, 0, 0.1)
    with pytest.raises(ValueError):
        E.statistic(state, 0, g)


def test_tie_resolves_to_lowest_vertex_id():
    g = G.build_line(5)
    cands, cfg, state = make_state(g, 2, 5, 1, 0.1)
    vert = cands.ordered_vertices.tolist()
    a = np.zeros(5)
    a[vert.index(0)] = 9.0
    a[vert.index(1)] = 9.0
    state.a_stat[:] = a
    # both vertex 0 and vertex 1 achieve statistic 9 (their radius-1 balls
    # exclude each other from the competitor set)
    assert E.statistic(state, 0, g) == pytest.approx(9.0)
    assert E.statistic(state, 1, g) == pytest.approx(9.0)
    state.time = 0
    E.check_stop(state, g)
    assert state.stopped and state.decision == 0


def test_a_identity_matches_direct_pairwise_llr():
    g = G.build_regular_tree(3, 5)
    model = O.gaussian(0, 2)
    cands, cfg, state = make_state(g, 0, 12, 0, 1e-300)
    rng = np.random.default_rng(8)
    run = C.start(g, 5, model, 99)
    for _ in range(8):
        E.update(state, C.step(run), g)
    for _ in range(30):
        pv, pu = rng.choice(cfg.n, size=2, replace=False)
        v, u = (int(cands.ordered_vertices[i]) for i in (pv, pu))
        z = direct_pairwise_llr(g, model, run, v, u, 7)
        inc = float(state.a_stat[pv] - state.a_stat[pu])
        assert abs(inc - z) <= 1e-9 * max(1.0, abs(z))


def test_sequencing_errors():
    g = G.build_line(20)
    model = O.gaussian(0, 2)
    cands, cfg, state = make_state(g, 10, 5, 0, 0.1)
    run = C.start(g, 10, model, 1)
    obs0 = C.step(run)
    obs1 = C.step(run)
    with pytest.raises(E.SequencingError):
        E.update(state, obs1, g)  # skipped t=0
    E.update(state, obs0, g)
    with pytest.raises(E.SequencingError):
        E.update(state, obs0, g)  # replayed t=0


def test_update_after_stop_rejected():
    g = G.build_line(9)
    cands, cfg, state = make_state(g, 4, 1, 0, 0.1)
    run = C.start(g, 4, O.gaussian(0, 2), 3)
    E.update(state, C.step(run), g)
    assert state.stopped
    with pytest.raises(E.SequencingError):
        E.update(state, C.step(run), g)


def _run_to_stop(g, model, cands, radius, alpha, seed, cap=500):
    cfg = E.MsprtConfig(cands, radius, alpha)
    state = E.init(cfg)
    run = C.start(g, cands.center, model, seed)
    while not state.stopped:
        E.update(state, C.step(run), g)
        if state.time > cap:
            raise RuntimeError("no stop")
    return state


def test_stopping_time_monotone_in_threshold():
    g = G.build_line(200)
    model = O.gaussian(0, 2)
    cands = G.candidate_set(g, 100, 21)
    for seed in range(5):
        t_loose = _run_to_stop(g, model, cands, 0, 0.3, seed).stopping_time
        t_tight = _run_to_stop(g, model, cands, 0, 0.01, seed).stopping_time
        assert t_tight >= t_loose


def test_candidate_permutation_invariance():
    g = G.build_line(200)
    model = O.gaussian(0, 2)
    cands = G.candidate_set(g, 100, 15)
    rng = np.random.default_rng(0)
    perm = rng.permutation(15)
    shuffled = G.CandidateSet(
        cands.center,
        cands.ordered_vertices[perm].copy(),
        cands.distances[perm].copy(),
    )
    for seed in (11, 12, 13):
        a = _run_to_stop(g, model, cands, 0, 0.1, seed)
        b = _run_to_stop(g, model, shuffled, 0, 0.1, seed)
        assert (a.stopping_time, a.decision) == (b.stopping_time, b.decision)


def _fake_result(g, cands, radius, alpha, source, decision, t=5):
    d = G.distance(g, source, decision)
    return E.TrialResult(
        seed=0, n=cands.n, radius=radius, alpha=alpha, true_source=source,
        decision=decision, stopping_time=t, distance_to_source=d,
        success=d <= radius,
    )


def test_audit_flags_adversarial_results():
    g = G.build_line(30)
    cands = G.candidate_set(g, 15, 9)
    cfg = E.MsprtConfig(cands, 0, 0.1)
    results = [_fake_result(g, cands, 0, 0.1, 15, 18) for _ in range(200)]
    report = E.error_guarantee_audit(results, cfg, g)
    assert report.failure_rate == 1.0
    assert not report.alpha_satisfied
    assert report.pairwise_violations


def test_audit_clean_results():
    g = G.build_line(30)
    cands = G.candidate_set(g, 15, 9)
    cfg = E.MsprtConfig(cands, 0, 0.1)
    results = [_fake_result(g, cands, 0, 0.1, 15, 15) for _ in range(200)]
    report = E.error_guarantee_audit(results, cfg, g)
    assert report.failures == 0 and report.alpha_satisfied
    assert 0 < report.failure_wilson_upper < 0.05
    assert not report.pairwise_violations


def test_audit_requires_results():
    g = G.build_line(30)
    cfg = E.MsprtConfig(G.candidate_set(g, 15, 9), 0, 0.1)
    with pytest.raises(ValueError):
        E.error_guarantee_audit([], cfg, g)


def test_wilson_upper_basics():
    assert E._wilson_upper(0, 0) == 1.0
    assert 0 < E._wilson_upper(0, 100) < 0.05
    assert E._wilson_upper(50, 100) > 0.5
