import math

import numpy as np
import pytest

from cascade_msprt import graph as G
from cascade_msprt import obs_model as O
from cascade_msprt import theory as T


@pytest.fixture(scope="module")
def line200():
    return G.build_line(200)


def test_f_line_examples(line200):
    # r=4 interior pair: f(0..3) = 1, 4, 8, 12
    series = T.growth_series(line200, 98, 102, 3).values
    assert series.tolist() == [1, 4, 8, 12]
    for t in range(4):
        assert T.f_line_closed_form(4, t) == series[t]


def test_f_line_closed_form_matches_bfs(line200):
    for r in (2, 6, 10):
        v, u = 100 - r // 2, 100 + r // 2
        series = T.growth_series(line200, v, u, 25).values
        for t in range(26):
            assert T.f_line_closed_form(r, t) == series[t]


def test_f_line_closed_form_rejects_odd():
    with pytest.raises(ValueError):
        T.f_line_closed_form(3, 1)
    with pytest.raises(ValueError):
        T.f_line_closed_form(0, 1)


def test_f_symmetric_for_interior_pairs(line200):
    assert T.f_vu(line200, 90, 110, 15) == T.f_vu(line200, 110, 90, 15)


def test_F_examples(line200):
    assert T.F_vu(line200, 98, 102, 8) == 2
    assert T.F_vu(line200, 98, 102, 8.5) == 3
    assert T.F_vu(line200, 98, 102, 1) == 0
    with pytest.raises(ValueError):
        T.F_vu(line200, 98, 102, 0)


def test_F_is_ceiling_inverse_of_f(line200):
    g = G.build_regular_tree(3, 6)
    rng = np.random.default_rng(4)
    for host in (line200, g):
        for _ in range(20):
            v, u = rng.integers(0, host.vertex_count, size=2)
            if v == u:
                continue
            v, u = int(v), int(u)
            series = T.growth_series(host, v, u, 8).values
            for t in range(9):
                z = int(series[t])
                if z <= 0:
                    continue
                tt = T.F_vu(host, v, u, z)
                assert tt <= t
                assert T.growth_series(host, v, u, tt).values[tt] >= z
                if tt > 0:
                    assert T.growth_series(host, v, u, tt - 1).values[tt - 1] < z


def test_F_horizon_error_on_saturation():
    g = G.build_line(10)
    with pytest.raises(T.HorizonError):
        T.F_vu(g, 4, 5, 1000)


def test_tree_growth_ratio_approaches_branching():
    g = G.build_regular_tree(3, 14)
    series = T.growth_series(g, 1, 2, 10).values
    inc = np.diff(series.astype(float))
    ratios = inc[1:] / inc[:-1]
    assert abs(ratios[-1] - 2.0) < 0.05  # k - 1 = 2


def test_scan_matches_brute(line200):
    tree = G.build_regular_tree(3, 8)
    cases = [
        (line200, G.candidate_set(line200, 99, 60)),
        (tree, G.candidate_set(tree, 0, 60)),
    ]
    for g, cands in cases:
        for min_dist in (1, 3, 5):
            for z in (2.0, 9.5, 30.0):
                brute = T.max_F_over_pairs(g, cands, min_dist, z, method="brute")
                scan = T.max_F_over_pairs(g, cands, min_dist, z, brute_limit=0)
                assert scan == brute


def test_lower_bound_none_when_radius_too_large():
    g = G.build_line(9)
    cands = G.candidate_set(g, 4, 9)
    assert T.lower_bound(g, cands, 5, 0.1, O.gaussian(0, 2)) is None


def test_lower_at_most_upper_line():
    g = G.build_line(1000)
    model = O.gaussian(0, 0.5)
    for n in (25, 101, 201):
        cands = G.candidate_set(g, 499, n)
        lo = T.lower_bound(g, cands, 0, 0.2, model)
        up, up_log_n = T.upper_bound(g, cands, 0, 0.2, model)
        assert lo is not None and up is not None
        assert lo <= up
        assert up_log_n <= up


def test_bounds_monotone_in_n():
    g = G.build_line(1000)
    model = O.gaussian(0, 0.5)
    lows, ups = [], []
    for n in (25, 101, 201, 301):
        cands = G.candidate_set(g, 499, n)
        lows.append(T.lower_bound(g, cands, 0, 0.2, model))
        ups.append(T.upper_bound(g, cands, 0, 0.2, model)[0])
    assert lows == sorted(lows)
    assert ups == sorted(ups)


def test_upper_bound_single_candidate():
    g = G.build_line(9)
    cands = G.candidate_set(g, 4, 1)
    assert T.upper_bound(g, cands, 0, 0.1, O.gaussian(0, 2)) == (0.0, 0.0)


def test_corollary_tree_values():
    assert T.corollary_tree(16000, 3) == pytest.approx(3.2754, abs=1e-3)
    assert T.corollary_tree(16000, 5) == pytest.approx(1.6377, abs=1e-3)
    with pytest.raises(ValueError):
        T.corollary_tree(16000, 2)


def test_corollary_line_regimes():
    model = O.gaussian(0, 0.5)  # sym KL 0.25
    ln = math.log(500)
    big = T.corollary_line(500, 23, 0.2, model)
    assert big.regime == "sqrt"
    assert big.lower == pytest.approx(math.sqrt(ln / 0.25), abs=1e-9)
    assert big.lower == pytest.approx(4.986, abs=1e-2)
    small = T.corollary_line(500, 1, 0.2, model)
    assert small.regime == "small_radius"
    assert small.lower == pytest.approx(ln / (2 * 0.25), abs=1e-9)
    assert small.lower == pytest.approx(12.43, abs=1e-2)
    zero = T.corollary_line(500, 0, 0.2, model)
    assert zero.regime == "unit_radius"
    assert zero.lower == small.lower
    assert big.upper > big.lower and small.upper > small.lower


def test_radius_ball_log_ratio():
    g = G.build_line(1000)
    cands = G.candidate_set(g, 499, 101)
    assert T.radius_ball_log_ratio(g, cands, 0) == 0.0
    r = T.radius_ball_log_ratio(g, cands, 10)
    assert 0 < r < 1


def test_bound_report_fields():
    g = G.build_line(1000)
    model = O.gaussian(0, 0.5)
    cands = G.candidate_set(g, 499, 101)
    rep = T.bound_report(g, cands, 0, 0.2, model)
    assert rep.sym_kl == pytest.approx(0.25)
    assert rep.c_constant < rep.sym_kl
    assert rep.lower_bound_T <= rep.upper_bound_T
    assert rep.regime == "unit_radius"
    t = G.build_regular_tree(3, 15)
    rep = T.bound_report(t, G.candidate_set(t, 0, 1000), 0, 0.1, O.gaussian(0, 2))
    assert rep.regime == "tree"
    assert rep.corollary_value == pytest.approx(math.log(math.log(1000)) / math.log(2))
