"""Experiment orchestration: configs, seeded Monte Carlo sweeps, verify suites.

Sweeps are byte-reproducible: every trial's RNG stream is derived from
(base_seed, n, trial_index), workers only change scheduling, and results are
merged in (n, trial_index) order before aggregation.
"""

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np

from . import cascade, estimator, kernels, obs_model, theory
from .graph import (
    BallTable,
    CandidateSet,
    ball,
    build_lattice,
    build_line,
    build_regular_tree,
    canonical_center,
    candidate_set,
    distance,
)

__version__ = "0.1.0"


class ConfigError(ValueError):
    pass


_KNOWN_KEYS = {
    "graph", "k", "height", "length", "dim", "side",
    "source", "model", "mu0", "mu1", "p0", "p1",
    "alpha", "radius", "n_grid", "trials_per_point", "base_seed", "output_dir",
}

_RADIUS_SPECS = ("5logn", "sqrt_n")


@dataclass(frozen=True)
class ExperimentConfig:
    graph_kind: str
    graph_params: tuple
    source: object  # "canonical" or vertex id
    model_family: str
    model_params: tuple
    alpha: float
    radius_spec: str  # integer literal, "5logn", or "sqrt_n"
    n_grid: tuple
    trials_per_point: int
    base_seed: int
    output_dir: str = "out"


def parse_config(text):
    """Flat key = value format; comments with '#'; unknown keys are errors."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return _config_from_dict(raw)


def _config_from_dict(raw):
    try:
        kind = raw["graph"]
    except KeyError:
        raise ConfigError("missing required key 'graph'")
    if kind == "regular_tree":
        params = (int(raw["k"]), int(raw["height"]))
    elif kind == "line":
        params = (int(raw["length"]),)
    elif kind == "lattice":
        params = (int(raw["dim"]), int(raw["side"]))
    else:
        raise ConfigError(f"unknown graph kind {kind!r}")
    family = raw.get("model", "gaussian")
    if family == "gaussian":
        mparams = (float(raw.get("mu0", 0.0)), float(raw.get("mu1", 1.0)))
    elif family == "bernoulli":
        mparams = (float(raw.get("p0", 0.1)), float(raw.get("p1", 0.5)))
    else:
        raise ConfigError(f"unknown model family {family!r}")
    source = raw.get("source", "canonical")
    if source != "canonical":
        source = int(source)
    radius_spec = raw.get("radius", "0")
    if radius_spec not in _RADIUS_SPECS:
        int(radius_spec)  # must be an integer literal otherwise
    n_grid = tuple(int(x) for x in raw.get("n_grid", "100").split(","))
    if list(n_grid) != sorted(set(n_grid)):
        raise ConfigError("n_grid must be strictly increasing")
    trials = int(raw.get("trials_per_point", "50"))
    if trials < 1:
        raise ConfigError("trials_per_point must be >= 1")
    alpha = float(raw.get("alpha", "0.1"))
    if not 0 < alpha < 1:
        raise ConfigError("alpha must be in (0,1)")
    cfg = ExperimentConfig(
        graph_kind=kind,
        graph_params=params,
        source=source,
        model_family=family,
        model_params=mparams,
        alpha=alpha,
        radius_spec=radius_spec,
        n_grid=n_grid,
        trials_per_point=trials,
        base_seed=int(raw.get("base_seed", "20200322")),
        output_dir=raw.get("output_dir", "out"),
    )
    host = build_graph_for(cfg).vertex_count
    if any(n > host for n in cfg.n_grid):
        raise ConfigError(f"n_grid entries must not exceed host size {host}")
    return cfg


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def radius_value(spec, n):
    """Numeric confidence radius for one grid point (natural log, rounded)."""
    if spec == "5logn":
        return int(round(5 * math.log(n)))
    if spec == "sqrt_n":
        return int(round(math.sqrt(n)))
    return int(spec)


_GRAPH_CACHE = {}


def build_graph_for(cfg):
    key = (cfg.graph_kind, cfg.graph_params)
    g = _GRAPH_CACHE.get(key)
    if g is None:
        if cfg.graph_kind == "regular_tree":
            g = build_regular_tree(*cfg.graph_params)
        elif cfg.graph_kind == "line":
            g = build_line(*cfg.graph_params)
        else:
            g = build_lattice(*cfg.graph_params)
        _GRAPH_CACHE[key] = g
    return g


def build_model_for(cfg):
    return obs_model.ObservationModel(cfg.model_family, *cfg.model_params)


def derive_seed(base_seed, n, trial_index):
    ss = np.random.SeedSequence(entropy=(int(base_seed), int(n), int(trial_index)))
    return int(ss.generate_state(1, np.uint64)[0])


_ENV_CACHE = {}


class _TrialEnv:
    def __init__(self, cfg, n):
        self.graph = build_graph_for(cfg)
        self.model = build_model_for(cfg)
        center = canonical_center(self.graph)
        self.source = center if cfg.source == "canonical" else int(cfg.source)
        self.candidates = candidate_set(self.graph, center, n)
        self.radius = radius_value(cfg.radius_spec, n)
        self.est_config = estimator.MsprtConfig(self.candidates, self.radius, cfg.alpha)
        self.ball_table = BallTable(self.graph, self.candidates.ordered_vertices)
        self.bounds = theory.bound_report(
            self.graph, self.candidates, self.radius, cfg.alpha, self.model
        )
        upper = self.bounds.upper_bound_T
        self.time_cap = int(10 * upper + 100) if upper is not None else 10000


def trial_env(cfg, n):
    key = (cfg, n)
    env = _ENV_CACHE.get(key)
    if env is None:
        env = _TrialEnv(cfg, n)
        _ENV_CACHE[key] = env
    return env


def run_trial(cfg, n, trial_index):
    """One seeded cascade + MSPRT run; deterministic in (base_seed, n, trial_index)."""
    env = trial_env(cfg, n)
    seed = derive_seed(cfg.base_seed, n, trial_index)
    run = cascade.start(env.graph, env.source, env.model, seed)
    state = estimator.init(env.est_config, ball_table=env.ball_table)
    timed_out = False
    while True:
        obs = cascade.step(run)
        estimator.update(state, obs, env.graph)
        if state.stopped:
            break
        if obs.time >= env.time_cap:
            timed_out = True
            break
    decision = state.decision if state.stopped else env.source
    stop_t = state.stopping_time if state.stopped else env.time_cap
    dist = distance(env.graph, decision, env.source) if state.stopped else env.graph.vertex_count
    return estimator.TrialResult(
        seed=seed,
        n=n,
        radius=env.radius,
        alpha=cfg.alpha,
        true_source=env.source,
        decision=decision,
        stopping_time=stop_t,
        distance_to_source=dist,
        success=state.stopped and dist <= env.radius,
        timed_out=timed_out,
    )


def _trial_task(args):
    cfg, n, idx = args
    return (n, idx, run_trial(cfg, n, idx))


def run_cell(cfg, n, trials, workers=1):
    """All trials of one (config, n) cell, merged in trial order."""
    tasks = [(cfg, n, i) for i in range(trials)]
    if workers <= 1:
        results = [_trial_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_task, tasks, chunksize=max(1, trials // (4 * workers))))
    results.sort(key=lambda r: (r[0], r[1]))
    return [r[2] for r in results]


@dataclass
class SweepRow:
    label: str  # k for trees, radius spec for the line sweep
    n: int
    mean_T: float
    stderr_T: float
    empirical_failure_rate: float
    lower_T: float
    upper_T: float


@dataclass
class SweepSummary:
    rows: list
    results: dict  # (label, n) -> list[TrialResult]


def summarize_cell(label, n, results, bounds):
    times = np.array([t.stopping_time for t in results], dtype=np.float64)
    fails = np.array([not t.success for t in results], dtype=np.float64)
    stderr = float(times.std(ddof=1) / math.sqrt(len(times))) if len(times) > 1 else 0.0
    return SweepRow(
        label=str(label),
        n=n,
        mean_T=float(times.mean()),
        stderr_T=stderr,
        empirical_failure_rate=float(fails.mean()),
        lower_T=bounds.lower_bound_T,
        upper_T=bounds.upper_bound_T,
    )


FIGURE1_HEIGHTS = {3: 15, 4: 11, 5: 9}
FIGURE1_N_GRID = (1000, 2000, 4000, 8000, 16000)
FIGURE2_N_GRID = (25, 101, 201, 301, 401, 499)
FIGURE2_RADII = ("0", "5logn", "sqrt_n")


def figure1_config(k, trials=50, base_seed=20200322, out="out"):
    return ExperimentConfig(
        graph_kind="regular_tree",
        graph_params=(k, FIGURE1_HEIGHTS[k]),
        source="canonical",
        model_family="gaussian",
        model_params=(0.0, 2.0),
        alpha=0.1,
        radius_spec="0",
        n_grid=FIGURE1_N_GRID,
        trials_per_point=trials,
        base_seed=base_seed,
        output_dir=out,
    )


def figure2_config(radius_spec, trials=50, base_seed=20200322, out="out"):
    return ExperimentConfig(
        graph_kind="line",
        graph_params=(1000,),
        source="canonical",
        model_family="gaussian",
        model_params=(0.0, 0.5),
        alpha=0.2,
        radius_spec=radius_spec,
        n_grid=FIGURE2_N_GRID,
        trials_per_point=trials,
        base_seed=base_seed,
        output_dir=out,
    )


def _run_labelled(cells, workers):
    """cells: list of (label, cfg, n). Returns SweepSummary."""
    rows = []
    results = {}
    for label, cfg, n in cells:
        res = run_cell(cfg, n, cfg.trials_per_point, workers=workers)
        env = trial_env(cfg, n)
        rows.append(summarize_cell(label, n, res, env.bounds))
        results[(str(label), n)] = res
    return SweepSummary(rows=rows, results=results)


def sweep_figure1(trials=50, base_seed=20200322, workers=1, ks=(3, 4, 5), n_grid=None):
    cells = []
    for k in ks:
        cfg = figure1_config(k, trials=trials, base_seed=base_seed)
        for n in n_grid or cfg.n_grid:
            cells.append((k, cfg, n))
    return _run_labelled(cells, workers)


def sweep_figure2(trials=50, base_seed=20200322, workers=1, radii=FIGURE2_RADII, n_grid=None):
    cells = []
    for spec in radii:
        cfg = figure2_config(spec, trials=trials, base_seed=base_seed)
        for n in n_grid or cfg.n_grid:
            cells.append((spec, cfg, n))
    return _run_labelled(cells, workers)


def sweep_custom(cfg, workers=1):
    cells = [(cfg.radius_spec, cfg, n) for n in cfg.n_grid]
    return _run_labelled(cells, workers)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_sweep_csv(summary, path, label_col):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([label_col, "n", "mean_T", "stderr_T",
                         "empirical_failure_rate", "lower_T", "upper_T"])
        for row in summary.rows:
            writer.writerow([row.label, row.n, _fmt(row.mean_T), _fmt(row.stderr_T),
                             _fmt(row.empirical_failure_rate), _fmt(row.lower_T),
                             _fmt(row.upper_T)])


def write_manifest(path, cfgs, base_seed):
    payload = {
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "base_seed": base_seed,
        "configs": [asdict(c) for c in cfgs],
    }
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def theory_table(cfg):
    """Bound values across the config's n grid, ready for overlay plotting."""
    g = build_graph_for(cfg)
    model = build_model_for(cfg)
    center = canonical_center(g)
    rows = []
    for n in cfg.n_grid:
        cands = candidate_set(g, center, n)
        r = radius_value(cfg.radius_spec, n)
        rep = theory.bound_report(g, cands, r, cfg.alpha, model)
        k_or_dim = cfg.graph_params[0]
        rows.append({
            "graph": cfg.graph_kind,
            "k_or_dim": k_or_dim,
            "n": n,
            "R": r,
            "alpha": cfg.alpha,
            "sym_kl": rep.sym_kl,
            "c_constant": rep.c_constant,
            "lower_T": rep.lower_bound_T,
            "upper_T": rep.upper_bound_T,
            "corollary_value": rep.corollary_value,
            "regime": rep.regime,
        })
    return rows


def write_theory_csv(rows, path):
    cols = ["graph", "k_or_dim", "n", "R", "alpha", "sym_kl", "c_constant",
            "lower_T", "upper_T", "corollary_value", "regime"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in cols])


def write_divergence_csv(models, path):
    """DivergenceReport rows: family, params, sym_kl, epsilon, c_constant."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["family", "params", "sym_kl", "epsilon", "c_constant"])
        for model in models:
            eps, c = obs_model.best_epsilon(model)
            writer.writerow([model.family, f"{model.p0};{model.p1}",
                             _fmt(obs_model.sym_kl(model)), _fmt(eps), _fmt(c)])


# ---------------------------------------------------------------------------
# Oracle verification suites
# ---------------------------------------------------------------------------

@dataclass
class VerifyReport:
    suite: str
    passed: bool
    max_deviation: float
    tolerance: float
    details: str = ""


def direct_pairwise_llr(g, model, run, v, u, t):
    """Z_vu(t) straight from the product-form decomposition on raw observations."""
    total = 0.0
    for s in range(t + 1):
        y = cascade.raw_observations(run, s)
        lv = obs_model.llr(model, y)
        bv = ball(g, v, s)
        bu = ball(g, u, s)
        only_v = np.setdiff1d(bv, bu, assume_unique=True)
        only_u = np.setdiff1d(bu, bv, assume_unique=True)
        total += lv[only_v].sum() - lv[only_u].sum()
    return total


def _verify_llr_identity(rng_seed=7, probes=100):
    worst = 0.0
    hosts = [build_line(50), build_regular_tree(3, 5)]
    rng = np.random.default_rng(rng_seed)
    per_host = probes // len(hosts)
    for g in hosts:
        center = canonical_center(g)
        cands = candidate_set(g, center, min(20, g.vertex_count))
        model = obs_model.gaussian(0.0, 2.0)
        for probe in range(per_host):
            t = int(rng.integers(0, 11))
            source = int(rng.choice(cands.ordered_vertices))
            run = cascade.start(g, source, model, int(rng.integers(0, 2**63)))
            # alpha tiny enough that the threshold is unreachable in 10 steps
            cfg = estimator.MsprtConfig(cands, 0, 1e-300)
            state = estimator.init(cfg)
            for s in range(t + 1):
                estimator.update(state, cascade.step(run), g)
            v, u = rng.choice(cands.ordered_vertices, size=2, replace=False)
            z_direct = direct_pairwise_llr(g, model, run, int(v), int(u), t)
            pv = int(np.nonzero(cands.ordered_vertices == v)[0][0])
            pu = int(np.nonzero(cands.ordered_vertices == u)[0][0])
            z_inc = state.a_stat[pv] - state.a_stat[pu]
            scale = max(1.0, abs(z_direct))
            worst = max(worst, abs(z_inc - z_direct) / scale)
    return VerifyReport("llr_identity", worst <= 1e-9, worst, 1e-9)


def _verify_f_closed_forms():
    g = build_line(200)
    worst = 0
    for r in range(2, 41, 2):
        v = 100 - r // 2
        u = 100 + r // 2
        series = theory.growth_series(g, v, u, 40).values
        for t in range(41):
            worst = max(worst, abs(int(series[t]) - theory.f_line_closed_form(r, t)))
    return VerifyReport("f_closed_forms", worst == 0, float(worst), 0.0)


def _verify_chernoff_gaussian():
    worst = 0.0
    for model in (obs_model.gaussian(0.0, 2.0), obs_model.gaussian(0.0, 0.5)):
        d = obs_model.sym_kl(model)
        for x in np.linspace(0.0, d, 50):
            closed = obs_model.chernoff_exponent(model, float(x))
            numeric = obs_model.chernoff_exponent_numeric(model, float(x))
            worst = max(worst, abs(closed - numeric))
    return VerifyReport("chernoff_gaussian", worst <= 1e-6, worst, 1e-6)


def _verify_expected_drift(trials=2000, seed=11):
    g = build_line(60)
    model = obs_model.gaussian(0.0, 2.0)
    v, u = 28, 32  # interior pair at distance 4
    d = obs_model.sym_kl(model)
    cands = CandidateSet(v, np.array([v, u], dtype=np.int32), np.array([0, 4], dtype=np.int32))
    f_expected = [theory.f_line_closed_form(4, t) for t in range(4)]
    z_sum = np.zeros(4)
    z_sq = np.zeros(4)
    for i in range(trials):
        run = cascade.start(g, v, model, derive_seed(seed, 4, i))
        cfg = estimator.MsprtConfig(cands, 0, 1e-300)  # threshold unreachable here
        state = estimator.init(cfg)
        for t in range(4):
            estimator.update(state, cascade.step(run), g)
            z = state.a_stat[0] - state.a_stat[1]
            z_sum[t] += z
            z_sq[t] += z * z
    worst_sigma = 0.0
    details = []
    for t in range(4):
        mean = z_sum[t] / trials
        var = z_sq[t] / trials - mean**2
        se = math.sqrt(var / trials)
        dev = abs(mean - d * f_expected[t]) / se if se > 0 else 0.0
        worst_sigma = max(worst_sigma, dev)
        details.append(f"t={t}: mean={mean:.4f} expect={d * f_expected[t]:.4f} ({dev:.2f} se)")
    return VerifyReport("expected_drift", worst_sigma <= 3.0, worst_sigma, 3.0,
                        "; ".join(details))


def _verify_midpoint_tree():
    g = build_regular_tree(3, 12)
    worst = 0
    w = 0  # midpoint at the root
    for r in (2, 4, 6, 8):
        half = r // 2
        # walk down opposite root subtrees to depth r/2
        v = 0
        u = 0
        for _ in range(half):
            v = 2 * v + 1
            u = 2 * u + 2
        assert distance(g, v, u) == r
        for s in range(half, 11):
            bv = ball(g, v, s)
            bu = ball(g, u, s)
            inter = np.intersect1d(bv, bu, assume_unique=True).size
            expect = ball(g, w, s - half).size
            worst = max(worst, abs(inter - expect))
    return VerifyReport("midpoint_tree", worst == 0, float(worst), 0.0)


_VERIFY_SUITES = {
    "llr_identity": _verify_llr_identity,
    "f_closed_forms": _verify_f_closed_forms,
    "chernoff_gaussian": _verify_chernoff_gaussian,
    "expected_drift": _verify_expected_drift,
    "midpoint_tree": _verify_midpoint_tree,
}


def verify(suite_name, **kwargs):
    """Run one named brute-force comparison suite at small scale."""
    try:
        fn = _VERIFY_SUITES[suite_name]
    except KeyError:
        raise ValueError(
            f"unknown suite {suite_name!r}; choose from {sorted(_VERIFY_SUITES)}"
        )
    return fn(**kwargs)


def verify_all():
    return [verify(name) for name in sorted(_VERIFY_SUITES)]
