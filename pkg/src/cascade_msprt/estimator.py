"""Matrix sequential probability ratio test over a candidate vertex set.

Per candidate v we keep the running statistic A_v(t), the sum of ball-restricted
llr increments; pairwise cumulative log-likelihood ratios are recovered as
Z_vu(t) = A_v(t) - A_u(t). The test stops once some candidate's gap over its
best competitor outside the confidence ball reaches log(n/alpha).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph import BallTable, distance


class SequencingError(RuntimeError):
    pass


@dataclass(frozen=True)
class MsprtConfig:
    candidates: object  # CandidateSet
    radius: int
    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0,1)")
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    @property
    def n(self):
        return self.candidates.n

    @property
    def threshold(self):
        return math.log(self.n) - math.log(self.alpha)


class MsprtState:
    def __init__(self, config, ball_table=None):
        self.config = config
        self.a_stat = np.zeros(config.n, dtype=np.float64)
        self.time = -1  # no observations consumed yet
        self.stopped = False
        self.decision = None
        self.stopping_time = None
        self._ball_table = ball_table
        self._within = None  # per candidate: positions inside ball(v, R)
        self._excl_counts = None

    def _ensure_structs(self, graph):
        cand = self.config.candidates.ordered_vertices
        if self._ball_table is None:
            self._ball_table = BallTable(graph, cand)
        if self._within is None:
            r = self.config.radius
            pos_of = {int(v): i for i, v in enumerate(cand)}
            within = []
            for v in cand:
                members = self._ball_table.ball_of(int(v), r)
                within.append(frozenset(pos_of[int(w)] for w in members if int(w) in pos_of))
            self._within = within
            self._excl_counts = np.array([len(w) for w in within], dtype=np.int64)


def init(config, ball_table=None):
    """Fresh state: all-zero statistics, time -1, not stopped."""
    return MsprtState(config, ball_table=ball_table)


def update(state, obs, graph):
    """Consume one StepObservation: accumulate A_v and evaluate the stopping rule."""
    if state.stopped:
        raise SequencingError("state is frozen after stopping")
    if obs.time != state.time + 1:
        raise SequencingError(f"expected observation time {state.time + 1}, got {obs.time}")
    state._ensure_structs(graph)
    flat, offsets = state._ball_table.level_arrays(obs.time)
    state.a_stat += kernels.segment_sums(obs.llr_values, flat, offsets)
    state.time = obs.time
    check_stop(state, graph)
    return state


def statistic(state, v, graph):
    """A_v minus the best competing A_u over candidates u with d(u,v) > R; +inf if none."""
    state._ensure_structs(graph)
    cand = state.config.candidates.ordered_vertices
    pos = int(np.nonzero(cand == v)[0][0]) if v in cand else None
    if pos is None:
        raise ValueError(f"{v} is not a candidate")
    mask = np.ones(state.config.n, dtype=bool)
    mask[list(state._within[pos])] = False
    if not mask.any():
        return math.inf
    return float(state.a_stat[pos] - state.a_stat[mask].max())


def _max_statistic(state):
    """Exact (max statistic, deciding vertex id) with upper-bound screening."""
    a = state.a_stat
    n = len(a)
    cand = state.config.candidates.ordered_vertices
    excl = state._excl_counts
    empties = np.nonzero(excl >= n)[0]
    if empties.size:
        return math.inf, int(cand[empties].min())
    order = np.argsort(-a, kind="stable")
    sa = a[order]
    floor = sa[int(excl.max())]
    best = -math.inf
    best_vid = None
    for rank in range(n):
        p = int(order[rank])
        if sa[rank] - floor < best:
            break
        wset = state._within[p]
        st = None
        for q in order:
            if int(q) not in wset:
                st = a[p] - a[int(q)]
                break
        vid = int(cand[p])
        if st > best or (st == best and vid < best_vid):
            best, best_vid = st, vid
    return best, best_vid


def check_stop(state, graph):
    """Stop once max_v statistic >= log(n/alpha); ties decided by lowest vertex id."""
    if state.stopped:
        return state.decision, state.stopping_time
    state._ensure_structs(graph)
    if state.time < 0:
        return None
    best, vid = _max_statistic(state)
    if best >= state.config.threshold:
        state.stopped = True
        state.decision = vid
        state.stopping_time = state.time
        return state.decision, state.stopping_time
    return None


@dataclass(frozen=True)
class TrialResult:
    seed: int
    n: int
    radius: int
    alpha: float
    true_source: int
    decision: int
    stopping_time: int
    distance_to_source: int
    success: bool
    timed_out: bool = False


def _wilson_upper(successes, trials, z=1.96):
    if trials == 0:
        return 1.0
    p = successes / trials
    denom = 1 + z * z / trials
    center = p + z * z / (2 * trials)
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return (center + half) / denom


@dataclass
class AuditReport:
    trials: int
    failures: int
    failure_rate: float
    failure_wilson_upper: float
    alpha: float
    alpha_satisfied: bool
    pairwise_bound: float
    pairwise_rates: dict  # (true_source, decision) -> rate, only d > R pairs
    pairwise_violations: list  # (v, u, rate, limit)


def error_guarantee_audit(results, config, graph):
    """Empirical check of both error formulations against their nominal bounds.

    Failure rate P(d(D(T), source) > R) is compared to alpha (with its Wilson
    95% upper bound reported); each observed pairwise misdecision rate
    P_v(D(T)=u) for d(u,v) > R is compared to alpha/n plus 3 binomial
    standard errors.
    """
    if not results:
        raise ValueError("no trial results to audit")
    n = config.n
    alpha = config.alpha
    r = config.radius
    failures = sum(1 for t in results if t.distance_to_source > r)
    rate = failures / len(results)
    wilson = _wilson_upper(failures, len(results))
    per_source = {}
    for t in results:
        per_source.setdefault(t.true_source, []).append(t)
    bound = alpha / n
    pairwise = {}
    violations = []
    for v, trials in per_source.items():
        m = len(trials)
        counts = {}
        for t in trials:
            counts[t.decision] = counts.get(t.decision, 0) + 1
        for u, c in counts.items():
            if distance(graph, v, u) > r:
                p = c / m
                pairwise[(v, u)] = p
                limit = bound + 3 * math.sqrt(bound * (1 - bound) / m)
                if p > limit:
                    violations.append((v, u, p, limit))
    return AuditReport(
        trials=len(results),
        failures=failures,
        failure_rate=rate,
        failure_wilson_upper=wilson,
        alpha=alpha,
        alpha_satisfied=rate <= alpha,
        pairwise_bound=bound,
        pairwise_rates=pairwise,
        pairwise_violations=violations,
    )
