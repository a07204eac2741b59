"""Deterministic cascade with noisy per-vertex observations.

At step t the affected set is exactly the radius-t ball around the hidden
source; every host vertex emits one fresh observation per step (Q1 inside the
ball, Q0 outside). The stream is keyed by (seed, t), so any step can be
regenerated independently of iteration order, and identical runs are
bit-identical.
"""

import csv
from dataclasses import dataclass

import numpy as np

from . import graph as graphmod
from . import obs_model


class SequencingError(RuntimeError):
    pass


@dataclass
class StepObservation:
    time: int
    llr_values: np.ndarray  # one entry per host vertex


class CascadeRun:
    def __init__(self, graph, source, model, seed):
        graph.check_vertex(source)
        self.graph = graph
        self.source = int(source)
        self.model = model
        self.seed = int(seed) & (2**64 - 1)
        self.time = 0  # next observation step to emit

    def _rng(self, t):
        return np.random.default_rng(np.random.SeedSequence(entropy=(self.seed, t)))

    def _raw_at(self, t):
        affected = graphmod.ball(self.graph, self.source, t)
        return obs_model.sample_vector(
            self.model, self.graph.vertex_count, affected, self._rng(t)
        )

    def affected_set(self, t):
        return graphmod.ball(self.graph, self.source, t)


def start(graph, source, model, seed):
    """Fresh run at time 0; the source is the only affected vertex."""
    return CascadeRun(graph, source, model, seed)


def step(run):
    """Emit the per-vertex llr increments for the current step, then advance."""
    t = run.time
    y = run._raw_at(t)
    obs = StepObservation(t, obs_model.llr(run.model, y))
    run.time = t + 1
    return obs


def raw_observations(run, t):
    """Raw y values at step t (oracle mode); does not advance the run."""
    return run._raw_at(t)


def trace_dump(run, t_max, path):
    """Replay CSV, one row per (t, vertex, y)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "vertex", "y"])
        for t in range(t_max + 1):
            y = run._raw_at(t)
            for w in range(run.graph.vertex_count):
                writer.writerow([t, w, repr(float(y[w]))])
