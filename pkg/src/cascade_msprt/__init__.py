"""Sequential source localization for noisy network cascades."""

from .graph import (
    Graph,
    CandidateSet,
    build_regular_tree,
    build_line,
    build_lattice,
    distance,
    ball,
    candidate_set,
    check_symmetry_assumption,
)
from .obs_model import ObservationModel, gaussian, bernoulli, sym_kl, chernoff_exponent
from .cascade import start, step, raw_observations
from .estimator import MsprtConfig, MsprtState, TrialResult, init, update, check_stop
from .theory import f_vu, f_line_closed_form, F_vu, corollary_tree, corollary_line
from .kernels import BACKEND as kernel_backend

__version__ = "0.1.0"
