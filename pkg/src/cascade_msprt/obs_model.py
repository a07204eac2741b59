"""Distribution pair (Q0, Q1): sampling, log-likelihood ratios, divergences.

Q0 is the nominal per-vertex observation law, Q1 the anomalous one. Supported
families: unit-variance Gaussians N(mu0,1)/N(mu1,1) and Bernoulli(p0)/(p1).
Closed forms are used where available and cross-checked against numeric
routines (quadrature / golden-section supremum) in the verify suites.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

GAUSSIAN = "gaussian"
BERNOULLI = "bernoulli"


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class ObservationModel:
    family: str
    p0: float  # mu0 for gaussian
    p1: float  # mu1 for gaussian

    def __post_init__(self):
        if self.family not in (GAUSSIAN, BERNOULLI):
            raise ValueError(f"unknown family {self.family!r}")
        if self.p0 == self.p1:
            raise ValueError("Q0 and Q1 must be distinct")
        if self.family == BERNOULLI and not (0 < self.p0 < 1 and 0 < self.p1 < 1):
            raise ValueError("bernoulli parameters must lie in (0,1)")


def gaussian(mu0, mu1):
    return ObservationModel(GAUSSIAN, float(mu0), float(mu1))


def bernoulli(p0, p1):
    return ObservationModel(BERNOULLI, float(p0), float(p1))


def sample(model, affected, rng):
    """One draw from Q1 if affected else Q0."""
    if model.family == GAUSSIAN:
        return rng.standard_normal() + (model.p1 if affected else model.p0)
    p = model.p1 if affected else model.p0
    return float(rng.random() < p)


def sample_vector(model, n, affected_idx, rng):
    """Draw all n per-vertex observations for one time step in a single call.

    The whole vector comes from one generator state, so values are independent
    of any iteration order; affected_idx selects the Q1 entries.
    """
    if model.family == GAUSSIAN:
        y = rng.standard_normal(n) + model.p0
        y[affected_idx] += model.p1 - model.p0
        return y
    u = rng.random(n)
    y = (u < model.p0).astype(np.float64)
    y[affected_idx] = u[affected_idx] < model.p1
    return y


def llr(model, y):
    """log dQ1/dQ0 evaluated elementwise at y."""
    y = np.asarray(y, dtype=np.float64)
    if model.family == GAUSSIAN:
        d = model.p1 - model.p0
        return d * y - (model.p1**2 - model.p0**2) / 2.0
    if np.any((y != 0) & (y != 1)):
        raise DomainError("bernoulli observations must be 0 or 1")
    a = math.log(model.p1 / model.p0)
    b = math.log((1 - model.p1) / (1 - model.p0))
    return y * a + (1 - y) * b


def kl_q1_q0(model):
    """KL(Q1 || Q0), the drift of llr under the anomalous law."""
    if model.family == GAUSSIAN:
        return (model.p1 - model.p0) ** 2 / 2.0
    p, q = model.p1, model.p0
    return p * math.log(p / q) + (1 - p) * math.log((1 - p) / (1 - q))


def sym_kl(model):
    """Symmetrized KL divergence KL(Q1||Q0) + KL(Q0||Q1), in nats."""
    if model.family == GAUSSIAN:
        return (model.p1 - model.p0) ** 2
    return (model.p1 - model.p0) * math.log(
        model.p1 * (1 - model.p0) / (model.p0 * (1 - model.p1))
    )


def sym_kl_quadrature(model):
    """Numeric oracle for sym_kl (adaptive quadrature / exact summation)."""
    if model.family == BERNOULLI:
        y = np.array([0.0, 1.0])
        l = llr(model, y)
        w1 = np.array([1 - model.p1, model.p1])
        w0 = np.array([1 - model.p0, model.p0])
        return float(np.dot(w1, l) - np.dot(w0, l))

    def dens(y, mu):
        return math.exp(-((y - mu) ** 2) / 2.0) / math.sqrt(2 * math.pi)

    lo = min(model.p0, model.p1) - 12
    hi = max(model.p0, model.p1) + 12
    f1, _ = integrate.quad(lambda y: float(llr(model, y)) * dens(y, model.p1), lo, hi)
    f0, _ = integrate.quad(lambda y: float(llr(model, y)) * dens(y, model.p0), lo, hi)
    return f1 - f0


def log_mgf_neg(model, lam):
    """log E[exp(-lam * S)] for the per-pair increment S.

    S = log dQ1/dQ0 (X) + log dQ0/dQ1 (Y) with X ~ Q1, Y ~ Q0 independent,
    so the expectation factorizes over the two draws.
    """
    if model.family == GAUSSIAN:
        d = sym_kl(model)
        return lam * lam * d - lam * d
    p1, p0 = model.p1, model.p0
    e1 = p1 * (p0 / p1) ** lam + (1 - p1) * ((1 - p0) / (1 - p1)) ** lam
    e0 = p0 * (p1 / p0) ** lam + (1 - p0) * ((1 - p1) / (1 - p0)) ** lam
    return math.log(e1) + math.log(e0)


def log_mgf_neg_quadrature(model, lam):
    """Quadrature oracle for log_mgf_neg (continuous families)."""
    if model.family == BERNOULLI:
        return log_mgf_neg(model, lam)

    def dens(y, mu):
        return math.exp(-((y - mu) ** 2) / 2.0) / math.sqrt(2 * math.pi)

    lo = min(model.p0, model.p1) - 14
    hi = max(model.p0, model.p1) + 14
    e1, _ = integrate.quad(
        lambda y: math.exp(-lam * float(llr(model, y))) * dens(y, model.p1), lo, hi
    )
    e0, _ = integrate.quad(
        lambda y: math.exp(lam * float(llr(model, y))) * dens(y, model.p0), lo, hi
    )
    return math.log(e1) + math.log(e0)


def _golden_max(fn, a, b, tol):
    invphi = (math.sqrt(5) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    x = (a + b) / 2
    return x, fn(x)


def chernoff_exponent(model, x):
    """Lower-tail large-deviation exponent I(x) of the per-pair increment S.

    I(x) = sup over lam in [0,1] of -lam*x - log E[exp(-lam S)], which gives
    P(Z <= x f(t)) <= exp(-f(t) I(x)) and is strictly positive for x below
    the symmetrized KL divergence. Gaussian uses the closed form
    (D-x)^2/(4D); both paths are cross-checked in the verify suite.
    """
    d = sym_kl(model)
    if x > d + 1e-12:
        raise DomainError(f"x={x} exceeds sym_kl={d}")
    x = min(x, d)
    if model.family == GAUSSIAN:
        lam = min(max((d - x) / (2 * d), 0.0), 1.0)
        return max(lam * (d - x) - lam * lam * d, 0.0)
    return chernoff_exponent_numeric(model, x)


def chernoff_exponent_numeric(model, x, tol=1e-9, log_mgf=None):
    """Golden-section supremum over lam in [0,1] (oracle for the closed form)."""
    if log_mgf is None:
        log_mgf = log_mgf_neg
    _, val = _golden_max(lambda lam: -lam * x - log_mgf(model, lam), 0.0, 1.0, tol)
    return max(val, 0.0)


@dataclass
class DivergenceReport:
    sym_kl: float
    epsilon_used: float
    c_constant: float
    epsilon_star: float
    c_star: float
    exponent_at: object = None  # callable x -> I(x)


def best_epsilon(model, grid_points=1000):
    """Grid-maximize min(sym_kl - eps, I(sym_kl - eps)) over eps in (0, sym_kl)."""
    d = sym_kl(model)
    eps = np.linspace(0.0, d, grid_points + 2)[1:-1]
    vals = np.array([min(d - e, chernoff_exponent(model, d - e)) for e in eps])
    i = int(np.argmax(vals))
    return float(eps[i]), float(vals[i])


def c_constant(model, epsilon):
    """min(sym_kl - eps, I(sym_kl - eps)) plus the grid-optimal eps*, as a report."""
    d = sym_kl(model)
    if not 0 < epsilon < d:
        raise DomainError(f"epsilon={epsilon} must be in (0, {d})")
    c = min(d - epsilon, chernoff_exponent(model, d - epsilon))
    eps_star, c_star = best_epsilon(model)
    return DivergenceReport(
        d, float(epsilon), float(c), eps_star, c_star,
        exponent_at=lambda x: chernoff_exponent(model, x),
    )
