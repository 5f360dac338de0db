"""Numerical verification of the spike/block prior lower-bound machinery.

A single-spike prior puts mass 1/m on each coordinate of an m-vector
being the lone spike of height lambda (optionally with a random sign).
Its posterior under the Gaussian random-design model has the explicit
coordinate weights  exp(lambda X_i^T y - lambda^2 ||X_i||^2 / 2),  and
the behavior of the first spike probability p_1 is governed by the two
normalized factors A (which tends to 1) and B (which diverges) via
p_1 = 1 / (1 + A B).  The block prior tiles k independent spikes across
disjoint blocks of size p/k.

Everything exponential is carried in the log domain with max
subtraction, since the exponents grow linearly with n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ._validation import as_design_matrix, as_response, check_count, check_positive
from .datamodel import SignalVector
from .rng import RngStream

__all__ = [
    "SpikePriorConfig",
    "PosteriorDiagnostics",
    "block_prior_sample",
    "spike_posterior",
    "ab_diagnostics",
    "bayes_risk_mc",
]


@dataclass(frozen=True)
class SpikePriorConfig:
    """Single-spike prior on R^m: one coordinate equals +-lambda."""

    m: int
    lam: float
    symmetric: bool = False

    def __post_init__(self):
        check_count("m", self.m)
        check_positive("lam", self.lam)


@dataclass(frozen=True)
class PosteriorDiagnostics:
    """Posterior spike probabilities and the posterior-mean coefficients."""

    p: np.ndarray          # spike-location probabilities, sum to 1
    mean_coef: np.ndarray  # posterior mean of beta
    A: float | None = None
    logB: float | None = None


def block_prior_sample(p: int, k: int, lam: float, symmetric: bool,
                       rng: RngStream) -> SignalVector:
    """Draw one signal from the independent block prior.

    The p coordinates split into k disjoint blocks of size p // k, the
    last block absorbing any remainder; each block carries one spike of
    height lambda (a uniform sign when ``symmetric``) at a uniform
    position, independently across blocks.  The result has exactly
    ||beta||_0 = k and ||beta||_2^2 = k lambda^2.
    """
    p = check_count("p", p)
    k = check_count("k", k)
    lam = check_positive("lam", lam)
    if k > p:
        raise ValueError(f"k={k} exceeds p={p}")
    g = rng.generator()
    m = p // k
    support = np.empty(k, dtype=np.int64)
    for j in range(k):
        lo = j * m
        hi = (j + 1) * m if j < k - 1 else p
        support[j] = lo + g.integers(0, hi - lo)
    values = np.full(k, lam)
    if symmetric:
        values *= np.where(g.random(k) < 0.5, -1.0, 1.0)
    return SignalVector(p=p, support=support, values=values)


def spike_posterior(y, X, lam: float, symmetric: bool = False) -> PosteriorDiagnostics:
    """Exact posterior of the single-spike prior given one dataset.

    One-sided weights are proportional to
    exp(lambda X_i^T y - lambda^2 ||X_i||^2 / 2); the symmetric variant
    adds the mirrored term per coordinate.  Computed in the log domain
    with max subtraction, so finite inputs can never overflow.
    """
    X = as_design_matrix(X)
    n, m = X.shape
    y = as_response(y, n)
    lam = check_positive("lam", lam)
    corr = lam * (X.T @ y)
    half_norm = 0.5 * lam * lam * np.einsum("ij,ij->j", X, X)
    log_plus = corr - half_norm
    if symmetric:
        log_minus = -corr - half_norm
        log_z = logsumexp(np.concatenate([log_plus, log_minus]))
        w_plus = np.exp(log_plus - log_z)
        w_minus = np.exp(log_minus - log_z)
        p = w_plus + w_minus
        mean_coef = lam * (w_plus - w_minus)
    else:
        log_z = logsumexp(log_plus)
        p = np.exp(log_plus - log_z)
        mean_coef = lam * p
    p = p / p.sum()
    return PosteriorDiagnostics(p=p, mean_coef=mean_coef)


def ab_diagnostics(X, z, lam: float):
    """The factors (A, log B) of the spike posterior under beta = lam e_1.

    With v = lam X_1 + z and X_{i,1} / X_{i,-1} the first / remaining
    coordinates of column i,

        A = sum_{i>=2} exp(||v|| lam X_{i,1} - lam^2 X_{i,1}^2 / 2
                           - lam^2 ||X_{i,-1}||^2 / 2)  /  D,
        D = (m-1) (1 + lam^2/n)^{-n/2} exp( lam^2 ||v||^2 / (2(n+lam^2)) ),
        B = D / exp( lam^2 ||X_1||^2 / 2 + lam X_1^T z ).

    B is returned as a logarithm because it diverges with m.
    """
    X = as_design_matrix(X)
    n, m = X.shape
    z = as_response(z, n)
    lam = check_positive("lam", lam)
    if m < 2:
        raise ValueError("need at least two columns")
    v = lam * X[:, 0] + z
    s = float(np.linalg.norm(v))
    first_row = X[0, 1:]
    rest_sq = np.einsum("ij,ij->j", X[1:, 1:], X[1:, 1:])
    log_terms = s * lam * first_row - 0.5 * lam * lam * first_row**2 \
        - 0.5 * lam * lam * rest_sq
    log_den = math.log(m - 1) - 0.5 * n * math.log1p(lam * lam / n) \
        + lam * lam * s * s / (2.0 * (n + lam * lam))
    A = float(np.exp(logsumexp(log_terms) - log_den))
    x1 = X[:, 0]
    logB = log_den - (0.5 * lam * lam * float(x1 @ x1) + lam * float(x1 @ z))
    return A, logB


def bayes_risk_mc(config: SpikePriorConfig, n: int, trials: int,
                  rng: RngStream):
    """Monte-Carlo Bayes risk of the posterior-mean estimator.

    Each trial draws beta from the spike prior, simulates (X, y) with
    unit noise, forms the posterior mean, and records the squared error;
    returns (mean, standard error).  Trials live on disjoint sub-streams
    and are aggregated in a fixed order, so results do not depend on
    scheduling.
    """
    n = check_count("n", n)
    trials = check_count("trials", trials, minimum=2)
    m, lam = config.m, config.lam
    errors = np.empty(trials)
    for t in range(trials):
        g = rng.child(t).generator()
        X = g.standard_normal((n, m)) / math.sqrt(n)
        spike = int(g.integers(0, m))
        sign = 1.0
        if config.symmetric and g.random() < 0.5:
            sign = -1.0
        z = g.standard_normal(n)
        y = sign * lam * X[:, spike] + z
        diag = spike_posterior(y, X, lam, symmetric=config.symmetric)
        target = np.zeros(m)
        target[spike] = sign * lam
        d = diag.mean_coef - target
        errors[t] = d @ d
    mean = float(np.mean(errors))
    se = float(np.std(errors, ddof=1) / math.sqrt(trials))
    return mean, se
