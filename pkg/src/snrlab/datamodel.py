"""Data model and random-design data generation.

Implements the Gaussian random-design linear model

    y = X beta + sigma * z,      X[i, :] ~ N(0, I_p / n),  z ~ N(0, I_n),

together with the sparse, norm-bounded signal class

    Theta(k, tau) = { beta : ||beta||_0 <= k,  ||beta||_2^2 <= k tau^2 }

and an advisory classification of the signal-to-noise regime.  All
generation is deterministic given an :class:`~snrlab.rng.RngStream`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._validation import check_count, check_positive
from .rng import RngStream

__all__ = [
    "CapacityError",
    "MAX_DESIGN_ENTRIES",
    "ParamSpace",
    "SignalVector",
    "Dataset",
    "RegimeLabel",
    "SnrRegime",
    "gen_design",
    "gen_signal",
    "gen_response",
    "classify_regime",
]

# Dense n*p doubles; 4e8 entries is ~3.2 GB, beyond desk scale.
MAX_DESIGN_ENTRIES = 400_000_000


class CapacityError(RuntimeError):
    """Requested design matrix exceeds the configured memory budget."""


@dataclass(frozen=True)
class ParamSpace:
    """The pair (k, tau) defining Theta(k, tau), plus the noise level sigma.

    ``mu = tau / sigma`` is the dimensionless per-coordinate SNR.
    """

    k: int
    tau: float
    sigma: float

    def __post_init__(self):
        check_count("k", self.k)
        check_positive("tau", self.tau)
        check_positive("sigma", self.sigma)

    @property
    def mu(self) -> float:
        return self.tau / self.sigma

    def eps(self, p: int) -> float:
        """Sparsity fraction k/p for an ambient dimension p."""
        return self.k / check_count("p", p)

    def contains(self, beta: np.ndarray, rtol: float = 1e-12) -> bool:
        """Membership test: ||beta||_0 <= k and ||beta||_2^2 <= k tau^2."""
        beta = np.asarray(beta, dtype=np.float64)
        l0 = int(np.count_nonzero(beta))
        l2sq = float(beta @ beta)
        return l0 <= self.k and l2sq <= self.k * self.tau**2 * (1.0 + rtol)


@dataclass(frozen=True)
class SignalVector:
    """Sparse signal stored as (support, values) with implied zeros."""

    p: int
    support: np.ndarray  # sorted, strictly increasing indices in [0, p)
    values: np.ndarray   # one value per support index

    def __post_init__(self):
        check_count("p", self.p)
        support = np.asarray(self.support, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if support.shape != values.shape or support.ndim != 1:
            raise ValueError("support and values must be 1-d arrays of equal length")
        if support.size and (np.any(np.diff(support) <= 0)
                             or support[0] < 0 or support[-1] >= self.p):
            raise ValueError("support indices must be strictly increasing in [0, p)")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "values", values)

    @property
    def l0(self) -> int:
        return int(np.count_nonzero(self.values))

    @property
    def l2sq(self) -> float:
        return float(self.values @ self.values)

    def to_dense(self) -> np.ndarray:
        beta = np.zeros(self.p)
        beta[self.support] = self.values
        return beta

    @classmethod
    def from_dense(cls, beta) -> "SignalVector":
        beta = np.asarray(beta, dtype=np.float64).ravel()
        support = np.flatnonzero(beta)
        return cls(p=beta.size, support=support, values=beta[support])


@dataclass(frozen=True)
class Dataset:
    """One realization (X, y, beta, sigma) of the model, tagged by its stream."""

    X: np.ndarray
    y: np.ndarray
    beta: SignalVector
    sigma: float
    stream: RngStream

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @classmethod
    def generate(cls, n: int, p: int, space: ParamSpace, stream: RngStream,
                 signed: bool = False, sigma: float | None = None) -> "Dataset":
        """Draw (X, beta, y) from disjoint sub-streams of ``stream``.

        Sub-stream ids: 0 -> design, 1 -> signal support, 2 -> noise.
        Regenerating with the same stream reproduces the dataset
        bit-identically.  ``sigma`` overrides ``space.sigma`` and may be 0
        (noiseless grid points).
        """
        sigma = space.sigma if sigma is None else float(sigma)
        X = gen_design(n, p, stream.child(0))
        beta = gen_signal(p, space, stream.child(1), signed=signed)
        y = gen_response(X, beta, sigma, stream.child(2))
        return cls(X=X, y=y, beta=beta, sigma=sigma, stream=stream)


class RegimeLabel(str, Enum):
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"


@dataclass(frozen=True)
class SnrRegime:
    """Advisory SNR-regime metadata; never consumed by estimators.

    ``rho = mu / sqrt(log(p/k))`` compares the SNR against the detection
    scale of the problem.
    """

    mu: float
    rho: float
    label: RegimeLabel


def gen_design(n: int, p: int, rng: RngStream) -> np.ndarray:
    """n-by-p matrix with iid N(0, 1/n) entries (rows x_i ~ N(0, I_p/n))."""
    n = check_count("n", n)
    p = check_count("p", p)
    if n * p > MAX_DESIGN_ENTRIES:
        raise CapacityError(
            f"design of {n}x{p} entries exceeds budget {MAX_DESIGN_ENTRIES}")
    g = rng.generator()
    return g.standard_normal((n, p)) / math.sqrt(n)


def gen_signal(p: int, space: ParamSpace, rng: RngStream,
               signed: bool = False) -> SignalVector:
    """Signal with a uniformly random size-k support, all values tau.

    With ``signed=True`` each support value carries an independent
    uniform sign, matching the symmetric prior variant; either way the
    result lies exactly on the boundary ||beta||_2^2 = k tau^2.
    """
    p = check_count("p", p)
    if space.k > p:
        raise ValueError(f"sparsity k={space.k} exceeds dimension p={p}")
    g = rng.generator()
    support = np.sort(g.choice(p, size=space.k, replace=False))
    values = np.full(space.k, space.tau)
    if signed:
        values *= np.where(g.random(space.k) < 0.5, -1.0, 1.0)
    return SignalVector(p=p, support=support, values=values)


def gen_response(X: np.ndarray, beta: SignalVector, sigma: float,
                 rng: RngStream) -> np.ndarray:
    """y = X beta + sigma z with z ~ N(0, I_n); sigma = 0 gives noiseless data."""
    if beta.p != X.shape[1]:
        raise ValueError(f"signal dimension {beta.p} != design columns {X.shape[1]}")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    mean = X[:, beta.support] @ beta.values
    if sigma == 0:
        return mean
    g = rng.generator()
    return mean + sigma * g.standard_normal(X.shape[0])


def classify_regime(p: int, space: ParamSpace) -> SnrRegime:
    """Label the (mu, p/k) configuration as Low / Medium / High SNR.

    Finite-sample surrogate cutoffs for the asymptotic regimes:
    Low when mu <= 0.5, High when rho = mu/sqrt(log(p/k)) >= 1.5,
    Medium otherwise.  Advisory only.
    """
    p = check_count("p", p)
    if p <= space.k:
        raise ValueError(f"regime classification requires p > k, got p={p}, k={space.k}")
    mu = space.mu
    rho = mu / math.sqrt(math.log(p / space.k))
    if mu <= 0.5:
        label = RegimeLabel.LOW
    elif rho >= 1.5:
        label = RegimeLabel.HIGH
    else:
        label = RegimeLabel.MEDIUM
    return SnrRegime(mu=mu, rho=rho, label=label)
