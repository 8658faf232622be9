"""Poisson-lognormal settlement population model.

    N_i ~ Poisson(D_i * A_i)
    D_i ~ LogNormal(mu_i, sigma)
    mu_i = alpha0 + alpha_t[t_i] + alpha_r[r_i] + alpha_s[s_i] + alpha_l[l_i] + x_i . beta

``N`` is a head count, ``D`` people per hectare, ``A`` settled hectares. The
group intercept is additive over the four grouping factors (settlement
type, region, state, LGA); a factor with a single level carries no
information beyond ``alpha0`` and is held at zero by the fitting code.

Priors: alpha0 and beta ~ Normal(0, 10); factor effects ~ Normal(0, hyper
sd of that factor); sigma ~ Half-Normal(1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from ..errors import DimensionMismatch, EmptyDataset, InvalidInput

FACTORS = ("t", "r", "s", "l")
COEF_PRIOR_SD = 10.0
SIGMA_PRIOR_SD = 1.0
_LOG_2PI = math.log(2.0 * math.pi)


class GroupKey(NamedTuple):
    t: int = 0
    r: int = 0
    s: int = 0
    l: int = 0


@dataclass(frozen=True)
class LocationRecord:
    key: GroupKey
    x: tuple
    A: float
    N: int | None = None

    def __post_init__(self):
        if not self.A > 0:
            raise InvalidInput(f"settlement area must be positive, got {self.A}")
        if self.N is not None and self.N < 0:
            raise InvalidInput(f"population count must be >= 0, got {self.N}")


@dataclass
class ModelParams:
    alpha0: float
    alpha_t: np.ndarray
    alpha_r: np.ndarray
    alpha_s: np.ndarray
    alpha_l: np.ndarray
    beta: np.ndarray
    sigma: np.ndarray
    hyper_sds: np.ndarray = field(default_factory=lambda: np.ones(4))

    def __post_init__(self):
        self.alpha0 = float(self.alpha0)
        for name in ("alpha_t", "alpha_r", "alpha_s", "alpha_l", "beta", "sigma", "hyper_sds"):
            setattr(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=np.float64)))
        if self.hyper_sds.shape != (4,):
            raise DimensionMismatch("hyper_sds needs one scale per grouping factor")

    @classmethod
    def zeros(cls, levels=(1, 1, 1, 1), K=0, sigma=1.0, per_type_sigma=False, hyper_sds=1.0):
        n_t, n_r, n_s, n_l = levels
        return cls(
            alpha0=0.0,
            alpha_t=np.zeros(n_t),
            alpha_r=np.zeros(n_r),
            alpha_s=np.zeros(n_s),
            alpha_l=np.zeros(n_l),
            beta=np.zeros(K),
            sigma=np.full(n_t if per_type_sigma else 1, float(sigma)),
            hyper_sds=np.broadcast_to(np.asarray(hyper_sds, dtype=np.float64), (4,)).copy(),
        )

    @property
    def levels(self):
        return (len(self.alpha_t), len(self.alpha_r), len(self.alpha_s), len(self.alpha_l))

    @property
    def effects(self):
        return (self.alpha_t, self.alpha_r, self.alpha_s, self.alpha_l)

    @property
    def per_type_sigma(self):
        return len(self.sigma) > 1

    def sigma_for(self, t):
        t = np.asarray(t)
        return self.sigma[t] if self.per_type_sigma else np.broadcast_to(self.sigma[0], t.shape)

    def vector_names(self):
        names = ["alpha0"]
        for f, eff in zip(FACTORS, self.effects):
            names += [f"alpha_{f}[{i}]" for i in range(len(eff))]
        names += [f"beta[{k}]" for k in range(len(self.beta))]
        names += [f"sigma[{j}]" for j in range(len(self.sigma))]
        return names

    def to_vector(self):
        return np.concatenate([[self.alpha0], *self.effects, self.beta, self.sigma])

    @classmethod
    def from_vector(cls, vec, levels, K, n_sigma, hyper_sds=1.0):
        vec = np.asarray(vec, dtype=np.float64)
        expected = 1 + sum(levels) + K + n_sigma
        if vec.shape != (expected,):
            raise DimensionMismatch(f"parameter vector has {vec.size} entries, expected {expected}")
        out = [vec[0]]
        pos = 1
        for n in levels:
            out.append(vec[pos:pos + n].copy())
            pos += n
        beta = vec[pos:pos + K].copy()
        sigma = vec[pos + K:].copy()
        return cls(out[0], *out[1:], beta, sigma,
                   np.broadcast_to(np.asarray(hyper_sds, dtype=np.float64), (4,)).copy())

    def copy(self):
        return ModelParams.from_vector(
            self.to_vector(), self.levels, len(self.beta), len(self.sigma), self.hyper_sds
        )


@dataclass
class Microcensus:
    """Column-oriented dataset; ``N`` uses -1 for unobserved counts."""

    keys: np.ndarray
    X: np.ndarray
    A: np.ndarray
    N: np.ndarray
    levels: tuple = None
    loc_ids: list = None

    def __post_init__(self):
        self.keys = np.asarray(self.keys, dtype=np.int64).reshape(-1, 4)
        n = self.keys.shape[0]
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2:
            X = X.reshape(n, -1) if n else X.reshape(0, 0)
        if X.shape[0] != n:
            raise DimensionMismatch(f"{X.shape[0]} covariate rows for {n} records")
        self.X = X
        self.A = np.asarray(self.A, dtype=np.float64).reshape(n)
        self.N = np.asarray(self.N, dtype=np.int64).reshape(n)
        if np.any(self.keys < 0):
            raise InvalidInput("group ids must be non-negative")
        if np.any(~(self.A > 0)):
            raise InvalidInput("settlement areas must be positive")
        if not np.all(np.isfinite(self.X)):
            raise InvalidInput("covariates must be finite")
        inferred = tuple(int(v) + 1 for v in self.keys.max(axis=0)) if n else (1, 1, 1, 1)
        if self.levels is None:
            self.levels = inferred
        else:
            self.levels = tuple(int(v) for v in self.levels)
            if any(i > d for i, d in zip(inferred, self.levels)):
                raise InvalidInput(f"group ids exceed declared levels {self.levels}")
        if self.loc_ids is None:
            self.loc_ids = [str(i) for i in range(n)]

    @classmethod
    def from_records(cls, records, levels=None):
        records = list(records)
        K = len(records[0].x) if records else 0
        if any(len(r.x) != K for r in records):
            raise DimensionMismatch("records have covariate vectors of different lengths")
        return cls(
            keys=[tuple(r.key) for r in records] if records else np.zeros((0, 4)),
            X=[list(r.x) for r in records] if records else np.zeros((0, K)),
            A=[r.A for r in records],
            N=[-1 if r.N is None else r.N for r in records],
            levels=levels,
        )

    def __len__(self):
        return self.keys.shape[0]

    @property
    def K(self):
        return self.X.shape[1]

    @property
    def observed(self):
        return self.N >= 0

    def records(self):
        return [
            LocationRecord(GroupKey(*map(int, k)), tuple(x.tolist()), float(a), None if n < 0 else int(n))
            for k, x, a, n in zip(self.keys, self.X, self.A, self.N)
        ]

    def subset(self, idx):
        idx = np.asarray(idx)
        return Microcensus(self.keys[idx], self.X[idx], self.A[idx], self.N[idx],
                           self.levels, [self.loc_ids[i] for i in np.arange(len(self))[idx]])


def _check_beta(params, K):
    if len(params.beta) != K:
        raise DimensionMismatch(f"beta has {len(params.beta)} entries, covariates have {K}")


def mu_linear(params: ModelParams, rec: LocationRecord) -> float:
    x = np.asarray(rec.x, dtype=np.float64)
    _check_beta(params, x.shape[0])
    t, r, s, l = rec.key
    return float(
        params.alpha0 + params.alpha_t[t] + params.alpha_r[r] + params.alpha_s[s]
        + params.alpha_l[l] + x @ params.beta
    )


def mu_vector(params: ModelParams, keys, X):
    keys = np.asarray(keys, dtype=np.int64).reshape(-1, 4)
    X = np.asarray(X, dtype=np.float64).reshape(keys.shape[0], -1)
    _check_beta(params, X.shape[1])
    return (
        params.alpha0
        + params.alpha_t[keys[:, 0]]
        + params.alpha_r[keys[:, 1]]
        + params.alpha_s[keys[:, 2]]
        + params.alpha_l[keys[:, 3]]
        + X @ params.beta
    )


def simulate_location(params: ModelParams, key, x, A, rng):
    """One (density, count) draw for a location; ``A == 0`` yields N == 0."""
    if A < 0:
        raise InvalidInput(f"settlement area must be >= 0, got {A}")
    key = GroupKey(*key)
    mu = mu_linear(params, LocationRecord(key, tuple(x), 1.0))
    sigma = float(params.sigma_for(key.t))
    D = float(rng.lognormal(mu, sigma))
    N = int(rng.poisson(D * A))
    return D, N


def simulate_counts(params: ModelParams, keys, X, A, rng):
    """Vectorised draws of (D, N) for many locations."""
    keys = np.asarray(keys, dtype=np.int64).reshape(-1, 4)
    mu = mu_vector(params, keys, X)
    sigma = params.sigma_for(keys[:, 0])
    D = np.exp(mu + sigma * rng.standard_normal(mu.shape[0]))
    N = rng.poisson(D * np.asarray(A, dtype=np.float64))
    return D, N


def synthetic_design(n, K, levels, rng, area_range=(0.5, 3.0)):
    """Random group keys, standardised covariates and areas."""
    keys = np.column_stack([rng.integers(0, lv, size=n) for lv in levels])
    X = rng.standard_normal((n, K))
    if n > 1:
        X = (X - X.mean(axis=0)) / X.std(axis=0)
    A = rng.uniform(area_range[0], area_range[1], size=n)
    return keys, X, A


def simulate_dataset(params: ModelParams, n, rng, levels=None, area_range=(0.5, 3.0)):
    levels = params.levels if levels is None else levels
    keys, X, A = synthetic_design(n, len(params.beta), levels, rng, area_range)
    D, N = simulate_counts(params, keys, X, A, rng)
    return Microcensus(keys, X, A, N, levels), D


def _norm_logpdf(x, sd):
    x = np.asarray(x, dtype=np.float64)
    return float(np.sum(-0.5 * (x / sd) ** 2 - math.log(sd) - 0.5 * _LOG_2PI))


def log_prior(params: ModelParams) -> float:
    if np.any(~(params.sigma > 0)) or np.any(~(params.hyper_sds > 0)):
        return -math.inf
    lp = _norm_logpdf(params.alpha0, COEF_PRIOR_SD)
    for eff, sd in zip(params.effects, params.hyper_sds):
        lp += _norm_logpdf(eff, sd)
    lp += _norm_logpdf(params.beta, COEF_PRIOR_SD)
    lp += math.log(2.0) * len(params.sigma) + _norm_logpdf(params.sigma, SIGMA_PRIOR_SD)
    return lp


def poisson_logpmf(n, rate):
    n = np.asarray(n, dtype=np.float64)
    rate = np.asarray(rate, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(n == 0, 0.0, n * np.log(rate))
    return term - rate - gammaln(n + 1.0)


def lognormal_logpdf(d, mu, sigma):
    logd = np.log(d)
    return -logd - np.log(sigma) - 0.5 * _LOG_2PI - 0.5 * ((logd - mu) / sigma) ** 2


def log_joint(params: ModelParams, data: Microcensus, D) -> float:
    """Log joint density of counts, latent densities and parameters.

    Records with unobserved ``N`` contribute only their density term.
    Returns ``-inf`` outside the support instead of raising.
    """
    D = np.asarray(D, dtype=np.float64).reshape(-1)
    if D.shape[0] != len(data):
        raise DimensionMismatch(f"{D.shape[0]} latent densities for {len(data)} records")
    _check_beta(params, data.K)
    if any(p < d for p, d in zip(params.levels, data.levels)):
        raise DimensionMismatch(f"params cover levels {params.levels}, data needs {data.levels}")
    lp = log_prior(params)
    if not math.isfinite(lp):
        return -math.inf
    if len(data) == 0:
        return lp
    if np.any(~(D > 0)) or not np.all(np.isfinite(D)):
        return -math.inf
    mu = mu_vector(params, data.keys, data.X)
    sigma = params.sigma_for(data.keys[:, 0])
    obs = data.observed
    ll = float(np.sum(poisson_logpmf(data.N[obs], D[obs] * data.A[obs])))
    ll += float(np.sum(lognormal_logpdf(D, mu, sigma)))
    total = lp + ll
    return total if not math.isnan(total) else -math.inf


def require_fittable(data: Microcensus):
    if len(data) == 0:
        raise EmptyDataset("dataset has no records")
    if not np.all(data.observed):
        raise InvalidInput("every record needs an observed count to be fitted")
