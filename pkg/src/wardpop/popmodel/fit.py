"""Point estimation and posterior sampling.

Both routines work in a reduced coordinate system: the regression
coefficients that are actually free (intercept, effects of factors with more
than one level, slopes), the sigma vector, and the per-location log density
``u = log D``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .._accel import use_numba
from ..errors import NonFinite
from . import _latent
from .model import (
    COEF_PRIOR_SD,
    SIGMA_PRIOR_SD,
    Microcensus,
    ModelParams,
    log_joint,
    require_fittable,
)


class Design:
    """Regression design for the free coefficients of one dataset."""

    def __init__(self, data: Microcensus, per_type_sigma=False, hyper_sds=1.0):
        self.levels = data.levels
        self.K = data.K
        self.hyper_sds = np.broadcast_to(np.asarray(hyper_sds, dtype=np.float64), (4,)).copy()
        n = len(data)
        cols = [np.ones((n, 1))]
        prior_var = [COEF_PRIOR_SD ** 2]
        self.blocks = []  # (factor index, first column) for active factors
        pos = 1
        for f, lv in enumerate(self.levels):
            if lv > 1:
                onehot = np.zeros((n, lv))
                onehot[np.arange(n), data.keys[:, f]] = 1.0
                cols.append(onehot)
                prior_var += [self.hyper_sds[f] ** 2] * lv
                self.blocks.append((f, pos))
                pos += lv
        self.beta_pos = pos
        cols.append(data.X)
        prior_var += [COEF_PRIOR_SD ** 2] * self.K
        self.Z = np.hstack(cols)
        self.prior_prec = 1.0 / np.asarray(prior_var)
        self.n_coef = self.Z.shape[1]
        self.per_type_sigma = per_type_sigma
        self.n_sigma = self.levels[0] if per_type_sigma else 1
        self.group = data.keys[:, 0].copy() if per_type_sigma else np.zeros(n, dtype=np.int64)
        self.group_n = np.bincount(self.group, minlength=self.n_sigma).astype(np.float64)

    def to_params(self, coef, sigma) -> ModelParams:
        p = ModelParams.zeros(self.levels, self.K, 1.0, self.per_type_sigma, self.hyper_sds)
        p.alpha0 = float(coef[0])
        effects = p.effects
        for f, pos in self.blocks:
            effects[f][:] = coef[pos:pos + self.levels[f]]
        p.beta[:] = coef[self.beta_pos:]
        p.sigma[:] = sigma
        return p

    def from_params(self, p: ModelParams):
        coef = np.empty(self.n_coef)
        coef[0] = p.alpha0
        for f, pos in self.blocks:
            coef[pos:pos + self.levels[f]] = p.effects[f]
        coef[self.beta_pos:] = p.beta
        return coef, p.sigma.copy()

    def ridge(self, u, sigma):
        """Exact maximiser of the coefficient block given ``u`` and sigma."""
        w = 1.0 / sigma[self.group] ** 2
        Zw = self.Z * w[:, None]
        H = self.Z.T @ Zw + np.diag(self.prior_prec)
        coef = np.linalg.solve(H, Zw.T @ u)
        return coef, H

    def sigma_update(self, u, coef, sigma):
        """Exact maximiser of the sigma block (Half-Normal prior).

        Maximises -n log s - SS / (2 s^2) - s^2 / 2, whose stationary point
        solves s^4 + n s^2 - SS = 0.
        """
        resid = u - self.Z @ coef
        ss = np.bincount(self.group, weights=resid * resid, minlength=self.n_sigma)
        out = sigma.copy()
        for g in range(self.n_sigma):
            n = self.group_n[g]
            if n == 0:
                continue
            s2 = (-n + math.sqrt(n * n + 4.0 * ss[g] / SIGMA_PRIOR_SD ** 2)) / 2.0 * SIGMA_PRIOR_SD ** 2
            out[g] = math.sqrt(max(s2, 1e-300))
        return out


def _latent_objective(u, N, A, mu, inv_var):
    # log D-space density in u = log D, dropping terms constant in u
    return N * u - A * np.exp(u) - u - 0.5 * inv_var * (u - mu) ** 2


def _latent_newton(u, N, A, mu, inv_var, max_iter=100):
    """Per-location maximiser of the (strictly concave) latent objective."""
    u = u.copy()
    f = _latent_objective(u, N, A, mu, inv_var)
    for _ in range(max_iter):
        e = A * np.exp(u)
        grad = N - 1.0 - e - inv_var * (u - mu)
        hess = -e - inv_var
        step = -grad / hess
        t = np.ones_like(u)
        cand = u + step
        fc = _latent_objective(cand, N, A, mu, inv_var)
        for _ in range(60):
            bad = ~(fc >= f)
            if not bad.any():
                break
            t[bad] *= 0.5
            cand = np.where(bad, u + t * step, cand)
            fc = np.where(bad, _latent_objective(cand, N, A, mu, inv_var), fc)
        ok = fc >= f
        u = np.where(ok, cand, u)
        f = np.where(ok, fc, f)
        if np.all(np.abs(t * step) <= 1e-12 * (1.0 + np.abs(u))):
            break
    return u


@dataclass
class MapConfig:
    tol: float = 1e-8
    max_iters: int = 500
    per_type_sigma: bool = False
    hyper_sds: float = 1.0


@dataclass
class MapResult:
    params: ModelParams
    D: np.ndarray
    log_joint: float
    trace: list
    iterations: int
    converged: bool


def fit_map(data: Microcensus, config: MapConfig | None = None) -> MapResult:
    """Coordinate ascent on the log joint.

    Blocks are maximised exactly in turn: coefficients (a ridge solve),
    sigma (closed form) and every log density (damped Newton). A sweep that
    fails to raise the objective is discarded, so ``trace`` never decreases.
    """
    config = config or MapConfig()
    require_fittable(data)
    design = Design(data, config.per_type_sigma, config.hyper_sds)
    N = data.N.astype(np.float64)
    A = data.A
    u = np.log((N + 0.5) / A)
    sigma = np.ones(design.n_sigma)
    coef, _ = design.ridge(u, sigma)

    def objective(coef, sigma, u):
        return log_joint(design.to_params(coef, sigma), data, np.exp(u))

    current = objective(coef, sigma, u)
    if not math.isfinite(current):
        raise NonFinite("log joint is not finite at the starting point")
    trace = [current]
    converged = False
    it = 0
    for it in range(1, config.max_iters + 1):
        new_coef, _ = design.ridge(u, sigma)
        new_sigma = design.sigma_update(u, new_coef, sigma)
        mu = design.Z @ new_coef
        inv_var = 1.0 / new_sigma[design.group] ** 2
        new_u = _latent_newton(u, N, A, mu, inv_var)
        value = objective(new_coef, new_sigma, new_u)
        if not math.isfinite(value):
            raise NonFinite(f"log joint diverged at iteration {it}")
        if value < current:
            converged = True
            break
        coef, sigma, u = new_coef, new_sigma, new_u
        improvement = (value - current) / max(abs(current), 1.0)
        current = value
        trace.append(value)
        if improvement < config.tol:
            converged = True
            break
    params = design.to_params(coef, sigma)
    return MapResult(params, np.exp(u), current, trace, it, converged)


@dataclass
class MHConfig:
    draws: int = 2000
    burn_in: int = 1000
    seed: int = 0
    # None picks automatic scales; 0 freezes that block entirely
    step_params: float | None = None
    step_latent: float | None = None
    adapt: bool = True
    per_type_sigma: bool = False
    hyper_sds: float = 1.0
    target_accept: float = 0.234
    target_accept_latent: float = 0.44


@dataclass
class Chain:
    samples: np.ndarray
    names: list
    log_joint: np.ndarray
    seed: int
    acceptance_rate: float
    latent_acceptance_rate: float
    draws: int
    burn_in: int
    levels: tuple
    K: int
    n_sigma: int
    hyper_sds: np.ndarray = field(default_factory=lambda: np.ones(4))
    step_scale: float = float("nan")
    log_density_mean: np.ndarray | None = None

    def __len__(self):
        return self.samples.shape[0]

    def params(self, i) -> ModelParams:
        return ModelParams.from_vector(self.samples[i], self.levels, self.K, self.n_sigma, self.hyper_sds)

    def column(self, name):
        return self.samples[:, self.names.index(name)]

    def interval(self, name, q=0.95):
        lo, hi = np.quantile(self.column(name), [(1 - q) / 2, (1 + q) / 2])
        return float(lo), float(hi)

    def mean_params(self) -> ModelParams:
        return ModelParams.from_vector(
            self.samples.mean(axis=0), self.levels, self.K, self.n_sigma, self.hyper_sds
        )


def _block_logpost(design, coef, log_sigma, u):
    """Coefficient/sigma block target in (coef, log sigma) coordinates."""
    sigma = np.exp(log_sigma)
    resid = u - design.Z @ coef
    ss = np.bincount(design.group, weights=resid * resid, minlength=design.n_sigma)
    lp = float(np.sum(-design.group_n * log_sigma - 0.5 * ss / sigma ** 2))
    lp -= 0.5 * float(np.sum(design.prior_prec * coef * coef))
    # Half-Normal prior on sigma plus the log-sigma Jacobian
    lp += float(np.sum(-0.5 * (sigma / SIGMA_PRIOR_SD) ** 2 + log_sigma))
    return lp


def fit_mh(data: Microcensus, config: MHConfig | None = None, init: MapResult | None = None) -> Chain:
    """Random-walk Metropolis over coefficients, log sigma and log densities.

    Each iteration runs one Metropolis sweep over the log densities (each
    location accepted on its own) followed by one joint Gaussian proposal for
    the coefficient/log-sigma block. The block proposal is shaped by the
    conditional posterior covariance at the MAP point; its global scale and
    the per-location steps adapt during burn-in only.
    """
    config = config or MHConfig()
    require_fittable(data)
    if init is None:
        init = fit_map(data, MapConfig(per_type_sigma=config.per_type_sigma,
                                       hyper_sds=config.hyper_sds))
    design = Design(data, config.per_type_sigma, config.hyper_sds)
    rng = np.random.default_rng(config.seed)
    sweep = _latent.sweep_loops if use_numba() else _latent.sweep_vector

    N = data.N.astype(np.float64)
    A = data.A
    n = len(data)
    coef, sigma = design.from_params(init.params)
    log_sigma = np.log(sigma)
    u = np.log(init.D)

    _, H = design.ridge(u, sigma)
    cov = np.zeros((design.n_coef + design.n_sigma,) * 2)
    cov[:design.n_coef, :design.n_coef] = np.linalg.inv(H)
    cov[design.n_coef:, design.n_coef:] = np.diag(1.0 / (2.0 * np.maximum(design.group_n, 1.0)))
    chol = np.linalg.cholesky(cov)
    dim = cov.shape[0]

    scale = 2.38 / math.sqrt(dim) if config.step_params is None else float(config.step_params)
    if config.step_latent is None:
        step = 2.4 / np.sqrt(N + 1.0 / sigma[design.group] ** 2)
    else:
        step = np.full(n, float(config.step_latent))

    block_lp = _block_logpost(design, coef, log_sigma, u)
    accepted = np.zeros(n, dtype=np.bool_)
    total = config.burn_in + config.draws
    names = design.to_params(coef, sigma).vector_names()
    samples = np.empty((config.draws, len(names)))
    lj = np.empty(config.draws)
    latent_sum = np.zeros(n)
    n_acc_block = 0
    n_acc_latent = 0

    for it in range(total):
        burning = it < config.burn_in
        mu = design.Z @ coef
        inv_var = np.exp(-2.0 * log_sigma)[design.group]
        z = rng.standard_normal(n)
        logu = np.log(rng.random(n))
        n_lat = sweep(u, N, A, mu, inv_var, step, z, logu, accepted)
        if burning and config.adapt:
            gamma = (it + 1) ** -0.6
            step *= np.exp(gamma * (accepted - config.target_accept_latent))
        block_lp = _block_logpost(design, coef, log_sigma, u)

        prop = np.concatenate([coef, log_sigma]) + scale * (chol @ rng.standard_normal(dim))
        p_coef = prop[:design.n_coef]
        p_ls = prop[design.n_coef:]
        p_lp = _block_logpost(design, p_coef, p_ls, u)
        ok = math.log(rng.random()) < p_lp - block_lp
        if ok:
            coef, log_sigma, block_lp = p_coef, p_ls, p_lp
        if burning:
            if config.adapt and scale > 0:
                scale *= math.exp(((it + 1) ** -0.6) * (float(ok) - config.target_accept))
            continue
        j = it - config.burn_in
        n_acc_block += ok
        n_acc_latent += n_lat
        params = design.to_params(coef, np.exp(log_sigma))
        samples[j] = params.to_vector()
        lj[j] = log_joint(params, data, np.exp(u))
        latent_sum += u

    return Chain(
        samples=samples,
        names=names,
        log_joint=lj,
        seed=config.seed,
        acceptance_rate=n_acc_block / config.draws if config.draws else float("nan"),
        latent_acceptance_rate=n_acc_latent / (config.draws * n) if config.draws else float("nan"),
        draws=config.draws,
        burn_in=config.burn_in,
        levels=data.levels,
        K=data.K,
        n_sigma=design.n_sigma,
        hyper_sds=design.hyper_sds,
        step_scale=scale,
        log_density_mean=latent_sum / config.draws if config.draws else None,
    )
