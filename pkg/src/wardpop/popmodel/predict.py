"""Posterior-predictive population for unsampled locations."""
from __future__ import annotations

import math

import numpy as np

from ..errors import EmptyChain, InvalidInput
from .fit import Chain
from .model import ModelParams


def _chain_arrays(chain):
    """Per-draw (alpha0, effects tuple, beta, sigma) stacked over draws."""
    levels, K, ns = chain.levels, chain.K, chain.n_sigma
    S = chain.samples
    pos = 1
    effects = []
    for lv in levels:
        effects.append(S[:, pos:pos + lv])
        pos += lv
    beta = S[:, pos:pos + K]
    sigma = S[:, pos + K:pos + K + ns]
    return S[:, 0], effects, beta, sigma


def predict_many(chain: Chain, keys, X, A, q=0.95, seed=0, n_samples=4000):
    """Predictive mean and central ``q`` interval for each location.

    Per draw, the expected count is ``exp(mu + sigma^2 / 2) * A``; the
    reported mean averages that over draws. The interval comes from
    empirical quantiles of counts simulated through the full model, using
    ``ceil(n_samples / draws)`` simulations per draw.
    Returns ``(mean, lo, hi)`` arrays.
    """
    if chain is None or len(chain) == 0:
        raise EmptyChain("chain has no retained draws")
    if not 0.0 < q < 1.0:
        raise InvalidInput(f"q must be in (0, 1), got {q}")
    keys = np.asarray(keys, dtype=np.int64).reshape(-1, 4)
    m = keys.shape[0]
    X = np.asarray(X, dtype=np.float64).reshape(m, chain.K)
    A = np.asarray(A, dtype=np.float64).reshape(m)
    if np.any(A < 0):
        raise InvalidInput("settlement areas must be non-negative")
    for f, lv in enumerate(chain.levels):
        if np.any(keys[:, f] >= lv):
            raise InvalidInput(f"group id out of range for factor {f} ({lv} levels)")

    alpha0, effects, beta, sigma = _chain_arrays(chain)
    # (draws, locations)
    mu = alpha0[:, None] + (X @ beta.T).T
    for f in range(4):
        mu = mu + effects[f][:, keys[:, f]]
    sig = sigma[:, keys[:, 0]] if chain.n_sigma > 1 else np.repeat(sigma[:, :1], m, axis=1)

    expected = np.exp(mu + 0.5 * sig * sig) * A[None, :]
    mean = expected.mean(axis=0)

    rng = np.random.default_rng(seed)
    reps = max(1, math.ceil(n_samples / len(chain)))
    mu_r = np.repeat(mu, reps, axis=0)
    sig_r = np.repeat(sig, reps, axis=0)
    D = np.exp(mu_r + sig_r * rng.standard_normal(mu_r.shape))
    counts = rng.poisson(D * A[None, :])
    lo, hi = np.quantile(counts, [(1.0 - q) / 2.0, (1.0 + q) / 2.0], axis=0, method="inverted_cdf")
    return mean, lo, hi


def predict(chain: Chain, key, x, A, q=0.95, seed=0, n_samples=4000):
    """(mean persons, (lo, hi)) for a single location."""
    mean, lo, hi = predict_many(chain, [tuple(key)], [list(x)], [A], q, seed, n_samples)
    return float(mean[0]), (float(lo[0]), float(hi[0]))


def chain_from_params(params_list, seed=0):
    """Wrap fixed parameter draws as a Chain (for scenario predictions)."""
    params_list = list(params_list)
    if not params_list:
        raise EmptyChain("no parameter draws")
    p0: ModelParams = params_list[0]
    samples = np.vstack([p.to_vector() for p in params_list])
    return Chain(
        samples=samples,
        names=p0.vector_names(),
        log_joint=np.full(len(params_list), np.nan),
        seed=seed,
        acceptance_rate=float("nan"),
        latent_acceptance_rate=float("nan"),
        draws=len(params_list),
        burn_in=0,
        levels=p0.levels,
        K=len(p0.beta),
        n_sigma=len(p0.sigma),
        hyper_sds=p0.hyper_sds,
    )
