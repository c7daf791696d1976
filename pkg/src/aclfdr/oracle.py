"""Exact per-site posteriors for small instances, by enumeration or recursion.

Ground truth for the Taylor approximation and for procedure-level
property tests.  Two routes are provided: literal enumeration of every
signal configuration (or every parent-chain path) in log space, and the
scaled forward-backward recursion, which is exact for chain-structured
priors at any length.  Both return the per-site probability that the
signal is 1 given the data, plus the log marginal density of the data.
"""

from __future__ import annotations

from typing import Mapping, NamedTuple

import numpy as np
from scipy.special import logsumexp

from .exceptions import BudgetError, ConfigError
from .likelihood import NoiseModel, Observations, log_emission
from .signal import ParentChainSpec

__all__ = [
    "ExactPosterior",
    "iid_prior",
    "brute_force_posterior",
    "forward_backward_posterior",
]

_MAX_BINARY_M = 20
_MAX_CHAIN_M = 10
_MAX_PATHS = 1 << 20


class ExactPosterior(NamedTuple):
    """Exact posterior signal probabilities and the log evidence."""

    probs: np.ndarray
    log_evidence: float


def iid_prior(m: int, psig: float) -> dict[tuple[int, ...], float]:
    """Explicit product-Bernoulli prior over all length-m binary vectors."""
    if not 0.0 < psig < 1.0:
        raise ConfigError(f"psig must lie in (0, 1), got {psig!r}")
    if m < 1:
        raise ConfigError("m must be at least 1")
    if m > _MAX_BINARY_M:
        raise BudgetError(f"m={m} exceeds the {_MAX_BINARY_M}-site enumeration budget")
    prior: dict[tuple[int, ...], float] = {}
    for code in range(1 << m):
        bits = tuple((code >> t) & 1 for t in range(m))
        ones = sum(bits)
        prior[bits] = psig**ones * (1.0 - psig) ** (m - ones)
    return prior


def _binary_enumeration(
    prior: Mapping[tuple[int, ...], float], x: Observations, noise: NoiseModel
) -> ExactPosterior:
    m = x.m
    if m > _MAX_BINARY_M:
        raise BudgetError(f"m={m} exceeds the {_MAX_BINARY_M}-site enumeration budget")
    keys = list(prior.keys())
    weights = np.array([prior[key] for key in keys], dtype=np.float64)
    if np.any(weights < 0.0) or abs(float(weights.sum()) - 1.0) > 1e-9:
        raise ConfigError("prior weights must be nonnegative and sum to 1")
    bits = np.array(keys, dtype=np.uint8)
    if bits.ndim != 2 or bits.shape[1] != m or np.any(bits > 1):
        raise ConfigError("prior keys must be 0/1 tuples matching the data length")
    q0 = log_emission(noise, x.x, 0.0)
    q1 = log_emission(noise, x.x, x.epsilon)
    with np.errstate(divide="ignore"):
        loglik = np.log(weights) + bits @ (q1 - q0) + float(q0.sum())
    log_ev = float(logsumexp(loglik))
    probs = np.empty(m, dtype=np.float64)
    for t in range(m):
        sel = bits[:, t] == 1
        probs[t] = np.exp(logsumexp(loglik[sel]) - log_ev) if sel.any() else 0.0
    return ExactPosterior(probs=probs, log_evidence=log_ev)


def _chain_enumeration(
    spec: ParentChainSpec, x: Observations, noise: NoiseModel
) -> ExactPosterior:
    m = x.m
    d = spec.d
    n_paths = d**m
    if m > _MAX_CHAIN_M or n_paths > _MAX_PATHS:
        raise BudgetError(
            f"chain enumeration over {d}^{m} paths exceeds the {_MAX_PATHS} budget"
        )
    sig = spec.signal_mask
    q0 = log_emission(noise, x.x, 0.0)
    q1 = log_emission(noise, x.x, x.epsilon)
    with np.errstate(divide="ignore"):
        log_pi = np.log(spec.pi.entries)
        log_p = np.log(spec.P.entries)
    idx = np.arange(n_paths)
    # accumulate log prior + log emission column by column
    prev = idx % d
    loglik = log_pi[prev] + np.where(sig[prev], q1[0], q0[0])
    for t in range(1, m):
        cur = (idx // d**t) % d
        loglik += log_p[prev, cur] + np.where(sig[cur], q1[t], q0[t])
        prev = cur
    log_ev = float(logsumexp(loglik))
    probs = np.empty(m, dtype=np.float64)
    for t in range(m):
        cur = (idx // d**t) % d
        sel = sig[cur]
        probs[t] = np.exp(logsumexp(loglik[sel]) - log_ev) if sel.any() else 0.0
    return ExactPosterior(probs=probs, log_evidence=log_ev)


def brute_force_posterior(
    prior: ParentChainSpec | Mapping[tuple[int, ...], float],
    x: Observations,
    noise: NoiseModel,
) -> ExactPosterior:
    """Exact posteriors by literal enumeration in log space.

    Parameters
    ----------
    prior : ParentChainSpec or mapping
        Either a parent chain (enumerates every state path) or an
        explicit distribution over binary signal vectors, keyed by 0/1
        tuples of the data length.
    x : Observations
    noise : NoiseModel

    Raises
    ------
    BudgetError
        If the instance exceeds the enumeration budget (20 sites for
        binary vectors; 10 sites and 2^20 paths for chains).
    """
    if isinstance(prior, ParentChainSpec):
        return _chain_enumeration(prior, x, noise)
    return _binary_enumeration(prior, x, noise)


def forward_backward_posterior(
    spec: ParentChainSpec, x: Observations, noise: NoiseModel
) -> ExactPosterior:
    """Exact posteriors for a chain prior via scaled forward-backward.

    Emission log densities are shifted by their per-step maximum before
    exponentiation and the forward variables are renormalized at every
    step, so the recursion is stable at any length.  The per-site signal
    probability is the smoothed mass of the states that project to 1.

    Raises
    ------
    FloatingPointError
        If a forward normalizer underflows to zero despite the scaling.
    """
    m = x.m
    sig = spec.signal_mask
    q0 = log_emission(noise, x.x, 0.0)
    q1 = log_emission(noise, x.x, x.epsilon)
    logb = np.where(sig[None, :], q1[:, None], q0[:, None])
    shift = logb.max(axis=1)
    b = np.exp(logb - shift[:, None])
    p_mat = spec.P.entries
    alphas = np.empty((m, spec.d), dtype=np.float64)
    scales = np.empty(m, dtype=np.float64)
    vec = spec.pi.entries * b[0]
    for t in range(m):
        if t > 0:
            vec = (alphas[t - 1] @ p_mat) * b[t]
        c = float(vec.sum())
        if c <= 0.0 or not np.isfinite(c):
            raise FloatingPointError(f"forward normalizer underflowed at site {t}")
        alphas[t] = vec / c
        scales[t] = c
    log_ev = float(np.log(scales).sum() + shift.sum())
    beta = np.ones(spec.d, dtype=np.float64)
    probs = np.empty(m, dtype=np.float64)
    for t in range(m - 1, -1, -1):
        smoothed = alphas[t] * beta
        total = float(smoothed.sum())
        if total <= 0.0 or not np.isfinite(total):
            raise FloatingPointError(f"backward normalizer underflowed at site {t}")
        probs[t] = float(smoothed[sig].sum()) / total
        if t > 0:
            beta = (p_mat @ (b[t] * beta)) / scales[t]
    return ExactPosterior(probs=probs, log_evidence=log_ev)
