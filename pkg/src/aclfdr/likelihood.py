"""Approximate per-site posterior log odds for a weak binary signal.

The conditional likelihood of the data given the signal class at one
site is expanded to second order in the signal strength.  The expansion
needs only the windowed conditional moments of the signal and, per data
point, the first two derivatives of the per-site log noise density with
respect to the signal parameter.  Two couplings are built in: additive
(data = strength * signal + noise) and multiplicative (data scaled by
exp(-strength * signal)); both default to standard Gaussian noise.

Let ``g`` denote the per-site derivative vector and ``k`` the per-site
curvature vector evaluated at the observations.  With ``dE`` and ``dC``
the class-1-minus-class-0 conditional mean and covariance of the signal
restricted to a window around site t, the approximate log posterior
odds are::

    r_t = prior_log_odds
          + eps   * <g, dE>
          + eps^2 / 2 * ( <k, dE> + g' dC g )

The error of this truncation vanishes faster than eps^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import expit

from . import backend
from .exceptions import ConfigError
from .signal import MomentSlices, WindowedMoments, moment_vectors_at

__all__ = [
    "NoiseModel",
    "gaussian_noise",
    "Observations",
    "PosteriorVector",
    "GeneralMoments",
    "log_emission",
    "site_derivatives",
    "multiplicative_gamma_k",
    "log_mgf_expansion",
    "logit_general",
    "logit_localized",
    "approx_logits",
    "posteriors",
]

_LN_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class NoiseModel:
    """A noise log density with its first two derivatives.

    Parameters
    ----------
    kind : {"additive", "multiplicative"}
        How the signal parameter enters the per-site density.
    h, h1, h2 : callable
        Log density of the noise and its first and second derivatives;
        each must accept scalars or arrays elementwise.
    """

    kind: str
    h: Callable[[np.ndarray], np.ndarray]
    h1: Callable[[np.ndarray], np.ndarray]
    h2: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self) -> None:
        if self.kind not in ("additive", "multiplicative"):
            raise ConfigError(f"unknown noise coupling {self.kind!r}")


def gaussian_noise(kind: str = "additive") -> NoiseModel:
    """Standard Gaussian noise under the chosen coupling."""
    return NoiseModel(
        kind=kind,
        h=lambda z: -0.5 * np.square(z) - _LN_SQRT_2PI,
        h1=lambda z: -np.asarray(z, dtype=np.float64),
        h2=lambda z: np.full_like(np.asarray(z, dtype=np.float64), -1.0),
    )


@dataclass(frozen=True)
class Observations:
    """A data vector together with the signal strength that produced it."""

    x: np.ndarray
    epsilon: float

    def __post_init__(self) -> None:
        arr = np.array(self.x, dtype=np.float64, copy=True).ravel()
        if arr.size == 0:
            raise ConfigError("observations must be nonempty")
        if not np.all(np.isfinite(arr)):
            raise ConfigError("observations must be finite")
        if not np.isfinite(self.epsilon) or self.epsilon < 0.0:
            raise ConfigError(f"signal strength must be nonnegative, got {self.epsilon!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "x", arr)

    @property
    def m(self) -> int:
        return int(self.x.size)


@dataclass(frozen=True)
class PosteriorVector:
    """Per-site posterior probabilities in a two-tail representation.

    Both ``probs`` and its complement ``comp`` are stored, each carrying
    full relative precision in its own tail, so extreme log odds survive
    the trip into probability space and back.
    """

    logits: np.ndarray
    probs: np.ndarray
    comp: np.ndarray | None = None

    def __post_init__(self) -> None:
        lg = np.asarray(self.logits, dtype=np.float64)
        pr = np.asarray(self.probs, dtype=np.float64)
        pc = 1.0 - pr if self.comp is None else np.asarray(self.comp, dtype=np.float64)
        if lg.shape != pr.shape or pc.shape != pr.shape or lg.ndim != 1:
            raise ConfigError("logits, probs, and comp must be equal-length vectors")
        if np.any(pr < 0.0) or np.any(pr > 1.0) or np.any(pc < 0.0) or np.any(pc > 1.0):
            raise ConfigError("posterior probabilities must lie in [0, 1]")
        if np.max(np.abs(pr + pc - 1.0), initial=0.0) > 1e-12:
            raise ConfigError("probs and comp must sum to 1")
        object.__setattr__(self, "logits", lg)
        object.__setattr__(self, "probs", pr)
        object.__setattr__(self, "comp", pc)

    def log_odds(self) -> np.ndarray:
        """Recover log odds from the probability pair."""
        with np.errstate(divide="ignore"):
            return np.log(self.probs) - np.log(self.comp)


def log_emission(noise: NoiseModel, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Per-site log density of the data given the signal parameter.

    Additive coupling: ``h(x - theta)``.  Multiplicative coupling:
    ``theta + h(x * exp(theta))``.  Broadcasts over both arguments.
    """
    x = np.asarray(x, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if noise.kind == "additive":
        return np.asarray(noise.h(x - theta), dtype=np.float64)
    return theta + np.asarray(noise.h(x * np.exp(theta)), dtype=np.float64)


def multiplicative_gamma_k(noise: NoiseModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First and second signal derivatives for the multiplicative coupling.

    Returns ``(1 + x h1(x), x h1(x) + x^2 h2(x))`` elementwise.
    """
    if noise.kind != "multiplicative":
        raise ConfigError("noise model does not use the multiplicative coupling")
    x = np.asarray(x, dtype=np.float64)
    xh1 = x * np.asarray(noise.h1(x), dtype=np.float64)
    return 1.0 + xh1, xh1 + np.square(x) * np.asarray(noise.h2(x), dtype=np.float64)


def site_derivatives(noise: NoiseModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-site derivative and curvature of the log emission in the signal.

    Additive coupling returns ``(-h1(x), h2(x))``; multiplicative
    coupling defers to :func:`multiplicative_gamma_k`.
    """
    x = np.asarray(x, dtype=np.float64)
    if noise.kind == "additive":
        g = -np.asarray(noise.h1(x), dtype=np.float64)
        k = np.asarray(noise.h2(x), dtype=np.float64)
        return g, k
    return multiplicative_gamma_k(noise, x)


def log_mgf_expansion(
    g0: float,
    grad: np.ndarray,
    hess: np.ndarray,
    mean: np.ndarray,
    second_moment: np.ndarray,
    epsilon: float,
) -> float:
    """Second-order expansion of ``ln E[exp(g(eps * eta))]``.

    Given the value, gradient and Hessian of ``g`` at zero and the first
    and second moments of the random vector ``eta``, returns::

        g0 + <grad, mean> eps
           + ( tr(hess @ J) + grad' (J - mean mean') grad ) eps^2 / 2

    with ``J`` the second-moment matrix of ``eta``.
    """
    grad = np.asarray(grad, dtype=np.float64).ravel()
    mean = np.asarray(mean, dtype=np.float64).ravel()
    hess = np.asarray(hess, dtype=np.float64)
    jmat = np.asarray(second_moment, dtype=np.float64)
    n = grad.size
    if mean.size != n or hess.shape != (n, n) or jmat.shape != (n, n):
        raise ConfigError("expansion inputs have mismatched dimensions")
    cov = jmat - np.outer(mean, mean)
    quad = float(np.sum(hess * jmat)) + float(grad @ cov @ grad)
    return float(g0) + float(grad @ mean) * epsilon + 0.5 * quad * epsilon**2


class GeneralMoments(NamedTuple):
    """Full-length conditional moments of the signal for one site."""

    mean0: np.ndarray
    mean1: np.ndarray
    cov0: np.ndarray
    cov1: np.ndarray


def logit_general(
    gamma: np.ndarray,
    hess: np.ndarray,
    site_moments: Sequence[GeneralMoments],
    prior_log_odds: float,
    epsilon: float,
) -> np.ndarray:
    """Approximate log posterior odds with an arbitrary Hessian.

    This is the unreduced form of the expansion: ``gamma`` is the full
    gradient of the log data density in the signal parameter and
    ``hess`` its full Hessian, both evaluated at zero signal.  Each
    site supplies its own conditional moment bundle.  The quadratic
    data term uses the conditional second moment ``J_i = cov_i +
    mean_i mean_i'`` through ``tr(hess @ J_i)``.
    """
    gamma = np.asarray(gamma, dtype=np.float64).ravel()
    hess = np.asarray(hess, dtype=np.float64)
    m = len(site_moments)
    if hess.shape != (gamma.size, gamma.size):
        raise ConfigError("Hessian shape does not match the gradient")
    out = np.empty(m, dtype=np.float64)
    for t, sm in enumerate(site_moments):
        j0 = sm.cov0 + np.outer(sm.mean0, sm.mean0)
        j1 = sm.cov1 + np.outer(sm.mean1, sm.mean1)
        lin = float(gamma @ (sm.mean1 - sm.mean0))
        quad_data = float(np.sum(hess * (j1 - j0)))
        quad_cov = float(gamma @ (sm.cov1 - sm.cov0) @ gamma)
        out[t] = prior_log_odds + epsilon * lin + 0.5 * epsilon**2 * (quad_data + quad_cov)
    return out


def _window_slice(vec: np.ndarray, t: int, w: int) -> np.ndarray:
    """Values of ``vec`` at offsets [-w, w] around t, zero outside range."""
    m = vec.size
    out = np.zeros(2 * w + 1, dtype=np.float64)
    lo = max(0, t - w)
    hi = min(m, t + w + 1)
    out[lo - (t - w) : hi - (t - w)] = vec[lo:hi]
    return out


def logit_localized(
    x: Observations,
    noise: NoiseModel,
    moments: WindowedMoments,
    prior_log_odds: float,
    t: int,
) -> float:
    """Approximate log posterior odds at a single site.

    Uses the windowed moment slices around ``t`` (out-of-range offsets
    zeroed) and the diagonal-curvature form of the expansion.
    """
    sl: MomentSlices = moment_vectors_at(moments, t, x.m)
    g, k = site_derivatives(noise, x.x)
    gwin = _window_slice(g, t, moments.w)
    kwin = _window_slice(k, t, moments.w)
    d_mean = sl.mean1 - sl.mean0
    d_cov = sl.cov1 - sl.cov0
    eps = x.epsilon
    lin = float(gwin @ d_mean)
    curv = float(kwin @ d_mean)
    quad = float(gwin @ d_cov @ gwin)
    return prior_log_odds + eps * lin + 0.5 * eps**2 * (curv + quad)


def approx_logits(
    x: Observations,
    noise: NoiseModel,
    moments: WindowedMoments,
    prior_log_odds: float | None = None,
) -> np.ndarray:
    """Approximate log posterior odds at every site (vectorized kernel).

    Parameters
    ----------
    x : Observations
    noise : NoiseModel
    moments : WindowedMoments
        Tables estimated from a training signal (or analytic).
    prior_log_odds : float, optional
        Defaults to the log odds of ``moments.psig_hat``.

    Returns
    -------
    numpy.ndarray
        Length-m logit vector.
    """
    if prior_log_odds is None:
        prior_log_odds = moments.prior_log_odds()
    g, k = site_derivatives(noise, x.x)
    g = np.ascontiguousarray(g, dtype=np.float64)
    k = np.ascontiguousarray(k, dtype=np.float64)
    d_mean = np.ascontiguousarray(moments.delta_mean(), dtype=np.float64)
    d_cov = np.ascontiguousarray(moments.delta_cov(), dtype=np.float64)
    return np.asarray(
        backend.windowed_logits(g, k, d_mean, d_cov, float(prior_log_odds), float(x.epsilon))
    )


def posteriors(logits: np.ndarray) -> PosteriorVector:
    """Map logits to posterior probabilities with saturation-safe logistic.

    The complement tail is evaluated as ``expit(-r)`` rather than
    ``1 - expit(r)``, so it stays accurate when ``r`` is large.
    """
    lg = np.asarray(logits, dtype=np.float64).ravel()
    if not np.all(np.isfinite(lg)):
        raise ConfigError("logits must be finite")
    return PosteriorVector(logits=lg, probs=expit(lg), comp=expit(-lg))
