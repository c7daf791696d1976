"""Markov signal chains and windowed moment tables.

A parent chain on ``d`` states is simulated from its stationary law and
projected to a binary signal: states in a designated subset map to 0,
the rest to 1.  From a noiseless training realization the module
estimates the marginal signal rate and the conditional first and second
moments of the signal at offsets within a half-window ``w``; these
tables feed the likelihood expansion.  Offsets beyond the window, or
falling outside the observed index range, are treated as zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from . import backend
from .ensembles import ProbVector, TransitionMatrix, _f_mask
from .exceptions import ConfigError, EstimationError

__all__ = [
    "ParentChainSpec",
    "WindowedMoments",
    "MomentSlices",
    "as_binary_signal",
    "simulate_chain",
    "project",
    "estimate_moments",
    "moment_vectors_at",
    "analytic_moments",
]


@dataclass(frozen=True)
class ParentChainSpec:
    """A parent chain together with its binary projection.

    Parameters
    ----------
    d : int
        Number of parent states, indexed from 0.
    f_set : tuple of int
        Nonempty strict subset of ``range(d)`` projected to 0.
    pi : ProbVector
        Initial (stationary) distribution of the chain.
    P : TransitionMatrix
        Transition matrix; its ``stationary`` tag is optional, so
        matrices quoted to a few decimals can be used directly.
    psig : float
        Stationary signal rate; must equal the ``pi`` mass outside
        ``f_set`` within 1e-10.
    """

    d: int
    f_set: tuple[int, ...]
    pi: ProbVector
    P: TransitionMatrix
    psig: float

    def __post_init__(self) -> None:
        mask = _f_mask(self.d, self.f_set)
        object.__setattr__(self, "f_set", tuple(sorted({int(s) for s in self.f_set})))
        if self.pi.dim != self.d or self.P.dim != self.d:
            raise ConfigError("pi and P dimensions must equal d")
        mass = float(self.pi.entries[~mask].sum())
        if abs(mass - self.psig) > 1e-10:
            raise ConfigError(
                f"pi mass outside f_set is {mass!r}, expected psig={self.psig!r}"
            )

    @property
    def signal_mask(self) -> np.ndarray:
        """Boolean mask over states; True where the projection is 1."""
        return ~_f_mask(self.d, self.f_set)


def as_binary_signal(bits: Iterable[int]) -> np.ndarray:
    """Validate and return a 0/1 vector as a uint8 array."""
    arr = np.asarray(bits)
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigError("binary signal must be a nonempty vector")
    vals = np.unique(arr)
    if not np.all(np.isin(vals, (0, 1))):
        raise ConfigError("binary signal entries must be 0 or 1")
    return arr.astype(np.uint8)


def simulate_chain(spec: ParentChainSpec, m: int, rng: np.random.Generator) -> np.ndarray:
    """Simulate ``m`` steps of the parent chain started from ``pi``.

    The first state is drawn from ``pi`` (no burn-in); each later state
    from the row of ``P`` indexed by its predecessor.  One uniform draw
    is consumed per step, so the path is a deterministic function of the
    generator state.

    Returns
    -------
    numpy.ndarray
        int64 state indices of length ``m``.
    """
    if m < 1:
        raise ConfigError("chain length must be at least 1")
    u = rng.random(m)
    return backend.simulate_states(spec.pi.entries, spec.P.entries, u)


def project(states: np.ndarray, f_set: Iterable[int], d: int | None = None) -> np.ndarray:
    """Project parent states to bits: 0 on ``f_set``, 1 elsewhere.

    Parameters
    ----------
    states : array_like of int
    f_set : iterable of int
    d : int, optional
        When given, states outside ``range(d)`` raise an error.
    """
    arr = np.asarray(states)
    if arr.size and int(arr.min()) < 0:
        raise ConfigError("state indices must be nonnegative")
    if d is not None and arr.size and int(arr.max()) >= d:
        raise ConfigError(f"state index {int(arr.max())} out of range for d={d}")
    f_list = np.asarray(sorted({int(s) for s in f_set}))
    return (~np.isin(arr, f_list)).astype(np.uint8)


@dataclass(frozen=True)
class WindowedMoments:
    """Windowed conditional moment tables of a stationary binary signal.

    Offsets are stored at index ``w + delta`` for ``delta`` in
    ``[-w, w]``.  ``mu_cond[i, w + delta]`` estimates the mean of the
    signal at offset ``delta`` given value ``i`` at the centre;
    ``j_cond[i, w + d1, w + d2]`` the corresponding second moment for an
    offset pair.  ``psig_hat`` is the marginal signal rate.
    """

    w: int
    psig_hat: float
    mu_cond: np.ndarray
    j_cond: np.ndarray

    def __post_init__(self) -> None:
        width = 2 * self.w + 1
        mu = np.array(self.mu_cond, dtype=np.float64, copy=True)
        jj = np.array(self.j_cond, dtype=np.float64, copy=True)
        if self.w < 0:
            raise ConfigError("half-window length must be nonnegative")
        if mu.shape != (2, width) or jj.shape != (2, width, width):
            raise ConfigError("moment table shapes do not match the window")
        if not 0.0 <= self.psig_hat <= 1.0:
            raise ConfigError("marginal signal rate must lie in [0, 1]")
        if np.any(mu < 0.0) or np.any(mu > 1.0) or np.any(jj < 0.0) or np.any(jj > 1.0):
            raise ConfigError("moment table values must lie in [0, 1]")
        for i in (0, 1):
            if mu[i, self.w] != float(i):
                raise ConfigError("conditional mean at offset 0 must equal the class value")
            if not np.array_equal(jj[i], jj[i].T):
                raise ConfigError("second-moment tables must be symmetric")
            if not np.allclose(np.diag(jj[i]), mu[i], rtol=0.0, atol=1e-12):
                raise ConfigError("second moment at equal offsets must equal the mean")
            if not np.allclose(jj[i, self.w], float(i) * mu[i], rtol=0.0, atol=1e-12):
                raise ConfigError("second moment against offset 0 must equal i times the mean")
        mu.setflags(write=False)
        jj.setflags(write=False)
        object.__setattr__(self, "mu_cond", mu)
        object.__setattr__(self, "j_cond", jj)

    @property
    def width(self) -> int:
        return 2 * self.w + 1

    def delta_mean(self) -> np.ndarray:
        """Difference of conditional mean vectors, class 1 minus class 0."""
        return self.mu_cond[1] - self.mu_cond[0]

    def cov(self, i: int) -> np.ndarray:
        """Conditional covariance table for class ``i``."""
        mu = self.mu_cond[i]
        return self.j_cond[i] - np.outer(mu, mu)

    def delta_cov(self) -> np.ndarray:
        """Difference of conditional covariance tables, class 1 minus class 0."""
        return self.cov(1) - self.cov(0)

    def prior_log_odds(self) -> float:
        """Log odds of the marginal signal rate."""
        if not 0.0 < self.psig_hat < 1.0:
            raise EstimationError(
                f"marginal signal rate {self.psig_hat!r} gives degenerate odds"
            )
        return float(np.log(self.psig_hat) - np.log1p(-self.psig_hat))


def estimate_moments(theta: np.ndarray, w: int) -> WindowedMoments:
    """Estimate windowed conditional moments from a training signal.

    Plain empirical ratios over index pairs lying fully inside the
    observed range (no wraparound); stationarity lets one offset-indexed
    table serve every site.  An offset whose conditioning class never
    occurs in the valid range contributes a 0 entry.

    Parameters
    ----------
    theta : array_like of {0, 1}
        Training signal of length m > 2w + 1, containing both values.
    w : int
        Half-window length.

    Raises
    ------
    EstimationError
        If ``theta`` is constant (conditional moments undefined).
    """
    bits = as_binary_signal(theta)
    if w < 0:
        raise ConfigError("half-window length must be nonnegative")
    m = bits.size
    if m <= 2 * w + 1:
        raise ConfigError(f"signal length {m} must exceed 2w+1 = {2 * w + 1}")
    ones = int(bits.sum())
    if ones == 0 or ones == m:
        raise EstimationError("training signal is constant; conditional moments undefined")
    mu_num, mu_den, j_num, j_den = backend.pair_counts(bits.astype(np.int64), w)
    with np.errstate(invalid="ignore"):
        mu = np.where(mu_den > 0, mu_num / np.maximum(mu_den, 1), 0.0)
        jj = np.where(j_den > 0, j_num / np.maximum(j_den, 1), 0.0)
    return WindowedMoments(w=w, psig_hat=ones / m, mu_cond=mu, j_cond=jj)


class MomentSlices(NamedTuple):
    """Windowed moment vectors and covariances centred at one site."""

    mean0: np.ndarray
    mean1: np.ndarray
    cov0: np.ndarray
    cov1: np.ndarray


def moment_vectors_at(moments: WindowedMoments, t: int, m: int) -> MomentSlices:
    """Moment slices for the window around site ``t`` of an m-vector.

    Entries at offsets that leave ``[0, m)`` are zeroed, so boundary
    sites simply lose the out-of-range terms of the expansion.
    """
    if not 0 <= t < m:
        raise ConfigError(f"site {t} out of range for length {m}")
    offs = np.arange(-moments.w, moments.w + 1)
    valid = ((t + offs) >= 0) & ((t + offs) < m)
    pair_valid = np.outer(valid, valid)
    mean0 = moments.mu_cond[0] * valid
    mean1 = moments.mu_cond[1] * valid
    cov0 = moments.cov(0) * pair_valid
    cov1 = moments.cov(1) * pair_valid
    return MomentSlices(mean0=mean0, mean1=mean1, cov0=cov0, cov1=cov1)


def _interval_prob(pi: np.ndarray, powers: list[np.ndarray], events: list) -> float:
    """Probability that a stationary chain meets masked events at given times.

    ``events`` is a list of ``(time, mask)`` pairs; coincident times are
    merged by intersecting masks.
    """
    merged: dict[int, np.ndarray] = {}
    for time, mask in events:
        # masks are 0/1 indicator vectors, so products intersect them
        merged[time] = merged[time] * mask if time in merged else mask.copy()
    times = sorted(merged)
    vec = pi * merged[times[0]]
    for prev, cur in zip(times, times[1:]):
        vec = (vec @ powers[cur - prev]) * merged[cur]
    return float(vec.sum())


def analytic_moments(spec: ParentChainSpec, w: int) -> WindowedMoments:
    """Exact windowed moments of the projected chain, via matrix powers.

    Computes interior-site conditional moments of the stationary signal
    directly from ``(pi, P)`` and the projection, for comparison with
    the empirical tables.
    """
    if w < 0:
        raise ConfigError("half-window length must be nonnegative")
    sig = spec.signal_mask.astype(np.float64)
    classes = (1.0 - sig, sig)
    pi = spec.pi.entries
    powers = [np.eye(spec.d)]
    for _ in range(2 * w):
        powers.append(powers[-1] @ spec.P.entries)
    width = 2 * w + 1
    mu = np.zeros((2, width))
    jj = np.zeros((2, width, width))
    for i in (0, 1):
        base = float((pi * classes[i]).sum())
        for a in range(-w, w + 1):
            mu[i, w + a] = _interval_prob(pi, powers, [(0, classes[i]), (a, sig)]) / base
            for b in range(a, w + 1):
                val = _interval_prob(
                    pi, powers, [(0, classes[i]), (a, sig), (b, sig)]
                ) / base
                jj[i, w + a, w + b] = val
                jj[i, w + b, w + a] = val
    # clip away negative rounding dust so table invariants hold exactly
    np.clip(mu, 0.0, 1.0, out=mu)
    np.clip(jj, 0.0, 1.0, out=jj)
    mu[0, w] = 0.0
    mu[1, w] = 1.0
    for i in (0, 1):
        jj[i, w, :] = i * mu[i]
        jj[i, :, w] = i * mu[i]
        np.fill_diagonal(jj[i], mu[i])
    return WindowedMoments(w=w, psig_hat=spec.psig, mu_cond=mu, j_cond=jj)
