"""Step-up multiple testing procedures and outcome accounting.

Two procedures are implemented.  The posterior step-up rule sorts
posterior signal probabilities, finds the largest count R such that the
running average of the R largest probabilities stays at or above
1 - alpha, and rejects those R hypotheses; with no qualifying count it
rejects nothing.  The p-value step-up rule is the classic one: with
order statistics p_(1) <= ... <= p_(m), find the largest k with
p_(k) <= k * alpha / m and reject every hypothesis whose p-value is at
most that order statistic.  Accounting reduces a decision vector and
the ground-truth signal to the standard confusion counts, the false
discovery proportion V / max(R, 1), and the number of true discoveries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .exceptions import ConfigError, EstimationError
from .likelihood import Observations, PosteriorVector

__all__ = [
    "TestDecision",
    "ConfusionCounts",
    "bayes_bh",
    "bh",
    "p_values_one_sided",
    "augmented_alpha",
    "confusion",
]


@dataclass(frozen=True)
class TestDecision:
    """A reject vector plus procedure-specific threshold details."""

    # not a test case, despite the name
    __test__ = False

    reject: np.ndarray
    threshold_info: dict

    def __post_init__(self) -> None:
        rej = np.asarray(self.reject, dtype=bool)
        object.__setattr__(self, "reject", rej)
        if int(self.threshold_info.get("R", -1)) != int(rej.sum()):
            raise ConfigError("threshold record disagrees with the reject count")

    @property
    def r_count(self) -> int:
        return int(self.reject.sum())


@dataclass(frozen=True)
class ConfusionCounts:
    """Counts of the four decision-truth cells and their margins."""

    U: int
    V: int
    T: int
    S: int

    def __post_init__(self) -> None:
        for name in ("U", "V", "T", "S"):
            if int(getattr(self, name)) < 0:
                raise ConfigError("confusion counts must be nonnegative")

    @property
    def m0(self) -> int:
        return self.U + self.V

    @property
    def m1(self) -> int:
        return self.T + self.S

    @property
    def R(self) -> int:
        return self.V + self.S

    @property
    def A(self) -> int:
        return self.U + self.T

    @property
    def m(self) -> int:
        return self.m0 + self.m1

    @property
    def fdp(self) -> float:
        """False discovery proportion V / max(R, 1)."""
        return self.V / max(self.R, 1)

    @property
    def ntd(self) -> int:
        """Number of true discoveries S."""
        return self.S


def _as_probs(probs: PosteriorVector | np.ndarray) -> np.ndarray:
    arr = probs.probs if isinstance(probs, PosteriorVector) else np.asarray(probs, dtype=np.float64)
    arr = arr.ravel()
    if arr.size == 0:
        raise ConfigError("posterior vector must be nonempty")
    if np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
        raise ConfigError("posterior probabilities must lie in [0, 1]")
    return arr


def bayes_bh(probs: PosteriorVector | np.ndarray, alpha: float) -> TestDecision:
    """Posterior step-up rule at target level ``alpha``.

    Rejects the R hypotheses with the largest posterior signal
    probabilities, where R is the largest count whose running average of
    top probabilities is at least ``1 - alpha``; rejects nothing when
    even the single largest probability falls below ``1 - alpha``.  Ties
    are broken by original index (stable descending sort), so saturated
    probabilities order deterministically.
    """
    q = _as_probs(probs)
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha!r}")
    m = q.size
    order = np.argsort(-q, kind="stable")
    desc = q[order]
    running_mean = np.cumsum(desc) / np.arange(1, m + 1)
    hits = np.nonzero(running_mean >= 1.0 - alpha)[0]
    r = int(hits[-1]) + 1 if hits.size else 0
    reject = np.zeros(m, dtype=bool)
    info: dict = {"R": r, "threshold": None}
    if r > 0:
        reject[order[:r]] = True
        info["threshold"] = float(desc[r - 1])
    return TestDecision(reject=reject, threshold_info=info)


def p_values_one_sided(x: Observations | np.ndarray) -> np.ndarray:
    """Upper-tail standard normal p-values, accurate deep in the tail."""
    arr = x.x if isinstance(x, Observations) else np.asarray(x, dtype=np.float64)
    return np.asarray(ndtr(-arr), dtype=np.float64)


def bh(p: np.ndarray, alpha: float) -> TestDecision:
    """P-value step-up rule at target level ``alpha``.

    Rejects every hypothesis with p-value at most the R-th smallest,
    where R is the largest k with p_(k) <= k * alpha / m; rejects
    nothing when no k qualifies.
    """
    arr = np.asarray(p, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ConfigError("p-value vector must be nonempty")
    if np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
        raise ConfigError("p-values must lie in [0, 1]")
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha!r}")
    m = arr.size
    sorted_p = np.sort(arr)
    hits = np.nonzero(sorted_p <= alpha * np.arange(1, m + 1) / m)[0]
    r = int(hits[-1]) + 1 if hits.size else 0
    reject = np.zeros(m, dtype=bool)
    info: dict = {"R": r, "threshold": None}
    if r > 0:
        threshold = float(sorted_p[r - 1])
        reject = arr <= threshold
        info["threshold"] = threshold
        info["R"] = int(reject.sum())
    return TestDecision(reject=reject, threshold_info=info)


def augmented_alpha(eta: np.ndarray, alpha: float) -> float:
    """Level handicap for the p-value rule: alpha / (1 - signal fraction).

    ``eta`` is the true signal vector; the returned level is capped just
    below 1.  An all-ones signal leaves the level undefined.
    """
    bits = np.asarray(eta)
    if bits.size == 0:
        raise ConfigError("signal vector must be nonempty")
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha!r}")
    frac = float(np.asarray(bits, dtype=np.float64).mean())
    if frac >= 1.0:
        raise EstimationError("signal fraction is 1; augmented level undefined")
    return min(alpha / (1.0 - frac), 1.0 - 1e-12)


def confusion(decision: TestDecision | np.ndarray, truth: np.ndarray) -> ConfusionCounts:
    """Confusion counts of a decision vector against the true signal."""
    rej = decision.reject if isinstance(decision, TestDecision) else np.asarray(decision, dtype=bool)
    tru = np.asarray(truth).astype(bool)
    if rej.shape != tru.shape:
        raise ConfigError("decision and truth vectors must have equal length")
    v = int(np.sum(rej & ~tru))
    s = int(np.sum(rej & tru))
    u = int(np.sum(~rej & ~tru))
    t = int(np.sum(~rej & tru))
    return ConfusionCounts(U=u, V=v, T=t, S=s)
