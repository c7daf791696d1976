"""Random stochastic matrices with a prescribed stationary distribution.

This module samples transition matrices whose stationary vector is given
in advance and whose second and third largest eigenvalue moduli can be
forced above chosen lower bounds.  The construction is: draw a strictly
positive square matrix with rows uniform on the simplex, rescale rows
and columns alternately (Sinkhorn balancing) until both margin vectors
equal the target stationary vector, divide out the row margins to get a
transition matrix, and reject candidates whose spectrum is too tame.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .exceptions import ConfigError, ConvergenceError, SamplingBudgetError

__all__ = [
    "ProbVector",
    "TransitionMatrix",
    "SpectralSummary",
    "ConstrainedSample",
    "sample_stationary_vector",
    "sample_dirichlet_transition",
    "sinkhorn_balance",
    "to_transition",
    "eigenmoduli",
    "sample_constrained_transition",
]

_SUM_TOL = 1e-12
_ROW_TOL = 1e-10
_STAT_TOL = 1e-8


@dataclass(frozen=True)
class ProbVector:
    """A strictly positive probability vector.

    Parameters
    ----------
    entries : array_like
        Probabilities; must be strictly positive and sum to 1 within
        1e-12.  The stored array is a read-only copy.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        vec = np.array(self.entries, dtype=np.float64, copy=True).ravel()
        if vec.size == 0:
            raise ConfigError("probability vector must be nonempty")
        if not np.all(np.isfinite(vec)):
            raise ConfigError("probability vector entries must be finite")
        if np.any(vec <= 0.0):
            raise ConfigError("probability vector entries must be strictly positive")
        if abs(float(vec.sum()) - 1.0) > _SUM_TOL:
            raise ConfigError(
                f"probability vector must sum to 1 within {_SUM_TOL:g}, "
                f"got {float(vec.sum())!r}"
            )
        vec.setflags(write=False)
        object.__setattr__(self, "entries", vec)

    @property
    def dim(self) -> int:
        return int(self.entries.size)

    @classmethod
    def normalized(cls, entries: Iterable[float]) -> "ProbVector":
        """Scale a positive vector to unit sum and wrap it."""
        vec = np.asarray(list(entries) if not isinstance(entries, np.ndarray) else entries,
                         dtype=np.float64).ravel()
        total = float(vec.sum())
        if not np.isfinite(total) or total <= 0.0:
            raise ConfigError("cannot normalize a vector with nonpositive sum")
        return cls(vec / total)


@dataclass(frozen=True)
class TransitionMatrix:
    """A row-stochastic matrix, optionally tagged with its stationary vector.

    Parameters
    ----------
    entries : array_like
        Square nonnegative matrix with rows summing to 1 within 1e-10.
    stationary : ProbVector, optional
        When supplied, ``pi @ P`` must equal ``pi`` within 1e-8 in the
        max norm.
    """

    entries: np.ndarray
    stationary: ProbVector | None = None

    def __post_init__(self) -> None:
        mat = np.array(self.entries, dtype=np.float64, copy=True)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ConfigError(f"transition matrix must be square, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ConfigError("transition matrix entries must be finite")
        if np.any(mat < 0.0):
            raise ConfigError("transition matrix entries must be nonnegative")
        row_err = float(np.max(np.abs(mat.sum(axis=1) - 1.0)))
        if row_err > _ROW_TOL:
            raise ConfigError(
                f"transition matrix rows must sum to 1 within {_ROW_TOL:g}, "
                f"worst deviation {row_err:g}"
            )
        if self.stationary is not None:
            pi = self.stationary.entries
            if pi.size != mat.shape[0]:
                raise ConfigError("stationary vector dimension does not match matrix")
            stat_err = float(np.max(np.abs(pi @ mat - pi)))
            if stat_err > _STAT_TOL:
                raise ConfigError(
                    f"stationary vector is not preserved within {_STAT_TOL:g}, "
                    f"worst deviation {stat_err:g}"
                )
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])


class SpectralSummary(NamedTuple):
    """Eigenvalue moduli of a transition matrix, sorted descending."""

    moduli: np.ndarray
    slem: float
    tlem: float


class ConstrainedSample(NamedTuple):
    """A sampled transition matrix together with its spectrum."""

    matrix: TransitionMatrix
    spectral: SpectralSummary
    attempts: int


def _f_mask(d: int, f_set: Iterable[int]) -> np.ndarray:
    """Boolean mask over states; True marks members of the zero class."""
    idx = sorted({int(s) for s in f_set})
    if not idx:
        raise ConfigError("the zero-class state set must be nonempty")
    if idx[0] < 0 or idx[-1] >= d:
        raise ConfigError(f"state indices must lie in [0, {d}), got {idx}")
    if len(idx) >= d:
        raise ConfigError("the zero-class state set must be a strict subset of the states")
    mask = np.zeros(d, dtype=bool)
    mask[idx] = True
    return mask


def sample_stationary_vector(
    d: int,
    f_set: Iterable[int],
    psig: float,
    rng: np.random.Generator,
) -> ProbVector:
    """Draw a stationary vector with prescribed mass on the signal states.

    Independent uniform(0, 1) weights are drawn for every state; weights
    inside ``f_set`` are normalized to total ``1 - psig`` and the rest to
    ``psig``.  States are indexed from 0.

    Parameters
    ----------
    d : int
        Number of states.
    f_set : iterable of int
        Nonempty strict subset of ``range(d)`` mapped to the zero class.
    psig : float
        Total stationary mass of the complement, in (0, 1).
    rng : numpy.random.Generator
        Source of the uniform weights.

    Returns
    -------
    ProbVector
    """
    if d < 2:
        raise ConfigError("need at least two states")
    if not 0.0 < psig < 1.0:
        raise ConfigError(f"psig must lie in (0, 1), got {psig!r}")
    mask = _f_mask(d, f_set)
    while True:
        zeta = rng.random(d)
        if np.all(zeta > 0.0):
            break
    pi = np.empty(d, dtype=np.float64)
    pi[mask] = (1.0 - psig) * zeta[mask] / zeta[mask].sum()
    pi[~mask] = psig * zeta[~mask] / zeta[~mask].sum()
    return ProbVector(pi)


def sample_dirichlet_transition(d: int, rng: np.random.Generator) -> TransitionMatrix:
    """Draw a transition matrix with rows i.i.d. uniform on the simplex.

    Each row is a vector of i.i.d. standard exponential draws divided by
    its sum, i.e. a flat Dirichlet sample.

    Parameters
    ----------
    d : int
        Matrix dimension, at least 2.
    rng : numpy.random.Generator

    Returns
    -------
    TransitionMatrix
        Strictly positive with probability 1; no stationary tag.
    """
    if d < 2:
        raise ConfigError("need at least two states")
    while True:
        xi = rng.standard_exponential((d, d))
        if np.all(xi > 0.0):
            break
    return TransitionMatrix(xi / xi.sum(axis=1, keepdims=True))


def sinkhorn_balance(
    a: np.ndarray,
    pi: ProbVector | np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    residual_log: list | None = None,
) -> np.ndarray:
    """Rescale a positive matrix until both margins equal ``pi``.

    Alternates row scaling by ``diag(row_sums)^-1 diag(pi)`` with column
    scaling by ``diag(col_sums)^-1 diag(pi)`` until the Euclidean norms
    of ``A 1 - pi`` and ``A' 1 - pi`` both drop to ``tol``.

    Parameters
    ----------
    a : array_like
        Strictly positive square matrix.
    pi : ProbVector or array_like
        Target margin vector.
    tol : float
        Euclidean-norm tolerance on both margin residuals.
    max_iter : int
        Sweep budget; each sweep is one row scaling plus one column
        scaling.
    residual_log : list, optional
        If given, ``(row_residual, col_residual)`` pairs are appended at
        the top of every sweep, before the convergence test.

    Returns
    -------
    numpy.ndarray
        The balanced matrix (same equivalence class as ``a``).

    Raises
    ------
    ConvergenceError
        If the residuals do not reach ``tol`` within ``max_iter`` sweeps;
        the exception carries the last residual pair.
    """
    mat = np.array(a, dtype=np.float64, copy=True)
    p = pi.entries if isinstance(pi, ProbVector) else ProbVector(np.asarray(pi)).entries
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] != p.size:
        raise ConfigError(f"matrix shape {mat.shape} does not match margin dim {p.size}")
    if not np.all(np.isfinite(mat)) or np.any(mat <= 0.0):
        raise ConfigError("Sinkhorn balancing requires a strictly positive matrix")
    if tol <= 0.0:
        raise ConfigError("tol must be positive")
    row_res = col_res = np.inf
    for _ in range(max_iter):
        row_res = float(np.linalg.norm(mat.sum(axis=1) - p))
        col_res = float(np.linalg.norm(mat.sum(axis=0) - p))
        if residual_log is not None:
            residual_log.append((row_res, col_res))
        if row_res <= tol and col_res <= tol:
            return mat
        mat *= (p / mat.sum(axis=1))[:, None]
        mat *= (p / mat.sum(axis=0))[None, :]
    raise ConvergenceError(
        f"margin residuals ({row_res:g}, {col_res:g}) above tol {tol:g} "
        f"after {max_iter} sweeps",
        row_residual=row_res,
        col_residual=col_res,
    )


def to_transition(a: np.ndarray, pi: ProbVector | np.ndarray) -> TransitionMatrix:
    """Convert a balanced matrix into a transition matrix preserving ``pi``.

    Divides row ``s`` by ``pi[s]`` and renormalizes each row to unit sum
    exactly, absorbing the residual the balancing tolerance leaves in the
    row margins.

    Parameters
    ----------
    a : array_like
        Matrix whose margins are within the balancing tolerance of ``pi``.
    pi : ProbVector or array_like

    Returns
    -------
    TransitionMatrix
        With ``stationary`` set to ``pi``.
    """
    pv = pi if isinstance(pi, ProbVector) else ProbVector(np.asarray(pi))
    mat = np.asarray(a, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] != pv.dim:
        raise ConfigError(f"matrix shape {mat.shape} does not match vector dim {pv.dim}")
    p = mat / pv.entries[:, None]
    p = p / p.sum(axis=1, keepdims=True)
    return TransitionMatrix(p, stationary=pv)


def eigenmoduli(p: TransitionMatrix | np.ndarray) -> SpectralSummary:
    """Eigenvalue moduli of a square matrix, sorted descending.

    Accepts a TransitionMatrix or any square array (useful for matrices
    whose rows are only approximately stochastic).  The second and third
    largest moduli are exposed as ``slem`` and ``tlem``; for 2x2 inputs
    ``tlem`` is reported as 0.

    Parameters
    ----------
    p : TransitionMatrix or array_like

    Returns
    -------
    SpectralSummary
    """
    mat = p.entries if isinstance(p, TransitionMatrix) else np.asarray(p, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ConfigError(f"expected a square matrix, got shape {mat.shape}")
    moduli = np.sort(np.abs(np.linalg.eigvals(mat)))[::-1]
    moduli.setflags(write=False)
    slem = float(moduli[1]) if moduli.size > 1 else 0.0
    tlem = float(moduli[2]) if moduli.size > 2 else 0.0
    return SpectralSummary(moduli=moduli, slem=slem, tlem=tlem)


def sample_constrained_transition(
    pi: ProbVector,
    slem_min: float,
    tlem_min: float,
    rng: np.random.Generator,
    max_attempts: int = 50_000,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> ConstrainedSample:
    """Sample a transition matrix with stationary ``pi`` and a lively spectrum.

    Repeatedly draws a flat-Dirichlet-row matrix, balances its margins to
    ``pi``, converts it to a transition matrix, and accepts the first
    candidate whose second largest eigenmodulus is at least ``slem_min``
    and (when ``tlem_min > 0``) whose third largest is at least
    ``tlem_min``.  With ``slem_min = 0`` no sampling happens at all: the
    rank-one matrix with every row equal to ``pi`` is returned, which has
    ``slem = 0`` and makes the chain i.i.d.

    Parameters
    ----------
    pi : ProbVector
        Prescribed stationary vector; kept fixed across rejections.
    slem_min : float
        Lower bound on the second largest eigenmodulus, in [0, 1).
    tlem_min : float
        Lower bound on the third largest eigenmodulus; must be < slem_min
        unless both are 0.  A value of 0 skips the test.
    rng : numpy.random.Generator
    max_attempts : int
        Rejection budget.
    tol, max_iter : float, int
        Forwarded to the balancing step.

    Returns
    -------
    ConstrainedSample
        Matrix, its spectral summary, and the number of candidates drawn
        (0 for the rank-one shortcut).

    Raises
    ------
    SamplingBudgetError
        If no candidate passes within ``max_attempts``; carries the best
        slem and tlem seen.
    """
    if not 0.0 <= slem_min < 1.0:
        raise ConfigError(f"slem lower bound must lie in [0, 1), got {slem_min!r}")
    if slem_min == 0.0:
        if tlem_min != 0.0:
            raise ConfigError("tlem lower bound requires a positive slem lower bound")
        flat = np.tile(pi.entries, (pi.dim, 1))
        matrix = TransitionMatrix(flat, stationary=pi)
        return ConstrainedSample(matrix, eigenmoduli(matrix), attempts=0)
    if not 0.0 <= tlem_min < slem_min:
        raise ConfigError(
            f"tlem lower bound must lie in [0, slem bound), got {tlem_min!r}"
        )
    best_slem = -np.inf
    best_tlem = -np.inf
    for attempt in range(1, max_attempts + 1):
        raw = sample_dirichlet_transition(pi.dim, rng)
        balanced = sinkhorn_balance(raw.entries, pi, tol=tol, max_iter=max_iter)
        candidate = to_transition(balanced, pi)
        spectral = eigenmoduli(candidate)
        best_slem = max(best_slem, spectral.slem)
        best_tlem = max(best_tlem, spectral.tlem)
        if spectral.slem >= slem_min and (tlem_min == 0.0 or spectral.tlem >= tlem_min):
            return ConstrainedSample(candidate, spectral, attempts=attempt)
    raise SamplingBudgetError(
        f"no candidate reached slem >= {slem_min:g}"
        + (f" and tlem >= {tlem_min:g}" if tlem_min > 0.0 else "")
        + f" in {max_attempts} attempts (best slem {best_slem:g}, "
        f"best tlem {best_tlem:g})",
        attempts=max_attempts,
        best_slem=best_slem,
        best_tlem=best_tlem,
    )
