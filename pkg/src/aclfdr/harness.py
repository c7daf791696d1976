"""Monte Carlo harness comparing the two procedures under dependence.

One experiment runs the following protocol.  A stationary vector with
prescribed signal mass and a transition matrix with prescribed spectral
lower bounds are sampled (or loaded from a file).  A noiseless training
realization of the projected chain is used to estimate the windowed
moment tables, and an independent test signal is drawn once and held
fixed.  Each replication then adds fresh standard Gaussian noise, forms
data = strength * signal + noise, runs the posterior step-up rule at
level alpha on the approximate posteriors and the p-value step-up rule
at the augmented level on one-sided p-values, and records the false
discovery proportion and the number of true discoveries of both.

Seeding: the experiment seed feeds a root seed sequence that is split
into four independent children (matrix, training signal, test signal,
replications); the replication child is split again, one stream per
replication.  Growing the replication count therefore extends, never
perturbs, earlier replications, and serial and parallel execution give
identical records.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.special import expit, ndtr

from . import backend
from .ensembles import (
    ProbVector,
    TransitionMatrix,
    _f_mask,
    eigenmoduli,
    sample_constrained_transition,
    sample_stationary_vector,
)
from .exceptions import ConfigError, DegenerateDensityError, EstimationError
from .procedures import augmented_alpha, bayes_bh, bh, confusion
from .signal import ParentChainSpec, estimate_moments, project, simulate_chain

__all__ = [
    "SimulationConfig",
    "ReplicationRecord",
    "ProcedureSummary",
    "SummaryTable",
    "ExperimentResult",
    "run_experiment",
    "summarize",
    "kde",
    "silverman_bandwidth",
    "density_grid",
    "load_chain_file",
    "chain_from_dict",
    "write_records_csv",
    "read_records_csv",
    "write_summary_json",
    "write_density_csv",
    "RECORD_COLUMNS",
]

RECORD_COLUMNS = ("rep", "fdp_bbh", "ntd_bbh", "fdp_bh", "ntd_bh")

_CONFIG_ALIASES = {
    "lambda": "slem_min",
    "mu": "tlem_min",
    "reps": "n_reps",
    "jobs": "n_jobs",
}


@dataclass(frozen=True)
class SimulationConfig:
    """Full parameter set of one experiment; a pure function input.

    ``slem_min`` and ``tlem_min`` are the spectral lower bounds of the
    sampled transition matrix (0 turns the chain i.i.d.).  When
    ``matrix_file`` is set the chain is loaded from that JSON file
    instead of sampled, its rows are normalized, and ``d``, ``f_set``
    and ``psig`` are taken from the file (``psig`` is recomputed from
    the normalized stationary vector).
    """

    d: int = 5
    f_set: tuple[int, ...] = (0, 1)
    psig: float = 0.1
    m: int = 100_000
    w: int = 3
    epsilon: float = 1.0
    alpha: float = 0.2
    slem_min: float = 0.0
    tlem_min: float = 0.0
    n_reps: int = 1000
    seed: int | None = None
    sinkhorn_tol: float = 1e-10
    sinkhorn_max_iter: int = 10_000
    max_attempts: int = 50_000
    redraw_eta: bool = False
    n_jobs: int = 1
    matrix_file: str | None = None
    out_dir: str | None = None
    density: bool = False
    grid_points: int = 256

    def __post_init__(self) -> None:
        object.__setattr__(self, "f_set", tuple(int(s) for s in self.f_set))

    def validate(self) -> None:
        if self.seed is None:
            raise ConfigError("a seed is required for a reproducible run")
        if self.matrix_file is None:
            if self.d < 2:
                raise ConfigError("need at least two states")
            if not 0.0 < self.psig < 1.0:
                raise ConfigError(f"psig must lie in (0, 1), got {self.psig!r}")
        if self.w < 0:
            raise ConfigError("half-window length must be nonnegative")
        if self.m <= 2 * self.w + 1:
            raise ConfigError(f"m={self.m} must exceed 2w+1={2 * self.w + 1}")
        if self.epsilon < 0.0 or not np.isfinite(self.epsilon):
            raise ConfigError("signal strength must be nonnegative and finite")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not (self.slem_min == 0.0 and self.tlem_min == 0.0) and not (
            0.0 <= self.tlem_min < self.slem_min < 1.0
        ):
            raise ConfigError(
                "spectral bounds must satisfy 0 <= tlem_min < slem_min < 1, or both 0"
            )
        if self.n_reps < 1:
            raise ConfigError("need at least one replication")
        if self.n_jobs < 1:
            raise ConfigError("need at least one worker")
        if self.grid_points < 2:
            raise ConfigError("need at least two grid points")
        if self.sinkhorn_tol <= 0.0:
            raise ConfigError("balancing tolerance must be positive")

    @classmethod
    def from_dict(cls, raw: dict) -> "SimulationConfig":
        """Build a config from JSON-ish keys, accepting a few aliases."""
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in raw.items():
            name = _CONFIG_ALIASES.get(key, key)
            if name not in known:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[name] = tuple(value) if name == "f_set" else value
        return cls(**kwargs)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


class ReplicationRecord(NamedTuple):
    """Outcome of one replication, both procedures."""

    rep: int
    fdp_bbh: float
    ntd_bbh: int
    fdp_bh: float
    ntd_bh: int


class ProcedureSummary(NamedTuple):
    """Mean and sample standard deviation of FDP and NTD."""

    mean_fdp: float
    sd_fdp: float | None
    mean_ntd: float
    sd_ntd: float | None


@dataclass(frozen=True)
class SummaryTable:
    """Aggregated results of one (strength, level) experiment cell."""

    n_reps: int
    epsilon: float
    alpha: float
    bbh: ProcedureSummary
    bh: ProcedureSummary


@dataclass(frozen=True)
class ExperimentResult:
    """Everything one experiment produced."""

    config: SimulationConfig
    spec: ParentChainSpec
    chain_info: dict
    psig_hat: float
    alpha_augmented: float | None
    records: list
    summary: SummaryTable


class _RepPayload(NamedTuple):
    """Immutable shared state each replication needs."""

    m: int
    epsilon: float
    alpha: float
    alpha_augmented: float | None
    eta: np.ndarray
    d_mean: np.ndarray
    d_cov: np.ndarray
    prior_log_odds: float
    redraw_eta: bool
    pi: np.ndarray
    p_mat: np.ndarray
    signal_mask: np.ndarray


_WORKER_PAYLOAD: _RepPayload | None = None


def _init_worker(payload: _RepPayload) -> None:
    global _WORKER_PAYLOAD
    _WORKER_PAYLOAD = payload


def _run_rep(payload: _RepPayload, rep: int, seed: np.random.SeedSequence) -> ReplicationRecord:
    """One replication: fresh noise, both procedures, outcome counts."""
    rng = np.random.default_rng(seed)
    eta = payload.eta
    alpha_aug = payload.alpha_augmented
    if payload.redraw_eta:
        states = backend.simulate_states(payload.pi, payload.p_mat, rng.random(payload.m))
        eta = payload.signal_mask[states].astype(np.uint8)
        alpha_aug = augmented_alpha(eta, payload.alpha)
    z = rng.standard_normal(payload.m)
    x = payload.epsilon * eta + z
    # additive standard Gaussian noise: derivative vector is x, curvature -1
    logits = backend.windowed_logits(
        x,
        np.full(payload.m, -1.0),
        payload.d_mean,
        payload.d_cov,
        payload.prior_log_odds,
        payload.epsilon,
    )
    dec_post = bayes_bh(expit(np.asarray(logits)), payload.alpha)
    dec_pval = bh(np.asarray(ndtr(-x)), alpha_aug)
    post_counts = confusion(dec_post, eta)
    pval_counts = confusion(dec_pval, eta)
    return ReplicationRecord(
        rep=rep,
        fdp_bbh=post_counts.fdp,
        ntd_bbh=post_counts.ntd,
        fdp_bh=pval_counts.fdp,
        ntd_bh=pval_counts.ntd,
    )


def _rep_entry(task: tuple) -> ReplicationRecord:
    rep, seed = task
    assert _WORKER_PAYLOAD is not None
    return _run_rep(_WORKER_PAYLOAD, rep, seed)


def load_chain_file(path: str | Path) -> tuple[ParentChainSpec, dict]:
    """Load a chain from a JSON file, normalizing quoted-precision entries.

    The file must provide ``matrix``, ``pi`` and ``f_set``.  Rows of the
    matrix and the stationary vector are rescaled to exact unit sums, and
    the signal mass is recomputed from the normalized vector, so matrices
    printed to a few decimals round-trip cleanly.
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return chain_from_dict(raw, source=str(path))


def chain_from_dict(raw: dict, source: str = "inline") -> tuple[ParentChainSpec, dict]:
    """Build a chain spec from a dict with ``matrix``, ``pi`` and ``f_set``."""
    for key in ("matrix", "pi", "f_set"):
        if key not in raw:
            raise ConfigError(f"chain description is missing the {key!r} entry")
    mat = np.asarray(raw["matrix"], dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ConfigError("chain file matrix must be square")
    if not np.all(np.isfinite(mat)) or np.any(mat < 0.0):
        raise ConfigError("chain file matrix must be finite and nonnegative")
    row_sums = mat.sum(axis=1)
    if np.any(row_sums <= 0.0):
        raise ConfigError("chain file matrix has a zero row")
    d = int(mat.shape[0])
    pi = ProbVector.normalized(np.asarray(raw["pi"], dtype=np.float64))
    if pi.dim != d:
        raise ConfigError("chain file pi dimension does not match the matrix")
    f_set = tuple(int(s) for s in raw["f_set"])
    mask = _f_mask(d, f_set)
    p_matrix = TransitionMatrix(mat / row_sums[:, None])
    psig = float(pi.entries[~mask].sum())
    spec = ParentChainSpec(d=d, f_set=f_set, pi=pi, P=p_matrix, psig=psig)
    spectral = eigenmoduli(p_matrix)
    info = {
        "source": source,
        "slem": spectral.slem,
        "tlem": spectral.tlem,
        "attempts": None,
        "psig": psig,
        "pi": pi.entries.tolist(),
        "matrix": p_matrix.entries.tolist(),
    }
    return spec, info


def _sample_chain(cfg: SimulationConfig, ss: np.random.SeedSequence) -> tuple[ParentChainSpec, dict]:
    rng = np.random.default_rng(ss)
    pi = sample_stationary_vector(cfg.d, cfg.f_set, cfg.psig, rng)
    sampled = sample_constrained_transition(
        pi,
        cfg.slem_min,
        cfg.tlem_min,
        rng,
        max_attempts=cfg.max_attempts,
        tol=cfg.sinkhorn_tol,
        max_iter=cfg.sinkhorn_max_iter,
    )
    spec = ParentChainSpec(cfg.d, cfg.f_set, pi, sampled.matrix, cfg.psig)
    info = {
        "source": "sampled",
        "slem": sampled.spectral.slem,
        "tlem": sampled.spectral.tlem,
        "attempts": sampled.attempts,
        "psig": cfg.psig,
        "pi": pi.entries.tolist(),
        "matrix": sampled.matrix.entries.tolist(),
    }
    return spec, info


def run_experiment(cfg: SimulationConfig) -> ExperimentResult:
    """Run one full experiment; see the module docstring for the protocol.

    When ``cfg.out_dir`` is set, ``records.csv`` and ``summary.json``
    are written there (plus density curves when ``cfg.density`` is on);
    already-computed records are flushed even when a later step fails.
    """
    cfg.validate()
    root = np.random.SeedSequence(cfg.seed)
    matrix_ss, theta_ss, eta_ss, reps_ss = root.spawn(4)
    if cfg.matrix_file is not None:
        spec, chain_info = load_chain_file(cfg.matrix_file)
    else:
        spec, chain_info = _sample_chain(cfg, matrix_ss)
    theta = project(simulate_chain(spec, cfg.m, np.random.default_rng(theta_ss)), spec.f_set, spec.d)
    moments = estimate_moments(theta, cfg.w)
    eta = project(simulate_chain(spec, cfg.m, np.random.default_rng(eta_ss)), spec.f_set, spec.d)
    alpha_aug = None if cfg.redraw_eta else augmented_alpha(eta, cfg.alpha)
    payload = _RepPayload(
        m=cfg.m,
        epsilon=cfg.epsilon,
        alpha=cfg.alpha,
        alpha_augmented=alpha_aug,
        eta=eta,
        d_mean=np.ascontiguousarray(moments.delta_mean()),
        d_cov=np.ascontiguousarray(moments.delta_cov()),
        prior_log_odds=moments.prior_log_odds(),
        redraw_eta=cfg.redraw_eta,
        pi=spec.pi.entries,
        p_mat=spec.P.entries,
        signal_mask=spec.signal_mask,
    )
    out_dir = Path(cfg.out_dir) if cfg.out_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    records = _run_reps(payload, reps_ss.spawn(cfg.n_reps), cfg.n_jobs, out_dir)
    if cfg.n_reps >= 2:
        summary = summarize(records, epsilon=cfg.epsilon, alpha=cfg.alpha)
    else:
        rec = records[0]
        summary = SummaryTable(
            n_reps=1,
            epsilon=cfg.epsilon,
            alpha=cfg.alpha,
            bbh=ProcedureSummary(rec.fdp_bbh, None, float(rec.ntd_bbh), None),
            bh=ProcedureSummary(rec.fdp_bh, None, float(rec.ntd_bh), None),
        )
    result = ExperimentResult(
        config=cfg,
        spec=spec,
        chain_info=chain_info,
        psig_hat=moments.psig_hat,
        alpha_augmented=alpha_aug,
        records=records,
        summary=summary,
    )
    if out_dir is not None:
        write_records_csv(out_dir / "records.csv", records)
        write_summary_json(out_dir / "summary.json", result)
        if cfg.density:
            _write_density_curves(out_dir, records, cfg.grid_points)
    return result


def _run_reps(
    payload: _RepPayload,
    seeds: Sequence[np.random.SeedSequence],
    n_jobs: int,
    flush_dir: Path | None,
) -> list:
    tasks = list(enumerate(seeds))
    records: list = []
    try:
        if n_jobs <= 1:
            for rep, seed in tasks:
                records.append(_run_rep(payload, rep, seed))
        else:
            with ProcessPoolExecutor(
                max_workers=n_jobs, initializer=_init_worker, initargs=(payload,)
            ) as pool:
                chunk = max(1, len(tasks) // (4 * n_jobs))
                for rec in pool.map(_rep_entry, tasks, chunksize=chunk):
                    records.append(rec)
    except BaseException:
        if flush_dir is not None and records:
            write_records_csv(flush_dir / "records.csv", sorted(records, key=lambda r: r.rep))
        raise
    return records


def summarize(records: Sequence[ReplicationRecord], epsilon: float, alpha: float) -> SummaryTable:
    """Aggregate replication records into means and sample deviations.

    The spread is the sample standard deviation (ddof 1) over
    replications, which needs at least two records.
    """
    n = len(records)
    if n < 2:
        raise EstimationError("need at least two replications to estimate spread")
    fdp_b = np.array([r.fdp_bbh for r in records], dtype=np.float64)
    ntd_b = np.array([r.ntd_bbh for r in records], dtype=np.float64)
    fdp_h = np.array([r.fdp_bh for r in records], dtype=np.float64)
    ntd_h = np.array([r.ntd_bh for r in records], dtype=np.float64)
    return SummaryTable(
        n_reps=n,
        epsilon=epsilon,
        alpha=alpha,
        bbh=ProcedureSummary(
            float(fdp_b.mean()), float(fdp_b.std(ddof=1)),
            float(ntd_b.mean()), float(ntd_b.std(ddof=1)),
        ),
        bh=ProcedureSummary(
            float(fdp_h.mean()), float(fdp_h.std(ddof=1)),
            float(ntd_h.mean()), float(ntd_h.std(ddof=1)),
        ),
    )


def silverman_bandwidth(samples: np.ndarray) -> float:
    """Rule-of-thumb Gaussian-kernel bandwidth.

    ``0.9 * min(sd, iqr / 1.34) * n**(-1/5)``, falling back to the
    sample deviation alone when the interquartile range is zero.

    Raises
    ------
    DegenerateDensityError
        If the sample has zero variance (a point mass).
    """
    arr = np.asarray(samples, dtype=np.float64).ravel()
    if arr.size < 2:
        raise ConfigError("need at least two samples for a bandwidth")
    sd = float(arr.std(ddof=1))
    if sd == 0.0:
        raise DegenerateDensityError(
            f"samples are a point mass at {arr[0]!r}; supply an explicit bandwidth",
            point_mass=float(arr[0]),
        )
    q75, q25 = np.percentile(arr, [75.0, 25.0])
    iqr = float(q75 - q25)
    scale = min(sd, iqr / 1.34) if iqr > 0.0 else sd
    return 0.9 * scale * arr.size ** (-0.2)


def kde(samples: np.ndarray, grid: np.ndarray, bandwidth: float | str = "auto") -> np.ndarray:
    """Gaussian-kernel density of the samples evaluated on the grid.

    ``bandwidth="auto"`` applies the rule of thumb; an explicit positive
    bandwidth bypasses the zero-variance check.
    """
    arr = np.asarray(samples, dtype=np.float64).ravel()
    pts = np.asarray(grid, dtype=np.float64).ravel()
    if arr.size < 2:
        raise ConfigError("need at least two samples for a density estimate")
    if isinstance(bandwidth, str):
        if bandwidth != "auto":
            raise ConfigError(f"unknown bandwidth rule {bandwidth!r}")
        h = silverman_bandwidth(arr)
    else:
        h = float(bandwidth)
        if not np.isfinite(h) or h <= 0.0:
            raise ConfigError("bandwidth must be a positive number")
    z = (pts[:, None] - arr[None, :]) / h
    return np.exp(-0.5 * np.square(z)).sum(axis=1) / (arr.size * h * np.sqrt(2.0 * np.pi))


def density_grid(samples: np.ndarray, bandwidth: float, points: int) -> np.ndarray:
    """Evaluation grid spanning the samples plus three bandwidths of margin."""
    arr = np.asarray(samples, dtype=np.float64).ravel()
    lo = float(arr.min()) - 3.0 * bandwidth
    hi = float(arr.max()) + 3.0 * bandwidth
    return np.linspace(lo, hi, int(points))


def _fmt(value: float) -> str:
    return repr(float(value))


def write_records_csv(path: str | Path, records: Iterable[ReplicationRecord]) -> None:
    """Write replication records as CSV with a fixed header and column order."""
    lines = [",".join(RECORD_COLUMNS)]
    for r in records:
        lines.append(
            f"{int(r.rep)},{_fmt(r.fdp_bbh)},{int(r.ntd_bbh)},{_fmt(r.fdp_bh)},{int(r.ntd_bh)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_records_csv(path: str | Path) -> list:
    """Read a records CSV written by :func:`write_records_csv`."""
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not text or text[0].split(",") != list(RECORD_COLUMNS):
        raise ConfigError(f"unrecognized records header in {path}")
    out = []
    for line in text[1:]:
        rep, fdp_b, ntd_b, fdp_h, ntd_h = line.split(",")
        out.append(
            ReplicationRecord(int(rep), float(fdp_b), int(ntd_b), float(fdp_h), int(ntd_h))
        )
    return out


# execution and output plumbing; does not affect the sampled results, so
# it is left out of the summary to keep outputs invariant to it
_NON_SCIENTIFIC_KEYS = ("n_jobs", "out_dir", "density", "grid_points")


def _summary_payload(result: ExperimentResult) -> dict:
    summary = result.summary
    config = result.config.to_dict()
    for key in _NON_SCIENTIFIC_KEYS:
        config.pop(key, None)
    return {
        "backend": backend.BACKEND,
        "config": config,
        "chain": result.chain_info,
        "signal": {
            "psig_hat": result.psig_hat,
            "alpha_augmented": result.alpha_augmented,
        },
        "results": {
            "bbh": summary.bbh._asdict(),
            "bh": summary.bh._asdict(),
        },
        "n_reps": summary.n_reps,
        "epsilon": summary.epsilon,
        "alpha": summary.alpha,
    }


def write_summary_json(path: str | Path, result: ExperimentResult) -> None:
    """Write the experiment summary as stably ordered JSON."""
    payload = _summary_payload(result)
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n",
        encoding="utf-8",
    )


def write_density_csv(path: str | Path, grid: np.ndarray, density: np.ndarray) -> None:
    """Write a density curve as two-column CSV."""
    lines = ["x,density"]
    for xv, dv in zip(np.asarray(grid).ravel(), np.asarray(density).ravel()):
        lines.append(f"{_fmt(xv)},{_fmt(dv)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_density_curves(out_dir: Path, records: Sequence[ReplicationRecord], points: int) -> None:
    columns = {
        "fdp_bbh": [r.fdp_bbh for r in records],
        "ntd_bbh": [r.ntd_bbh for r in records],
        "fdp_bh": [r.fdp_bh for r in records],
        "ntd_bh": [r.ntd_bh for r in records],
    }
    for name, values in columns.items():
        arr = np.asarray(values, dtype=np.float64)
        try:
            h = silverman_bandwidth(arr)
        except DegenerateDensityError as exc:
            # a point-mass column has no density curve; record why
            (out_dir / f"density_{name}.skipped.txt").write_text(str(exc) + "\n", encoding="utf-8")
            continue
        grid = density_grid(arr, h, points)
        write_density_csv(out_dir / f"density_{name}.csv", grid, kde(arr, grid, h))
