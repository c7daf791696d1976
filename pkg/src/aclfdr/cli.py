"""Command line interface.

Subcommands: ``sample-matrix`` (constrained transition matrix to JSON),
``simulate-signal`` (training signal and moment tables), ``run`` (full
experiment to records.csv / summary.json), ``test`` (one procedure on a
CSV of posteriors or p-values), ``density`` (kernel density of a records
column), ``oracle`` (exact posteriors for a small instance file).

Exit codes: 0 on success, 2 for configuration or input errors, 3 when a
convergence or sampling budget is exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, backend
from .ensembles import sample_constrained_transition, sample_stationary_vector
from .exceptions import BudgetError, ConfigError, ConvergenceError
from .harness import (
    SimulationConfig,
    chain_from_dict,
    density_grid,
    kde,
    load_chain_file,
    read_records_csv,
    run_experiment,
    silverman_bandwidth,
    write_density_csv,
)
from .likelihood import Observations, gaussian_noise
from .oracle import brute_force_posterior, forward_backward_posterior, iid_prior
from .procedures import bayes_bh, bh, confusion
from .signal import estimate_moments, project, simulate_chain

RECORD_FIELDS = ("fdp_bbh", "ntd_bbh", "fdp_bh", "ntd_bh")


def _f_set(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad state list {text!r}") from exc


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _read_value_column(path: str) -> np.ndarray:
    """First column of a CSV; a non-numeric first row is treated as a header."""
    lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not lines:
        raise ConfigError(f"{path} is empty")
    first = lines[0].split(",")[0].strip()
    try:
        float(first)
        start = 0
    except ValueError:
        start = 1
    values = []
    for line in lines[start:]:
        tok = line.split(",")[0].strip()
        values.append(float(tok))
    if not values:
        raise ConfigError(f"{path} contains no values")
    return np.asarray(values, dtype=np.float64)


def _cmd_sample_matrix(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    pi = sample_stationary_vector(args.d, args.f_set, args.psig, rng)
    sampled = sample_constrained_transition(
        pi,
        args.slem_min,
        args.tlem_min,
        rng,
        max_attempts=args.max_attempts,
        tol=args.tol,
    )
    _emit_json(
        {
            "d": args.d,
            "f_set": list(args.f_set),
            "psig": args.psig,
            "seed": args.seed,
            "pi": pi.entries.tolist(),
            "matrix": sampled.matrix.entries.tolist(),
            "moduli": sampled.spectral.moduli.tolist(),
            "slem": sampled.spectral.slem,
            "tlem": sampled.spectral.tlem,
            "attempts": sampled.attempts,
        },
        args.out,
    )
    return 0


def _cmd_simulate_signal(args: argparse.Namespace) -> int:
    spec, _ = load_chain_file(args.matrix_file)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    states = simulate_chain(spec, args.m, rng)
    theta = project(states, spec.f_set, spec.d)
    if args.theta_out is not None:
        np.save(args.theta_out, theta)
    moments = estimate_moments(theta, args.w)
    _emit_json(
        {
            "m": args.m,
            "w": args.w,
            "seed": args.seed,
            "psig_hat": moments.psig_hat,
            "offsets": list(range(-args.w, args.w + 1)),
            "mu_cond": moments.mu_cond.tolist(),
            "j_cond": moments.j_cond.tolist(),
        },
        args.out,
    )
    return 0


_RUN_OVERRIDES = (
    "d",
    "psig",
    "m",
    "w",
    "epsilon",
    "alpha",
    "slem_min",
    "tlem_min",
    "n_reps",
    "n_jobs",
    "sinkhorn_tol",
    "max_attempts",
    "matrix_file",
    "grid_points",
    "density",
    "redraw_eta",
)


def _cmd_run(args: argparse.Namespace) -> int:
    raw = {}
    if args.config is not None:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
    cfg = SimulationConfig.from_dict(raw)
    updates = {}
    for name in _RUN_OVERRIDES:
        value = getattr(args, name)
        if value is not None:
            updates[name] = value
    if args.f_set is not None:
        updates["f_set"] = args.f_set
    updates["seed"] = args.seed
    updates["out_dir"] = args.out_dir
    cfg = replace(cfg, **updates)
    result = run_experiment(cfg)
    s = result.summary
    sys.stdout.write(
        f"backend={backend.BACKEND} n_reps={s.n_reps} alpha={s.alpha} epsilon={s.epsilon}\n"
        f"bbh: mean_fdp={s.bbh.mean_fdp:.5f} mean_ntd={s.bbh.mean_ntd:.4f}\n"
        f"bh:  mean_fdp={s.bh.mean_fdp:.5f} mean_ntd={s.bh.mean_ntd:.4f}\n"
        f"wrote {Path(args.out_dir) / 'records.csv'} and {Path(args.out_dir) / 'summary.json'}\n"
    )
    return 0


def _cmd_test(args: argparse.Namespace) -> int:
    values = _read_value_column(args.input)
    if args.procedure == "bayes-bh":
        decision = bayes_bh(values, args.alpha)
    else:
        decision = bh(values, args.alpha)
    payload: dict = {
        "procedure": args.procedure,
        "alpha": args.alpha,
        "m": int(values.size),
        "R": decision.threshold_info["R"],
        "threshold": decision.threshold_info["threshold"],
    }
    if args.truth is not None:
        truth = _read_value_column(args.truth)
        counts = confusion(decision, truth.astype(np.int64))
        payload["confusion"] = {
            "U": counts.U,
            "V": counts.V,
            "T": counts.T,
            "S": counts.S,
            "R": counts.R,
            "A": counts.A,
            "m0": counts.m0,
            "m1": counts.m1,
            "fdp": counts.fdp,
            "ntd": counts.ntd,
        }
    if args.decisions_out is not None:
        lines = ["index,value,reject"]
        for i, (val, rej) in enumerate(zip(values, decision.reject)):
            lines.append(f"{i},{float(val)!r},{int(rej)}")
        Path(args.decisions_out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    _emit_json(payload, args.counts_out)
    return 0


def _cmd_density(args: argparse.Namespace) -> int:
    records = read_records_csv(args.records)
    values = np.asarray([getattr(r, args.column) for r in records], dtype=np.float64)
    if args.bandwidth == "auto":
        h = silverman_bandwidth(values)
    else:
        h = float(args.bandwidth)
    if args.grid_min is not None and args.grid_max is not None:
        grid = np.linspace(args.grid_min, args.grid_max, args.grid_points)
    else:
        grid = density_grid(values, h, args.grid_points)
    dens = kde(values, grid, h)
    if args.out is None:
        sys.stdout.write("x,density\n")
        for xv, dv in zip(grid, dens):
            sys.stdout.write(f"{float(xv)!r},{float(dv)!r}\n")
    else:
        write_density_csv(args.out, grid, dens)
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    inst = json.loads(Path(args.instance).read_text(encoding="utf-8"))
    if "x" not in inst or "epsilon" not in inst:
        raise ConfigError("instance file must provide 'x' and 'epsilon'")
    obs = Observations(np.asarray(inst["x"], dtype=np.float64), float(inst["epsilon"]))
    noise = gaussian_noise(inst.get("noise", "additive"))
    method = args.method
    if "matrix" in inst:
        spec, _ = chain_from_dict(inst, source=args.instance)
        if method == "auto":
            method = "forward-backward"
        if method == "forward-backward":
            post = forward_backward_posterior(spec, obs, noise)
        else:
            post = brute_force_posterior(spec, obs, noise)
    elif "iid_psig" in inst:
        post = brute_force_posterior(iid_prior(obs.m, float(inst["iid_psig"])), obs, noise)
        method = "brute-force"
    elif "prior" in inst:
        prior = {}
        for key, weight in inst["prior"].items():
            if len(key) != obs.m or set(key) - {"0", "1"}:
                raise ConfigError(f"bad prior key {key!r}; want a 0/1 string of length m")
            prior[tuple(int(c) for c in key)] = float(weight)
        post = brute_force_posterior(prior, obs, noise)
        method = "brute-force"
    else:
        raise ConfigError("instance file needs 'matrix'+'pi'+'f_set', 'iid_psig', or 'prior'")
    _emit_json(
        {
            "method": method,
            "probs": post.probs.tolist(),
            "log_evidence": post.log_evidence,
        },
        args.out,
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aclfdr",
        description="Large-scale testing under dependence: approximate posteriors, "
        "step-up procedures, and a Monte Carlo comparison harness.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample-matrix", help="sample a constrained transition matrix")
    p.add_argument("--d", type=int, required=True, help="number of states")
    p.add_argument("--f-set", type=_f_set, required=True, help="comma list of zero-class states (0-based)")
    p.add_argument("--psig", type=float, required=True, help="stationary signal mass")
    p.add_argument("--lambda", dest="slem_min", type=float, default=0.0, help="lower bound on the second eigenmodulus")
    p.add_argument("--mu", dest="tlem_min", type=float, default=0.0, help="lower bound on the third eigenmodulus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-10, help="balancing tolerance")
    p.add_argument("--max-attempts", type=int, default=50_000)
    p.add_argument("--out", default=None, help="output JSON path (default stdout)")
    p.set_defaults(func=_cmd_sample_matrix)

    p = sub.add_parser("simulate-signal", help="simulate a training signal and estimate moments")
    p.add_argument("--matrix-file", required=True, help="chain JSON from sample-matrix")
    p.add_argument("--m", type=int, required=True, help="signal length")
    p.add_argument("--w", type=int, required=True, help="half-window length")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--theta-out", default=None, help="optional .npy path for the raw signal")
    p.add_argument("--out", default=None, help="moments JSON path (default stdout)")
    p.set_defaults(func=_cmd_simulate_signal)

    p = sub.add_parser("run", help="run a full experiment")
    p.add_argument("--config", default=None, help="JSON config file; flags override it")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True, help="directory for records.csv and summary.json")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--f-set", type=_f_set, default=None)
    p.add_argument("--psig", type=float, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--w", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--lambda", dest="slem_min", type=float, default=None)
    p.add_argument("--mu", dest="tlem_min", type=float, default=None)
    p.add_argument("--reps", dest="n_reps", type=int, default=None)
    p.add_argument("--jobs", dest="n_jobs", type=int, default=None)
    p.add_argument("--tol", dest="sinkhorn_tol", type=float, default=None)
    p.add_argument("--max-attempts", type=int, default=None)
    p.add_argument("--matrix-file", default=None, help="use this chain instead of sampling one")
    p.add_argument("--density", action="store_const", const=True, default=None, help="also write density curves")
    p.add_argument("--grid-points", type=int, default=None)
    p.add_argument("--redraw-eta", action="store_const", const=True, default=None, help="redraw the test signal every replication")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("test", help="run one procedure on a CSV of posteriors or p-values")
    p.add_argument("--input", required=True, help="single-column CSV")
    p.add_argument("--procedure", choices=("bayes-bh", "bh"), required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--truth", default=None, help="optional single-column CSV of true 0/1 labels")
    p.add_argument("--decisions-out", default=None, help="optional per-site decision CSV")
    p.add_argument("--counts-out", default=None, help="counts JSON path (default stdout)")
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("density", help="kernel density of a records column")
    p.add_argument("--records", required=True, help="records.csv from a run")
    p.add_argument("--column", choices=RECORD_FIELDS, required=True)
    p.add_argument("--bandwidth", default="auto", help="'auto' or a positive number")
    p.add_argument("--grid-min", type=float, default=None)
    p.add_argument("--grid-max", type=float, default=None)
    p.add_argument("--grid-points", type=int, default=256)
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("oracle", help="exact posteriors for a small instance file (debug)")
    p.add_argument("--instance", required=True, help="instance JSON file")
    p.add_argument(
        "--method",
        choices=("auto", "brute-force", "forward-backward"),
        default="auto",
    )
    p.add_argument("--out", default=None, help="output JSON path (default stdout)")
    p.set_defaults(func=_cmd_oracle)
    return parser


def main(argv: list | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConvergenceError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, KeyError) as exc:
        # ConfigError and friends subclass ValueError; bad files land here too
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
