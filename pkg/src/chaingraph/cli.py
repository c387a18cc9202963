"""Command-line front end.

Subcommands: simulate, fit, eval, experiment, check.  Every command is
deterministic given flags, config, and seed.  Exit codes: 0 success,
1 partial or statistical failure, 2 input error.  Outputs are computed
fully before any file is written, so a failing run leaves no partial
files.  Set CHAINGRAPH_LOG to a level name (DEBUG, INFO, ...) for logs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys

import numpy as np

from . import fileio
from .diagnostics import (check_distinct_eigenvalues, check_incoherence,
                          check_transversality, tangent_bases)
from .experiment import ExperimentConfig, data_seed_for, run_experiment
from .metrics import edge_metrics
from .model import SemParams, is_cg_feasible, low_rank_part
from .recovery import RecoveryConfig, learn_chain_graph
from .simulate import GenConfig, generate, sample_data
from .solver import SolverConfig

log = logging.getLogger(__name__)

INCOHERENCE_P_CAP = 50


class InputError(Exception):
    """Bad user input: malformed config, unreadable file, invalid data."""


def _read_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InputError(f"config {path} must hold a JSON object")
    return cfg


def _take(cfg, key, default=None):
    return cfg[key] if key in cfg else default


def _solver_config(d, gamma_override=None):
    d = dict(d or {})
    gamma = d.pop("gamma", 2.0)
    if gamma_override is not None:
        gamma = gamma_override
    known = {f.name for f in dataclasses.fields(SolverConfig)}
    unknown = set(d) - known
    if unknown:
        raise InputError(f"unknown solver config keys: {sorted(unknown)}")
    try:
        return SolverConfig(gamma=gamma, **d)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad solver config: {exc}") from exc


def _recovery_config(cfg, args):
    """RecoveryConfig from a config dict plus CLI overrides."""
    eta = _take(cfg, "eta", 0.125)
    if getattr(args, "eta", None) is not None:
        eta = args.eta
    gamma = _take(cfg, "gamma")
    if getattr(args, "gamma", None) is not None:
        gamma = args.gamma
    solver = _solver_config(_take(cfg, "solver"), gamma_override=gamma)
    try:
        return RecoveryConfig(eta=eta, lam=_take(cfg, "lam"),
                              kappa=_take(cfg, "kappa"), nu=_take(cfg, "nu"),
                              solver=solver)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad recovery config: {exc}") from exc


def _gen_config(cfg, seed_override=None):
    seed = _take(cfg, "seed", 0)
    if seed_override is not None:
        seed = seed_override
    keys = {"p", "design", "undirected_prob", "directed_prob", "hub_prob",
            "coef_low", "coef_high", "diag_slack"}
    kwargs = {k: cfg[k] for k in keys if k in cfg}
    try:
        return GenConfig(seed=seed, **kwargs)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad simulate config: {exc}") from exc


def _read_data(path):
    try:
        x = fileio.read_matrix_csv(path)
    except OSError as exc:
        raise InputError(f"cannot read data {path}: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"data {path} is not a numeric CSV: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise InputError(f"data {path} contains NaN or infinite values")
    return x


def _print_json(payload, out_path=None):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path is None:
        print(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def cmd_simulate(args):
    cfg = _read_config(args.config)
    n = _take(cfg, "n")
    if not isinstance(n, int) or n < 1:
        raise InputError("simulate config needs a positive integer n")
    gen_cfg = _gen_config(cfg, seed_override=args.seed)
    params, graph = generate(gen_cfg)
    x = sample_data(params, n, data_seed_for(gen_cfg.seed))
    os.makedirs(args.out, exist_ok=True)
    fileio.write_matrix_csv(os.path.join(args.out, "omega.csv"), params.omega)
    fileio.write_matrix_csv(os.path.join(args.out, "b.csv"), params.b)
    fileio.write_matrix_csv(os.path.join(args.out, "data.csv"), x)
    fileio.write_graph_json(os.path.join(args.out, "graph.json"), graph)
    manifest = {"schema_version": fileio.SCHEMA_VERSION, "command": "simulate",
                "n": n, "seed": gen_cfg.seed,
                "config": dataclasses.asdict(gen_cfg)}
    fileio.write_json(os.path.join(args.out, "manifest.json"), manifest)
    log.info("simulate wrote %s", args.out)
    return 0


def cmd_fit(args):
    x = _read_data(args.data)
    cfg = _read_config(args.config) if args.config else {}
    rec_cfg = _recovery_config(cfg, args)
    center = bool(_take(cfg, "center", False) or args.center)
    if center:
        x = x - x.mean(axis=0)
    try:
        decomp, b_hat, graph = learn_chain_graph(x, rec_cfg)
    except ValueError as exc:
        raise InputError(f"cannot fit: {exc}") from exc
    lam, kappa, nu = rec_cfg.resolve(x.shape[0])
    os.makedirs(args.out, exist_ok=True)
    fileio.write_matrix_csv(os.path.join(args.out, "omega.csv"), decomp.omega)
    fileio.write_matrix_csv(os.path.join(args.out, "lowrank.csv"), decomp.lowrank)
    fileio.write_matrix_csv(os.path.join(args.out, "b.csv"), b_hat)
    fileio.write_graph_json(os.path.join(args.out, "graph.json"), graph)
    diag = {
        "schema_version": fileio.SCHEMA_VERSION,
        "n": int(x.shape[0]), "p": int(x.shape[1]),
        "lam": lam, "kappa": kappa, "nu": nu,
        "eta": rec_cfg.eta, "gamma": rec_cfg.solver.gamma,
        "centered": center,
        "objective": _clean(decomp.objective),
        "iterations": decomp.iterations,
        "converged": decomp.converged,
        "primal_residual": decomp.primal_residual,
        "dual_residual": decomp.dual_residual,
        "inner_failures": decomp.inner_failures,
    }
    fileio.write_json(os.path.join(args.out, "diagnostics.json"), diag)
    if not decomp.converged:
        log.warning("solver did not converge in %d iterations", decomp.iterations)
    return 0


def cmd_eval(args):
    try:
        est = fileio.read_graph_json(args.est)
        truth = fileio.read_graph_json(args.truth)
    except OSError as exc:
        raise InputError(f"cannot read graph: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"bad graph JSON: {exc}") from exc
    if est.p != truth.p:
        raise InputError(f"graphs disagree on p: {est.p} vs {truth.p}")
    em = edge_metrics(est, truth)
    payload = {"schema_version": fileio.SCHEMA_VERSION}
    payload.update({k: _clean(v) for k, v in dataclasses.asdict(em).items()})
    out = os.path.join(args.out, "metrics.json") if args.out else None
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    _print_json(payload, out)
    return 0


def cmd_experiment(args):
    cfg = _read_config(args.config)
    rec_cfg = _recovery_config(_take(cfg, "recovery", {}), args)
    base_seed = _take(cfg, "base_seed", 0)
    if args.seed is not None:
        base_seed = args.seed
    parallelism = _take(cfg, "parallelism", 1)
    if args.parallelism is not None:
        parallelism = args.parallelism
    try:
        exp_cfg = ExperimentConfig(
            design=_take(cfg, "design", "example1"),
            p=_take(cfg, "p", 50), n=_take(cfg, "n", 1000),
            reps=_take(cfg, "reps", 50), base_seed=base_seed,
            recovery=rec_cfg, parallelism=parallelism,
            center=bool(_take(cfg, "center", False) or args.center),
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad experiment config: {exc}") from exc
    result = run_experiment(exp_cfg, out_dir=args.out)
    n_fail = len(result.failures)
    if n_fail:
        print(f"{n_fail}/{exp_cfg.reps} replications failed", file=sys.stderr)
    if 2 * n_fail >= exp_cfg.reps:
        return 1
    return 0


def cmd_check(args):
    omega_path = os.path.join(args.params, "omega.csv")
    b_path = os.path.join(args.params, "b.csv")
    try:
        omega = fileio.read_matrix_csv(omega_path)
        b = fileio.read_matrix_csv(b_path)
    except OSError as exc:
        raise InputError(f"cannot read parameter matrices: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"parameter CSV malformed: {exc}") from exc
    try:
        params = SemParams(omega=omega, b=b)
    except ValueError as exc:
        raise InputError(f"parameters are not a valid chain graph: {exc}") from exc
    feasible, ordering = is_cg_feasible(params.omega, params.b)
    lowrank = low_rank_part(params)
    bases = tangent_bases(params.omega, lowrank)
    transversal, angle = check_transversality(bases)
    distinct, gap = check_distinct_eigenvalues(lowrank)
    payload = {
        "schema_version": fileio.SCHEMA_VERSION,
        "p": params.p,
        "cg_feasible": feasible,
        "component_ordering": list(ordering) if ordering is not None else None,
        "transversal": transversal,
        "principal_angle": angle,
        "eigenvalues_distinct": distinct,
        "eigenvalue_gap": _clean(gap),
        "subspace_dims": list(bases.dims),
    }
    gamma = args.gamma if args.gamma is not None else 2.0
    if params.p > INCOHERENCE_P_CAP:
        payload["incoherence"] = None
        payload["incoherence_note"] = (
            f"skipped: p={params.p} exceeds cap {INCOHERENCE_P_CAP}")
    elif not transversal:
        payload["incoherence"] = None
        payload["incoherence_note"] = "unavailable: subspaces not transversal"
    else:
        report = check_incoherence(params.omega, lowrank, gamma=gamma)
        payload["incoherence"] = {
            "g_value": report.g_value,
            "satisfied": report.satisfied,
            "condition_of_f": report.condition_of_f,
            "gamma": gamma,
        }
    out = os.path.join(args.out, "check.json") if args.out else None
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    _print_json(payload, out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="chaingraph",
        description="Learn Gaussian chain graph structure from data.")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="draw a graph and sample data")
    ps.add_argument("--config", required=True, help="JSON generator config")
    ps.add_argument("--out", required=True, help="output directory")
    ps.add_argument("--seed", type=int, default=None, help="override config seed")
    ps.set_defaults(func=cmd_simulate)

    pf = sub.add_parser("fit", help="estimate a chain graph from a data CSV")
    pf.add_argument("data", help="n-by-p data CSV, no header")
    pf.add_argument("--config", default=None, help="JSON fit config")
    pf.add_argument("--out", required=True, help="output directory")
    pf.add_argument("--center", action="store_true",
                    help="subtract column means first")
    pf.add_argument("--eta", type=float, default=None,
                    help="override schedule exponent")
    pf.add_argument("--gamma", type=float, default=None,
                    help="override nuclear-norm weight")
    pf.set_defaults(func=cmd_fit)

    pe = sub.add_parser("eval", help="compare an estimated graph to the truth")
    pe.add_argument("est", help="estimated graph JSON")
    pe.add_argument("truth", help="true graph JSON")
    pe.add_argument("--out", default=None, help="also write metrics.json here")
    pe.set_defaults(func=cmd_eval)

    px = sub.add_parser("experiment", help="run replicated experiments")
    px.add_argument("--config", required=True, help="JSON experiment config")
    px.add_argument("--out", required=True, help="output directory")
    px.add_argument("--seed", type=int, default=None, help="override base seed")
    px.add_argument("--parallelism", type=int, default=None,
                    help="worker processes")
    px.add_argument("--center", action="store_true",
                    help="subtract column means in each replication")
    px.add_argument("--eta", type=float, default=None,
                    help="override schedule exponent")
    px.add_argument("--gamma", type=float, default=None,
                    help="override nuclear-norm weight")
    px.set_defaults(func=cmd_experiment)

    pc = sub.add_parser("check", help="identifiability diagnostics for a model")
    pc.add_argument("params", help="directory holding omega.csv and b.csv")
    pc.add_argument("--out", default=None, help="also write check.json here")
    pc.add_argument("--gamma", type=float, default=None,
                    help="nuclear-norm weight for the incoherence check")
    pc.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    level = os.environ.get("CHAINGRAPH_LOG")
    if level:
        logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO),
                            format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
