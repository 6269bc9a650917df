"""Command-line front end.

Subcommands: simulate (one frozen run), dcm (dynamical pairing to first
gel), cm (static graph components), ode (coagulation ODE), limits (closed
form tables), experiment (E1..E6 report runs).

Exit codes: 0 success, 2 configuration error, 3 threshold violation under
--check.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import dynamic_cm, frozen_sim, graphs, harness, smoluchowski
from .harness import ExperimentConfig, _write_csv  # shared CSV conventions
from .measures import parse_dist

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CHECK = 3


_DEFAULTS = {
    "dist": "poisson:2.0",
    "n": 100_000,
    "alpha": None,
    "alpha_exp": 0.85,
    "tmax": 2.0,
    "seed": 0,
    "replicates": 1,
    "jobs": 1,
    "out": "out",
}


def _add_common(p):
    # defaults resolve later: file value beats the built-in, flag beats both
    p.add_argument("--dist", help="degree law, e.g. poisson:2.0, delta:3, binomial:4:0.6")
    p.add_argument("--n", type=int, help="number of particles / vertices")
    p.add_argument("--alpha", type=int, help="freezing threshold (default n^alpha_exp)")
    p.add_argument("--alpha-exp", type=float, dest="alpha_exp")
    p.add_argument("--tmax", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.add_argument("--config", default=None, help="JSON config file; flags override its values")
    p.add_argument("--dry-run", action="store_true", help="print the resolved configuration and exit")


def build_parser():
    ap = argparse.ArgumentParser(prog="cmgel")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("simulate", "dcm", "cm", "ode", "limits"):
        _add_common(sub.add_parser(name))
    pe = sub.add_parser("experiment")
    pe.add_argument("id", choices=[f"E{i}" for i in range(1, 7)])
    pe.add_argument("--check", action="store_true", help="exit 3 when the experiment misses its acceptance band")
    _add_common(pe)
    return ap


def _resolve(args) -> dict:
    file_cfg = {}
    if args.config:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(_DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    cfg = {}
    for key, default in _DEFAULTS.items():
        flag = getattr(args, key)
        cfg[key] = flag if flag is not None else file_cfg.get(key, default)
    return cfg


def _alpha_of(cfg) -> int:
    if cfg["alpha"] is not None:
        return cfg["alpha"]
    return math.ceil(cfg["n"] ** cfg["alpha_exp"])


def cmd_simulate(cfg) -> int:
    mu = parse_dist(cfg["dist"])
    fc = frozen_sim.FrozenConfig(
        n=cfg["n"], mu=mu, alpha=_alpha_of(cfg), t_max=cfg["tmax"], seed=cfg["seed"],
    )
    traj = frozen_sim.run_frozen(fc)
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    _write_csv(
        os.path.join(out, "trajectory.csv"),
        ["t", "n_t", "B_over_N", "num_gel_events"],
        [
            (t, n / fc.n, b / fc.n, g)
            for t, n, b, g in zip(traj.times, traj.n_t, traj.b_t, traj.ngel_t)
        ],
    )
    pkr_rows = []
    for i, t in enumerate(traj.times):
        tbl = traj.p_tables[i]
        for k, r in zip(*np.nonzero(tbl)):
            pkr_rows.append((t, int(k), int(r), int(tbl[k, r])))
    _write_csv(os.path.join(out, "pkr.csv"), ["t", "k", "r", "count"], pkr_rows)
    census_rows = []
    for i, t in enumerate(traj.times):
        for a, m, c in traj.censuses[i]:
            census_rows.append((t, int(a), int(m), int(c)))
    _write_csv(os.path.join(out, "census.csv"), ["t", "a", "m", "count"], census_rows)
    _write_csv(
        os.path.join(out, "gel_events.csv"),
        ["k", "tau_k", "size"],
        [(e["k"], e["tau"], e["size"]) for e in traj.gel_events],
    )
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(
            {
                "n": fc.n, "dist": cfg["dist"], "alpha": fc.alpha, "t_max": fc.t_max,
                "seed": fc.seed, "gel_events": len(traj.gel_events),
                "final_n_t": int(traj.n_t[-1]) / fc.n,
            },
            fh, indent=2,
        )
    print(f"wrote {out}/trajectory.csv, pkr.csv, census.csv, gel_events.csv, summary.json")
    return EXIT_OK


def cmd_dcm(cfg) -> int:
    theta = dynamic_cm.Theta(n=cfg["n"], mu=parse_dist(cfg["dist"]))
    run = dynamic_cm.simulate_dcm(
        theta, _alpha_of(cfg), "first_gel", np.random.default_rng(cfg["seed"])
    )
    os.makedirs(cfg["out"], exist_ok=True)
    summary = {
        "stop_reason": run.stop_reason,
        "sigma": run.sigma,
        "gel_size": run.gel_component["size"] if run.gel_component else None,
        "gel_activated_arms": run.gel_component["b"] if run.gel_component else None,
        "S_after": run.solution_after["S"] if run.solution_after else None,
        "B_after": run.solution_after["B"] if run.solution_after else None,
        "forecast": {
            k: (v.tolist() if isinstance(v, np.ndarray) else v)
            for k, v in dynamic_cm.gelation_predictions(theta, _alpha_of(cfg)).items()
        },
    }
    path = os.path.join(cfg["out"], "dcm_run.json")
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2)
    print(json.dumps({k: summary[k] for k in ("stop_reason", "sigma", "gel_size")}))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_cm(cfg) -> int:
    pi = parse_dist(cfg["dist"])
    degrees = graphs.realize_degrees(cfg["n"], pi)
    pairing = graphs.sample_cm(degrees, np.random.default_rng(cfg["seed"]))
    stats = graphs.components(pairing)
    os.makedirs(cfg["out"], exist_ok=True)
    path = os.path.join(cfg["out"], "components.csv")
    _write_csv(path, ["component_id", "size", "k", "count"], stats.to_rows())
    print(f"largest component: {stats.sizes[0]} of {cfg['n']}; wrote {path}")
    return EXIT_OK


def cmd_ode(cfg) -> int:
    mu = parse_dist(cfg["dist"])
    traj = smoluchowski.integrate_modified(
        smoluchowski.monodisperse_state(mu), t_max=cfg["tmax"]
    )
    os.makedirs(cfg["out"], exist_ok=True)
    rows = []
    for i, t in enumerate(traj.times):
        c = traj.states[i]
        ov = traj.overflow[i]
        for a, m in zip(*np.nonzero(c > 1e-12)):
            rows.append((t, int(a), int(m), c[a, m], ov))
    path = os.path.join(cfg["out"], "ode.csv")
    _write_csv(path, ["t", "a", "m", "c", "overflow_mass"], rows)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_limits(cfg) -> int:
    mu = parse_dist(cfg["dist"])
    tg = smoluchowski.t_gel(mu)
    rows = []
    for t in np.linspace(0.0, cfg["tmax"], 41):
        ls = smoluchowski.limit_state(mu, float(t))
        rows.append((t, ls.Q, ls.n))
    os.makedirs(cfg["out"], exist_ok=True)
    _write_csv(os.path.join(cfg["out"], "limits.csv"), ["t", "Q", "n_t"], rows)
    cinf_rows = [
        (m, smoluchowski.limiting_concentration(mu, m)) for m in range(2, 21)
    ]
    _write_csv(os.path.join(cfg["out"], "c_infinity.csv"), ["m", "c_inf_0_m"], cinf_rows)
    print(f"T_gel = {tg}; wrote {cfg['out']}/limits.csv, c_infinity.csv")
    return EXIT_OK


def cmd_experiment(args, cfg) -> int:
    ec = ExperimentConfig(
        experiment=args.id,
        dist=cfg["dist"],
        n_values=[cfg["n"]],
        alpha=cfg["alpha"],
        alpha_exp=cfg["alpha_exp"],
        replicates=cfg["replicates"],
        seed=cfg["seed"],
        out_dir=cfg["out"],
        t_max=cfg["tmax"],
        jobs=cfg["jobs"],
    )
    report = harness.run_experiment(ec)
    print(json.dumps(report["metrics"], indent=2))
    if args.check and not harness.CHECKS[args.id](report["metrics"]):
        print(f"{args.id}: acceptance threshold violated", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dry_run:
        print(json.dumps({"command": args.command, **cfg}, indent=2))
        return EXIT_OK
    try:
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "dcm":
            return cmd_dcm(cfg)
        if args.command == "cm":
            return cmd_cm(cfg)
        if args.command == "ode":
            return cmd_ode(cfg)
        if args.command == "limits":
            return cmd_limits(cfg)
        if args.command == "experiment":
            return cmd_experiment(args, cfg)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
