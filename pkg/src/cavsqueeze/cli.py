"""Batch front-end: config ingestion, subcommand dispatch, CSV + manifest.

Exit codes: 0 success, 2 usage error (argparse), 3 invalid configuration,
4 computation/backend failure.  On failure a machine-readable JSON error
record is written to stderr.  Every run writes a manifest.json holding
parameters, seeds, versions and output paths; no files are written
before the configuration has validated, and nothing outside the output
directory is touched.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import analytic, config, moments, oat_exact, optimizer, oracle, qnd_exact
from .config import ConfigError
from .errors import ContrastCollapseError, StepSizeError
from .params import derive_effective, from_reduced, validate_adiabatic

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_RUNTIME = 4

FIGURE_IDS = ("2a", "2b", "3a", "3b", "3c", "4a", "4b", "4c")

EPILOG = """\
exit codes: 0 success, 2 usage error, 3 invalid configuration,
4 computation failure (JSON error record on stderr).
Default output root: $CAVSQUEEZE_OUTDIR or ./runs.
"""


def _out_root(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("CAVSQUEEZE_OUTDIR", "runs"))


def _load_settings(args) -> dict:
    cfg = config.load_config(args.config) if args.config else {}
    for key in ("N", "C", "gamma_sc", "p", "d", "eta", "t_max", "s_max", "dt",
                "n_out", "n_traj", "seed", "window_s", "N_exact", "threads"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _effective(cfg: dict):
    return config.effective_from_config(cfg)


def _t_max(cfg: dict, eff) -> float:
    if "t_max" in cfg:
        return float(cfg["t_max"])
    s_max = float(cfg.get("s_max", cfg.get("window_s", 50.0)))
    return eff.time_from_scaled(s_max)


def _require_keys(cfg: dict, keys, sub: str):
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError(f"{sub}: missing configuration keys {missing}")


def _manifest(out_dir, sub, params, numerics, seeds, outputs, t0, argv):
    return config.write_manifest(out_dir / "manifest.json", sub, params, numerics,
                                 seeds, outputs, time.time() - t0, argv)


def _reduced_dict(eff) -> dict:
    return {"N": eff.N, "C": eff.C, "gamma_sc": eff.gamma_sc, "p": eff.p,
            "d": eff.d, "eta": eff.eta, "chi": eff.chi, "Gamma": eff.Gamma}


# --------------------------------------------------------------------------
# subcommand implementations (each returns a list of written files)
# --------------------------------------------------------------------------

def cmd_derive_params(cfg, out_dir, args):
    cfg = dict(cfg, mode="physical")
    phys = config.physical_from_config(cfg)
    eff = derive_effective(phys)
    path = out_dir / "effective.kv"
    config.write_kv(path, _reduced_dict(eff))
    return [path], _reduced_dict(eff)


def cmd_validate(cfg, out_dir, args):
    cfg = dict(cfg, mode="physical")
    phys = config.physical_from_config(cfg)
    report = validate_adiabatic(phys, margin=float(cfg.get("margin", 10.0)))
    path = out_dir / "validity.kv"
    config.write_kv(path, report.as_dict())
    csv_path = out_dir / "validity.csv"
    config.write_csv(csv_path, ["check", "ratio", "margin", "satisfied"],
                     [[c.name, c.ratio, c.margin, c.satisfied] for c in report.checks])
    return [path, csv_path], {"overall": report.overall}


def cmd_simulate_moments(cfg, out_dir, args):
    eff = _effective(cfg)
    t_max = _t_max(cfg, eff)
    n_out = int(cfg.get("n_out", 2001))
    dt = float(cfg["dt"]) if "dt" in cfg else None
    n_traj = int(cfg.get("n_traj", 0))
    outputs = []
    if n_traj <= 1:
        seed = cfg.get("seed")
        rec = moments.simulate(eff, t_max, dt=dt, seed=seed, n_out=n_out)
        path = out_dir / "trajectory.csv"
        config.write_trajectory_csv(path, rec)
        outputs.append(path)
        seeds = {"seed": seed}
    else:
        master = int(cfg.get("seed", _entropy_seed()))
        ens = moments.ensemble(eff, t_max, n_traj, master_seed=master, dt=dt,
                               n_out=min(n_out, 1001),
                               threads=int(cfg.get("threads", 1)))
        for i in range(min(n_traj, int(cfg.get("save_trajectories", 3)))):
            rec = moments.simulate(eff, t_max, dt=dt,
                                   seed=moments.trajectory_seed(master, i),
                                   n_out=min(n_out, 1001))
            path = out_dir / f"trajectory_{i:04d}.csv"
            config.write_trajectory_csv(path, rec)
            outputs.append(path)
        path = out_dir / "ensemble_summary.csv"
        config.write_csv(path,
                         ["t", "s", "z_mean", "z_std", "y_mean", "y_std",
                          "q_mean", "q_std", "xi2", "area"],
                         zip(ens.times, np.atleast_1d(ens.s), ens.z_mean, ens.z_std,
                             ens.y_mean, ens.y_std, ens.q_mean, ens.q_std,
                             ens.xi2, ens.area))
        outputs.append(path)
        seeds = {"master_seed": master, "n_traj": n_traj}
    return outputs, seeds


def cmd_simulate_qnd_exact(cfg, out_dir, args):
    _require_keys(cfg, ("N",), "simulate-qnd-exact")
    eff = _effective(cfg)
    N = int(cfg.get("N_exact", cfg["N"]))
    t_max = _t_max(cfg, eff)
    n_out = int(cfg.get("n_out", 501))
    n_traj = int(cfg.get("n_traj", 1))
    master = int(cfg.get("seed", _entropy_seed()))
    dt = float(cfg["dt"]) if "dt" in cfg else None
    outputs = []
    header = config.TRAJECTORY_HEADER + ["n_star"]
    for i in range(min(n_traj, int(cfg.get("save_trajectories", 3)))):
        tr = qnd_exact.simulate_trajectory(eff, N, t_max, dt=dt,
                                           seed=moments.trajectory_seed(master, i),
                                           n_out=n_out)
        rows = []
        xi2 = tr.xi2
        area = tr.area_proxy
        for j in range(len(tr.times)):
            rows.append([float(tr.times[j]), float(np.atleast_1d(tr.s)[j]),
                         float(tr.v_zz_cond[j]),
                         float(1.0 + eff.GammaN * tr.times[j]
                               * math.exp(-eff.gamma_sc * tr.times[j])),
                         0.0, float(tr.Sz[j] / math.sqrt(N / 4.0)), 0.0,
                         float(tr.q[j]), float(xi2[j]), float(area[j]),
                         float(10.0 * math.log10(xi2[j])), float(tr.n_star[j])])
        path = out_dir / f"trajectory_{i:04d}.csv"
        config.write_csv(path, header, rows)
        outputs.append(path)
    if n_traj >= 2:
        ens = qnd_exact.ensemble(eff, N, n_traj, t_max, dt=dt, master_seed=master,
                                 n_out=n_out, threads=int(cfg.get("threads", 1)))
        path = out_dir / "ensemble_summary.csv"
        config.write_csv(path,
                         ["t", "s", "xi2_mean", "xi2_std", "xi2_p10", "xi2_p90",
                          "sz_mean", "sz_std"],
                         zip(ens.times, np.atleast_1d(ens.s), ens.xi2_mean,
                             ens.xi2_std, ens.xi2_p10, ens.xi2_p90,
                             ens.sz_mean, ens.sz_std))
        outputs.append(path)
    return outputs, {"master_seed": master, "n_traj": n_traj, "N_exact": N}


def cmd_simulate_oat_exact(cfg, out_dir, args):
    eff = _effective(cfg)
    N = int(cfg.get("N_exact", cfg["N"]))
    t_max = _t_max(cfg, eff)
    n_out = int(cfg.get("n_out", 2001))
    ts = np.linspace(0.0, t_max, n_out)
    xi2, area = oat_exact.exact_xi2_curve(ts, eff, N)
    _, szsy, sy2, sx = oat_exact.exact_observables(ts, eff, N)
    path = out_dir / "oat_exact.csv"
    config.write_csv(path, ["t", "s", "xi2", "area", "Sz2", "SzSy", "Sy2", "Sx"],
                     zip(ts, np.atleast_1d(eff.scaled_time(ts)),
                         xi2, area, np.full_like(ts, N / 4.0), szsy, sy2, sx))
    return [path], {}


def cmd_simulate_oracle(cfg, out_dir, args):
    eff = _effective(cfg)
    N = int(cfg.get("N_exact", cfg["N"]))
    if not (2 <= N <= 8):
        raise ConfigError("oracle requires 2 <= N <= 8 (set N_exact)")
    eff = from_reduced(N, eff.C, eff.gamma_sc, eff.p, eff.d, eff.eta)
    ops = oracle.build_operators(N)
    rho0 = oracle.coherent_x_state(ops)
    t_max = _t_max(cfg, eff)
    n_out = int(cfg.get("n_out", 101))
    dt = float(cfg["dt"]) if "dt" in cfg else None
    seed = cfg.get("seed")
    if eff.eta > 0 and seed is not None:
        series = oracle.evolve_sme(rho0, eff, ops, t_max, dt=dt, seed=int(seed),
                                   n_out=n_out)
        seeds = {"seed": int(seed)}
    else:
        series = oracle.evolve_master(rho0, eff, ops, t_max, dt=dt, n_out=n_out)
        seeds = {"seed": None}
    rows = []
    for t, rho in zip(series.times, series.rhos):
        mom = oracle.observables(rho, ops)
        v_zz, v_zy, v_yy = oracle.normalized_covariances(mom, N)
        z = mom.Sz / math.sqrt(N / 4.0)
        y = mom.Sy / math.sqrt(N / 4.0)
        rows.append([float(t), float(np.atleast_1d(eff.scaled_time(t))[0]),
                     v_zz, v_yy, v_zy, z, y,
                     mom.Sx, mom.Sy, mom.Sz, mom.Sz2, mom.Sy2, mom.SzSy, mom.S2,
                     oracle.wineland_xi2(mom, N)])
    path = out_dir / "oracle.csv"
    config.write_csv(path, ["t", "s", "v_zz", "v_yy", "v_zy", "z", "y",
                            "Sx", "Sy", "Sz", "Sz2", "Sy2", "SzSy",
                            "S2", "xi2_wineland"], rows)
    outputs = [path]
    if cfg.get("dump_rho", False):
        dump = out_dir / "rho_snapshots.bin"
        oracle.save_rho_dump(dump, series.rhos)
        outputs.append(dump)
    return outputs, seeds


def cmd_optimize(cfg, out_dir, args):
    eff = _effective(cfg)
    backend_name = cfg.get("backend", "moments")
    backend = optimizer.make_backend(backend_name, eff)
    t_max = _t_max(cfg, eff)
    opt = optimizer.optimize_over_time(backend, (0.0, t_max),
                                       n_scan=int(cfg.get("n_scan", 2000)))
    result = {"backend": backend_name, "t_opt": opt.t_opt,
              "s_opt": float(np.atleast_1d(eff.scaled_time(opt.t_opt))[0]),
              "xi2_t": opt.xi2_t, "xi2_t_db": opt.xi2_db,
              "area_at_opt": opt.area_at_opt, "at_edge": opt.at_edge}
    path = out_dir / "optimum.kv"
    config.write_kv(path, result)
    csv_path = out_dir / "optimum.csv"
    config.write_csv(csv_path, list(result.keys()), [list(result.values())])
    return [path, csv_path], {}


def _parse_grid(spec: str):
    kind, _, rest = spec.partition(":")
    lo, hi, num = rest.split(",")
    if kind == "log":
        return np.geomspace(float(lo), float(hi), int(num))
    if kind == "lin":
        return np.linspace(float(lo), float(hi), int(num))
    raise ConfigError(f"grid must be 'log:lo,hi,n' or 'lin:lo,hi,n', got {spec!r}")


def cmd_sweep(cfg, out_dir, args):
    eff = _effective(cfg)
    d_grid = _parse_grid(str(cfg.get("d_grid", "log:0.01,100,13")))
    eta_list = [float(x) for x in str(cfg.get("eta_list", "0,0.1,0.25")).split(",")]
    rows = optimizer.sweep_detuning(eff, d_grid, eta_list,
                                    window_s=float(cfg.get("window_s", 50.0)),
                                    n_scan=int(cfg.get("n_scan", 2000)))
    path = out_dir / "detuning_sweep.csv"
    config.write_csv(path, ["d", "eta", "t_opt", "s_opt", "xi2_t", "area", "at_edge"],
                     [[r.parameter, r.eta, r.t_opt, r.s_opt, r.xi2_t,
                       r.area_at_opt, r.at_edge] for r in rows])
    return [path], {}


def cmd_classify(cfg, out_dir, args):
    _require_keys(cfg, ("N", "C", "eta", "p"), "classify")
    rep = analytic.classify(float(cfg["N"]), float(cfg["C"]), float(cfg["eta"]),
                            float(cfg["p"]))
    report = {"N": cfg["N"], "C": cfg["C"], "eta": cfg["eta"], "p": cfg["p"]}
    report.update(rep.as_dict())
    path = out_dir / "classification.kv"
    config.write_kv(path, report)
    csv_path = out_dir / "classification.csv"
    config.write_csv(csv_path, list(report.keys()), [list(report.values())])
    return [path, csv_path], report


def cmd_table_s1(cfg, out_dir, args):
    rows = analytic.table_s1_predictions()
    path = out_dir / "table_s1.csv"
    config.write_csv(path, ["experiment", "protocol", "xi2", "predicted_db",
                            "quoted_db"],
                     [[r["experiment"], r["protocol"], r["xi2"], r["predicted_db"],
                       r["quoted_db"]] for r in rows])
    return [path], {}


def cmd_emit_plot(cfg, out_dir, args):
    from . import plots
    if not args.csv or not args.figure:
        raise ConfigError("emit-plot requires --csv and --figure")
    out = out_dir / f"figure_{args.figure}.svg"
    try:
        plots.emit_plot(args.csv, args.figure, out)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return [out], {}


# ---------------------------- figure pipelines ----------------------------

FIG2_NC = (1e3, 1e4, 1e5)
FIG3_NC = (1e4, 1e5, 1e6)
FIG3C_ETAS = (0.0, 0.05, 0.1, 3.0 / 16.0, 0.25, 0.5, 1.0)


def _fig_2a_2b(parametric: bool):
    rows = []
    for NC in FIG2_NC:
        eff = from_reduced(int(NC), 1.0, 1.0, 0.5, 0.0, 0.4)
        t_max = eff.time_from_scaled(50.0)
        rec = moments.simulate(eff, t_max, n_out=1001)
        s = rec.s
        marker = np.zeros(len(s), dtype=bool)
        for k in range(1, int(s[-1] / 0.2) + 1):
            marker[int(np.argmin(np.abs(s - 0.2 * k)))] = True
        for j in range(len(rec.times)):
            rows.append([NC, float(rec.times[j]), float(s[j]), float(rec.xi2[j]),
                         float(rec.area[j]), bool(marker[j])])
    return ["NC", "t", "s", "xi2", "area", "marker"], rows


def _fig_3a_3b():
    rows = []
    d_grid = np.geomspace(0.3, 3e3, 25)
    for NC in FIG3_NC:
        for d in d_grid:
            eff = from_reduced(int(NC), 1.0, 1.0, 0.5, float(d), 0.0)
            backend = optimizer.LinearOatBackend(eff)
            t_max = eff.time_from_scaled(50.0)
            opt = optimizer.optimize_over_time(backend, (0.0, t_max), n_scan=2000)
            decade = abs(math.log10(d / d_grid[0]) % 1.0) < 1e-9
            rows.append([NC, float(d), opt.t_opt, opt.xi2_t, opt.area_at_opt,
                         opt.at_edge, decade])
    return ["NC", "d", "t_opt", "xi2_t", "area", "at_edge", "marker"], rows


def _fig_3c(cfg):
    eff = from_reduced(int(cfg.get("N", 100000)), float(cfg.get("C", 1.0)),
                       float(cfg.get("gamma_sc", 1.0)), float(cfg.get("p", 0.4)),
                       0.0, 0.0)
    d_grid = np.geomspace(0.05, 200.0, int(cfg.get("n_d", 13)))
    rows = optimizer.sweep_detuning(eff, d_grid, FIG3C_ETAS,
                                    window_s=float(cfg.get("window_s", 50.0)))
    return (["d", "eta", "t_opt", "s_opt", "xi2_t", "area", "at_edge"],
            [[r.parameter, r.eta, r.t_opt, r.s_opt, r.xi2_t, r.area_at_opt,
              r.at_edge] for r in rows])


def _fig_4a(cfg):
    N = int(cfg.get("N", 10**6))
    C = float(cfg.get("C", 100.0))
    rows = []
    for d in np.geomspace(1.0, 1e8, int(cfg.get("n_d", 33))):
        eff = from_reduced(N, C, 1.0, 0.0, float(d), 0.0)
        est, cross = analytic.oat_p0_regimes(N, C, float(d))
        backend = optimizer.OatExactBackend(eff, N)
        window = (0.0, 8.0 * est.t_opt)
        opt = optimizer.optimize_over_time(backend, window, n_scan=2000)
        rows.append([float(d), opt.t_opt, opt.xi2_t, opt.area_at_opt,
                     est.xi2_opt, est.regime_label, cross.d_c1, cross.d_c2])
    return (["d", "t_opt", "xi2_t", "area", "xi2_regime_formula", "regime",
             "d_c1", "d_c2"], rows)


def _fig_4b(cfg):
    N = int(cfg.get("N_exact", 100))
    n_traj = int(cfg.get("n_traj", 100))
    master = int(cfg.get("seed", 20240901))
    rows = []
    for eta, C in ((0.5, 1.0), (1.0, 5.0)):
        eff = from_reduced(N, C, 1.0, 0.0, 0.0, eta)
        t_max = 2.5 / eff.Gamma
        ens = qnd_exact.ensemble(eff, N, n_traj, t_max, master_seed=master,
                                 n_out=301, threads=int(cfg.get("threads", 1)))
        for j in range(len(ens.times)):
            rows.append([eta, C, float(ens.times[j]), float(ens.xi2_mean[j]),
                         float(ens.xi2_std[j]), float(ens.xi2_p10[j]),
                         float(ens.xi2_p90[j])])
    return (["eta", "C", "t", "xi2_mean", "xi2_std", "xi2_p10", "xi2_p90"], rows)


def _fig_4c(cfg):
    N = float(cfg.get("N", 10**6))
    C = float(cfg.get("C", 100.0))
    p_grid = np.geomspace(1e-5, 0.5, int(cfg.get("n_p", 41)))
    eta_grid = [0.03, 0.1, 3.0 / 16.0, 0.4]
    rows = optimizer.regime_map(N, C, eta_grid, p_grid)
    header = list(rows[0].keys())
    return header, [[r[k] for k in header] for r in rows]


def cmd_reproduce_figure(cfg, out_dir, args):
    fig = args.figure_id
    if fig == "2a":
        header, rows = _fig_2a_2b(False)
    elif fig == "2b":
        header, rows = _fig_2a_2b(True)
    elif fig in ("3a", "3b"):
        header, rows = _fig_3a_3b()
    elif fig == "3c":
        header, rows = _fig_3c(cfg)
    elif fig == "4a":
        header, rows = _fig_4a(cfg)
    elif fig == "4b":
        header, rows = _fig_4b(cfg)
    elif fig == "4c":
        header, rows = _fig_4c(cfg)
    else:
        raise ConfigError(f"unknown figure id {fig!r}")
    path = out_dir / f"figure_{fig}.csv"
    config.write_csv(path, header, rows)
    outputs = [path]
    if getattr(args, "plot", False):
        from . import plots
        outputs.append(plots.emit_plot(path, fig, out_dir / f"figure_{fig}.svg"))
    return outputs, {}


def _entropy_seed() -> int:
    return int(np.random.SeedSequence().entropy % (2**32))


COMMANDS = {
    "derive-params": cmd_derive_params,
    "validate": cmd_validate,
    "simulate-moments": cmd_simulate_moments,
    "simulate-qnd-exact": cmd_simulate_qnd_exact,
    "simulate-oat-exact": cmd_simulate_oat_exact,
    "simulate-oracle": cmd_simulate_oracle,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "classify": cmd_classify,
    "table-s1": cmd_table_s1,
    "emit-plot": cmd_emit_plot,
    "reproduce-figure": cmd_reproduce_figure,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavsqueeze",
        description="Cavity spin-squeezing simulations: measurement vs twisting.",
        epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, **kwargs):
        p = sub.add_parser(name, epilog=EPILOG,
                           formatter_class=argparse.RawDescriptionHelpFormatter,
                           **kwargs)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--out", help="output directory (default $CAVSQUEEZE_OUTDIR/<cmd>)")
        p.add_argument("-N", type=int, dest="N")
        p.add_argument("-C", type=float, dest="C")
        p.add_argument("--gamma-sc", type=float, dest="gamma_sc")
        p.add_argument("-p", type=float, dest="p")
        p.add_argument("-d", type=float, dest="d")
        p.add_argument("--eta", type=float)
        p.add_argument("--t-max", type=float, dest="t_max")
        p.add_argument("--s-max", type=float, dest="s_max")
        p.add_argument("--dt", type=float)
        p.add_argument("--n-out", type=int, dest="n_out")
        p.add_argument("--n-traj", type=int, dest="n_traj")
        p.add_argument("--seed", type=int)
        p.add_argument("--window-s", type=float, dest="window_s")
        p.add_argument("--N-exact", type=int, dest="N_exact")
        p.add_argument("--threads", type=int)
        return p

    add("derive-params", help="physical -> effective parameters")
    add("validate", help="adiabatic-elimination validity report")
    add("simulate-moments", help="Gaussian-sector trajectory / ensemble")
    add("simulate-qnd-exact", help="exact measurement-only trajectories (p=0)")
    add("simulate-oat-exact", help="exact twisting observables (eta=0)")
    p = add("simulate-oracle", help="brute-force density matrix (N<=8)")
    p.add_argument("--dump-rho", action="store_true", dest="dump_rho")
    p = add("optimize", help="time-optimized squeezing for one configuration")
    p.add_argument("--backend", choices=("moments", "oat_exact", "analytic_oat",
                                         "linear_oat"))
    p = add("sweep", help="detuning/efficiency sweep of optimized squeezing")
    p.add_argument("--d-grid", dest="d_grid", help="log:lo,hi,n or lin:lo,hi,n")
    p.add_argument("--eta-list", dest="eta_list", help="comma-separated efficiencies")
    add("classify", help="measurement-vs-twisting recommendation")
    add("table-s1", help="pinned experimental prediction fixtures")
    p = add("emit-plot", help="render a figure-style SVG from a CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--figure", required=True, choices=FIGURE_IDS)
    p = add("reproduce-figure", help="regenerate a figure data set")
    p.add_argument("figure_id", choices=FIGURE_IDS)
    p.add_argument("--plot", action="store_true")
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = args.subcommand
    t0 = time.time()
    try:
        cfg = _load_settings(args)
        for extra in ("backend", "d_grid", "eta_list", "dump_rho"):
            val = getattr(args, extra, None)
            if val is not None and val is not False:
                cfg[extra] = val
        out_dir = _out_root(args) / sub.replace("-", "_")
        # validate configuration fully before creating any output files
        handler = COMMANDS[sub]
        out_dir.mkdir(parents=True, exist_ok=True)
        outputs, seeds = handler(cfg, out_dir, args)
        _manifest(out_dir, sub, {k: v for k, v in cfg.items()},
                  {"dt": cfg.get("dt"), "n_out": cfg.get("n_out")},
                  seeds, outputs, t0, argv)
        for path in outputs:
            print(path)
        return EXIT_OK
    except ConfigError as exc:
        json.dump({"error": "config", "message": str(exc), "subcommand": sub},
                  sys.stderr)
        sys.stderr.write("\n")
        return EXIT_CONFIG
    except (StepSizeError, ContrastCollapseError, ValueError, OSError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc),
                   "subcommand": sub}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
