"""Flat key-value config files, CSV writers and run manifests.

Config schema: one ``key = value`` pair per line, ``#`` comments, blank
lines ignored.  Values are parsed as int, float, bool or string.  The
parameter block is either reduced (mode=reduced: N, C, gamma_sc, p, d,
eta) or physical (mode=physical: g1, g2, gamma1, gamma2, kappa, Delta,
delta, flux, N, eta); exactly one mode per file.  Numerical keys (all
optional): t_max or s_max, dt, n_out, n_traj, seed, window_s, N_exact,
threads.  Output keys: out_dir.
"""

from __future__ import annotations

import csv
import json
import time
from pathlib import Path

from . import __version__, kernels
from .params import EffectiveParams, PhysicalParams, derive_effective, from_reduced

REDUCED_KEYS = ("N", "C", "gamma_sc", "p", "d", "eta")
PHYSICAL_KEYS = ("g1", "g2", "gamma1", "gamma2", "kappa", "Delta", "delta",
                 "flux", "N", "eta")


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def _coerce(text: str):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_kv_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = _coerce(value)
    return out


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_kv_text(text)


def effective_from_config(cfg: dict) -> EffectiveParams:
    """Build EffectiveParams from a parsed config (reduced or physical)."""
    mode = cfg.get("mode", "reduced")
    if mode == "reduced":
        missing = [k for k in REDUCED_KEYS if k not in cfg]
        if missing:
            raise ConfigError(f"reduced mode missing keys: {missing}")
        try:
            return from_reduced(int(cfg["N"]), float(cfg["C"]), float(cfg["gamma_sc"]),
                                float(cfg["p"]), float(cfg["d"]), float(cfg["eta"]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
    if mode == "physical":
        missing = [k for k in PHYSICAL_KEYS if k not in cfg]
        if missing:
            raise ConfigError(f"physical mode missing keys: {missing}")
        try:
            return derive_effective(physical_from_config(cfg))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"mode must be 'reduced' or 'physical', got {mode!r}")


def physical_from_config(cfg: dict) -> PhysicalParams:
    try:
        return PhysicalParams(g1=float(cfg["g1"]), g2=float(cfg["g2"]),
                              gamma1=float(cfg["gamma1"]), gamma2=float(cfg["gamma2"]),
                              kappa=float(cfg["kappa"]), Delta=float(cfg["Delta"]),
                              delta=float(cfg["delta"]), flux=float(cfg["flux"]),
                              N=int(cfg["N"]), eta=float(cfg["eta"]))
    except KeyError as exc:
        raise ConfigError(f"physical mode missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def write_csv(path, header, rows):
    """RFC-4180-style CSV: header row, '.' decimal, UTF-8, repr floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _fmt(value):
    import numpy as np
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_kv(path, mapping: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{k} = {_fmt(v)}" for k, v in mapping.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


TRAJECTORY_HEADER = ["t", "s", "v_zz", "v_yy", "v_zy", "z", "y", "q",
                     "xi2", "area", "xi2_db"]


def trajectory_rows(record):
    import numpy as np
    xi2 = record.xi2
    area = record.area
    with_db = np.where(xi2 > 0, 10.0 * np.log10(np.maximum(xi2, 1e-300)), float("nan"))
    s = record.s
    if not hasattr(s, "__len__"):
        s = [s] * len(record.times)
    for i in range(len(record.times)):
        yield [float(record.times[i]), float(s[i]), float(record.v_zz[i]),
               float(record.v_yy[i]), float(record.v_zy[i]), float(record.z[i]),
               float(record.y[i]), float(record.q[i]), float(xi2[i]),
               float(area[i]), float(with_db[i])]


def write_trajectory_csv(path, record):
    write_csv(path, TRAJECTORY_HEADER, trajectory_rows(record))


def write_manifest(path, subcommand, params: dict, numerics: dict, seeds,
                   outputs, wall_time_s: float, argv=None):
    """Everything needed to re-run bit-identically."""
    payload = {
        "tool": "cavsqueeze",
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "subcommand": subcommand,
        "parameters": params,
        "numerics": numerics,
        "seeds": seeds,
        "outputs": [str(o) for o in outputs],
        "wall_time_s": wall_time_s,
        "argv": argv,
        "written_at_unix": int(time.time()),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return payload
