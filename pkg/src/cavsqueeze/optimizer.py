"""Time optimization, detuning/efficiency sweeps and figure data tables.

The optimizer evaluates xi^2(t) on a dense scan grid (default 2000
points) and refines the best cell by golden-section search.  Scans can
be non-convex near regime boundaries, so the grid pass picks the basin
before the local search runs.  All evaluation is deterministic: a given
specification reproduces identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analytic, moments, oat_exact
from .params import EffectiveParams, from_reduced

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TimeOptimum:
    t_opt: float
    xi2_t: float
    area_at_opt: float
    at_edge: bool

    @property
    def xi2_db(self) -> float:
        return 10.0 * math.log10(self.xi2_t)


class MomentsBackend:
    """xi^2(t) from the covariance-sector integration (deterministic)."""

    name = "moments"

    def __init__(self, eff: EffectiveParams, dt: float | None = None):
        self.eff = eff
        self.dt = dt

    def curve(self, t_grid):
        t_max = float(t_grid[-1])
        rec = moments.simulate(self.eff, t_max, dt=self.dt, n_out=len(t_grid))
        return rec.times, rec.xi2, rec.area

    def point(self, t):
        if t <= 0:
            return 1.0, 1.0
        rec = moments.simulate(self.eff, t, dt=self.dt, n_out=2)
        return float(rec.xi2[-1]), float(rec.area[-1])


class OatExactBackend:
    """xi^2(t) from the exact flip-free twisting observables."""

    name = "oat_exact"

    def __init__(self, eff: EffectiveParams, N: int | None = None):
        self.eff = eff
        self.N = int(N if N is not None else eff.N)

    def curve(self, t_grid):
        xi2, area = oat_exact.exact_xi2_curve(np.asarray(t_grid, float), self.eff, self.N)
        return np.asarray(t_grid, float), xi2, area

    def point(self, t):
        m = oat_exact.exact_squeezing(t, self.eff, self.N)
        return m.xi2, m.area


class AnalyticOatBackend:
    """Closed-form twisting xi^2(t): flip-limited or curvature-corrected."""

    name = "analytic_oat"

    def __init__(self, eff: EffectiveParams, N: int | None = None):
        self.eff = eff
        self.N = int(N if N is not None else eff.N)

    def _xi2(self, t):
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            if self.eff.p > 0:
                return analytic.oat_xi2_vs_time(t, self.eff)
            return analytic.oat_p0_xi2(t, self.eff, self.N)

    def curve(self, t_grid):
        t = np.asarray(t_grid, float)
        return t, self._xi2(t), np.full_like(t, np.nan)

    def point(self, t):
        return float(self._xi2(t)), float("nan")


class LinearOatBackend:
    """Closed-form Gaussian covariances at eta = 0 (exact linear solutions)."""

    name = "linear_oat"

    def __init__(self, eff: EffectiveParams):
        if eff.eta != 0:
            raise ValueError("linear solutions require eta = 0")
        self.eff = eff

    def curve(self, t_grid):
        t = np.asarray(t_grid, float)
        sol = oat_exact.linear_solutions(t, self.eff)
        return t, sol.xi2, np.sqrt(np.maximum(sol.A2, 0.0))

    def point(self, t):
        sol = oat_exact.linear_solutions(np.asarray([t]), self.eff)
        return float(sol.xi2[0]), float(math.sqrt(max(sol.A2[0], 0.0)))


def make_backend(name: str, eff: EffectiveParams, **opts):
    table = {"moments": MomentsBackend, "oat_exact": OatExactBackend,
             "analytic_oat": AnalyticOatBackend, "linear_oat": LinearOatBackend}
    if name not in table:
        raise ValueError(f"unknown backend {name!r}; choose from {sorted(table)}")
    return table[name](eff, **opts)


def golden_section(f, a: float, b: float, rel_tol: float = 1e-6, max_iter: int = 80):
    """Deterministic golden-section minimum of f on [a, b]."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if (b - a) <= rel_tol * max(abs(a), abs(b), 1e-300):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def optimize_over_time(backend, window: tuple[float, float], n_scan: int = 2000,
                       refine: bool = True) -> TimeOptimum:
    """Grid scan of xi^2 over the time window, then golden-section refine.

    A minimum at the last grid point is flagged (``at_edge``) and
    returned unrefined: the optimum lies at or beyond the window edge.
    """
    a, b = window
    if not (b > a >= 0):
        raise ValueError("window must satisfy 0 <= a < b")
    t_grid = np.linspace(a, b, n_scan)
    times, xi2, area = backend.curve(t_grid)
    i = int(np.argmin(xi2))
    best = TimeOptimum(float(times[i]), float(xi2[i]), float(area[i]), i in (0, n_scan - 1))
    if best.at_edge or not refine:
        return best
    lo, hi = float(times[i - 1]), float(times[i + 1])
    t_ref, xi2_ref = golden_section(lambda t: backend.point(t)[0], lo, hi)
    if xi2_ref < best.xi2_t:
        xi2_r, area_r = backend.point(t_ref)
        return TimeOptimum(t_ref, xi2_r, area_r, False)
    return best


@dataclass(frozen=True)
class OptCurvePoint:
    parameter: float
    eta: float
    t_opt: float
    s_opt: float
    xi2_t: float
    area_at_opt: float
    at_edge: bool


def sweep_detuning(eff_template: EffectiveParams, d_grid, eta_list,
                   window_s: float = 50.0, n_scan: int = 2000,
                   dt: float | None = None) -> list[OptCurvePoint]:
    """Time-optimized squeezing vs detuning for each efficiency.

    Runs the moments backend at every (d, eta) of the grid; the window
    is s in [0, window_s] in scaled time.
    """
    rows = []
    for eta in eta_list:
        for d in d_grid:
            eff = from_reduced(eff_template.N, eff_template.C, eff_template.gamma_sc,
                               eff_template.p, d, eta)
            t_max = eff.time_from_scaled(window_s)
            opt = optimize_over_time(MomentsBackend(eff, dt=dt), (0.0, t_max), n_scan)
            rows.append(OptCurvePoint(parameter=d, eta=eta, t_opt=opt.t_opt,
                                      s_opt=float(eff.scaled_time(opt.t_opt)),
                                      xi2_t=opt.xi2_t, area_at_opt=opt.area_at_opt,
                                      at_edge=opt.at_edge))
    return rows


def parametric_area_curve(backend, t_grid, marker_spacing_s: float | None = 0.2,
                          eff: EffectiveParams | None = None):
    """(xi^2, A) along a trajectory, with markers equally spaced in s.

    Returns (times, xi2, area, marker) arrays; ``marker`` flags the
    points closest to multiples of ``marker_spacing_s`` in scaled time.
    """
    times, xi2, area = backend.curve(np.asarray(t_grid, float))
    marker = np.zeros(len(times), dtype=bool)
    eff = eff if eff is not None else getattr(backend, "eff", None)
    if marker_spacing_s and eff is not None and eff.gamma_sc > 0:
        s = np.asarray(eff.scaled_time(times))
        n_marks = int(math.floor(s[-1] / marker_spacing_s))
        for k in range(1, n_marks + 1):
            marker[int(np.argmin(np.abs(s - k * marker_spacing_s)))] = True
    return times, xi2, area, marker


def regime_map(N: float, C: float, eta_grid, p_grid) -> list[dict]:
    """Tabulated analytic predictions and classifier verdicts."""
    rows = []
    for eta in eta_grid:
        for p in p_grid:
            rep = analytic.classify(N, C, eta, p)
            row = {"N": N, "C": C, "eta": eta, "p": p}
            row.update(rep.as_dict())
            rows.append(row)
    return rows
