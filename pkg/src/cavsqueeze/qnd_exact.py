"""Exact conditional dynamics for pure measurement without spin flips.

The conditional state reduces to a Gaussian envelope over the S_z
eigenvalues with a deterministic inverse-width w(t) = 1/N + Gamma eta t
and a single stochastic center n*.  Observables are truncated Gaussian
sums over the eigenvalue ladder (spacing 1, clipped to |m| <= N/2);
ensembles over measurement records give the averaged squeezing curve,
with individual trajectories reaching better values when the center
locks onto a single eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import kernels
from .errors import StepSizeError
from .kernels import pure as _pure
from .moments import trajectory_seed
from .params import EffectiveParams

TRUNC_MIN = 10.0
TRUNC_SIGMAS = 8.0
DT_FACTOR = 5e-3


@dataclass(frozen=True)
class QndExactState:
    t: float
    n_star: float
    width: float        # w(t) = 1/N + Gamma eta t
    norm: float         # Gaussian-sum normalization
    Sx: float
    Sz: float
    Sz2: float

    @property
    def var_z(self) -> float:
        return self.Sz2 - self.Sz**2


def _check_qnd(eff: EffectiveParams):
    if eff.chi != 0:
        raise ValueError("exact measurement solution requires chi = 0 (d = 0)")
    if eff.p != 0:
        raise ValueError("exact measurement solution requires p = 0")
    if eff.Gamma * eff.eta < 0:
        raise ValueError("Gamma*eta must be >= 0")


def observables_at(n_star: float, t: float, eff: EffectiveParams, N: int,
                   trunc_min: float = TRUNC_MIN,
                   trunc_sigmas: float = TRUNC_SIGMAS) -> tuple[float, float, float, float]:
    """(norm, Sx, Sz, Sz2) from the truncated eigenvalue sums."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if t < 0:
        raise ValueError("t must be >= 0")
    width = 1.0 / N + eff.Gamma * eff.eta * t
    sums = _pure.window_sums(n_star, width, N, trunc_min, trunc_sigmas)
    if sums is None:
        raise ValueError(f"truncation window contains no eigenvalue (n* = {n_star})")
    s0, s1, s2 = sums
    sz = s1 / s0 + n_star
    sz2 = (s2 + 2.0 * n_star * s1 + n_star**2 * s0) / s0
    sx = (0.5 * N * math.exp(-0.5 * (eff.Gamma + eff.gamma_sc) * t)
          * _pure.sx_window_sum(n_star, width, N, trunc_min, trunc_sigmas) / s0)
    return s0, sx, sz, sz2


def state_at(n_star: float, t: float, eff: EffectiveParams, N: int) -> QndExactState:
    norm, sx, sz, sz2 = observables_at(n_star, t, eff, N)
    return QndExactState(t=t, n_star=n_star, width=1.0 / N + eff.Gamma * eff.eta * t,
                         norm=norm, Sx=sx, Sz=sz, Sz2=sz2)


def step_n_star(state: QndExactState, eff: EffectiveParams, N: int,
                dt: float, dW: float) -> QndExactState:
    """One Ito step of the estimator center."""
    Ge = eff.Gamma * eff.eta
    sums = _pure.window_sums(state.n_star, state.width, N, TRUNC_MIN, TRUNC_SIGMAS)
    if sums is None:
        raise StepSizeError("truncation window collapsed", t=state.t)
    s0, s1, _ = sums
    drift = (Ge / state.width) * (s1 / s0)
    diffusion = math.sqrt(Ge) / (2.0 * state.width)
    n_new = state.n_star + drift * dt + diffusion * dW
    if not math.isfinite(n_new):
        raise StepSizeError("estimator center overflowed", t=state.t)
    return state_at(n_new, state.t + dt, eff, N)


def default_dt(eff: EffectiveParams, N: int, t_max: float) -> float:
    """Resolve the conditional-narrowing rate Gamma*eta*N."""
    rate = eff.Gamma * eff.eta * N + eff.Gamma + eff.gamma_sc
    dt = t_max / 2000.0
    if rate > 0:
        dt = min(DT_FACTOR / rate, dt)
    return dt


@dataclass
class QndTrajectory:
    eff: EffectiveParams
    N: int
    seed: object
    dt: float
    times: np.ndarray
    n_star: np.ndarray
    q: np.ndarray
    norm: np.ndarray
    Sx: np.ndarray
    Sz: np.ndarray
    Sz2: np.ndarray

    @property
    def var_z(self) -> np.ndarray:
        return self.Sz2 - self.Sz**2

    @property
    def xi2(self) -> np.ndarray:
        return self.N * self.var_z / self.Sx**2

    @property
    def contrast(self) -> np.ndarray:
        return 2.0 * self.Sx / self.N

    @property
    def v_zz_cond(self) -> np.ndarray:
        return 4.0 * self.var_z / self.N

    @property
    def area_proxy(self) -> np.ndarray:
        """Area with the record-independent backaction model for Var(S_y).

        The reduced solution does not track S_y^2; the deterministic
        growth (N/4)(1 + Gamma N t e^(-gamma_sc t)) stands in for it.
        """
        var_y = 0.25 * self.N * (1.0 + self.eff.GammaN * self.times
                                 * np.exp(-self.eff.gamma_sc * self.times))
        return self.N * np.sqrt(np.maximum(self.var_z, 0.0) * var_y) / self.Sx**2

    @property
    def s(self) -> np.ndarray:
        return self.eff.scaled_time(self.times)


def simulate_trajectory(eff: EffectiveParams, N: int, t_max: float,
                        dt: float | None = None, seed=0,
                        n_out: int = 501, backend=None) -> QndTrajectory:
    """One conditional trajectory of the estimator center n*."""
    _check_qnd(eff)
    if N < 2:
        raise ValueError("N must be >= 2")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    dt_eff = dt if dt is not None else default_dt(eff, N, t_max)
    base_steps = max(1, math.ceil(t_max / dt_eff - 1e-12))
    intervals = n_out - 1
    stride = max(1, math.ceil(base_steps / intervals))
    n_steps = stride * intervals
    dt_run = t_max / n_steps

    rng = np.random.default_rng(seed)
    dW = rng.normal(0.0, math.sqrt(dt_run), n_steps)

    n_rec = intervals + 1
    t_out = np.empty(n_rec)
    nstar = np.empty(n_rec)
    q = np.empty(n_rec)
    norm = np.empty(n_rec)
    sx = np.empty(n_rec)
    sz = np.empty(n_rec)
    sz2 = np.empty(n_rec)

    kern = kernels.get(backend)
    status = kern.qnd_nstar_trajectory(float(N), eff.Gamma, eff.eta, eff.gamma_sc,
                                       dt_run, n_steps, stride, dW,
                                       TRUNC_MIN, TRUNC_SIGMAS,
                                       t_out, nstar, q, norm, sx, sz, sz2)
    if status:
        raise StepSizeError("truncation window collapsed", t=status * dt_run)
    return QndTrajectory(eff=eff, N=N, seed=seed, dt=dt_run, times=t_out,
                         n_star=nstar, q=q, norm=norm, Sx=sx, Sz=sz, Sz2=sz2)


@dataclass
class QndEnsemble:
    eff: EffectiveParams
    N: int
    n_traj: int
    master_seed: int
    times: np.ndarray
    xi2_mean: np.ndarray
    xi2_std: np.ndarray
    xi2_p10: np.ndarray
    xi2_p90: np.ndarray
    sz_mean: np.ndarray
    sz_std: np.ndarray

    @property
    def s(self) -> np.ndarray:
        return self.eff.scaled_time(self.times)

    def min_mean_xi2(self) -> tuple[float, float]:
        i = int(np.argmin(self.xi2_mean))
        return float(self.times[i]), float(self.xi2_mean[i])


def ensemble(eff: EffectiveParams, N: int, n_traj: int, t_max: float,
             dt: float | None = None, master_seed: int = 0,
             n_out: int = 501, threads: int = 1) -> QndEnsemble:
    """Mean, std and 10-90 percentile band of xi^2 over trajectories."""
    if n_traj < 2:
        raise ValueError("n_traj must be at least 2")

    def run(i):
        return simulate_trajectory(eff, N, t_max, dt=dt,
                                   seed=trajectory_seed(master_seed, i), n_out=n_out)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trajs = list(pool.map(run, range(n_traj)))
    else:
        trajs = [run(i) for i in range(n_traj)]

    xi2 = np.stack([tr.xi2 for tr in trajs])
    sz = np.stack([tr.Sz for tr in trajs])
    return QndEnsemble(eff=eff, N=N, n_traj=n_traj, master_seed=master_seed,
                       times=trajs[0].times,
                       xi2_mean=xi2.mean(axis=0), xi2_std=xi2.std(axis=0, ddof=1),
                       xi2_p10=np.percentile(xi2, 10, axis=0),
                       xi2_p90=np.percentile(xi2, 90, axis=0),
                       sz_mean=sz.mean(axis=0), sz_std=sz.std(axis=0, ddof=1))


def gaussian_model_xi2(times, eff: EffectiveParams, N: int):
    """Averaged-squeezing model: e^((Gamma+gamma_sc) t) / (1 + Gamma N eta t)."""
    times = np.asarray(times, dtype=float)
    return np.exp((eff.Gamma + eff.gamma_sc) * times) / (1.0 + eff.GetaN * times)
