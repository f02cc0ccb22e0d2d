"""Large-N Gaussian sector: covariance ODEs, conditional-mean SDEs, metrics.

Covariances (v_zz, v_zy, v_yy) are normalized to the spin projection
noise N/4 and evolve deterministically; the measurement record only
drives the small mean deflections (z, y).  The squeezing parameter is
xi^2 = e^(gamma_sc t) v_min and the state area A = e^(gamma_sc t)
sqrt(v_min v_max), with v_min/v_max the eigenvalues of the 2x2
transverse covariance matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import kernels
from .errors import StepSizeError
from .kernels import pure as _pure
from .params import EffectiveParams

DT_FACTOR = 0.01          # fraction of the fastest rate resolved per step
MAX_STEPS = 60_000_000    # clamp on pathological dt requests


@dataclass(frozen=True)
class MomentState:
    t: float
    v_zz: float
    v_yy: float
    v_zy: float
    z: float = 0.0
    y: float = 0.0
    q: float = 0.0
    contrast: float = 1.0

    def covariance_matrix(self) -> np.ndarray:
        return np.array([[self.v_zz, self.v_zy], [self.v_zy, self.v_yy]])


def initial_state() -> MomentState:
    """Coherent state polarized along x: unit transverse variances."""
    return MomentState(t=0.0, v_zz=1.0, v_yy=1.0, v_zy=0.0)


@dataclass(frozen=True)
class SqueezingMetrics:
    v_min: float
    v_max: float
    xi2: float
    area: float

    @property
    def xi2_db(self) -> float:
        return 10.0 * math.log10(self.xi2)


def _eigen_range(v_zz, v_yy, v_zy):
    """Eigenvalues of the 2x2 covariance matrix; v_min via det/v_max."""
    mean = 0.5 * (v_zz + v_yy)
    root = np.sqrt(0.25 * (v_zz - v_yy) ** 2 + v_zy**2)
    v_max = mean + root
    det = v_zz * v_yy - v_zy**2
    return det / v_max, v_max


def metrics(state: MomentState, eff: EffectiveParams) -> SqueezingMetrics:
    v_min, v_max = _eigen_range(state.v_zz, state.v_yy, state.v_zy)
    growth = math.exp(eff.gamma_sc * state.t)
    return SqueezingMetrics(v_min=v_min, v_max=v_max,
                            xi2=growth * v_min,
                            area=growth * math.sqrt(v_min * v_max))


def default_dt(eff: EffectiveParams, t_max: float) -> float:
    """Step resolving the fastest rate: min(0.01/rates, t_max/1e4), clamped."""
    rate = eff.GetaN + eff.GammaN + abs(eff.chiN) + eff.gamma_sc
    dt = t_max / 1e4
    if rate > 0:
        dt = min(DT_FACTOR / rate, dt)
    return max(dt, t_max / MAX_STEPS)


def step_covariances(state: MomentState, eff: EffectiveParams, dt: float) -> MomentState:
    """Advance (v_zz, v_zy, v_yy) and t by one deterministic step."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    cov = _pure.advance_covariances(state.t, state.v_zz, state.v_zy, state.v_yy,
                                    dt, eff.gamma_sc, eff.p, eff.chiN,
                                    eff.GammaN, eff.GetaN)
    if cov is None:
        raise StepSizeError("covariance step lost positivity; reduce dt", t=state.t + dt)
    t_new = state.t + dt
    return MomentState(t=t_new, v_zz=cov[0], v_zy=cov[1], v_yy=cov[2],
                       z=state.z, y=state.y, q=state.q,
                       contrast=math.exp(-0.5 * eff.gamma_sc * t_new))


def step_means(state: MomentState, eff: EffectiveParams, dt: float, dW: float) -> MomentState:
    """Euler-Maruyama update of (z, y, q) with coefficients at step start.

    Leaves t and the covariances untouched; pair with step_covariances
    applied afterwards to advance the full state over one interval.
    """
    amp = math.sqrt(eff.GetaN)
    decay = math.exp(-0.5 * eff.gamma_sc * state.t)
    dq = amp * state.z * dt + dW
    z = state.z + (-eff.gamma_sc * eff.p * state.z) * dt + amp * state.v_zz * dW
    y = state.y + (eff.chiN * decay * state.z - 0.5 * eff.gamma_sc * state.y) * dt \
        + amp * state.v_zy * dW
    if not (math.isfinite(z) and math.isfinite(y)):
        raise StepSizeError("mean deflection overflowed", t=state.t)
    return MomentState(t=state.t, v_zz=state.v_zz, v_yy=state.v_yy, v_zy=state.v_zy,
                       z=z, y=y, q=state.q + dq, contrast=state.contrast)


@dataclass
class TrajectoryRecord:
    """Trajectory sampled on a uniform output grid.

    dW/dq hold the per-output-interval increment sums; at stride 1 they
    are the raw per-step increments and satisfy
    dq_k = sqrt(Gamma N eta) z_k dt + dW_k exactly as generated.
    """

    eff: EffectiveParams
    seed: object
    dt: float
    stride: int
    times: np.ndarray
    v_zz: np.ndarray
    v_yy: np.ndarray
    v_zy: np.ndarray
    z: np.ndarray
    y: np.ndarray
    q: np.ndarray
    dW: np.ndarray | None
    dq: np.ndarray | None
    _xi2: np.ndarray | None = field(default=None, repr=False)
    _area: np.ndarray | None = field(default=None, repr=False)

    @property
    def s(self) -> np.ndarray:
        return self.eff.scaled_time(self.times)

    @property
    def contrast(self) -> np.ndarray:
        return np.exp(-0.5 * self.eff.gamma_sc * self.times)

    def _metrics(self):
        if self._xi2 is None:
            v_min, v_max = _eigen_range(self.v_zz, self.v_yy, self.v_zy)
            growth = np.exp(self.eff.gamma_sc * self.times)
            self._xi2 = growth * v_min
            self._area = growth * np.sqrt(v_min * v_max)
        return self._xi2, self._area

    @property
    def xi2(self) -> np.ndarray:
        return self._metrics()[0]

    @property
    def area(self) -> np.ndarray:
        return self._metrics()[1]

    def state(self, i: int) -> MomentState:
        return MomentState(t=float(self.times[i]), v_zz=float(self.v_zz[i]),
                           v_yy=float(self.v_yy[i]), v_zy=float(self.v_zy[i]),
                           z=float(self.z[i]), y=float(self.y[i]), q=float(self.q[i]),
                           contrast=float(self.contrast[i]))

    @property
    def states(self) -> list[MomentState]:
        return [self.state(i) for i in range(len(self.times))]

    def min_xi2(self) -> tuple[float, float]:
        """(t_opt, xi2) over the recorded grid."""
        i = int(np.argmin(self.xi2))
        return float(self.times[i]), float(self.xi2[i])


def _grid(t_max: float, dt: float | None, n_out: int | None, eff: EffectiveParams):
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    dt_eff = dt if dt is not None else default_dt(eff, t_max)
    if dt_eff <= 0:
        raise ValueError("dt must be positive")
    base_steps = max(1, math.ceil(t_max / dt_eff - 1e-12))
    if n_out is None:
        stride = 1
        n_steps = base_steps
    else:
        if n_out < 2:
            raise ValueError("n_out must be at least 2")
        intervals = n_out - 1
        stride = max(1, math.ceil(base_steps / intervals))
        n_steps = stride * intervals
    if n_steps > MAX_STEPS:
        raise ValueError(f"requested {n_steps} steps exceeds MAX_STEPS={MAX_STEPS}; "
                         "increase dt or reduce t_max")
    return t_max / n_steps, n_steps, stride


def simulate(eff: EffectiveParams, t_max: float, dt: float | None = None,
             seed=None, n_out: int | None = 2001, backend=None) -> TrajectoryRecord:
    """Integrate one trajectory up to t_max on a uniform output grid.

    With seed=None only the deterministic covariance sector is evolved
    (z = y = q = 0).  n_out=None records every integration step.
    """
    dt_run, n_steps, stride = _grid(t_max, dt, n_out, eff)
    n_rec = n_steps // stride + 1

    if seed is None:
        dW = np.empty(0)
        rng_seed = None
    else:
        rng = np.random.default_rng(seed)
        dW = rng.normal(0.0, math.sqrt(dt_run), n_steps)
        rng_seed = seed

    t_out = np.empty(n_rec)
    vzz = np.empty(n_rec)
    vzy = np.empty(n_rec)
    vyy = np.empty(n_rec)
    z = np.zeros(n_rec)
    y = np.zeros(n_rec)
    q = np.zeros(n_rec)
    dw_out = np.zeros(n_rec - 1) if seed is not None else None
    dq_out = np.zeros(n_rec - 1) if seed is not None else None

    kern = kernels.get(backend)
    status = kern.moment_trajectory(
        eff.gamma_sc, eff.p, eff.chiN, eff.GammaN, eff.eta,
        dt_run, n_steps, stride, dW,
        t_out, vzz, vzy, vyy, z, y, q,
        dw_out if dw_out is not None else np.empty(0),
        dq_out if dq_out is not None else np.empty(0))
    if status:
        raise StepSizeError("covariance step lost positivity; reduce dt", t=status * dt_run)

    return TrajectoryRecord(eff=eff, seed=rng_seed, dt=dt_run, stride=stride,
                            times=t_out, v_zz=vzz, v_yy=vyy, v_zy=vzy,
                            z=z, y=y, q=q, dW=dw_out, dq=dq_out)


def trajectory_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Stream for ensemble member ``index``; independent of scheduling."""
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))


@dataclass
class MomentEnsemble:
    eff: EffectiveParams
    master_seed: int
    n_traj: int
    times: np.ndarray
    z_mean: np.ndarray
    z_std: np.ndarray
    y_mean: np.ndarray
    y_std: np.ndarray
    q_mean: np.ndarray
    q_std: np.ndarray
    xi2: np.ndarray
    area: np.ndarray

    @property
    def s(self) -> np.ndarray:
        return self.eff.scaled_time(self.times)


def ensemble(eff: EffectiveParams, t_max: float, n_traj: int, master_seed: int = 0,
             dt: float | None = None, n_out: int = 501, threads: int = 1) -> MomentEnsemble:
    """Mean/std of the conditional means over n_traj independent records.

    Covariances (hence xi^2 and A) are record-independent and shared.
    Results are bitwise independent of ``threads``.
    """
    if n_traj < 2:
        raise ValueError("n_traj must be at least 2")

    def run(i):
        return simulate(eff, t_max, dt=dt, seed=trajectory_seed(master_seed, i), n_out=n_out)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(run, range(n_traj)))
    else:
        records = [run(i) for i in range(n_traj)]

    zs = np.stack([r.z for r in records])
    ys = np.stack([r.y for r in records])
    qs = np.stack([r.q for r in records])
    ref = records[0]
    return MomentEnsemble(eff=eff, master_seed=master_seed, n_traj=n_traj,
                          times=ref.times,
                          z_mean=zs.mean(axis=0), z_std=zs.std(axis=0, ddof=1),
                          y_mean=ys.mean(axis=0), y_std=ys.std(axis=0, ddof=1),
                          q_mean=qs.mean(axis=0), q_std=qs.std(axis=0, ddof=1),
                          xi2=ref.xi2, area=ref.area)


def qnd_record_estimator(record: TrajectoryRecord, eff: EffectiveParams) -> np.ndarray:
    """Reconstruct the z deflection from the measurement record alone.

    Valid for d = 0 runs (chi = 0): the optimal filter weights the record
    with a cosh kernel whose memory time is tau = 1/sqrt(2 gamma_sc p
    Gamma N eta); for p = 0 it degrades to the time-averaged record.
    The estimate is exact in the regime where the variance follows the
    coth law (Gamma N eta >> gamma_sc p).
    """
    if eff.chi != 0:
        raise ValueError("record estimator is only derived for d = 0 (chi = 0) runs")
    if record.dq is None:
        raise ValueError("record carries no measurement increments (deterministic run)")
    G = eff.GetaN
    if G <= 0:
        raise ValueError("Gamma*N*eta must be positive for an estimator")
    times = record.times
    dq = record.dq
    n = len(times)
    est = np.zeros(n)
    if eff.p == 0:
        csum = np.concatenate([[0.0], np.cumsum(dq)])
        return math.sqrt(G) / (1.0 + G * times) * csum
    eps = math.sqrt(2.0 * eff.gamma_sc * eff.p / G)
    theta = eps * (G * times + 1.0)
    amp = math.sqrt(2.0 * eff.gamma_sc * eff.p)
    # z_j = amp * sum_{k<j} cosh(theta_k) dq_k / sinh(theta_j), computed via a
    # rescaled running sum so large theta never overflows
    run = 0.0
    for j in range(1, n):
        run = math.exp(theta[j - 1] - theta[j]) * (
            run + 0.5 * (1.0 + math.exp(-2.0 * theta[j - 1])) * dq[j - 1])
        est[j] = 2.0 * amp * run / (1.0 - math.exp(-2.0 * theta[j]))
    return est


def coth_law(times, eff: EffectiveParams):
    """Variance solution for d=0 with flips: eps*coth((G t + 1)/(G tau)).

    G = Gamma N eta, eps = sqrt(2 gamma_sc p / G) and the memory time
    satisfies G*tau = 1/eps.  For p = 0 this reduces to 1/(1 + G t).
    """
    times = np.asarray(times, dtype=float)
    G = eff.GetaN
    if eff.p == 0:
        return 1.0 / (1.0 + G * times)
    eps = math.sqrt(2.0 * eff.gamma_sc * eff.p / G)
    return eps / np.tanh(eps * (G * times + 1.0))
