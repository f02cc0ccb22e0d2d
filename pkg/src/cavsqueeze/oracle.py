"""Brute-force density-matrix evolution on the full 2^N space (N <= 8).

Ground truth for every other module at desk scale.  The deterministic
generator is applied with structure-aware numpy operations: S_z-type
terms are elementwise masks in the computational basis, single-particle
dephasing collapses to one precomputed correlation mask, and the
spin-flip channels are bit-flip gathers.  Per-atom Lindblad terms are
therefore exact with no permutation-symmetry assumptions.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import kernels
from .errors import StepSizeError
from .moments import _eigen_range, trajectory_seed
from .params import EffectiveParams

_SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2.0
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2.0
_SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2.0
_ID = np.eye(2, dtype=complex)

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = -1e-8


@dataclass(frozen=True)
class OperatorSet:
    N: int
    dim: int
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    sz2: np.ndarray
    s2: np.ndarray                    # S.S
    sigma_plus: tuple[np.ndarray, ...]
    sigma_minus: tuple[np.ndarray, ...]
    sigma_z: tuple[np.ndarray, ...]
    z_diag: np.ndarray                # S_z eigenvalue per basis state
    dephase_mask: np.ndarray          # sum_k s_k s_k^T with s_k = diag(sigma_z^k)
    flip_perms: tuple[np.ndarray, ...]
    flip_masks: tuple[np.ndarray, ...]
    flip_idx_flat: np.ndarray         # (N, dim*dim) gather indices, all atoms
    flip_masks_flat: np.ndarray       # (N, dim*dim) matching masks


def _kron_chain(ops) -> np.ndarray:
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def _site_operator(N: int, k: int, op: np.ndarray) -> np.ndarray:
    return _kron_chain([op if j == k else _ID for j in range(N)])


def build_operators(N: int) -> OperatorSet:
    """Tensor-product operator set with commutation checks."""
    if not (2 <= N <= 8):
        raise ValueError("oracle supports 2 <= N <= 8")
    dim = 2**N
    sp_single = np.array([[0, 1], [0, 0]], dtype=complex)   # |0><1|: flips bit to 0
    sigma_plus = tuple(_site_operator(N, k, sp_single) for k in range(N))
    sigma_minus = tuple(m.conj().T for m in sigma_plus)
    sigma_z = tuple(_site_operator(N, k, 2.0 * _SZ) for k in range(N))
    sx = sum(_site_operator(N, k, _SX) for k in range(N))
    sy = sum(_site_operator(N, k, _SY) for k in range(N))
    sz = sum(_site_operator(N, k, _SZ) for k in range(N))

    comm = sx @ sy - sy @ sx - 1j * sz
    if np.max(np.abs(comm)) > 1e-12 * N:
        raise AssertionError("collective operators violate [S_x, S_y] = i S_z")

    z_diag = np.real(np.diag(sz)).copy()
    spins = np.stack([np.real(np.diag(m)) for m in sigma_z])     # (N, dim) of +-1
    dephase_mask = spins.T @ spins                                # sum_k s_k s_k^T

    flip_perms = []
    flip_masks = []
    idx = np.arange(dim)
    for k in range(N):
        bit = 1 << (N - 1 - k)      # kron ordering: atom 0 is the leading factor
        perm = idx ^ bit
        bits = (idx & bit) != 0
        flip_perms.append(perm)
        flip_masks.append((bits[:, None] == bits[None, :]).astype(float))
        # convention check: sigma_z^k diagonal must match the bit pattern
        assert np.allclose(spins[k], np.where(bits, -1.0, 1.0))

    s2 = sx @ sx + sy @ sy + sz @ sz
    flip_idx_flat = np.stack([(p[:, None] * dim + p[None, :]).ravel() for p in flip_perms])
    flip_masks_flat = np.stack([m.ravel() for m in flip_masks])
    return OperatorSet(N=N, dim=dim, sx=sx, sy=sy, sz=sz, sz2=sz @ sz, s2=s2,
                       sigma_plus=sigma_plus, sigma_minus=sigma_minus,
                       sigma_z=sigma_z, z_diag=z_diag, dephase_mask=dephase_mask,
                       flip_perms=tuple(flip_perms), flip_masks=tuple(flip_masks),
                       flip_idx_flat=flip_idx_flat, flip_masks_flat=flip_masks_flat)


def coherent_x_state(ops: OperatorSet) -> np.ndarray:
    """All atoms in (|up> + |down>)/sqrt(2): the standard initial state."""
    psi = np.full(ops.dim, 1.0 / math.sqrt(ops.dim), dtype=complex)
    return np.outer(psi, psi.conj())


class _Generator:
    """Precomputed elementwise pieces of the deterministic generator."""

    def __init__(self, eff: EffectiveParams, ops: OperatorSet):
        self.eff = eff
        self.ops = ops
        zi = ops.z_diag[:, None]
        zj = ops.z_diag[None, :]
        self.zsum = zi + zj
        # -i chi [S_z^2, rho] + Gamma D[S_z] + (gamma/2)(1-p)/2 sum_k D[sigma_z^k]
        self.static = (-1j * eff.chi * (zi**2 - zj**2)
                       - 0.5 * eff.Gamma * (zi - zj) ** 2
                       + 0.25 * eff.gamma_sc * (1.0 - eff.p)
                       * (ops.dephase_mask - ops.N))
        self.flip_rate = 0.5 * eff.gamma_sc * eff.p

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = self.static * rho
        if self.flip_rate:
            out += self.flip_rate * (_flip_sum(rho, self.ops) - self.ops.N * rho)
        return out


def _flip_sum(rho: np.ndarray, ops: OperatorSet) -> np.ndarray:
    """sum_k (sigma+_k rho sigma-_k + sigma-_k rho sigma+_k) via gathers."""
    gathered = rho.ravel()[ops.flip_idx_flat]
    return (ops.flip_masks_flat * gathered).sum(axis=0).reshape(rho.shape)


def lindblad_rhs(rho: np.ndarray, eff: EffectiveParams, ops: OperatorSet) -> np.ndarray:
    """Deterministic part of the evolution (record-averaged)."""
    return _Generator(eff, ops).apply(rho)


def _check_state(rho: np.ndarray, t: float, positivity: bool = True):
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITICITY_TOL:
        raise StepSizeError(f"hermiticity violated ({herm:.2e})", t=t)
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise StepSizeError(f"trace drift ({abs(tr - 1.0):.2e})", t=t)
    if positivity:
        lo = float(np.linalg.eigvalsh(rho)[0])
        if lo < POSITIVITY_TOL:
            raise StepSizeError(f"negative eigenvalue ({lo:.2e})", t=t)


def default_dt_master(eff: EffectiveParams, ops: OperatorSet) -> float:
    rate = (abs(eff.chi) + eff.Gamma + eff.gamma_sc) * ops.N
    return 0.01 / rate if rate > 0 else math.inf


def default_dt_sme(eff: EffectiveParams, ops: OperatorSet) -> float:
    N = ops.N
    rate = eff.GetaN + eff.GammaN + abs(eff.chiN) + eff.gamma_sc * N
    return 1e-3 / rate if rate > 0 else math.inf


@dataclass
class EvolutionSeries:
    eff: EffectiveParams
    times: np.ndarray
    rhos: list[np.ndarray]
    seed: object = None
    dW: np.ndarray | None = None
    dq: np.ndarray | None = None


def _grid(t_max: float, dt: float, n_out: int):
    base = max(1, math.ceil(t_max / dt - 1e-12))
    intervals = max(1, n_out - 1)
    stride = max(1, math.ceil(base / intervals))
    n_steps = stride * intervals
    return t_max / n_steps, n_steps, stride


def evolve_master(rho0: np.ndarray, eff: EffectiveParams, ops: OperatorSet,
                  t_max: float, dt: float | None = None, n_out: int = 201,
                  check: bool = True) -> EvolutionSeries:
    """Record-averaged evolution by classical 4th-order steps."""
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    dt_eff = dt if dt is not None else min(default_dt_master(eff, ops), t_max / 100)
    dt_run, n_steps, stride = _grid(t_max, dt_eff, n_out)
    gen = _Generator(eff, ops)
    rho = rho0.astype(complex).copy()
    if check:
        _check_state(rho, 0.0)
    times = [0.0]
    rhos = [rho.copy()]
    t = 0.0
    for k in range(n_steps):
        k1 = gen.apply(rho)
        k2 = gen.apply(rho + 0.5 * dt_run * k1)
        k3 = gen.apply(rho + 0.5 * dt_run * k2)
        k4 = gen.apply(rho + dt_run * k3)
        rho = rho + (dt_run / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += dt_run
        if (k + 1) % stride == 0:
            if check:
                _check_state(rho, t)
            times.append(t)
            rhos.append(rho.copy())
    return EvolutionSeries(eff=eff, times=np.array(times), rhos=rhos)


def _sme_static(eff: EffectiveParams, ops: OperatorSet):
    """(half_rates, jump_static, amp, flip_coef) of the Kraus step."""
    zd = ops.z_diag
    N, g, p = ops.N, eff.gamma_sc, eff.p
    # 1/2 sum_j L_j^dag L_j is diagonal: Gamma S_z^2/2 plus constants from
    # the single-particle channels
    half_rates = 0.5 * eff.Gamma * zd**2 + 0.5 * (0.25 * g * (1.0 - p) * N
                                                  + 0.5 * g * p * N)
    zz = zd[:, None] * zd[None, :]
    jump_static = (eff.Gamma * (1.0 - eff.eta) * zz
                   + 0.25 * g * (1.0 - p) * ops.dephase_mask)
    return half_rates, jump_static, math.sqrt(eff.Gamma * eff.eta), 0.5 * g * p


def evolve_sme(rho0: np.ndarray, eff: EffectiveParams, ops: OperatorSet,
               t_max: float, dt: float | None = None, seed=0, n_out: int = 201,
               check: bool = True, backend=None) -> EvolutionSeries:
    """Conditional evolution under continuous S_z monitoring.

    One step applies the Kraus factorization of the innovation update
    driven by the record increment dq = 2 sqrt(Gamma eta) <S_z> dt + dW:
    rho' = K rho K^dag + (unmonitored jump channels) dt, then trace
    renormalization, with the diagonal no-jump operator
    K = 1 - (i chi S_z^2 + half the total jump rates) dt
        + sqrt(Gamma eta) S_z dq + Gamma eta S_z^2 (dq^2 - dt)/2.
    This matches the normalized innovation form of the dynamics to the
    same order in dt (its per-step conditional mean reproduces the
    record-averaged generator to O(dt^2)) while keeping rho positive
    semidefinite at every step, which a bare Euler step does not: Euler
    negative-eigenvalue excursions scale like dt and sit far above the
    positivity tolerance.  Pre-normalization trace drift per step is
    O(sqrt(dt)); renormalization absorbs it.
    """
    if eff.eta <= 0:
        raise ValueError("evolve_sme requires eta > 0 (use evolve_master otherwise)")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    dt_eff = dt if dt is not None else min(default_dt_sme(eff, ops), t_max / 100)
    dt_run, n_steps, stride = _grid(t_max, dt_eff, n_out)
    half_rates, jump_static, amp, flip_coef = _sme_static(eff, ops)

    rng = np.random.default_rng(seed)
    dW = rng.normal(0.0, math.sqrt(dt_run), n_steps)

    rho = rho0.astype(complex).copy()
    if check:
        _check_state(rho, 0.0)
    n_rec = n_steps // stride + 1
    rho_out = np.empty((n_rec, ops.dim, ops.dim), dtype=complex)
    dq_out = np.empty(n_rec - 1)
    dw_out = np.empty(n_rec - 1)
    kern = kernels.get(backend)
    kern.oracle_sme_trajectory(ops.z_diag, half_rates, jump_static,
                               np.stack(ops.flip_perms).astype(np.int64),
                               np.stack(ops.flip_masks),
                               eff.chi, amp, flip_coef,
                               dt_run, n_steps, stride, dW,
                               rho, rho_out, dq_out, dw_out)
    times = dt_run * stride * np.arange(n_rec)
    rhos = [rho_out[j].copy() for j in range(n_rec)]
    if check:
        for t, r in zip(times[1:], rhos[1:]):
            _check_state(r, float(t))
    return EvolutionSeries(eff=eff, times=times, rhos=rhos, seed=seed,
                           dW=dw_out, dq=dq_out)


def sme_ensemble_mean(rho0, eff, ops, t_max, n_traj, master_seed=0,
                      dt=None, n_out=21, threads=1, backend=None):
    """Mean and elementwise std of the conditional state over records.

    Trajectory i uses the stream trajectory_seed(master_seed, i);
    accumulation is in index order, so results are bitwise independent
    of ``threads``.  The std arrays are complex with the real
    (imaginary) part holding the spread of the real (imaginary)
    components.
    """
    if eff.eta <= 0:
        raise ValueError("requires eta > 0")
    if n_traj < 2:
        raise ValueError("n_traj must be at least 2")
    dt_eff = dt if dt is not None else min(default_dt_sme(eff, ops), t_max / 100)
    dt_run, n_steps, stride = _grid(t_max, dt_eff, n_out)
    half_rates, jump_static, amp, flip_coef = _sme_static(eff, ops)
    perms = np.stack(ops.flip_perms).astype(np.int64)
    masks = np.stack(ops.flip_masks)
    kern = kernels.get(backend)
    n_rec = n_steps // stride + 1

    def run(i):
        rng = np.random.default_rng(trajectory_seed(master_seed, i))
        dW = rng.normal(0.0, math.sqrt(dt_run), n_steps)
        rho = rho0.astype(complex).copy()
        rho_out = np.empty((n_rec, ops.dim, ops.dim), dtype=complex)
        scratch = np.empty(n_rec - 1)
        kern.oracle_sme_trajectory(ops.z_diag, half_rates, jump_static,
                                   perms, masks, eff.chi, amp, flip_coef,
                                   dt_run, n_steps, stride, dW,
                                   rho, rho_out, scratch, scratch.copy())
        return rho_out

    sum_rho = np.zeros((n_rec, ops.dim, ops.dim), dtype=complex)
    sum_re2 = np.zeros((n_rec, ops.dim, ops.dim))
    sum_im2 = np.zeros((n_rec, ops.dim, ops.dim))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(run, i) for i in range(n_traj)]
            outs = (f.result() for f in futures)
            for out in outs:
                sum_rho += out
                sum_re2 += out.real**2
                sum_im2 += out.imag**2
    else:
        for i in range(n_traj):
            out = run(i)
            sum_rho += out
            sum_re2 += out.real**2
            sum_im2 += out.imag**2

    times = dt_run * stride * np.arange(n_rec)
    means = [sum_rho[j] / n_traj for j in range(n_rec)]
    stds = []
    for j in range(n_rec):
        var_re = (sum_re2[j] - n_traj * means[j].real**2) / (n_traj - 1)
        var_im = (sum_im2[j] - n_traj * means[j].imag**2) / (n_traj - 1)
        stds.append(np.sqrt(np.maximum(var_re, 0.0))
                    + 1j * np.sqrt(np.maximum(var_im, 0.0)))
    return times, means, stds


@dataclass(frozen=True)
class OracleMoments:
    Sx: float
    Sy: float
    Sz: float
    Sz2: float
    Sy2: float
    SzSy: float     # anticommutator expectation <{S_z, S_y}>
    S2: float

    def var_z(self) -> float:
        return self.Sz2 - self.Sz**2


def _expect(op: np.ndarray, rho: np.ndarray) -> float:
    return float(np.real(np.einsum("ij,ji->", op, rho)))


def observables(rho: np.ndarray, ops: OperatorSet) -> OracleMoments:
    szsy = ops.sz @ ops.sy
    return OracleMoments(
        Sx=_expect(ops.sx, rho), Sy=_expect(ops.sy, rho), Sz=_expect(ops.sz, rho),
        Sz2=_expect(ops.sz2, rho), Sy2=_expect(ops.sy @ ops.sy, rho),
        SzSy=_expect(szsy + szsy.conj().T, rho), S2=_expect(ops.s2, rho))


def normalized_covariances(mom: OracleMoments, N: int):
    """(v_zz, v_zy, v_yy) normalized to projection noise, means subtracted."""
    v_zz = 4.0 * (mom.Sz2 - mom.Sz**2) / N
    v_zy = (2.0 * mom.SzSy - 4.0 * mom.Sz * mom.Sy) / N
    v_yy = 4.0 * (mom.Sy2 - mom.Sy**2) / N
    return v_zz, v_zy, v_yy


def wineland_xi2(mom: OracleMoments, N: int) -> float:
    """Full Wineland parameter N * V_min / <S_x>^2 from the oracle state."""
    v_zz, v_zy, v_yy = normalized_covariances(mom, N)
    v_min, _ = _eigen_range(v_zz, v_yy, v_zy)
    contrast = 2.0 * mom.Sx / N
    if contrast == 0:
        return math.inf
    return float(v_min) / contrast**2


# --- binary snapshot dump: little-endian records of (uint64 dim, dim^2
# complex128 row-major as re/im float64 pairs), one record per snapshot ---

def save_rho_dump(path, rhos):
    with open(path, "wb") as fh:
        for rho in rhos:
            dim = rho.shape[0]
            fh.write(struct.pack("<Q", dim))
            fh.write(np.ascontiguousarray(rho, dtype="<c16").tobytes())


def load_rho_dump(path):
    out = []
    with open(path, "rb") as fh:
        while True:
            head = fh.read(8)
            if not head:
                break
            dim = struct.unpack("<Q", head)[0]
            buf = fh.read(16 * dim * dim)
            out.append(np.frombuffer(buf, dtype="<c16").reshape(dim, dim).copy())
    return out
