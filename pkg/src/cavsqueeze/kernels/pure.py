"""Pure-Python integration kernels.

Reference implementations of the two hot loops, used when the compiled
extension is unavailable or when CAVSQUEEZE_PURE_PYTHON=1.  Step
ordering and arithmetic match the compiled versions so that both
backends produce the same trajectories to floating-point roundoff.
"""

import math

import numpy as np


# ---------------------------------------------------------------------------
# transverse-moment trajectory: deterministic covariances (4th order) plus
# Ito mean deflections (Euler-Maruyama, coefficients at step start)
# ---------------------------------------------------------------------------

def _cov_rhs(t, vzz, vzy, vyy, gamma_sc, p, chiN, GammaN, GetaN):
    decay = math.exp(-0.5 * gamma_sc * t)
    dzz = -GetaN * vzz * vzz - 2.0 * gamma_sc * p * (vzz - 1.0)
    dzy = chiN * decay * vzz - GetaN * vzz * vzy - gamma_sc * (p + 0.5) * vzy
    dyy = (2.0 * chiN * decay * vzy + GammaN * decay * decay
           - GetaN * vzy * vzy - gamma_sc * (vyy - 1.0))
    return dzz, dzy, dyy


def _rk4_cov(t, vzz, vzy, vyy, dt, gamma_sc, p, chiN, GammaN, GetaN):
    a1, b1, c1 = _cov_rhs(t, vzz, vzy, vyy, gamma_sc, p, chiN, GammaN, GetaN)
    h = 0.5 * dt
    a2, b2, c2 = _cov_rhs(t + h, vzz + h * a1, vzy + h * b1, vyy + h * c1,
                          gamma_sc, p, chiN, GammaN, GetaN)
    a3, b3, c3 = _cov_rhs(t + h, vzz + h * a2, vzy + h * b2, vyy + h * c2,
                          gamma_sc, p, chiN, GammaN, GetaN)
    a4, b4, c4 = _cov_rhs(t + dt, vzz + dt * a3, vzy + dt * b3, vyy + dt * c3,
                          gamma_sc, p, chiN, GammaN, GetaN)
    sixth = dt / 6.0
    return (vzz + sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
            vzy + sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
            vyy + sixth * (c1 + 2.0 * c2 + 2.0 * c3 + c4))


def _cov_ok(vzz, vyy):
    return vzz > 0.0 and vyy > 0.0 and math.isfinite(vzz) and math.isfinite(vyy)


def advance_covariances(t, vzz, vzy, vyy, dt, gamma_sc, p, chiN, GammaN, GetaN):
    """One covariance step with a single retry at dt/10 substeps.

    Returns the new (vzz, vzy, vyy) or None when even the refined step
    leaves the variances non-positive (dt genuinely too large).
    """
    nzz, nzy, nyy = _rk4_cov(t, vzz, vzy, vyy, dt, gamma_sc, p, chiN, GammaN, GetaN)
    if _cov_ok(nzz, nyy):
        return nzz, nzy, nyy
    sub = dt / 10.0
    tt = t
    for _ in range(10):
        vzz, vzy, vyy = _rk4_cov(tt, vzz, vzy, vyy, sub, gamma_sc, p, chiN, GammaN, GetaN)
        if not _cov_ok(vzz, vyy):
            return None
        tt += sub
    return vzz, vzy, vyy


def moment_trajectory(gamma_sc, p, chiN, GammaN, eta,
                      dt, n_steps, stride, dW,
                      t_out, vzz_out, vzy_out, vyy_out,
                      z_out, y_out, q_out, dw_out, dq_out):
    """Integrate covariances and conditional means over n_steps of size dt.

    dW has length n_steps for a stochastic run or 0 for a deterministic
    (covariance-only) run.  Outputs are written every ``stride`` steps
    (n_steps must be a multiple of stride); dw_out/dq_out receive the
    per-interval increment sums.  Returns 0 on success or the 1-based
    index of the failing step.
    """
    GetaN = GammaN * eta
    noise_amp = math.sqrt(GetaN)
    have_noise = len(dW) == n_steps

    t = 0.0
    vzz, vzy, vyy = 1.0, 0.0, 1.0
    z = y = q = 0.0
    acc_w = acc_q = 0.0

    t_out[0] = 0.0
    vzz_out[0] = vzz
    vzy_out[0] = vzy
    vyy_out[0] = vyy
    z_out[0] = z
    y_out[0] = y
    q_out[0] = q

    for k in range(n_steps):
        if have_noise:
            dw = dW[k]
            dq = noise_amp * z * dt + dw
            decay = math.exp(-0.5 * gamma_sc * t)
            z_new = z + (-gamma_sc * p * z) * dt + noise_amp * vzz * dw
            y_new = y + (chiN * decay * z - 0.5 * gamma_sc * y) * dt + noise_amp * vzy * dw
            z, y = z_new, y_new
            q += dq
            acc_w += dw
            acc_q += dq
        cov = advance_covariances(t, vzz, vzy, vyy, dt, gamma_sc, p, chiN, GammaN, GetaN)
        if cov is None:
            return k + 1
        vzz, vzy, vyy = cov
        t += dt
        if (k + 1) % stride == 0:
            idx = (k + 1) // stride
            t_out[idx] = t
            vzz_out[idx] = vzz
            vzy_out[idx] = vzy
            vyy_out[idx] = vyy
            z_out[idx] = z
            y_out[idx] = y
            q_out[idx] = q
            if have_noise:
                dw_out[idx - 1] = acc_w
                dq_out[idx - 1] = acc_q
                acc_w = acc_q = 0.0
    return 0


# ---------------------------------------------------------------------------
# measurement-only conditional dynamics without spin flips: single stochastic
# center n* plus deterministic width, observables from clipped Gaussian sums
# ---------------------------------------------------------------------------

def gaussian_window(n_star, width, N, trunc_min, trunc_sigmas):
    """Eigenvalue window [k_lo, k_hi] (k = m + N/2) for the weighted sums."""
    sigma = 0.5 / math.sqrt(width)
    half = max(trunc_min, trunc_sigmas * sigma)
    k_center = n_star + 0.5 * N
    k_lo = max(0, int(math.ceil(k_center - half)))
    k_hi = min(int(N), int(math.floor(k_center + half)))
    return k_lo, k_hi


def window_sums(n_star, width, N, trunc_min, trunc_sigmas):
    """Weighted sums (S0, S1, S2) over eigenvalue displacements m - n*."""
    k_lo, k_hi = gaussian_window(n_star, width, N, trunc_min, trunc_sigmas)
    if k_hi < k_lo:
        return None
    m = np.arange(k_lo, k_hi + 1, dtype=float) - 0.5 * N - n_star
    w = np.exp(-2.0 * width * m * m)
    s0 = float(w.sum())
    s1 = float((w * m).sum())
    s2 = float((w * m * m).sum())
    return s0, s1, s2


def sx_window_sum(n_star, width, N, trunc_min, trunc_sigmas):
    """Weighted sum over the half-shifted grid entering the coherence."""
    sigma = 0.5 / math.sqrt(width)
    half = max(trunc_min, trunc_sigmas * sigma)
    k_center = n_star + 0.5 * N - 0.5
    k_lo = max(0, int(math.ceil(k_center - half)))
    k_hi = min(int(N) - 1, int(math.floor(k_center + half)))
    if k_hi < k_lo:
        return 0.0
    m = np.arange(k_lo, k_hi + 1, dtype=float) - 0.5 * N + 0.5 - n_star
    return float(np.exp(-2.0 * width * m * m).sum())


def oracle_sme_trajectory(z_diag, half_rates, jump_static,
                          flip_perms, flip_masks,
                          chi, amp, flip_coef,
                          dt, n_steps, stride, dW,
                          rho, rho_out, dq_out, dw_out):
    """Conditional density-matrix trajectory via the record-driven Kraus step.

    Numpy reference for the compiled version: rho (dim x dim complex) is
    evolved in place, snapshots land in rho_out every ``stride`` steps.
    """
    zd = np.asarray(z_diag)
    static_diag = 1j * chi * zd**2 + np.asarray(half_rates)
    rho_out[0] = rho
    acc_q = acc_w = 0.0
    for k in range(n_steps):
        mz = float(np.sum(zd * np.real(np.diag(rho))))
        dw = dW[k]
        dy = 2.0 * amp * mz * dt + dw
        kdiag = (1.0 - static_diag * dt + amp * zd * dy
                 + 0.5 * amp**2 * zd**2 * (dy * dy - dt))
        new = (kdiag[:, None] * kdiag[None, :].conj() + dt * np.asarray(jump_static)) * rho
        if flip_coef:
            for perm, mask in zip(flip_perms, flip_masks):
                new += (flip_coef * dt) * (mask * rho[np.ix_(perm, perm)])
        rho[...] = new / np.real(np.trace(new))
        acc_q += 2.0 * amp * mz * dt + dw
        acc_w += dw
        if (k + 1) % stride == 0:
            idx = (k + 1) // stride
            rho_out[idx] = rho
            dq_out[idx - 1] = acc_q
            dw_out[idx - 1] = acc_w
            acc_q = acc_w = 0.0
    return 0


def qnd_nstar_trajectory(N, Gamma, eta, gamma_sc,
                         dt, n_steps, stride, dW,
                         trunc_min, trunc_sigmas,
                         t_out, nstar_out, q_out,
                         norm_out, sx_out, sz_out, sz2_out):
    """Evolve the estimator center n* and record observables every stride.

    Returns 0 on success, or the 1-based failing step when the truncation
    window no longer contains any eigenvalue.
    """
    Ge = Gamma * eta
    meas_amp = 2.0 * math.sqrt(Ge)
    inv_N = 1.0 / N

    def record(idx, t, n_star, q):
        width = inv_N + Ge * t
        sums = window_sums(n_star, width, N, trunc_min, trunc_sigmas)
        if sums is None:
            return False
        s0, s1, s2 = sums
        t_out[idx] = t
        nstar_out[idx] = n_star
        q_out[idx] = q
        norm_out[idx] = s0
        sz_out[idx] = s1 / s0 + n_star
        sz2_out[idx] = (s2 + 2.0 * n_star * s1 + n_star * n_star * s0) / s0
        sx_out[idx] = (0.5 * N * math.exp(-0.5 * (Gamma + gamma_sc) * t)
                       * sx_window_sum(n_star, width, N, trunc_min, trunc_sigmas) / s0)
        return True

    t = 0.0
    n_star = 0.0
    q = 0.0
    if not record(0, t, n_star, q):
        return 1
    for k in range(n_steps):
        width = inv_N + Ge * t
        sums = window_sums(n_star, width, N, trunc_min, trunc_sigmas)
        if sums is None:
            return k + 1
        s0, s1, _ = sums
        sz = s1 / s0 + n_star
        drift = (Ge / width) * (s1 / s0)
        diffusion = math.sqrt(Ge) / (2.0 * width)
        dw = dW[k]
        q += meas_amp * sz * dt + dw
        n_star += drift * dt + diffusion * dw
        t += dt
        if (k + 1) % stride == 0:
            if not record((k + 1) // stride, t, n_star, q):
                return k + 1
    return 0
