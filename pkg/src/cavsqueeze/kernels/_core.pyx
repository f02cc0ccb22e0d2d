# cython: boundscheck=False, wraparound=False, cdivision=True
# Compiled integration kernels; must stay step-for-step equivalent to pure.py.

from libc.math cimport ceil, exp, floor, isfinite, sqrt


cdef inline void cov_rhs(double t, double vzz, double vzy, double vyy,
                         double gamma_sc, double p, double chiN,
                         double GammaN, double GetaN, double* out) nogil:
    cdef double decay = exp(-0.5 * gamma_sc * t)
    out[0] = -GetaN * vzz * vzz - 2.0 * gamma_sc * p * (vzz - 1.0)
    out[1] = chiN * decay * vzz - GetaN * vzz * vzy - gamma_sc * (p + 0.5) * vzy
    out[2] = (2.0 * chiN * decay * vzy + GammaN * decay * decay
              - GetaN * vzy * vzy - gamma_sc * (vyy - 1.0))


cdef inline void rk4_cov(double t, double* v, double dt,
                         double gamma_sc, double p, double chiN,
                         double GammaN, double GetaN) nogil:
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double h = 0.5 * dt
    cdef double sixth = dt / 6.0
    cov_rhs(t, v[0], v[1], v[2], gamma_sc, p, chiN, GammaN, GetaN, k1)
    cov_rhs(t + h, v[0] + h * k1[0], v[1] + h * k1[1], v[2] + h * k1[2],
            gamma_sc, p, chiN, GammaN, GetaN, k2)
    cov_rhs(t + h, v[0] + h * k2[0], v[1] + h * k2[1], v[2] + h * k2[2],
            gamma_sc, p, chiN, GammaN, GetaN, k3)
    cov_rhs(t + dt, v[0] + dt * k3[0], v[1] + dt * k3[1], v[2] + dt * k3[2],
            gamma_sc, p, chiN, GammaN, GetaN, k4)
    v[0] = v[0] + sixth * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    v[1] = v[1] + sixth * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    v[2] = v[2] + sixth * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])


cdef inline bint cov_ok(double vzz, double vyy) nogil:
    return vzz > 0.0 and vyy > 0.0 and isfinite(vzz) and isfinite(vyy)


cdef inline int advance_cov(double t, double* v, double dt,
                            double gamma_sc, double p, double chiN,
                            double GammaN, double GetaN) nogil:
    # one step; on positivity loss retry once as ten dt/10 substeps
    cdef double w[3]
    cdef double sub, tt
    cdef int i
    w[0] = v[0]; w[1] = v[1]; w[2] = v[2]
    rk4_cov(t, w, dt, gamma_sc, p, chiN, GammaN, GetaN)
    if cov_ok(w[0], w[2]):
        v[0] = w[0]; v[1] = w[1]; v[2] = w[2]
        return 0
    sub = dt / 10.0
    tt = t
    w[0] = v[0]; w[1] = v[1]; w[2] = v[2]
    for i in range(10):
        rk4_cov(tt, w, sub, gamma_sc, p, chiN, GammaN, GetaN)
        if not cov_ok(w[0], w[2]):
            return 1
        tt += sub
    v[0] = w[0]; v[1] = w[1]; v[2] = w[2]
    return 0


def moment_trajectory(double gamma_sc, double p, double chiN, double GammaN,
                      double eta, double dt, Py_ssize_t n_steps, Py_ssize_t stride,
                      double[::1] dW,
                      double[::1] t_out, double[::1] vzz_out, double[::1] vzy_out,
                      double[::1] vyy_out, double[::1] z_out, double[::1] y_out,
                      double[::1] q_out, double[::1] dw_out, double[::1] dq_out):
    cdef double GetaN = GammaN * eta
    cdef double noise_amp = sqrt(GetaN)
    cdef bint have_noise = dW.shape[0] == n_steps
    cdef double v[3]
    cdef double t = 0.0, z = 0.0, y = 0.0, q = 0.0
    cdef double acc_w = 0.0, acc_q = 0.0
    cdef double dw, dq, decay, z_new, y_new
    cdef Py_ssize_t k, idx
    cdef Py_ssize_t fail = 0

    v[0] = 1.0; v[1] = 0.0; v[2] = 1.0
    t_out[0] = 0.0
    vzz_out[0] = v[0]; vzy_out[0] = v[1]; vyy_out[0] = v[2]
    z_out[0] = 0.0; y_out[0] = 0.0; q_out[0] = 0.0

    with nogil:
        for k in range(n_steps):
            if have_noise:
                dw = dW[k]
                dq = noise_amp * z * dt + dw
                decay = exp(-0.5 * gamma_sc * t)
                z_new = z + (-gamma_sc * p * z) * dt + noise_amp * v[0] * dw
                y_new = y + (chiN * decay * z - 0.5 * gamma_sc * y) * dt + noise_amp * v[1] * dw
                z = z_new; y = y_new
                q += dq
                acc_w += dw
                acc_q += dq
            if advance_cov(t, v, dt, gamma_sc, p, chiN, GammaN, GetaN):
                fail = k + 1
                break
            t += dt
            if (k + 1) % stride == 0:
                idx = (k + 1) // stride
                t_out[idx] = t
                vzz_out[idx] = v[0]; vzy_out[idx] = v[1]; vyy_out[idx] = v[2]
                z_out[idx] = z; y_out[idx] = y; q_out[idx] = q
                if have_noise:
                    dw_out[idx - 1] = acc_w
                    dq_out[idx - 1] = acc_q
                    acc_w = 0.0
                    acc_q = 0.0
    return fail


cdef inline void window_bounds(double n_star, double width, double N,
                               double trunc_min, double trunc_sigmas,
                               double shift, double upper,
                               Py_ssize_t* k_lo, Py_ssize_t* k_hi) nogil:
    cdef double sigma = 0.5 / sqrt(width)
    cdef double half = trunc_sigmas * sigma
    cdef double center
    if half < trunc_min:
        half = trunc_min
    center = n_star + 0.5 * N - shift
    k_lo[0] = <Py_ssize_t>ceil(center - half)
    if k_lo[0] < 0:
        k_lo[0] = 0
    k_hi[0] = <Py_ssize_t>floor(center + half)
    if k_hi[0] > <Py_ssize_t>upper:
        k_hi[0] = <Py_ssize_t>upper


def qnd_nstar_trajectory(double N, double Gamma, double eta, double gamma_sc,
                         double dt, Py_ssize_t n_steps, Py_ssize_t stride,
                         double[::1] dW, double trunc_min, double trunc_sigmas,
                         double[::1] t_out, double[::1] nstar_out, double[::1] q_out,
                         double[::1] norm_out, double[::1] sx_out,
                         double[::1] sz_out, double[::1] sz2_out):
    cdef double Ge = Gamma * eta
    cdef double meas_amp = 2.0 * sqrt(Ge)
    cdef double diff_amp = sqrt(Ge)
    cdef double inv_N = 1.0 / N
    cdef double t = 0.0, n_star = 0.0, q = 0.0
    cdef double width, s0, s1, s2, sx_sum, m, w, sz, drift, dw
    cdef Py_ssize_t k, j, idx, k_lo, k_hi
    cdef Py_ssize_t fail = 0

    with nogil:
        for k in range(n_steps + 1):
            width = inv_N + Ge * t
            window_bounds(n_star, width, N, trunc_min, trunc_sigmas, 0.0, N, &k_lo, &k_hi)
            if k_hi < k_lo:
                fail = k + 1 if k < n_steps else n_steps
                break
            s0 = 0.0; s1 = 0.0; s2 = 0.0
            for j in range(k_lo, k_hi + 1):
                m = j - 0.5 * N - n_star
                w = exp(-2.0 * width * m * m)
                s0 += w
                s1 += w * m
                s2 += w * m * m
            sz = s1 / s0 + n_star
            if k % stride == 0:
                idx = k // stride
                t_out[idx] = t
                nstar_out[idx] = n_star
                q_out[idx] = q
                norm_out[idx] = s0
                sz_out[idx] = sz
                sz2_out[idx] = (s2 + 2.0 * n_star * s1 + n_star * n_star * s0) / s0
                window_bounds(n_star, width, N, trunc_min, trunc_sigmas, 0.5, N - 1.0,
                              &k_lo, &k_hi)
                sx_sum = 0.0
                for j in range(k_lo, k_hi + 1):
                    m = j - 0.5 * N + 0.5 - n_star
                    sx_sum += exp(-2.0 * width * m * m)
                sx_out[idx] = (0.5 * N * exp(-0.5 * (Gamma + gamma_sc) * t)
                               * sx_sum / s0)
            if k == n_steps:
                break
            dw = dW[k]
            q += meas_amp * sz * dt + dw
            n_star += (Ge / width) * (s1 / s0) * dt + diff_amp / (2.0 * width) * dw
            t += dt
    return fail


def oracle_sme_trajectory(double[::1] z_diag, double[::1] half_rates,
                          double[:, ::1] jump_static,
                          long[:, ::1] flip_perms, double[:, :, ::1] flip_masks,
                          double chi, double amp, double flip_coef,
                          double dt, Py_ssize_t n_steps, Py_ssize_t stride,
                          double[::1] dW,
                          double complex[:, ::1] rho,
                          double complex[:, :, ::1] rho_out,
                          double[::1] dq_out, double[::1] dw_out):
    """Conditional density-matrix trajectory via the record-driven Kraus step.

    rho is evolved in place; snapshots land in rho_out every ``stride``
    steps (rho_out[0] = initial).  dq_out/dw_out receive per-interval
    record and noise increment sums.
    """
    cdef Py_ssize_t dim = z_diag.shape[0]
    cdef Py_ssize_t n_atoms = flip_perms.shape[0]
    cdef Py_ssize_t k, i, j, a, idx, pi
    cdef double mz, dy, dw, tr, inv_tr, acc_q, acc_w
    cdef double complex kd_i
    import numpy as _np
    cdef double complex[::1] kd = _np.empty(dim, dtype=complex)
    cdef double complex[:, ::1] work = _np.empty((dim, dim), dtype=complex)

    cdef double complex* rp = &rho[0, 0]
    cdef double complex* wp = &work[0, 0]
    cdef double complex* kp = &kd[0]
    cdef double* jsp = &jump_static[0, 0]
    cdef double* zp = &z_diag[0]
    cdef double* hp = &half_rates[0]
    cdef long* permp
    cdef double* maskp
    cdef double fc_dt = flip_coef * dt
    cdef Py_ssize_t row, pib, bbit, jj, off

    for i in range(dim):
        for j in range(dim):
            rho_out[0, i, j] = rho[i, j]

    acc_q = 0.0
    acc_w = 0.0
    with nogil:
        for k in range(n_steps):
            mz = 0.0
            for i in range(dim):
                mz += zp[i] * rp[i * dim + i].real
            dw = dW[k]
            dy = 2.0 * amp * mz * dt + dw
            for i in range(dim):
                kp[i] = (1.0 - (1j * chi * zp[i] * zp[i] + hp[i]) * dt
                         + amp * zp[i] * dy
                         + 0.5 * amp * amp * zp[i] * zp[i] * (dy * dy - dt))
            for i in range(dim):
                kd_i = kp[i]
                row = i * dim
                for j in range(dim):
                    wp[row + j] = (kd_i * kp[j].conjugate()
                                   + jsp[row + j] * dt) * rp[row + j]
            if flip_coef != 0.0:
                # mask[i,j] = [bit_a(i) == bit_a(j)] selects contiguous runs of
                # length b = 2^a with source offset +-b; no mask loads needed
                for a in range(n_atoms):
                    permp = &flip_perms[a, 0]
                    bbit = permp[0]
                    for i in range(dim):
                        row = i * dim
                        pib = permp[i] * dim
                        if (i & bbit) == 0:
                            j = 0
                            off = bbit
                        else:
                            j = bbit
                            off = -bbit
                        while j < dim:
                            for jj in range(j, j + bbit):
                                wp[row + jj] = wp[row + jj] + fc_dt * rp[pib + jj + off]
                            j += 2 * bbit
            tr = 0.0
            for i in range(dim):
                tr += wp[i * dim + i].real
            inv_tr = 1.0 / tr
            for i in range(dim * dim):
                rp[i] = wp[i] * inv_tr
            acc_q += 2.0 * amp * mz * dt + dw
            acc_w += dw
            if (k + 1) % stride == 0:
                idx = (k + 1) // stride
                for i in range(dim):
                    for j in range(dim):
                        rho_out[idx, i, j] = rho[i, j]
                dq_out[idx - 1] = acc_q
                dw_out[idx - 1] = acc_w
                acc_q = 0.0
                acc_w = 0.0
    return 0
