"""Exact twisting benchmarks at detection efficiency 0.

Two independent references for the unitary limit:

* ``exact_observables``: closed-form collective-spin moments of the full
  master equation without spin flips (non-Gaussian, any N), evaluated in
  log space so cos^(N-2) survives N = 1e6.
* ``linear_solutions``: closed-form covariances of the Gaussian sector
  with spin flips, against which the ODE integrator is checked to 1e-8.

Squeezing normalization follows the moment-sector convention: xi^2 =
e^(gamma_sc t) v_min with v_min from the transverse covariance matrix.
The curvature-induced loss of coherence is part of v_min, not of the
normalization (using the full cos^(N-1) contrast instead would shift the
flip-free optimum from the curvature floor by O(N^(-1/3))).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContrastCollapseError
from .moments import SqueezingMetrics, _eigen_range
from .params import EffectiveParams


@dataclass(frozen=True)
class OatExactObservables:
    Sz2: float      # <S_z^2>, conserved at N/4
    SzSy: float     # <{S_z, S_y}>
    Sy2: float      # <S_y^2>
    Sx: float       # <S_x>


def _pow_cos(c, n):
    """cos(x)^n via n*log|cos| with sign tracking; exact 0 at cos = 0."""
    c = np.asarray(c, dtype=float)
    out = np.zeros_like(c)
    nz = c != 0.0
    sign = np.where(np.signbit(c[nz]) & (int(n) % 2 == 1), -1.0, 1.0)
    out[nz] = sign * np.exp(n * np.log(np.abs(c[nz])))
    return out


def _check_unitary_limit(eff: EffectiveParams):
    if eff.eta != 0:
        raise ValueError("exact twisting solution requires eta = 0")
    if eff.p != 0:
        raise ValueError("exact twisting solution requires p = 0")


def exact_observables(t, eff: EffectiveParams, N: int):
    """Collective-spin moments at time t (scalar or array)."""
    _check_unitary_limit(eff)
    t = np.asarray(t, dtype=float)
    g, G, chi = eff.gamma_sc, eff.Gamma, eff.chi
    c = np.cos(chi * t)
    c2 = np.cos(2.0 * chi * t)
    eg = np.exp(-g * t)
    szsy = 0.5 * N * (N - 1) * np.exp(-0.5 * (g + G) * t) * _pow_cos(c, N - 2) * np.sin(chi * t)
    sy2 = (0.25 * N * (1.0 - eg) + 0.125 * N * (N + 1) * eg
           + 0.125 * N * (1.0 - N) * eg * np.exp(-2.0 * G * t) * _pow_cos(c2, N - 2))
    sx = 0.5 * N * np.exp(-0.5 * (g + G) * t) * _pow_cos(c, N - 1)
    sz2 = np.full_like(t, 0.25 * N)
    if t.ndim == 0:
        return OatExactObservables(float(sz2), float(szsy), float(sy2), float(sx))
    return sz2, szsy, sy2, sx


def covariances_from_observables(szsy, sy2, N: int):
    """Normalized (v_zz, v_zy, v_yy); transverse means vanish here."""
    return 1.0, 2.0 * np.asarray(szsy) / N, 4.0 * np.asarray(sy2) / N


def exact_squeezing(t, eff: EffectiveParams, N: int) -> SqueezingMetrics:
    """Squeezing and area from the exact observables at one time."""
    obs = exact_observables(t, eff, N)
    if obs.Sx == 0.0:
        raise ContrastCollapseError(f"<S_x> = 0 at t = {t}; squeezing undefined")
    v_zz, v_zy, v_yy = covariances_from_observables(obs.SzSy, obs.Sy2, N)
    v_min, v_max = _eigen_range(v_zz, v_yy, v_zy)
    growth = math.exp(eff.gamma_sc * float(t))
    return SqueezingMetrics(v_min=float(v_min), v_max=float(v_max),
                            xi2=growth * float(v_min),
                            area=growth * math.sqrt(float(v_min) * float(v_max)))


def exact_xi2_curve(ts, eff: EffectiveParams, N: int):
    """(xi2, area) arrays over a time grid; vectorized for optimization."""
    _, szsy, sy2, _ = exact_observables(ts, eff, N)
    v_zz, v_zy, v_yy = covariances_from_observables(szsy, sy2, N)
    v_min, v_max = _eigen_range(np.full_like(v_zy, v_zz), v_yy, v_zy)
    growth = np.exp(eff.gamma_sc * np.asarray(ts, dtype=float))
    return growth * v_min, growth * np.sqrt(np.maximum(v_min * v_max, 0.0))


def _xm1pexp(x):
    """x - 1 + exp(-x), stable for small x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 5e-2
    xs = x[small]
    # sum_{n>=2} (-x)^n / n!
    term = xs * xs / 2.0
    acc = term.copy()
    for n in range(3, 12):
        term = term * (-xs) / n
        acc += term
    out[small] = acc
    xl = x[~small]
    out[~small] = xl - 1.0 + np.exp(-xl)
    return out


def _area_kernel(x):
    """x - 3/2 + 2 exp(-x) - exp(-2x)/2, stable for small x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 5e-2
    xs = x[small]
    # sum_{n>=3} (-1)^n (2 - 2^(n-1)) x^n / n!
    acc = np.zeros_like(xs)
    pw = xs * xs
    fact = 2.0
    for n in range(3, 13):
        pw = pw * xs
        fact *= n
        acc += (-1.0) ** n * (2.0 - 2.0 ** (n - 1)) * pw / fact
    out[small] = acc
    xl = x[~small]
    out[~small] = xl - 1.5 + 2.0 * np.exp(-xl) - 0.5 * np.exp(-2.0 * xl)
    return out


@dataclass(frozen=True)
class LinearSolutions:
    v_zy: np.ndarray
    v_yy: np.ndarray
    A2: np.ndarray
    xi2: np.ndarray


def linear_solutions(t, eff: EffectiveParams) -> LinearSolutions:
    """Closed-form Gaussian covariances at eta = 0 with spin flips.

    The p -> 0 limit (v_zy = chi N t e^(-gamma_sc t/2)) is used when
    eff.p == 0.  The decaying envelope of v_zy is e^(-gamma_sc t/2); this
    is fixed by the covariance ODEs and by the exact observables above.
    """
    if eff.eta != 0:
        raise ValueError("linear solutions hold at eta = 0 only")
    t = np.asarray(t, dtype=float)
    g, p, chiN, GammaN = eff.gamma_sc, eff.p, eff.chiN, eff.GammaN
    eg = np.exp(-g * t)
    ehalf = np.exp(-0.5 * g * t)
    if g * p == 0:
        v_zy = chiN * t * ehalf
        v_yy = 1.0 + GammaN * t * eg + (chiN * t) ** 2 * eg
        A2 = np.exp(2.0 * g * t) * (v_yy - v_zy**2)
    else:
        gp = g * p
        v_zy = (chiN / gp) * ehalf * (-np.expm1(-gp * t))
        v_yy = 1.0 + GammaN * t * eg + 2.0 * (chiN / gp) ** 2 * eg * _xm1pexp(gp * t)
        A2 = np.exp(2.0 * g * t) * (1.0 + GammaN * t * eg
                                    + 2.0 * (chiN / gp) ** 2 * eg * _area_kernel(gp * t))
    v_max = 0.5 * (1.0 + v_yy) + np.sqrt(0.25 * (1.0 - v_yy) ** 2 + v_zy**2)
    xi2 = np.exp(g * t) * (v_yy - v_zy**2) / v_max
    return LinearSolutions(v_zy=v_zy, v_yy=v_yy, A2=A2, xi2=xi2)
