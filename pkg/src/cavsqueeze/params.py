"""Model parameters: raw cavity/atom/drive quantities and the reduced set.

Everything downstream runs on ``EffectiveParams``: the scattering rate
``gamma_sc`` sets the absolute time scale, the normalized detuning ``d``
interpolates between pure measurement (d=0) and pure twisting (d >> 1),
and the pair (chi, Gamma) is fixed by (C, gamma_sc, d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

_COOP_RTOL = 1e-9
_IDENT_RTOL = 1e-12


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


@dataclass(frozen=True)
class PhysicalParams:
    """Raw experimental quantities (rad/s for rates, photons/s for flux)."""

    g1: float          # single-photon half-Rabi frequency, upper transition
    g2: float          # single-photon half-Rabi frequency, lower transition
    gamma1: float      # excited-state decay rate into the upper ground state
    gamma2: float      # excited-state decay rate into the lower ground state
    kappa: float       # cavity power linewidth
    Delta: float       # atom-cavity detuning
    delta: float       # drive-cavity detuning (drive freq minus cavity freq)
    flux: float        # input photon flux |beta|^2
    N: int             # atom number
    eta: float         # homodyne detection efficiency

    def __post_init__(self):
        _require(self.gamma1 >= 0 and self.gamma2 >= 0, "decay rates must be >= 0")
        _require(self.kappa >= 0, "kappa must be >= 0")
        _require(self.flux >= 0, "flux must be >= 0")
        _require(self.N >= 1, "N must be a positive integer")
        _require(0.0 <= self.eta <= 1.0, "eta must lie in [0, 1]")


@dataclass(frozen=True)
class EffectiveParams:
    """Reduced parameters of the effective ground-manifold dynamics.

    chi and Gamma are stored for convenience but are functions of
    (C, gamma_sc, d); construction enforces the identities to 1e-12.
    Time is carried in units of 1/gamma_sc whenever gamma_sc is set to 1.
    """

    N: int
    C: float           # single-particle cooperativity
    gamma_sc: float    # total probe scattering rate (sets the time scale)
    p: float           # spin-flip (Raman) fraction of scattering events
    d: float           # normalized dressed detuning 2*delta_star/kappa
    chi: float         # twisting rate
    Gamma: float       # collective dephasing / measurement rate
    eta: float         # detection efficiency

    def __post_init__(self):
        _require(self.N >= 1, "N must be >= 1")
        _require(self.C >= 0, "C must be >= 0")
        _require(self.gamma_sc >= 0, "gamma_sc must be >= 0")
        _require(0.0 <= self.p <= 0.5, f"p must lie in [0, 1/2], got {self.p}")
        _require(0.0 <= self.eta <= 1.0, "eta must lie in [0, 1]")
        _require(self.Gamma >= 0, "Gamma must be >= 0")
        if math.isinf(self.d):
            # ideal-twisting limit: only chi survives
            _require(self.Gamma == 0, "d = inf requires Gamma = 0")
            return
        chi_ref = chi_of(self.C, self.gamma_sc, self.d)
        gam_ref = gamma_of(self.C, self.gamma_sc, self.d)
        for name, have, want in (("chi", self.chi, chi_ref), ("Gamma", self.Gamma, gam_ref)):
            scale = max(abs(want), abs(have))
            if scale > 0 and abs(have - want) > _IDENT_RTOL * scale:
                raise ValueError(f"{name}={have} inconsistent with (C, gamma_sc, d); expected {want}")

    # -- products that appear in every evolution equation --
    @property
    def NC(self) -> float:
        return self.N * self.C

    @property
    def chiN(self) -> float:
        return self.chi * self.N

    @property
    def GammaN(self) -> float:
        return self.Gamma * self.N

    @property
    def GetaN(self) -> float:
        return self.Gamma * self.N * self.eta

    def scaled_time(self, t):
        """Dimensionless time s = gamma_sc * t * sqrt(NC) / 2 (0 if gamma_sc = 0)."""
        if self.gamma_sc == 0:
            return 0.0 * t
        return self.gamma_sc * t * math.sqrt(self.NC) / 2.0

    def time_from_scaled(self, s: float) -> float:
        if self.gamma_sc <= 0 or self.NC <= 0:
            raise ValueError("scaled time undefined for gamma_sc = 0 or NC = 0; pass t_max directly")
        return 2.0 * s / (self.gamma_sc * math.sqrt(self.NC))


def chi_of(C: float, gamma_sc: float, d: float) -> float:
    return C * gamma_sc * (d / 2.0) / (1.0 + d * d)


def gamma_of(C: float, gamma_sc: float, d: float) -> float:
    return C * gamma_sc / (1.0 + d * d)


def from_reduced(N: int, C: float, gamma_sc: float, p: float, d: float, eta: float) -> EffectiveParams:
    """Build EffectiveParams directly from the reduced set."""
    return EffectiveParams(
        N=int(N), C=C, gamma_sc=gamma_sc, p=p, d=d,
        chi=chi_of(C, gamma_sc, d), Gamma=gamma_of(C, gamma_sc, d), eta=eta,
    )


def from_rates(N: int, gamma_sc: float, p: float, chi: float, Gamma: float,
               eta: float) -> EffectiveParams:
    """Construct from explicit (chi, Gamma); d = 2 chi/Gamma is implied.

    Gamma = 0 with chi != 0 is the ideal-twisting limit d -> inf, where
    C and d drop out; Gamma > 0 requires gamma_sc > 0.
    """
    if Gamma == 0:
        if chi == 0:
            return EffectiveParams(int(N), 0.0, gamma_sc, p, 0.0, 0.0, 0.0, eta)
        return EffectiveParams(int(N), math.inf, gamma_sc, p, math.inf, chi, 0.0, eta)
    _require(gamma_sc > 0, "Gamma > 0 requires gamma_sc > 0")
    d = 2.0 * chi / Gamma
    C = Gamma * (1.0 + d * d) / gamma_sc
    return EffectiveParams(int(N), C, gamma_sc, p, d, chi, Gamma, eta)


def pure_twisting(N: int, chi: float, gamma_sc: float = 0.0, p: float = 0.0) -> EffectiveParams:
    """Ideal one-axis twisting: finite chi with no collective dephasing."""
    return from_rates(N, gamma_sc, p, chi, 0.0, 0.0)


def derive_effective(phys: PhysicalParams) -> EffectiveParams:
    """Reduce physical cavity/atom/drive parameters to the effective set.

    Requires a single cooperativity, i.e. 4 g1^2/(kappa gamma1) and
    4 g2^2/(kappa gamma2) must agree to 1e-9 relative.
    """
    _require(phys.Delta != 0, "Delta must be nonzero (dispersive regime)")
    _require(phys.kappa > 0, "kappa must be positive to define d = 2*delta_star/kappa")
    _require(phys.gamma1 > 0 and phys.gamma2 > 0, "gamma1, gamma2 must be positive to define C and p")

    C1 = 4.0 * phys.g1**2 / (phys.kappa * phys.gamma1)
    C2 = 4.0 * phys.g2**2 / (phys.kappa * phys.gamma2)
    scale = max(abs(C1), abs(C2))
    if scale > 0 and abs(C1 - C2) > _COOP_RTOL * scale:
        raise ValueError(
            "inconsistent cooperativity: 4 g1^2/(kappa gamma1) = "
            f"{C1} but 4 g2^2/(kappa gamma2) = {C2}"
        )

    delta_star = phys.delta - (phys.g1**2 - phys.g2**2) * phys.N / (2.0 * phys.Delta)
    n_circ = phys.kappa * phys.flux / (delta_star**2 + phys.kappa**2 / 4.0)
    gamma_sc = (phys.gamma1 + phys.gamma2) * (phys.g1**2 + phys.g2**2) * n_circ / phys.Delta**2
    p = 2.0 * phys.gamma1 * phys.gamma2 / (phys.gamma1 + phys.gamma2) ** 2
    d = 2.0 * delta_star / phys.kappa
    return from_reduced(phys.N, C1, gamma_sc, p, d, phys.eta)


@dataclass(frozen=True)
class AdiabaticCheck:
    name: str
    ratio: float
    margin: float
    satisfied: bool


@dataclass(frozen=True)
class ValidityReport:
    """Per-condition report for the adiabatic-elimination regime."""

    checks: tuple[AdiabaticCheck, ...] = field(default=())

    @property
    def overall(self) -> bool:
        return all(c.satisfied for c in self.checks)

    def as_dict(self) -> dict:
        out = {}
        for c in self.checks:
            out[f"{c.name}_ratio"] = c.ratio
            out[f"{c.name}_ok"] = c.satisfied
        out["overall"] = self.overall
        return out


def validate_adiabatic(phys: PhysicalParams, margin: float = 10.0,
                       dispersive_margin: float = 1.0) -> ValidityReport:
    """Check that the excited state and the cavity can be eliminated.

    The detuning must dominate the excited-state linewidths, the
    light-enhanced couplings and the collectively-enhanced couplings.
    Each check passes when its ratio exceeds ``margin``.  The final check
    compares quantum fluctuations of the intracavity field to the mean
    field: the reported ratio is N C (gamma1+gamma2)/(Delta sqrt(N)) and
    it passes when its inverse exceeds ``dispersive_margin``.
    """
    eff = derive_effective(phys)
    aD = abs(phys.Delta)
    delta_star = eff.d * phys.kappa / 2.0
    n_circ = phys.kappa * phys.flux / (delta_star**2 + phys.kappa**2 / 4.0)
    alpha = math.sqrt(n_circ)
    rootN = math.sqrt(phys.N)

    def ratio(num, den):
        return math.inf if den == 0 else num / den

    checks = [
        AdiabaticCheck("excited_linewidth_g1", ratio(aD, phys.gamma1), margin,
                       ratio(aD, phys.gamma1) > margin),
        AdiabaticCheck("excited_linewidth_g2", ratio(aD, phys.gamma2), margin,
                       ratio(aD, phys.gamma2) > margin),
        AdiabaticCheck("photon_coupling_g1", ratio(aD, 2.0 * phys.g1 * alpha), margin,
                       ratio(aD, 2.0 * phys.g1 * alpha) > margin),
        AdiabaticCheck("photon_coupling_g2", ratio(aD, 2.0 * phys.g2 * alpha), margin,
                       ratio(aD, 2.0 * phys.g2 * alpha) > margin),
        AdiabaticCheck("collective_coupling_g1", ratio(aD, 2.0 * phys.g1 * rootN), margin,
                       ratio(aD, 2.0 * phys.g1 * rootN) > margin),
        AdiabaticCheck("collective_coupling_g2", ratio(aD, 2.0 * phys.g2 * rootN), margin,
                       ratio(aD, 2.0 * phys.g2 * rootN) > margin),
    ]
    disp = phys.N * eff.C * (phys.gamma1 + phys.gamma2) / (aD * rootN)
    checks.append(AdiabaticCheck("dispersive_fluctuations", disp, dispersive_margin,
                                 ratio(1.0, disp) > dispersive_margin))
    return ValidityReport(checks=tuple(checks))
