"""Spin squeezing in a driven cavity: measurement vs one-axis twisting.

Subpackages:
  params     physical -> effective parameter reduction, validity checks
  moments    large-N Gaussian covariances, conditional means, metrics
  analytic   closed-form optima, critical values, regime classifier
  oat_exact  exact twisting observables and linear-solution benchmarks
  qnd_exact  exact measurement-only conditional dynamics (no spin flips)
  oracle     brute-force density-matrix evolution for N <= 8
  optimizer  time optimization, parameter sweeps, figure data pipelines
  cli        batch front-end (CSV + manifest emission, SVG plots)
"""

from .params import (EffectiveParams, PhysicalParams, ValidityReport,
                     derive_effective, from_reduced, validate_adiabatic)
from .errors import ContrastCollapseError, StepSizeError

__version__ = "0.1.0"

__all__ = [
    "EffectiveParams", "PhysicalParams", "ValidityReport",
    "derive_effective", "from_reduced", "validate_adiabatic",
    "ContrastCollapseError", "StepSizeError", "__version__",
]
