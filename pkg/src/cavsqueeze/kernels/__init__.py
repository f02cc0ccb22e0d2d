"""Integration kernels with a compiled fast path and a pure-Python fallback.

The compiled extension is preferred when it imports; set the environment
variable CAVSQUEEZE_PURE_PYTHON=1 before import to force the fallback.
Both backends implement the same step-for-step algorithms, so results
agree to floating-point roundoff (see tests/test_kernels.py and
benchmarks/bench_backends.py).
"""

import os

from . import pure

_impl = None
if os.environ.get("CAVSQUEEZE_PURE_PYTHON", "") != "1":
    try:
        from . import _core as _impl
    except ImportError:
        _impl = None

if _impl is None:
    _impl = pure
    BACKEND = "python"
else:
    BACKEND = "compiled"


def available_backends():
    names = ["python"]
    try:
        from . import _core  # noqa: F401
        names.insert(0, "compiled")
    except ImportError:
        pass
    return names


def get(name=None):
    """Return the kernel module for ``name`` ('compiled', 'python' or None)."""
    if name is None:
        return _impl
    if name == "python":
        return pure
    if name == "compiled":
        from . import _core
        return _core
    raise ValueError(f"unknown kernel backend {name!r}")


moment_trajectory = _impl.moment_trajectory
qnd_nstar_trajectory = _impl.qnd_nstar_trajectory
oracle_sme_trajectory = _impl.oracle_sme_trajectory
