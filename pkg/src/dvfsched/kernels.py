"""Select the compiled kernel backend when available, else the pure-Python one.

Set ``DVFSCHED_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("DVFSCHED_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
curve = _impl.curve
curve_inverse = _impl.curve_inverse
opt_mem_freq = _impl.opt_mem_freq
energy_on_curve = _impl.energy_on_curve
fc_for_budget = _impl.fc_for_budget
power_on_budget = _impl.power_on_budget
solve_unconstrained = _impl.solve_unconstrained
solve_budget = _impl.solve_budget

__all__ = [
    "BACKEND", "curve", "curve_inverse", "opt_mem_freq", "energy_on_curve",
    "fc_for_budget", "power_on_budget", "solve_unconstrained", "solve_budget",
]
