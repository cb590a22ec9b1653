import os
import subprocess
import sys

import numpy as np
import pytest

from dvfsched import _kernels_py as py
from dvfsched import kernels

try:
    from dvfsched import _kernels as cy
except ImportError:  # extension not built
    cy = None

needs_ext = pytest.mark.skipif(cy is None, reason="compiled kernel not built")

CURVE = (0.5, 2.0, 0.5)


def _cases(n=200, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        p0 = rng.uniform(30, 90)
        gamma = rng.uniform(0, 40) if rng.random() > 0.2 else 0.0
        c = rng.uniform(50, 150)
        d = rng.uniform(15, 380)
        delta = rng.uniform(0, 1)
        t0 = rng.uniform(1, 48)
        yield p0, gamma, c, d, delta, t0


def test_backend_selected():
    assert kernels.BACKEND in ("python", "cython")
    if cy is not None and not os.environ.get("DVFSCHED_PURE_PYTHON"):
        assert kernels.BACKEND == "cython"


def test_pure_python_override():
    code = "import dvfsched.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, DVFSCHED_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_ext
def test_scalar_helpers_agree():
    for v in np.linspace(0.5, 1.2, 15):
        assert cy.curve(v, *CURVE) == pytest.approx(py.curve(v, *CURVE), abs=1e-15)
        f = py.curve(v, *CURVE)
        assert cy.curve_inverse(f, *CURVE) == pytest.approx(py.curve_inverse(f, *CURVE), abs=1e-15)
    for a, g, t, cm in [(150.0, 30.0, 20.0, 10.0), (100.0, 0.0, 5.0, 3.0), (80.0, 500.0, 17.5, 12.5)]:
        assert cy.opt_mem_freq(a, g, t, cm, 0.5, 1.2) == py.opt_mem_freq(a, g, t, cm, 0.5, 1.2)


@needs_ext
def test_solvers_agree():
    for p0, g, c, d, delta, t0 in _cases():
        args = (p0, g, c, d, delta, t0, *CURVE)
        v1, e1 = cy.solve_unconstrained(*args, 0.5, 1.2, 0.5, 1.2, 64, 1e-6)
        v2, e2 = py.solve_unconstrained(*args, 0.5, 1.2, 0.5, 1.2, 64, 1e-6)
        assert v1 == pytest.approx(v2, abs=1e-9)
        assert e1 == pytest.approx(e2, rel=1e-12)

        t_fast = t0 + d * (delta / py.curve(1.2, *CURVE) + (1 - delta) / 1.2)
        budget = t_fast * 1.1
        fm_lo = max(0.5, d * (1 - delta) / max(budget - t0 - d * delta / py.curve(1.2, *CURVE), 1e-12))
        if 0 < delta < 1 and fm_lo <= 1.2:
            f1, p1 = cy.solve_budget(budget, *args, 0.5, 1.2, fm_lo, 1.2, 64, 1e-6)
            f2, p2 = py.solve_budget(budget, *args, 0.5, 1.2, fm_lo, 1.2, 64, 1e-6)
            assert f1 == pytest.approx(f2, abs=1e-9)
            assert p1 == pytest.approx(p2, rel=1e-12)


def test_golden_finds_quadratic_minimum():
    x, fx = py._scan_golden(lambda x: (x - 0.7) ** 2, 0.0, 1.0, 64, 1e-9, False)
    assert x == pytest.approx(0.7, abs=1e-8)
    assert fx == pytest.approx(0.0, abs=1e-15)


def test_golden_prefers_high_on_plateau():
    x, _ = py._scan_golden(lambda x: 0.0, 0.0, 1.0, 8, 1e-9, True)
    assert x == pytest.approx(1.0)
