"""Pure-Python reference for the compiled kernels in ``_kernels.pyx``.

Both modules expose the same functions with the same argument order; keep
them in lockstep. Curve parameters ``(ca, cb, cc)`` describe
``fc_max(v) = sqrt((v - ca) / cb) + cc``.
"""
import math

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

BACKEND = "python"


def curve(v, ca, cb, cc):
    x = v - ca
    if x < 0.0:
        x = 0.0
    return math.sqrt(x / cb) + cc


def curve_inverse(fc, ca, cb, cc):
    d = fc - cc
    if d < 0.0:
        d = 0.0
    return cb * d * d + ca


def opt_mem_freq(a_pow, gamma, t_core, c_mem, fm_min, fm_max):
    """Energy-minimal memory frequency for fixed core power ``a_pow`` and time ``t_core``."""
    if gamma <= 0.0:
        return fm_max
    xi = math.sqrt(a_pow * c_mem / (gamma * t_core)) if t_core > 0.0 else math.inf
    if xi < fm_min:
        return fm_min
    if xi > fm_max:
        return fm_max
    return xi


def energy_on_curve(v, p0, gamma, c, d_work, delta, t0, ca, cb, cc, fm_min, fm_max):
    fc = curve(v, ca, cb, cc)
    a_pow = p0 + c * v * v * fc
    t_core = t0 + d_work * delta / fc
    c_mem = d_work * (1.0 - delta)
    fm = opt_mem_freq(a_pow, gamma, t_core, c_mem, fm_min, fm_max)
    return (a_pow + gamma * fm) * (t_core + c_mem / fm)


def _golden(f, lo, hi, tol):
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc_, fd = f(c), f(d)
    while b - a > tol:
        if fc_ <= fd:
            b, d, fd = d, c, fc_
            c = b - INV_PHI * (b - a)
            fc_ = f(c)
        else:
            a, c, fc_ = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc_) if fc_ <= fd else (d, fd)


def _scan_golden(f, lo, hi, n_scan, tol, prefer_high):
    """Coarse scan, then golden-section refinement around the best scan point."""
    if hi - lo <= tol:
        x = hi if prefer_high else lo
        return x, f(x)
    step = (hi - lo) / (n_scan - 1)
    best_i, best_f = 0, math.inf
    for i in range(n_scan):
        x = hi if i == n_scan - 1 else lo + i * step
        y = f(x)
        if y < best_f or (prefer_high and y == best_f):
            best_i, best_f = i, y
    a = lo + max(best_i - 1, 0) * step
    b = min(lo + (best_i + 1) * step, hi)
    x, y = _golden(f, a, b, tol)
    x0 = hi if best_i == n_scan - 1 else lo + best_i * step
    if best_f < y or (prefer_high and best_f == y and x0 > x):
        return x0, best_f
    return x, y


def solve_unconstrained(p0, gamma, c, d_work, delta, t0, ca, cb, cc,
                        v_lo, v_hi, fm_min, fm_max, n_scan, tol):
    """Return ``(v, energy)`` minimizing energy along the boundary curve."""
    def f(v):
        return energy_on_curve(v, p0, gamma, c, d_work, delta, t0, ca, cb, cc, fm_min, fm_max)

    return _scan_golden(f, v_lo, v_hi, n_scan, tol, False)


def fc_for_budget(fm, budget, d_work, delta, t0):
    den = budget - t0 - d_work * (1.0 - delta) / fm
    if den <= 0.0:
        return math.inf
    return d_work * delta / den


def power_on_budget(fm, budget, p0, gamma, c, d_work, delta, t0, ca, cb, cc, v_floor, v_max):
    fc = fc_for_budget(fm, budget, d_work, delta, t0)
    if fc <= curve(v_floor, ca, cb, cc):
        v = v_floor
    else:
        v = curve_inverse(fc, ca, cb, cc)
        if v > v_max:
            v = v_max
    return p0 + gamma * fm + c * v * v * fc


def solve_budget(budget, p0, gamma, c, d_work, delta, t0, ca, cb, cc,
                 v_floor, v_max, fm_lo, fm_hi, n_scan, tol):
    """Return ``(fm, power)`` minimizing power on the surface ``time == budget``.

    Ties go to the larger memory frequency.
    """
    def f(fm):
        return power_on_budget(fm, budget, p0, gamma, c, d_work, delta, t0, ca, cb, cc, v_floor, v_max)

    return _scan_golden(f, fm_lo, fm_hi, n_scan, tol, True)
