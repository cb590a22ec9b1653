# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; mirror of ``_kernels_py.py`` (same names, same argument order)."""
from libc.math cimport sqrt, INFINITY

cdef double INV_PHI = (sqrt(5.0) - 1.0) / 2.0

BACKEND = "cython"


cdef struct Params:
    double p0, gamma, c, d_work, delta, t0
    double ca, cb, cc
    double fm_min, fm_max
    double budget, v_floor, v_max


cpdef double curve(double v, double ca, double cb, double cc):
    cdef double x = v - ca
    if x < 0.0:
        x = 0.0
    return sqrt(x / cb) + cc


cpdef double curve_inverse(double fc, double ca, double cb, double cc):
    cdef double d = fc - cc
    if d < 0.0:
        d = 0.0
    return cb * d * d + ca


cpdef double opt_mem_freq(double a_pow, double gamma, double t_core, double c_mem,
                          double fm_min, double fm_max):
    cdef double xi
    if gamma <= 0.0:
        return fm_max
    if t_core > 0.0:
        xi = sqrt(a_pow * c_mem / (gamma * t_core))
    else:
        xi = INFINITY
    if xi < fm_min:
        return fm_min
    if xi > fm_max:
        return fm_max
    return xi


cpdef double energy_on_curve(double v, double p0, double gamma, double c, double d_work,
                             double delta, double t0, double ca, double cb, double cc,
                             double fm_min, double fm_max):
    cdef double fc = curve(v, ca, cb, cc)
    cdef double a_pow = p0 + c * v * v * fc
    cdef double t_core = t0 + d_work * delta / fc
    cdef double c_mem = d_work * (1.0 - delta)
    cdef double fm = opt_mem_freq(a_pow, gamma, t_core, c_mem, fm_min, fm_max)
    return (a_pow + gamma * fm) * (t_core + c_mem / fm)


cpdef double fc_for_budget(double fm, double budget, double d_work, double delta, double t0):
    cdef double den = budget - t0 - d_work * (1.0 - delta) / fm
    if den <= 0.0:
        return INFINITY
    return d_work * delta / den


cpdef double power_on_budget(double fm, double budget, double p0, double gamma, double c,
                             double d_work, double delta, double t0, double ca, double cb,
                             double cc, double v_floor, double v_max):
    cdef double fc = fc_for_budget(fm, budget, d_work, delta, t0)
    cdef double v
    if fc <= curve(v_floor, ca, cb, cc):
        v = v_floor
    else:
        v = curve_inverse(fc, ca, cb, cc)
        if v > v_max:
            v = v_max
    return p0 + gamma * fm + c * v * v * fc


cdef inline double _objective(int mode, double x, Params* p):
    if mode == 0:
        return energy_on_curve(x, p.p0, p.gamma, p.c, p.d_work, p.delta, p.t0,
                               p.ca, p.cb, p.cc, p.fm_min, p.fm_max)
    return power_on_budget(x, p.budget, p.p0, p.gamma, p.c, p.d_work, p.delta, p.t0,
                           p.ca, p.cb, p.cc, p.v_floor, p.v_max)


cdef tuple _scan_golden(int mode, Params* p, double lo, double hi, int n_scan, double tol,
                        bint prefer_high):
    cdef double step, x, y, best_f, a, b, c, d, fc_, fd, x0
    cdef int i, best_i
    if hi - lo <= tol:
        x = hi if prefer_high else lo
        return x, _objective(mode, x, p)
    step = (hi - lo) / (n_scan - 1)
    best_i = 0
    best_f = INFINITY
    for i in range(n_scan):
        x = hi if i == n_scan - 1 else lo + i * step
        y = _objective(mode, x, p)
        if y < best_f or (prefer_high and y == best_f):
            best_i = i
            best_f = y
    a = lo + (best_i - 1 if best_i > 0 else 0) * step
    b = lo + (best_i + 1) * step
    if b > hi:
        b = hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc_ = _objective(mode, c, p)
    fd = _objective(mode, d, p)
    while b - a > tol:
        if fc_ <= fd:
            b = d
            d = c
            fd = fc_
            c = b - INV_PHI * (b - a)
            fc_ = _objective(mode, c, p)
        else:
            a = c
            c = d
            fc_ = fd
            d = a + INV_PHI * (b - a)
            fd = _objective(mode, d, p)
    if fc_ <= fd:
        x, y = c, fc_
    else:
        x, y = d, fd
    x0 = hi if best_i == n_scan - 1 else lo + best_i * step
    if best_f < y or (prefer_high and best_f == y and x0 > x):
        return x0, best_f
    return x, y


def solve_unconstrained(double p0, double gamma, double c, double d_work, double delta,
                        double t0, double ca, double cb, double cc, double v_lo, double v_hi,
                        double fm_min, double fm_max, int n_scan, double tol):
    cdef Params p
    p.p0 = p0; p.gamma = gamma; p.c = c; p.d_work = d_work; p.delta = delta; p.t0 = t0
    p.ca = ca; p.cb = cb; p.cc = cc; p.fm_min = fm_min; p.fm_max = fm_max
    p.budget = 0.0; p.v_floor = 0.0; p.v_max = 0.0
    return _scan_golden(0, &p, v_lo, v_hi, n_scan, tol, False)


def solve_budget(double budget, double p0, double gamma, double c, double d_work,
                 double delta, double t0, double ca, double cb, double cc, double v_floor,
                 double v_max, double fm_lo, double fm_hi, int n_scan, double tol):
    cdef Params p
    p.p0 = p0; p.gamma = gamma; p.c = c; p.d_work = d_work; p.delta = delta; p.t0 = t0
    p.ca = ca; p.cb = cb; p.cc = cc; p.fm_min = 0.0; p.fm_max = 0.0
    p.budget = budget; p.v_floor = v_floor; p.v_max = v_max
    return _scan_golden(1, &p, fm_lo, fm_hi, n_scan, tol, True)
