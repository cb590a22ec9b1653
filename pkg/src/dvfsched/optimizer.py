"""Energy-optimal DVFS settings for single tasks, with and without a deadline."""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import NamedTuple

from . import kernels
from ._kernels_py import _scan_golden
from .errors import InfeasibleDeadlineError
from .model import (
    DEFAULT_SETTING,
    WIDE,
    DvfsSetting,
    ScalingDomain,
    TaskProfile,
    exec_time,
    power,
)

N_SCAN = 64
TOL = 1e-6


class Priority(str, enum.Enum):
    DEADLINE = "deadline-prior"
    ENERGY = "energy-prior"


@dataclass(frozen=True)
class OptimizedTask:
    profile: TaskProfile
    setting: DvfsSetting
    t_hat: float
    p_hat: float
    priority: Priority
    t_min: float
    readjusted: bool = False

    @property
    def id(self) -> str:
        return self.profile.id

    @property
    def energy(self) -> float:
        return self.p_hat * self.t_hat

    @property
    def deadline(self) -> float:
        return self.profile.deadline

    @property
    def arrival(self) -> float:
        return self.profile.arrival

    @property
    def utilization(self) -> float:
        return self.t_hat / self.profile.slack


def _finish(profile, setting, priority, t_min, readjusted=False) -> OptimizedTask:
    return OptimizedTask(
        profile, setting, exec_time(setting, profile), power(setting, profile), priority, t_min, readjusted
    )


def _curve_args(domain: ScalingDomain):
    c = domain.curve
    return c.offset, c.divisor, c.shift


def optimal_memory_freq(vc: float, fc: float, profile: TaskProfile, domain: ScalingDomain = WIDE) -> float:
    """Closed-form energy-minimal memory frequency for a fixed core setting, clamped to the domain."""
    a_pow = profile.p0 + profile.c * vc * vc * fc
    t_core = profile.t0 + profile.d_work * profile.delta / fc
    c_mem = profile.d_work * (1.0 - profile.delta)
    return kernels.opt_mem_freq(a_pow, profile.gamma, t_core, c_mem, domain.fm_min, domain.fm_max)


def max_setting(domain: ScalingDomain) -> DvfsSetting:
    return DvfsSetting(domain.vc_max, domain.fc_max, domain.fm_max)


def min_exec_time(profile: TaskProfile, domain: ScalingDomain = WIDE) -> float:
    return exec_time(max_setting(domain), profile)


def classify(profile: TaskProfile, t_hat: float) -> Priority:
    return Priority.DEADLINE if profile.slack < t_hat else Priority.ENERGY


def _best_on_curve(profile: TaskProfile, domain: ScalingDomain) -> DvfsSetting:
    p = profile
    ca, cb, cc = _curve_args(domain)
    v_lo = domain.vc_floor
    v, e = kernels.solve_unconstrained(
        p.p0, p.gamma, p.c, p.d_work, p.delta, p.t0, ca, cb, cc,
        v_lo, domain.vc_max, domain.fm_min, domain.fm_max, N_SCAN, TOL,
    )
    fc = domain.curve(v)
    best = DvfsSetting(v, fc, optimal_memory_freq(v, fc, p, domain))

    # Below the curve at the lowest voltage: only reachable when fc_min < curve(vc_min).
    fc_top = domain.curve(domain.vc_min)
    if domain.fc_min < fc_top:
        vc = domain.vc_min

        def seg(fc):
            s = DvfsSetting(vc, fc, optimal_memory_freq(vc, fc, p, domain))
            return power(s, p) * exec_time(s, p)

        fc, e_seg = _scan_golden(seg, domain.fc_min, fc_top, N_SCAN, TOL, True)
        if e_seg < e:
            best = DvfsSetting(vc, fc, optimal_memory_freq(vc, fc, p, domain))
    return best


def optimize_unconstrained(profile: TaskProfile, domain: ScalingDomain = WIDE) -> OptimizedTask:
    """Energy-minimal setting ignoring the deadline.

    Minimal energy always sits at the highest core frequency the voltage allows,
    so the search is one-dimensional in core voltage with the memory frequency
    given in closed form.
    """
    setting = _best_on_curve(profile, domain)
    t = exec_time(setting, profile)
    return _finish(profile, setting, classify(profile, t), min_exec_time(profile, domain))


def _voltage_for(fc: float, domain: ScalingDomain) -> float:
    if fc <= domain.curve(domain.vc_floor):
        return domain.vc_floor
    return min(domain.curve.inverse(fc), domain.vc_max)


def _feasible_fm(profile: TaskProfile, budget: float, domain: ScalingDomain):
    """Memory-frequency interval whose implied core frequency is legal, or None."""
    p = profile
    c_mem = p.d_work * (1.0 - p.delta)
    core_work = p.d_work * p.delta
    lo, hi = domain.fm_min, domain.fm_max
    room_fast = budget - p.t0 - core_work / domain.fc_max
    if room_fast <= 0:
        return None
    lo = max(lo, c_mem / room_fast)
    room_slow = budget - p.t0 - core_work / domain.fc_min
    if room_slow > 0:
        hi = min(hi, c_mem / room_slow)
    if lo > hi:
        # rounding at the fastest corner
        if lo - hi < 1e-12:
            return hi, hi
        return None
    return lo, hi


def optimize_with_deadline(
    profile: TaskProfile,
    budget: float,
    domain: ScalingDomain = WIDE,
    unconstrained: OptimizedTask | None = None,
) -> OptimizedTask:
    """Energy-minimal setting whose execution time equals ``budget``.

    Returns the unconstrained optimum when it already fits the budget.
    """
    p = profile
    t_min = min_exec_time(p, domain)
    if budget < t_min * (1 - 1e-12):
        raise InfeasibleDeadlineError(p.id, budget, t_min)
    unc = unconstrained or optimize_unconstrained(p, domain)
    if budget >= unc.t_hat:
        return unc
    priority = unc.priority
    if budget <= t_min:
        return _finish(p, max_setting(domain), priority, t_min, True)

    if p.delta == 1.0:
        fc = p.d_work / (budget - p.t0)
        fc = min(max(fc, domain.fc_min), domain.fc_max)
        vc = _voltage_for(fc, domain)
        setting = DvfsSetting(vc, fc, optimal_memory_freq(vc, fc, p, domain))
    elif p.delta == 0.0:
        fm = p.d_work / (budget - p.t0)
        if fm > domain.fm_max * (1 + 1e-12):
            raise InfeasibleDeadlineError(p.id, budget, t_min)
        fm = min(max(fm, domain.fm_min), domain.fm_max)
        setting = DvfsSetting(domain.vc_floor, domain.fc_min, fm)
    else:
        interval = _feasible_fm(p, budget, domain)
        if interval is None:
            raise InfeasibleDeadlineError(p.id, budget, t_min)
        ca, cb, cc = _curve_args(domain)
        fm, _ = kernels.solve_budget(
            budget, p.p0, p.gamma, p.c, p.d_work, p.delta, p.t0, ca, cb, cc,
            domain.vc_floor, domain.vc_max, interval[0], interval[1], N_SCAN, TOL,
        )
        fc = kernels.fc_for_budget(fm, budget, p.d_work, p.delta, p.t0)
        fc = min(max(fc, domain.fc_min), domain.fc_max)
        setting = DvfsSetting(_voltage_for(fc, domain), fc, fm)
    return _finish(p, setting, priority, t_min, True)


def default_task(profile: TaskProfile) -> OptimizedTask:
    """The task pinned at the factory default setting (DVFS disabled)."""
    t = exec_time(DEFAULT_SETTING, profile)
    return _finish(profile, DEFAULT_SETTING, classify(profile, t), t)


class Configuration(NamedTuple):
    n_deadline_prior: int
    tasks: list
    infeasible: list


def configure_task(profile: TaskProfile, domain: ScalingDomain = WIDE, dvfs: bool = True) -> OptimizedTask:
    """Configure one task; raises InfeasibleDeadlineError when its slack is too short."""
    if not dvfs:
        task = default_task(profile)
        if task.priority is Priority.DEADLINE:
            raise InfeasibleDeadlineError(profile.id, profile.slack, task.t_hat)
        return task
    unc = optimize_unconstrained(profile, domain)
    if unc.priority is Priority.ENERGY:
        return unc
    task = optimize_with_deadline(profile, profile.slack, domain, unc)
    # keep the deadline-prior marker even though the time now matches the slack
    return replace(task, priority=Priority.DEADLINE, readjusted=False)


def configure_task_set(tasks, domain: ScalingDomain = WIDE, dvfs: bool = True) -> Configuration:
    """Configure every task; infeasible ones are collected rather than dropped silently."""
    out, bad = [], []
    for profile in tasks:
        try:
            out.append(configure_task(profile, domain, dvfs))
        except InfeasibleDeadlineError as exc:
            bad.append(exc)
    n1 = sum(1 for t in out if t.priority is Priority.DEADLINE)
    return Configuration(n1, out, bad)


def readjust(task: OptimizedTask, budget: float, domain: ScalingDomain = WIDE) -> OptimizedTask:
    """Shorten ``task`` to run in exactly ``budget`` (deferral-threshold readjustment)."""
    new = optimize_with_deadline(task.profile, budget, domain, unconstrained=task)
    return replace(new, priority=task.priority, readjusted=True)


def theta_floor(task: OptimizedTask, theta: float) -> float:
    """Shortest execution time a readjustment may impose: ``max(theta * t_hat, t_min)``."""
    return max(theta * task.t_hat, task.t_min)


def unconstrained_saving(profile: TaskProfile, domain: ScalingDomain = WIDE) -> float:
    """Fractional energy saving of the unconstrained optimum versus the default setting."""
    base = profile.p_star * profile.t_star
    return 1.0 - optimize_unconstrained(profile, domain).energy / base


__all__ = [
    "Priority", "OptimizedTask", "Configuration", "optimal_memory_freq", "min_exec_time",
    "classify", "optimize_unconstrained", "optimize_with_deadline", "configure_task",
    "configure_task_set", "readjust", "theta_floor", "default_task", "unconstrained_saving",
]
