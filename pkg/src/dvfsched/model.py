"""GPU DVFS scaling domain plus the power, performance and energy models of a task.

All voltages and frequencies are normalized to the factory default setting,
so ``DvfsSetting(1, 1, 1)`` is the default operating point of the GPU.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import CalibrationError, DomainError, ValidationError

_EPS = 1e-12


@dataclass(frozen=True)
class SqrtAffineCurve:
    """Maximum stable core frequency as ``sqrt((v - offset) / divisor) + shift``."""

    offset: float = 0.5
    divisor: float = 2.0
    shift: float = 0.5

    def __post_init__(self):
        if self.divisor <= 0:
            raise ValidationError("divisor must be positive")

    def __call__(self, vc: float) -> float:
        return math.sqrt(max(vc - self.offset, 0.0) / self.divisor) + self.shift

    def inverse(self, fc: float) -> float:
        d = max(fc - self.shift, 0.0)
        return self.divisor * d * d + self.offset


@dataclass(frozen=True)
class ScalingDomain:
    """Box of legal (core voltage, core frequency, memory frequency) settings.

    Core frequency is further capped by ``curve(vc)``. ``vc_floor`` is the lowest
    voltage at which ``fc_min`` is still reachable; for presets whose ``vc_min``
    cannot support ``fc_min`` (the narrow interval) it is slightly above ``vc_min``.
    """

    vc_min: float = 0.5
    vc_max: float = 1.2
    fc_min: float = 0.5
    fm_min: float = 0.5
    fm_max: float = 1.2
    curve: SqrtAffineCurve = field(default_factory=SqrtAffineCurve)
    name: str = "wide"

    def __post_init__(self):
        if not 0 < self.vc_min <= self.vc_max:
            raise ValidationError("need 0 < vc_min <= vc_max")
        if not 0 < self.fm_min <= self.fm_max:
            raise ValidationError("need 0 < fm_min <= fm_max")
        if not 0 < self.fc_min <= self.curve(self.vc_max):
            raise ValidationError("fc_min must be positive and reachable at vc_max")
        if self.curve(self.vc_max) <= self.curve(self.vc_min) and self.vc_max > self.vc_min:
            raise ValidationError("boundary curve must be strictly increasing")

    @property
    def vc_floor(self) -> float:
        if self.curve(self.vc_min) >= self.fc_min:
            return self.vc_min
        return self.curve.inverse(self.fc_min)

    @property
    def fc_max(self) -> float:
        return self.curve(self.vc_max)

    def contains(self, s: "DvfsSetting", tol: float = 1e-9) -> bool:
        return (
            self.vc_min - tol <= s.vc <= self.vc_max + tol
            and self.fm_min - tol <= s.fm <= self.fm_max + tol
            and self.fc_min - tol <= s.fc <= self.curve(s.vc) + tol
        )


WIDE = ScalingDomain()
NARROW = ScalingDomain(vc_min=0.8, vc_max=1.24, fc_min=0.89, fm_min=0.8, fm_max=1.1, name="narrow")
PRESETS = {"wide": WIDE, "narrow": NARROW}


def get_domain(name: str) -> ScalingDomain:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown domain preset {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class DvfsSetting:
    vc: float
    fc: float
    fm: float


DEFAULT_SETTING = DvfsSetting(1.0, 1.0, 1.0)


@dataclass(frozen=True)
class TaskProfile:
    """Calibrated task model.

    Stored through its calibration anchors (``p_star``, ``t_star``) so that
    files round-trip exactly; ``c`` and ``d_work`` are derived from them.
    """

    id: str
    p0: float
    gamma: float
    p_star: float
    t0: float
    t_star: float
    delta: float
    arrival: float = 0.0
    deadline: float = math.inf
    c: float = field(init=False, repr=False, compare=False)
    d_work: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "c", self.p_star - self.p0 - self.gamma)
        object.__setattr__(self, "d_work", self.t_star - self.t0)
        for name in ("p0", "gamma", "t0"):
            if not getattr(self, name) >= 0:
                raise ValidationError(f"task {self.id}: {name} must be >= 0")
        if not self.c > 0:
            raise ValidationError(f"task {self.id}: p_star must exceed p0 + gamma (c > 0)")
        if not self.d_work > 0:
            raise ValidationError(f"task {self.id}: t_star must exceed t0 (d_work > 0)")
        if not 0 <= self.delta <= 1:
            raise ValidationError(f"task {self.id}: delta must lie in [0, 1]")
        if not self.deadline > self.arrival:
            raise ValidationError(f"task {self.id}: deadline must exceed arrival")

    @classmethod
    def from_coefficients(cls, id, p0, gamma, c, d_work, delta, t0, arrival=0.0, deadline=math.inf):
        return cls(id, p0, gamma, p0 + gamma + c, t0, t0 + d_work, delta, arrival, deadline)

    @property
    def slack(self) -> float:
        return self.deadline - self.arrival


def calibrate(p0, p_star, gamma, t0, t_star, delta, *, id="task", arrival=0.0, deadline=math.inf) -> TaskProfile:
    """Recover ``c`` and ``D`` from the power/time measured at the default setting."""
    if p_star - p0 - gamma <= 0:
        raise CalibrationError(f"p_star={p_star} must exceed p0 + gamma = {p0 + gamma}")
    if t_star <= t0:
        raise CalibrationError(f"t_star={t_star} must exceed t0={t0}")
    try:
        return TaskProfile(id, p0, gamma, p_star, t0, t_star, delta, arrival, deadline)
    except ValidationError as exc:
        raise CalibrationError(str(exc)) from exc


def g1(vc: float, domain: ScalingDomain = WIDE) -> float:
    if not domain.vc_min - _EPS <= vc <= domain.vc_max + _EPS:
        raise DomainError(f"core voltage {vc} outside [{domain.vc_min}, {domain.vc_max}]")
    return domain.curve(vc)


def g1_inverse(fc: float, domain: ScalingDomain = WIDE) -> float:
    lo, hi = domain.curve(domain.vc_min), domain.curve(domain.vc_max)
    if not lo - _EPS <= fc <= hi + 1e-9:
        raise DomainError(f"core frequency {fc} outside curve range [{lo}, {hi}]")
    return min(max(domain.curve.inverse(fc), domain.vc_min), domain.vc_max)


def power(s: DvfsSetting, p: TaskProfile) -> float:
    return p.p0 + p.gamma * s.fm + p.c * s.vc * s.vc * s.fc


def exec_time(s: DvfsSetting, p: TaskProfile) -> float:
    return p.d_work * (p.delta / s.fc + (1.0 - p.delta) / s.fm) + p.t0


def energy(s: DvfsSetting, p: TaskProfile) -> float:
    return power(s, p) * exec_time(s, p)
