"""Energy-aware, deadline-constrained task scheduling on CPU-GPU clusters with GPU DVFS."""
from .errors import (
    CalibrationError,
    CapacityError,
    DomainError,
    DvfsError,
    InfeasibleDeadlineError,
    ParseError,
    SchedulingError,
    ValidationError,
)
from .model import (
    NARROW,
    WIDE,
    DvfsSetting,
    ScalingDomain,
    SqrtAffineCurve,
    TaskProfile,
    calibrate,
    energy,
    exec_time,
    g1,
    g1_inverse,
    power,
)
from .optimizer import (
    OptimizedTask,
    Priority,
    classify,
    configure_task_set,
    min_exec_time,
    optimal_memory_freq,
    optimize_unconstrained,
    optimize_with_deadline,
)

__version__ = "0.1.0"
