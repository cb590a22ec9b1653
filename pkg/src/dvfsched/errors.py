"""Exception hierarchy."""


class DvfsError(Exception):
    """Base class for all package errors."""


class ValidationError(DvfsError, ValueError):
    """A value violates a type invariant."""


class DomainError(DvfsError, ValueError):
    """A voltage or frequency lies outside the scaling domain."""


class CalibrationError(DvfsError, ValueError):
    pass


class InfeasibleDeadlineError(DvfsError):
    """The task cannot finish within its budget even at the fastest setting."""

    def __init__(self, task_id, budget, t_min):
        super().__init__(f"task {task_id}: budget {budget:.6g} < minimum execution time {t_min:.6g}")
        self.task_id = task_id
        self.budget = budget
        self.t_min = t_min


class SchedulingError(DvfsError, RuntimeError):
    """A scheduler produced an illegal placement (indicates a bug)."""


class CapacityError(DvfsError):
    """More CPU-GPU pairs are needed than the cluster has."""


class ParseError(DvfsError, ValueError):
    def __init__(self, path, line, msg):
        super().__init__(f"{path}:{line}: {msg}")
        self.path = path
        self.line = line
