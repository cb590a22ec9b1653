"""Reproducible task-set generation and the JSON-lines task-set file format.

All randomness comes from ``numpy.random.Generator(PCG64(seed))`` so task sets
are identical across platforms for a given seed and configuration.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .model import TaskProfile

FORMAT_TAG = "dvfsched-taskset"
LIBRARY_TAG = "dvfsched-library"
FORMAT_VERSION = 1

# measured ranges of the benchmark application library
P_STAR_RANGE = (175.0, 206.0)
GAMMA_RATIO_RANGE = (0.1, 0.2)
P0_RATIO_RANGE = (0.20, 0.41)
DELTA_RANGE = (0.07, 0.91)
D_WORK_RANGE = (1.66, 7.61)
T0_RANGE = (0.1, 0.95)


@dataclass(frozen=True)
class AppLibraryEntry:
    p_star: float
    gamma_ratio: float
    p0_ratio: float
    delta: float
    d_work: float
    t0: float

    def __post_init__(self):
        for name, (lo, hi) in (
            ("p_star", P_STAR_RANGE),
            ("gamma_ratio", GAMMA_RATIO_RANGE),
            ("p0_ratio", P0_RATIO_RANGE),
            ("delta", DELTA_RANGE),
            ("d_work", D_WORK_RANGE),
            ("t0", T0_RANGE),
        ):
            v = getattr(self, name)
            if not lo <= v <= hi:
                raise ValidationError(f"library entry {name}={v} outside [{lo}, {hi}]")

    def profile(self, id="app", scale: float = 1.0) -> TaskProfile:
        """Task profile of this application with its time terms stretched by ``scale``."""
        t0 = scale * self.t0
        t_star = scale * (self.t0 + self.d_work)
        return TaskProfile(
            id,
            p0=self.p0_ratio * self.p_star,
            gamma=self.gamma_ratio * self.p_star,
            p_star=self.p_star,
            t0=t0,
            t_star=t_star,
            delta=self.delta,
        )


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    mode: str = "offline"
    u_off: float = 0.4
    u_on: float = 1.6
    horizon: int = 1440
    scale_range: tuple = (10, 50)
    library_size: int = 20
    baseline_pairs: int = 1024

    def __post_init__(self):
        if self.mode not in ("offline", "online"):
            raise ValidationError("mode must be 'offline' or 'online'")
        if self.u_off < 0 or self.u_on < 0 or (self.u_off == 0 and self.mode == "offline"):
            raise ValidationError("utilizations must be positive")
        if self.horizon < 1:
            raise ValidationError("horizon must be >= 1")
        lo, hi = self.scale_range
        if not (int(lo) == lo and int(hi) == hi and 1 <= lo <= hi):
            raise ValidationError("scale_range must be positive integers lo <= hi")
        if self.library_size < 1 or self.baseline_pairs < 1:
            raise ValidationError("library_size and baseline_pairs must be positive")

    @classmethod
    def for_cluster(cls, total_pairs: int, **kw) -> "GeneratorConfig":
        """Normalize utilization to half the cluster, as the 1024-of-2048 reference does."""
        return cls(baseline_pairs=max(1, total_pairs // 2), **kw)


def build_library(seed: int, size: int = 20) -> list[AppLibraryEntry]:
    if size < 1:
        raise ValidationError("library size must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    for _ in range(size):
        out.append(AppLibraryEntry(
            p_star=float(rng.uniform(*P_STAR_RANGE)),
            gamma_ratio=float(rng.uniform(*GAMMA_RATIO_RANGE)),
            p0_ratio=float(rng.uniform(*P0_RATIO_RANGE)),
            delta=float(rng.uniform(*DELTA_RANGE)),
            d_work=float(rng.uniform(*D_WORK_RANGE)),
            t0=float(rng.uniform(*T0_RANGE)),
        ))
    return out


def _open_uniform(rng) -> float:
    u = 0.0
    while u == 0.0:
        u = float(rng.random())
    return u


def gen_tasks(library, target: float, rng, scale_range=(10, 50), prefix="t", start=0, arrival=0.0):
    """Draw tasks until the utilization sum reaches ``target``, trimming the last one.

    ``target`` is the absolute utilization sum (``U_J * baseline_pairs``). Each task
    is a random library application with ``t0`` and ``t_star`` scaled by a random
    integer; its deadline leaves slack ``t_star / u``.
    """
    lo, hi = scale_range
    drawn = []
    total = 0.0
    while total < target:
        entry = library[int(rng.integers(len(library)))]
        k = int(rng.integers(lo, hi + 1))
        u = _open_uniform(rng)
        drawn.append((entry, k, u))
        total += u
    if drawn:
        entry, k, _ = drawn[-1]
        residual = target - math.fsum(u for *_, u in drawn[:-1])
        drawn[-1] = (entry, k, residual)
    tasks = []
    for i, (entry, k, u) in enumerate(drawn):
        base = entry.profile(scale=k)
        tasks.append(TaskProfile(
            f"{prefix}{start + i:06d}", base.p0, base.gamma, base.p_star, base.t0, base.t_star,
            base.delta, arrival, arrival + base.t_star / u,
        ))
    return tasks


def task_utilization(p: TaskProfile) -> float:
    return p.t_star / p.slack


def gen_arrivals(n_tasks: int, horizon: int, rng) -> np.ndarray:
    """Per-slot arrival counts for slots 1..horizon summing exactly to ``n_tasks``.

    Counts are Poisson with rate ``n_tasks / horizon``; the total is then corrected
    by incrementing or decrementing uniformly random slots (never below zero).
    """
    if n_tasks < 0 or horizon < 1:
        raise ValidationError("need n_tasks >= 0 and horizon >= 1")
    if n_tasks == 0:
        return np.zeros(horizon, dtype=np.int64)
    counts = rng.poisson(n_tasks / horizon, size=horizon).astype(np.int64)
    diff = int(counts.sum()) - n_tasks
    while diff > 0:
        i = int(rng.integers(horizon))
        if counts[i] > 0:
            counts[i] -= 1
            diff -= 1
    while diff < 0:
        counts[int(rng.integers(horizon))] += 1
        diff += 1
    return counts


def shift_arrivals(tasks, counts):
    """Give tasks consecutive arrival slots following ``counts`` (index 0 is slot 1)."""
    out = []
    it = iter(tasks)
    for slot, n in enumerate(counts, start=1):
        for _ in range(int(n)):
            t = next(it)
            out.append(TaskProfile(
                t.id, t.p0, t.gamma, t.p_star, t.t0, t.t_star, t.delta, float(slot), slot + t.deadline - t.arrival,
            ))
    return out


def generate(config: GeneratorConfig, library=None):
    """Full task set for one seed: the initial batch plus (online) the arrival stream."""
    rng = np.random.Generator(np.random.PCG64(config.seed))
    if library is None:
        library = build_library(config.seed, config.library_size)
    tasks = gen_tasks(library, config.u_off * config.baseline_pairs, rng, config.scale_range, prefix="b")
    if config.mode == "online" and config.u_on > 0:
        stream = gen_tasks(library, config.u_on * config.baseline_pairs, rng, config.scale_range, prefix="o")
        counts = gen_arrivals(len(stream), config.horizon, rng)
        tasks += shift_arrivals(stream, counts)
    return tasks


_TASK_FIELDS = ("id", "arrival", "deadline", "p0", "gamma", "p_star", "t0", "t_star", "delta")


def _task_record(t: TaskProfile) -> dict:
    return {f: getattr(t, f) for f in _TASK_FIELDS}


def save_tasks(path, tasks) -> None:
    lines = [json.dumps({"format": FORMAT_TAG, "version": FORMAT_VERSION})]
    lines += [json.dumps(_task_record(t)) for t in tasks]
    Path(path).write_text("\n".join(lines) + "\n")


def _read_records(path, tag):
    path = Path(path)
    text = path.read_text()
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        if text.strip():
            raise ParseError(path, 1, "missing header line")
        return []
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(path, 1, f"bad header: {exc}") from None
    if not isinstance(header, dict) or header.get("format") != tag:
        raise ParseError(path, 1, f"expected header with format {tag!r}")
    if header.get("version") != FORMAT_VERSION:
        raise ParseError(path, 1, f"unsupported version {header.get('version')!r}")
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(path, lineno, str(exc)) from None
        if not isinstance(rec, dict):
            raise ParseError(path, lineno, "record must be an object")
        yield lineno, rec


def load_tasks(path) -> list[TaskProfile]:
    out = []
    for lineno, rec in _read_records(path, FORMAT_TAG):
        missing = [f for f in _TASK_FIELDS if f not in rec]
        if missing:
            raise ParseError(path, lineno, f"missing field(s) {', '.join(missing)}")
        try:
            vals = {f: rec[f] for f in _TASK_FIELDS}
            vals["id"] = str(vals["id"])
            for f in _TASK_FIELDS[1:]:
                vals[f] = float(vals[f])
        except (TypeError, ValueError) as exc:
            raise ParseError(path, lineno, f"non-numeric field: {exc}") from None
        try:
            out.append(TaskProfile(**vals))
        except ValidationError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from None
    return out


def save_library(path, library) -> None:
    lines = [json.dumps({"format": LIBRARY_TAG, "version": FORMAT_VERSION})]
    lines += [json.dumps(asdict(e)) for e in library]
    Path(path).write_text("\n".join(lines) + "\n")


def load_library(path) -> list[AppLibraryEntry]:
    names = [f.name for f in fields(AppLibraryEntry)]
    out = []
    for lineno, rec in _read_records(path, LIBRARY_TAG):
        missing = [n for n in names if n not in rec]
        if missing:
            raise ParseError(path, lineno, f"missing field(s) {', '.join(missing)}")
        try:
            out.append(AppLibraryEntry(**{n: float(rec[n]) for n in names}))
        except ValidationError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from None
    return out


def example_tasks() -> list[TaskProfile]:
    """The five-task worked example (gamma = 0, identical default time and power)."""
    rows = [("J1", 0.0, 50), ("J2", 1.0, 36), ("J3", 0.5, 60), ("J4", 0.8, 100), ("J5", 0.2, 300)]
    return [TaskProfile(i, 100.0, 0.0, 300.0, 5.0, 30.0, d, 0.0, float(dl)) for i, d, dl in rows]
