"""Parameter sweeps over algorithm x servers size x theta x utilization x seed."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .cluster import ClusterConfig
from .errors import DvfsError, ValidationError
from .model import get_domain
from .optimizer import configure_task_set, optimize_unconstrained
from .schedulers import Algorithm, SchedulerConfig, schedule
from .workload import GeneratorConfig, build_library, generate


@dataclass(frozen=True)
class ExperimentSpec:
    mode: str = "offline"
    algorithms: tuple = ("EDL",)
    pairs_per_server: tuple = (1,)
    thetas: tuple = (1.0,)
    utilizations: tuple = (0.4,)
    seeds: tuple = (0,)
    dvfs: tuple = (True,)
    domain: str = "wide"
    total_pairs: int = 256
    slots: int = 1440
    p_idle: float = 37.0
    turn_on_cost: float = 90.0
    u_off: float = 0.4
    library_seed: int | None = None
    workers: int = 1
    timing: bool = False

    def __post_init__(self):
        for name in ("algorithms", "pairs_per_server", "thetas", "utilizations", "seeds", "dvfs"):
            val = tuple(getattr(self, name))
            if not val:
                raise ValidationError(f"sweep axis {name} is empty")
            object.__setattr__(self, name, val)
        object.__setattr__(self, "algorithms", tuple(Algorithm(a).value for a in self.algorithms))
        get_domain(self.domain)
        if self.mode not in ("offline", "online"):
            raise ValidationError("mode must be 'offline' or 'online'")
        for a in self.algorithms:
            SchedulerConfig(a, mode=self.mode)
        for th in self.thetas:
            SchedulerConfig(theta=th)
        for l in self.pairs_per_server:
            ClusterConfig(self.total_pairs, l)

    def generator(self, seed: int, utilization: float) -> GeneratorConfig:
        if self.mode == "offline":
            return GeneratorConfig.for_cluster(self.total_pairs, seed=seed, mode="offline",
                                               u_off=utilization, horizon=self.slots)
        return GeneratorConfig.for_cluster(self.total_pairs, seed=seed, mode="online",
                                           u_off=self.u_off, u_on=utilization, horizon=self.slots)


ROW_FIELDS = (
    "algorithm", "l", "theta", "utilization", "seed", "dvfs", "e_run", "e_idle", "e_overhead",
    "e_total", "m1", "max_servers", "infeasible", "savings", "savings_bound", "error",
)
AGG_METRICS = ("e_run", "e_idle", "e_overhead", "e_total", "m1", "max_servers", "savings")


@dataclass
class RunReport:
    spec: ExperimentSpec
    rows: list = field(default_factory=list)
    aggregates: list = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return any(r["infeasible"] or r["error"] for r in self.rows)

    def to_json(self) -> str:
        payload = {
            "spec": asdict(self.spec),
            "rows": [_fmt_row(r) for r in self.rows],
            "aggregates": [_fmt_row(r) for r in self.aggregates],
        }
        return json.dumps(payload, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["kind", *ROW_FIELDS] + (["wall_time"] if self.spec.timing else [])
        cols += ["count"] + [f"{m}_std" for m in AGG_METRICS]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in self.rows:
            w.writerow({"kind": "run", **_fmt_row(r)})
        for r in self.aggregates:
            w.writerow({"kind": "aggregate", **_fmt_row(r)})
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        if math.isnan(v):
            return None
        return float(f"{v:.6g}")
    return v


def _fmt_row(r: dict) -> dict:
    return {k: _fmt(v) for k, v in r.items()}


def _job(spec: ExperimentSpec, utilization: float, seed: int) -> list[dict]:
    """All cells for one generated task set."""
    domain = get_domain(spec.domain)
    library = build_library(seed if spec.library_seed is None else spec.library_seed)
    profiles = generate(spec.generator(seed, utilization), library)

    configured = {}
    for flag in sorted(set(spec.dvfs) | {False}):
        configured[flag] = configure_task_set(profiles, domain, flag)

    def one(algorithm, l, theta, flag):
        t0 = time.perf_counter()
        conf = configured[flag]
        row = {"algorithm": algorithm, "l": l, "theta": theta, "utilization": utilization,
               "seed": seed, "dvfs": flag, "infeasible": len(conf.infeasible), "error": ""}
        try:
            cc = ClusterConfig(spec.total_pairs, l, spec.p_idle, spec.turn_on_cost)
            pl = schedule(conf.tasks, cc, SchedulerConfig(algorithm, theta, flag, spec.mode), domain, spec.slots)
            led = pl.ledger
            row.update(e_run=led.e_run, e_idle=led.e_idle, e_overhead=led.e_overhead,
                       e_total=led.e_total, m1=pl.m1, max_servers=led.occupied_servers_max)
            row["infeasible"] += len(pl.infeasible)
        except DvfsError as exc:
            row.update(e_run=math.nan, e_idle=math.nan, e_overhead=math.nan, e_total=math.nan,
                       m1=None, max_servers=None, error=str(exc))
        row["wall_time"] = time.perf_counter() - t0
        return row

    # baseline: no DVFS, one pair per server, no idle energy (its runtime energy)
    e_base = one("EDL", 1, 1.0, False)["e_run"]
    bound = savings_bound(profiles, domain)

    rows = []
    for algorithm, l, theta, flag in itertools.product(spec.algorithms, spec.pairs_per_server, spec.thetas, spec.dvfs):
        r = one(algorithm, l, theta, flag)
        r["savings"] = 1.0 - r["e_total"] / e_base if e_base else math.nan
        r["savings_bound"] = bound
        if not spec.timing:
            r.pop("wall_time")
        rows.append({k: r.get(k) for k in ROW_FIELDS + (("wall_time",) if spec.timing else ())})
    return rows


def savings_bound(profiles, domain) -> float:
    """Aggregate saving if every task ran at its unconstrained optimum with zero idle energy."""
    e_star = math.fsum(p.p_star * p.t_star for p in profiles)
    if not e_star:
        return math.nan
    e_hat = math.fsum(optimize_unconstrained(p, domain).energy for p in profiles)
    return 1.0 - e_hat / e_star


def _cell_key(r):
    return (r["algorithm"], r["l"], r["theta"], r["utilization"], r["dvfs"])


def aggregate(rows) -> list[dict]:
    cells = {}
    for r in rows:
        cells.setdefault(_cell_key(r), []).append(r)
    out = []
    for key in sorted(cells, key=lambda k: (k[0], k[1], k[2], k[3], k[4])):
        group = cells[key]
        agg = dict(zip(("algorithm", "l", "theta", "utilization", "dvfs"), key))
        ok = [r for r in group if not r["error"]]
        agg["count"] = len(ok)
        for m in AGG_METRICS:
            vals = [float(r[m]) for r in ok if r[m] is not None and not math.isnan(float(r[m]))]
            agg[m] = statistics.fmean(vals) if vals else math.nan
            agg[f"{m}_std"] = statistics.stdev(vals) if len(vals) > 1 else (0.0 if vals else math.nan)
        out.append(agg)
    return out


def run(spec: ExperimentSpec) -> RunReport:
    jobs = [(u, s) for u in spec.utilizations for s in spec.seeds]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(_job, itertools.repeat(spec), *zip(*jobs)))
    else:
        chunks = [_job(spec, u, s) for u, s in jobs]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (_cell_key(r), r["seed"]))
    return RunReport(spec, rows, aggregate(rows))
