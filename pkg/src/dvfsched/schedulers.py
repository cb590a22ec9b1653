"""EDL deferral-threshold scheduler and the comparison heuristics.

Offline algorithms place tasks on abstract pairs and then group those pairs
into servers; online algorithms drive an :class:`~dvfsched.cluster.OnlineCluster`
slot by slot. Ties on finish time, deadline, utilization or length are broken by
lowest pair index, then lowest task id.
"""
from __future__ import annotations

import enum
import heapq
from collections import defaultdict
from dataclasses import dataclass, field

from .cluster import (
    EPS,
    ClusterConfig,
    EnergyLedger,
    OnlineCluster,
    Pair,
    account_offline,
    assign,
)
from .errors import CapacityError, ValidationError
from .model import WIDE, ScalingDomain
from .optimizer import Configuration, Priority, configure_task_set, readjust, theta_floor


class Algorithm(str, enum.Enum):
    EDL = "EDL"
    EDF_BF = "EDF-BF"
    EDF_WF = "EDF-WF"
    LPT_FF = "LPT-FF"
    BIN_PACKING = "BIN-PACKING"


OFFLINE_ALGORITHMS = tuple(Algorithm)
ONLINE_ALGORITHMS = (Algorithm.EDL, Algorithm.BIN_PACKING)


@dataclass(frozen=True)
class SchedulerConfig:
    algorithm: Algorithm = Algorithm.EDL
    theta: float = 1.0
    dvfs_enabled: bool = True
    mode: str = "offline"

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if not 0 < self.theta <= 1:
            raise ValidationError("theta must lie in (0, 1]")
        if self.mode not in ("offline", "online"):
            raise ValidationError("mode must be 'offline' or 'online'")
        allowed = OFFLINE_ALGORITHMS if self.mode == "offline" else ONLINE_ALGORITHMS
        if self.algorithm not in allowed:
            raise ValidationError(f"{self.algorithm.value} is not available in {self.mode} mode")


@dataclass
class Placement:
    assignments: dict  # task id -> Assignment
    m1: int
    ledger: EnergyLedger
    events: list
    occupied: list = field(default_factory=list)  # M(T) per slot (online)
    infeasible: list = field(default_factory=list)  # task ids that could not be scheduled

    def pair_contents(self):
        """Task ids per pair id, in execution order."""
        out = defaultdict(list)
        for a in sorted(self.assignments.values(), key=lambda a: (a.pair_id, a.start)):
            out[a.pair_id].append(a.task.id)
        return dict(out)


def _edf_key(t):
    return (t.deadline, t.id)


class _PairPool:
    """Abstract occupied pairs for offline placement."""

    def __init__(self, capacity: int):
        self.pairs: list[Pair] = []
        self.capacity = capacity
        self._heap = []  # (mu, index) for shortest-processing-time lookups

    def open(self) -> Pair:
        if len(self.pairs) >= self.capacity:
            raise CapacityError(f"more than {self.capacity} CPU-GPU pairs required")
        p = Pair(len(self.pairs))
        self.pairs.append(p)
        return p

    def place(self, task, pair: Pair):
        assign(pair, task, max(pair.mu, task.arrival))
        heapq.heappush(self._heap, (pair.mu, pair.pair_id))

    def place_new(self, task):
        self.place(task, self.open())

    def spt(self) -> Pair | None:
        while self._heap:
            mu, i = self._heap[0]
            if self.pairs[i].mu == mu:
                return self.pairs[i]
            heapq.heappop(self._heap)
        return None


def _fits(task, mu: float) -> bool:
    return task.deadline - max(mu, task.arrival) >= task.t_hat - EPS


def _try_readjust(task, start: float, theta: float, domain: ScalingDomain):
    """Readjusted task fitting ``[start, deadline]``, or None if the threshold forbids it."""
    budget = task.deadline - start
    if budget < task.t_hat and budget >= theta_floor(task, theta):
        return readjust(task, budget, domain)
    return None


def _place_edl_offline(pool: _PairPool, tasks, theta, domain):
    for t in sorted(tasks, key=_edf_key):
        spt = pool.spt()
        if spt is not None and _fits(t, spt.mu):
            pool.place(t, spt)
            continue
        if spt is not None:
            r = _try_readjust(t, max(spt.mu, t.arrival), theta, domain)
            if r is not None:
                pool.place(r, spt)
                continue
        pool.place_new(t)


def _place_fit(pool: _PairPool, tasks, variant: Algorithm):
    if variant is Algorithm.LPT_FF:
        order = sorted(tasks, key=lambda t: (-t.t_hat, t.id))
    else:
        order = sorted(tasks, key=_edf_key)
    for t in order:
        feasible = [p for p in pool.pairs if _fits(t, p.mu)]
        if not feasible:
            pool.place_new(t)
        elif variant is Algorithm.EDF_BF:
            pool.place(t, min(feasible, key=lambda p: (-p.mu, p.pair_id)))
        elif variant is Algorithm.EDF_WF:
            pool.place(t, min(feasible, key=lambda p: (p.mu, p.pair_id)))
        else:
            pool.place(t, feasible[0])


def worst_fit_choice(loads, u: float):
    """Index of the least-loaded bin that can take utilization ``u`` (<= 1), else None."""
    best = None
    for i, load in enumerate(loads):
        if load + u <= 1.0 + EPS and (best is None or load < loads[best]):
            best = i
    return best


def _place_worst_fit(pool: _PairPool, tasks):
    loads: list[float] = []
    for t in sorted(tasks, key=_edf_key):
        i = worst_fit_choice(loads, t.utilization)
        if i is not None and _fits(t, pool.pairs[i].mu):
            pool.place(t, pool.pairs[i])
            loads[i] += t.utilization
        else:
            pool.place_new(t)
            loads.append(t.utilization)


def _offline_pairs(tasks, algorithm, theta, domain, capacity) -> _PairPool:
    pool = _PairPool(capacity)
    if algorithm is Algorithm.BIN_PACKING:
        _place_worst_fit(pool, tasks)
        return pool
    prior = sorted((t for t in tasks if t.priority is Priority.DEADLINE), key=_edf_key)
    rest = [t for t in tasks if t.priority is not Priority.DEADLINE]
    for t in prior:
        pool.place_new(t)
    if algorithm is Algorithm.EDL:
        _place_edl_offline(pool, rest, theta, domain)
    else:
        _place_fit(pool, rest, algorithm)
    return pool


def schedule_offline(tasks, cluster: ClusterConfig, config: SchedulerConfig, domain: ScalingDomain = WIDE) -> Placement:
    """Place a batch of configured tasks (all arriving at 0) and account its energy."""
    if any(t.arrival != 0 for t in tasks):
        raise ValidationError("offline scheduling requires every arrival to be 0")
    theta = config.theta if config.dvfs_enabled else 1.0
    pool = _offline_pairs(tasks, config.algorithm, theta, domain, cluster.total_pairs)
    ledger, events, assignments = account_offline(pool.pairs, cluster)
    return Placement({a.task.id: a for a in assignments}, len(pool.pairs), ledger, events)


def edl_offline(tasks, cluster, theta=1.0, domain=WIDE) -> Placement:
    return schedule_offline(tasks, cluster, SchedulerConfig(Algorithm.EDL, theta), domain)


def baseline_offline(tasks, cluster, variant, domain=WIDE) -> Placement:
    return schedule_offline(tasks, cluster, SchedulerConfig(Algorithm(variant)), domain)


def schedule_online(
    tasks,
    cluster_cfg: ClusterConfig,
    config: SchedulerConfig,
    domain: ScalingDomain = WIDE,
    horizon: int = 1440,
) -> Placement:
    """Slot-driven simulation: initial batch at slot 0, arrivals in slots 1..horizon."""
    theta = config.theta if config.dvfs_enabled else 1.0
    cluster = OnlineCluster(cluster_cfg)
    batch, by_slot, rejected = [], defaultdict(list), []
    for t in tasks:
        a = t.arrival
        if a != int(a) or a < 0:
            raise ValidationError(f"task {t.id}: online arrivals must be whole slots")
        if a > horizon:
            rejected.append(t.id)
        elif a == 0:
            batch.append(t)
        else:
            by_slot[int(a)].append(t)

    assignments = {}
    occupied = []
    m1 = 0

    # slot 0: the initial batch goes through the offline algorithm, then the server mapping
    if batch:
        pool = _offline_pairs(batch, config.algorithm, theta, domain, cluster_cfg.total_pairs)
        m1 = len(pool.pairs)
        _, _, mapped = account_offline(pool.pairs, cluster_cfg)
        for sid in sorted({a.pair_id // cluster_cfg.pairs_per_server for a in mapped}):
            cluster.turn_on(cluster.servers[sid])
        for a in sorted(mapped, key=lambda a: (a.start, a.pair_id)):
            assignments[a.task.id] = cluster.place(a.task, cluster.pairs[a.pair_id], a.start)
    occupied.append(cluster.n_on)

    slot = 0
    while slot < horizon or not cluster.drained:
        slot += 1
        cluster.advance_slot(slot)
        arrivals = sorted(by_slot.get(slot, ()), key=_edf_key)
        for t in arrivals:
            active = cluster.active_pairs()
            placed = None
            if config.algorithm is Algorithm.EDL:
                if active:
                    spt = min(active, key=lambda p: (p.mu, p.pair_id))
                    start = max(slot, spt.mu)
                    if _fits(t, start):
                        placed = cluster.place(t, spt, start)
                    else:
                        r = _try_readjust(t, start, theta, domain)
                        if r is not None:
                            placed = cluster.place(r, spt, start)
            else:
                for p in active:
                    if _fits(t, max(slot, p.mu)):
                        placed = cluster.place(t, p, max(slot, p.mu))
                        break
            if placed is None:
                server = cluster.turn_on_next()
                placed = cluster.place(t, server.pairs[0], slot)
                m1 += 1
            assignments[t.id] = placed
        occupied.append(cluster.n_on)
        if slot > 10 * horizon + 10**6:
            raise RuntimeError("simulation failed to drain")

    return Placement(assignments, m1, cluster.ledger, cluster.events, occupied, rejected)


def edl_online(tasks, cluster, theta=1.0, domain=WIDE, horizon=1440) -> Placement:
    return schedule_online(tasks, cluster, SchedulerConfig(Algorithm.EDL, theta, mode="online"), domain, horizon)


def bin_packing(tasks, cluster, domain=WIDE, horizon=1440, mode="online") -> Placement:
    cfg = SchedulerConfig(Algorithm.BIN_PACKING, mode=mode)
    if mode == "offline":
        return schedule_offline(tasks, cluster, cfg, domain)
    return schedule_online(tasks, cluster, cfg, domain, horizon)


def schedule(configured, cluster: ClusterConfig, config: SchedulerConfig, domain=WIDE, horizon=1440) -> Placement:
    """Dispatch on mode; ``configured`` is a list of OptimizedTask."""
    if config.mode == "offline":
        return schedule_offline(configured, cluster, config, domain)
    return schedule_online(configured, cluster, config, domain, horizon)


def run(profiles, cluster: ClusterConfig, config: SchedulerConfig, domain=WIDE, horizon=1440) -> Placement:
    """Configure DVFS settings for raw profiles, then schedule the feasible ones."""
    conf: Configuration = configure_task_set(profiles, domain, config.dvfs_enabled)
    placement = schedule(conf.tasks, cluster, config, domain, horizon)
    placement.infeasible = [e.task_id for e in conf.infeasible] + placement.infeasible
    return placement

