"""Machine model and energy accounting for CPU-GPU pairs grouped into servers.

Energy is kept in three buckets (runtime, idle, turn-on overhead). Every change
goes through :class:`Accountant`, which appends an :class:`Event` and updates the
:class:`EnergyLedger` in the same call, so the ledger can always be rebuilt from
the event log.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import CapacityError, SchedulingError, ValidationError

EPS = 1e-9


@dataclass(frozen=True)
class ClusterConfig:
    total_pairs: int = 2048
    pairs_per_server: int = 1
    p_idle: float = 37.0
    turn_on_cost: float = 90.0
    sleep_threshold: int | None = None

    def __post_init__(self):
        if self.total_pairs < 1 or self.pairs_per_server < 1:
            raise ValidationError("total_pairs and pairs_per_server must be positive")
        if self.total_pairs % self.pairs_per_server:
            raise ValidationError("total_pairs must be divisible by pairs_per_server")
        if self.p_idle < 0 or self.turn_on_cost < 0:
            raise ValidationError("p_idle and turn_on_cost must be non-negative")
        if self.sleep_threshold is not None and self.sleep_threshold < 1:
            raise ValidationError("sleep_threshold must be >= 1")

    @property
    def rho(self) -> int:
        """Idle slots before a server may sleep; defaults to floor(turn_on_cost / p_idle)."""
        if self.sleep_threshold is not None:
            return self.sleep_threshold
        if self.p_idle == 0:
            return 1
        return max(1, math.floor(self.turn_on_cost / self.p_idle))

    @property
    def n_servers(self) -> int:
        return self.total_pairs // self.pairs_per_server


class Event(NamedTuple):
    time: float
    kind: str  # turn_on | turn_off | start | finish | idle
    pair_id: int | None
    task_id: str | None
    energy: float


@dataclass
class EnergyLedger:
    e_run: float = 0.0
    e_idle: float = 0.0
    e_overhead: float = 0.0
    turn_on_count: int = 0
    occupied_servers_max: int = 0

    @property
    def e_total(self) -> float:
        return self.e_run + self.e_idle + self.e_overhead

    @classmethod
    def from_events(cls, events) -> "EnergyLedger":
        """Independent recomputation from an event log (compensated sums)."""
        run = math.fsum(e.energy for e in events if e.kind == "finish")
        idle = math.fsum(e.energy for e in events if e.kind == "idle")
        over = math.fsum(e.energy for e in events if e.kind == "turn_on")
        count = sum(1 for e in events if e.kind == "turn_on")
        return cls(run, idle, over, count)


@dataclass
class Accountant:
    p_idle: float
    turn_on_cost: float
    ledger: EnergyLedger = field(default_factory=EnergyLedger)
    events: list = field(default_factory=list)

    def start(self, time, pair_id, task_id):
        self.events.append(Event(time, "start", pair_id, task_id, 0.0))

    def finish(self, time, pair_id, task_id, energy):
        self.events.append(Event(time, "finish", pair_id, task_id, energy))
        self.ledger.e_run += energy

    def idle(self, time, pair_id, duration):
        if duration <= 0:
            return
        e = self.p_idle * duration
        self.events.append(Event(time, "idle", pair_id, None, e))
        self.ledger.e_idle += e

    def turn_on(self, time, pair_id):
        self.events.append(Event(time, "turn_on", pair_id, None, self.turn_on_cost))
        self.ledger.e_overhead += self.turn_on_cost
        self.ledger.turn_on_count += 1

    def turn_off(self, time, pair_id):
        self.events.append(Event(time, "turn_off", pair_id, None, 0.0))


class Assignment(NamedTuple):
    task: object  # OptimizedTask
    pair_id: int
    start: float
    end: float


@dataclass
class Pair:
    pair_id: int
    server_id: int | None = None
    mu: float = 0.0
    queue: list = field(default_factory=list)
    idle_mark: float = 0.0

    @property
    def busy_time(self) -> float:
        return sum(a.end - a.start for a in self.queue)

    def state(self, t: float, server_on: bool = True) -> str:
        if not server_on:
            return "off"
        return "busy" if self.mu > t else "idle"


def assign(pair: Pair, task, start: float) -> Assignment:
    """Append ``task`` to ``pair`` starting at ``start``; validates ordering and deadline."""
    if start < pair.mu - EPS:
        raise SchedulingError(f"task {task.id} starts at {start} before pair {pair.pair_id} drains at {pair.mu}")
    if start < task.arrival - EPS:
        raise SchedulingError(f"task {task.id} starts at {start} before arrival {task.arrival}")
    end = start + task.t_hat
    if end > task.deadline + EPS * max(1.0, abs(task.deadline)):
        raise SchedulingError(f"task {task.id} ends at {end} after deadline {task.deadline}")
    a = Assignment(task, pair.pair_id, start, end)
    pair.queue.append(a)
    pair.mu = end
    return a


def grouping_idle_time(mus, groups, l: int) -> float:
    """Total idle time of a grouping; missing slots on a server idle for its whole make-span."""
    total = 0.0
    for g in groups:
        f = max(mus[i] for i in g)
        total += sum(f - mus[i] for i in g) + (l - len(g)) * f
    return total


def server_mapping(mus, l: int):
    """Group pairs into servers of ``l``: sort by finish time descending and chunk.

    Returns ``(groups, idle_time)``; ``groups[j]`` lists the pair indices on server j.
    """
    order = sorted(range(len(mus)), key=lambda i: (-mus[i], i))
    groups = [order[k:k + l] for k in range(0, len(order), l)]
    return groups, grouping_idle_time(mus, groups, l)


def account_offline(pairs, config: ClusterConfig):
    """Map occupied pairs onto servers and charge runtime and idle energy.

    ``pairs`` are abstract (unmapped) pairs holding their task queues. Returns
    ``(ledger, events, assignments)`` with assignments relabelled to global pair ids
    ``server * l + slot``. No turn-on overhead is charged offline.
    """
    l = config.pairs_per_server
    acct = Accountant(config.p_idle, config.turn_on_cost)
    mus = [p.mu for p in pairs]
    groups, _ = server_mapping(mus, l)
    if len(groups) > config.n_servers:
        raise CapacityError(f"{len(pairs)} pairs need {len(groups)} servers; cluster has {config.n_servers}")
    assignments = []
    for j, g in enumerate(groups):
        f = max(mus[i] for i in g)
        for k in range(l):
            gid = j * l + k
            if k < len(g):
                p = pairs[g[k]]
                for a in p.queue:
                    acct.start(a.start, gid, a.task.id)
                    acct.finish(a.end, gid, a.task.id, a.task.p_hat * a.task.t_hat)
                    assignments.append(Assignment(a.task, gid, a.start, a.end))
                acct.idle(f, gid, f - p.mu)
            else:
                acct.idle(f, gid, f)
    acct.ledger.occupied_servers_max = len(groups)
    return acct.ledger, acct.events, assignments


@dataclass
class Server:
    server_id: int
    pairs: list
    on: bool = False
    on_since: float = 0.0


class OnlineCluster:
    """Slot-driven cluster state with dynamic resource sleep."""

    def __init__(self, config: ClusterConfig):
        self.config = config
        l = config.pairs_per_server
        self.servers = [
            Server(j, [Pair(j * l + k, j) for k in range(l)]) for j in range(config.n_servers)
        ]
        self.pairs = [p for s in self.servers for p in s.pairs]
        self.acct = Accountant(config.p_idle, config.turn_on_cost)
        self.time = 0
        self._departures = []  # (end, pair_id, task_id, energy)
        self._off_ids = list(range(config.n_servers))  # heap of off servers
        self.turn_on_warnings = 0

    @property
    def ledger(self) -> EnergyLedger:
        return self.acct.ledger

    @property
    def events(self):
        return self.acct.events

    def on_servers(self):
        return [s for s in self.servers if s.on]

    def active_pairs(self):
        return [p for s in self.servers if s.on for p in s.pairs]

    @property
    def n_on(self) -> int:
        return self.config.n_servers - len(self._off_ids)

    def turn_on(self, server: Server) -> None:
        if server.on:
            self.turn_on_warnings += 1
            return
        self._off_ids.remove(server.server_id)
        heapq.heapify(self._off_ids)
        self._switch_on(server)

    def _switch_on(self, server: Server) -> None:
        server.on = True
        server.on_since = self.time
        for p in server.pairs:
            p.mu = max(p.mu, self.time)
            p.idle_mark = p.mu
            self.acct.turn_on(self.time, p.pair_id)
        self.ledger.occupied_servers_max = max(self.ledger.occupied_servers_max, self.n_on)

    def turn_on_next(self) -> Server:
        if not self._off_ids:
            raise CapacityError(f"all {self.config.n_servers} servers are busy at slot {self.time}")
        server = self.servers[heapq.heappop(self._off_ids)]
        self._switch_on(server)
        return server

    def place(self, task, pair: Pair, start: float) -> Assignment:
        if not self.servers[pair.server_id].on:
            raise SchedulingError(f"pair {pair.pair_id} is off")
        if start > pair.idle_mark:
            self.acct.idle(start, pair.pair_id, start - pair.idle_mark)
        a = assign(pair, task, start)
        pair.idle_mark = a.end
        self.acct.start(start, pair.pair_id, task.id)
        heapq.heappush(self._departures, (a.end, pair.pair_id, task.id, task.p_hat * task.t_hat))
        return a

    def flush_idle(self, t: float) -> None:
        """Charge idle energy of every on pair up to time ``t``."""
        for s in self.servers:
            if s.on:
                for p in s.pairs:
                    if p.idle_mark < t:
                        self.acct.idle(t, p.pair_id, t - p.idle_mark)
                        p.idle_mark = t

    def advance_slot(self, t: int):
        """Move to slot ``t``: process departures, then sleep servers idle for >= rho slots.

        Returns ``(departed_task_ids, slept_server_ids)``.
        """
        if t < self.time:
            raise ValidationError("time cannot go backwards")
        self.time = t
        departed = []
        while self._departures and math.ceil(self._departures[0][0] - EPS) <= t:
            end, pid, tid, e = heapq.heappop(self._departures)
            self.acct.finish(end, pid, tid, e)
            departed.append(tid)
        slept = []
        rho = self.config.rho
        for s in self.servers:
            if not s.on:
                continue
            last = max(p.mu for p in s.pairs)
            if t - last >= rho - EPS:
                for p in s.pairs:
                    if p.idle_mark < t:
                        self.acct.idle(t, p.pair_id, t - p.idle_mark)
                    p.idle_mark = t
                    p.queue.clear()  # everything has drained
                    self.acct.turn_off(t, p.pair_id)
                s.on = False
                heapq.heappush(self._off_ids, s.server_id)
                slept.append(s.server_id)
        return departed, slept

    @property
    def drained(self) -> bool:
        return not self._departures and self.n_on == 0


def audit_deadlines(events, deadlines) -> list:
    """Task ids whose logged finish time exceeds their deadline (independent of any scheduler)."""
    bad = []
    for e in events:
        if e.kind == "finish":
            d = deadlines[e.task_id]
            if e.time > d + EPS * max(1.0, abs(d)):
                bad.append(e.task_id)
    return bad


def audit_overlaps(events) -> list:
    """Pairs on which two logged task executions overlap."""
    starts = {}
    spans = {}
    for e in events:
        if e.kind == "start":
            starts[e.task_id] = (e.pair_id, e.time)
        elif e.kind == "finish":
            pid, st = starts[e.task_id]
            spans.setdefault(pid, []).append((st, e.time))
    bad = []
    for pid, iv in spans.items():
        iv.sort()
        for (s0, e0), (s1, _) in zip(iv, iv[1:]):
            if s1 < e0 - EPS:
                bad.append(pid)
                break
    return bad
