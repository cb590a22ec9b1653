"""Command-line driver: ``optimize``, ``schedule``, ``sweep`` and ``gen``.

Every flag may also be given in a JSON ``--config`` file using the flag's long
name (dashes or underscores); flags on the command line win over the file.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .cluster import ClusterConfig, EnergyLedger, audit_deadlines
from .errors import DvfsError, InfeasibleDeadlineError
from .experiment import ExperimentSpec, run as run_sweep
from .model import PRESETS, get_domain
from .optimizer import configure_task
from .schedulers import Algorithm, SchedulerConfig, run as run_schedule
from .workload import GeneratorConfig, build_library, generate, load_tasks, save_library, save_tasks

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


def _g(x) -> str:
    return f"{x:.6g}" if isinstance(x, float) else ("" if x is None else str(x))


def _on_off(s: str) -> bool:
    if s in ("on", "true", "1", True):
        return True
    if s in ("off", "false", "0", False):
        return False
    raise argparse.ArgumentTypeError("expected on or off")


def _csv_list(conv):
    def parse(s):
        if isinstance(s, (list, tuple)):
            return [conv(x) for x in s]
        return [conv(x) for x in str(s).split(",") if x.strip()]
    return parse


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _table(cols, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(cols, r)) for r in rows], indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        w.writerows([[_g(v) for v in r] for r in rows])
        return buf.getvalue()
    cells = [list(cols)] + [[_g(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(cols))]
    return "".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in cells)


# ---- subcommands ---------------------------------------------------------------------

OPT_COLS = ("id", "vc", "fc", "fm", "t_hat", "p_hat", "priority", "status")


def optimize_rows(profiles, domain):
    rows = []
    for p in profiles:
        try:
            t = configure_task(p, domain, True)
        except InfeasibleDeadlineError as exc:
            rows.append((p.id, None, None, None, None, None, "deadline-prior",
                         f"infeasible: t_min={exc.t_min:.6g} > slack={exc.budget:.6g}"))
            continue
        s = t.setting
        rows.append((p.id, s.vc, s.fc, s.fm, t.t_hat, t.p_hat, t.priority.value, "ok"))
    return rows


def cmd_optimize(args) -> int:
    profiles = load_tasks(args.tasks)
    rows = optimize_rows(profiles, get_domain(args.domain))
    _emit(_table(OPT_COLS, rows, args.format), args.out)
    return EXIT_PARTIAL if any(r[-1] != "ok" for r in rows) else EXIT_OK


def _profiles_for(args, utilization: float, seed: int):
    if args.tasks:
        return load_tasks(args.tasks)
    if args.mode == "offline":
        gen = GeneratorConfig.for_cluster(args.total_pairs, seed=seed, mode="offline",
                                          u_off=utilization, horizon=args.slots)
    else:
        gen = GeneratorConfig.for_cluster(args.total_pairs, seed=seed, mode="online",
                                          u_on=utilization, horizon=args.slots)
    return generate(gen)


def cmd_schedule(args) -> int:
    domain = get_domain(args.domain)
    seed = args.seeds[0]
    profiles = _profiles_for(args, args.utilization[0], seed)
    cluster = ClusterConfig(args.total_pairs, args.pairs_per_server[0], args.p_idle, args.turn_on_cost)
    cfg = SchedulerConfig(args.algorithm[0], args.theta[0], args.dvfs[0], args.mode)
    pl = run_schedule(profiles, cluster, cfg, domain, args.slots)
    led = pl.ledger
    check = EnergyLedger.from_events(pl.events)
    late = audit_deadlines(pl.events, {t.id: t.deadline for t in profiles})
    summary = {
        "algorithm": cfg.algorithm.value, "mode": cfg.mode, "l": cluster.pairs_per_server,
        "theta": cfg.theta, "dvfs": cfg.dvfs_enabled, "tasks": len(profiles),
        "e_run": led.e_run, "e_idle": led.e_idle, "e_overhead": led.e_overhead, "e_total": led.e_total,
        "e_total_from_events": check.e_total, "m1": pl.m1, "max_servers": led.occupied_servers_max,
        "turn_on_count": led.turn_on_count, "infeasible": pl.infeasible, "deadline_violations": late,
    }
    events = [e._asdict() for e in pl.events]
    if args.format == "json":
        text = json.dumps({"summary": summary, "events": events}, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["time", "kind", "pair_id", "task_id", "energy"], lineterminator="\n")
        w.writeheader()
        for e in events:
            w.writerow({k: _g(v) for k, v in e.items()})
        text = buf.getvalue()
        sys.stderr.write(" ".join(f"{k}={_g(v) if not isinstance(v, list) else len(v)}"
                                  for k, v in summary.items()) + "\n")
    _emit(text, args.out)
    return EXIT_PARTIAL if pl.infeasible or late else EXIT_OK


def cmd_sweep(args) -> int:
    seeds = args.seeds if args.seed_count is None else list(range(args.seed_count))
    spec = ExperimentSpec(
        mode=args.mode, algorithms=tuple(args.algorithm), pairs_per_server=tuple(args.pairs_per_server),
        thetas=tuple(args.theta), utilizations=tuple(args.utilization), seeds=tuple(seeds),
        dvfs=tuple(args.dvfs), domain=args.domain, total_pairs=args.total_pairs, slots=args.slots,
        p_idle=args.p_idle, turn_on_cost=args.turn_on_cost, workers=args.workers, timing=args.timing,
    )
    report = run_sweep(spec)
    _emit(report.to_json() if args.format == "json" else report.to_csv(), args.out)
    return EXIT_PARTIAL if report.partial else EXIT_OK


def cmd_gen(args) -> int:
    seed = args.seeds[0]
    kw = {"u_off": args.utilization[0]} if args.mode == "offline" else {"u_on": args.utilization[0]}
    gen = GeneratorConfig.for_cluster(args.total_pairs, seed=seed, mode=args.mode, horizon=args.slots, **kw)
    library = build_library(seed, gen.library_size)
    tasks = generate(gen, library)
    if not args.out:
        raise DvfsError("gen requires --out")
    save_tasks(args.out, tasks)
    if args.library_out:
        save_library(args.library_out, library)
    sys.stderr.write(f"wrote {len(tasks)} tasks to {args.out}\n")
    return EXIT_OK


# ---- parser --------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with flag values (flags override it)")
    p.add_argument("--mode", choices=("offline", "online"), default="offline")
    p.add_argument("--algorithm", type=_csv_list(lambda a: Algorithm(a.upper()).value), default=["EDL"],
                   help="comma list of " + ", ".join(a.value for a in Algorithm))
    p.add_argument("--theta", type=_csv_list(float), default=[1.0])
    p.add_argument("--pairs-per-server", type=_csv_list(int), default=[1])
    p.add_argument("--utilization", type=_csv_list(float), default=[0.4], help="U_J value(s)")
    p.add_argument("--seed", "--seeds", dest="seeds", type=_csv_list(int), default=[0])
    p.add_argument("--seed-count", type=int, default=None, help="use seeds 0..N-1")
    p.add_argument("--dvfs", type=_csv_list(_on_off), default=[True], help="on, off or on,off")
    p.add_argument("--domain", choices=sorted(PRESETS), default="wide")
    p.add_argument("--total-pairs", type=int, default=256)
    p.add_argument("--p-idle", type=float, default=37.0)
    p.add_argument("--turn-on-cost", type=float, default=90.0)
    p.add_argument("--slots", type=int, default=1440, help="online horizon in slots")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json", "table"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dvfsched", description="DVFS-aware GPU cluster scheduling simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="energy-optimal settings for a task-set file")
    p.add_argument("tasks", help="task-set JSONL file")
    _common(p)
    p.set_defaults(func=cmd_optimize, format="table")

    p = sub.add_parser("schedule", help="one simulation with its full event log")
    p.add_argument("--tasks", help="task-set file (default: generate from --seed)")
    _common(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("sweep", help="parameter sweep report")
    _common(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="include wall time per row")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", help="generate a task set to a file")
    _common(p)
    p.add_argument("--library-out", help="also write the application library")
    p.set_defaults(func=cmd_gen)
    return parser


def _apply_config(parser, argv):
    """Re-parse with defaults taken from the ``--config`` file, if any."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    cfg = json.loads(Path(args.config).read_text())
    if not isinstance(cfg, dict):
        raise DvfsError("config file must hold a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, val in cfg.items():
        dest = {"seed": "seeds"}.get(key.replace("-", "_"), key.replace("-", "_"))
        if dest not in known or dest in ("help", "config"):
            raise DvfsError(f"unknown config key {key!r}")
        action = known[dest]
        if action.type is not None and val is not None:
            val = action.type(val)
        defaults[dest] = val
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except (DvfsError, ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"dvfsched: error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
