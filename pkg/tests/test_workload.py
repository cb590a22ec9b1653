import json
import math
from importlib.resources import files

import numpy as np
import pytest

from dvfsched import ParseError, ValidationError
from dvfsched.workload import (
    D_WORK_RANGE,
    AppLibraryEntry,
    GeneratorConfig,
    build_library,
    example_tasks,
    gen_arrivals,
    gen_tasks,
    generate,
    load_library,
    load_tasks,
    save_library,
    save_tasks,
    task_utilization,
)

FIXTURE = files("dvfsched") / "data" / "example_tasks.jsonl"


def test_library_ranges_and_determinism():
    lib = build_library(3)
    assert len(lib) == 20
    assert lib == build_library(3)
    assert lib != build_library(4)
    for e in lib:
        assert 175 <= e.p_star <= 206
        assert 0.1 <= e.gamma_ratio <= 0.2
        assert 0.20 <= e.p0_ratio <= 0.41
        assert 0.07 <= e.delta <= 0.91
        assert D_WORK_RANGE[0] <= e.d_work <= D_WORK_RANGE[1]
        assert 0.1 <= e.t0 <= 0.95


def test_library_entry_validation():
    with pytest.raises(ValidationError):
        AppLibraryEntry(300, 0.15, 0.3, 0.5, 2.0, 0.5)
    with pytest.raises(ValidationError):
        build_library(0, size=0)


def test_profile_scaling():
    e = AppLibraryEntry(200, 0.15, 0.3, 0.5, 2.0, 0.5)
    p = e.profile("a", scale=10)
    assert (p.p0, p.gamma, p.t0, p.t_star) == pytest.approx((60, 30, 5, 25))


def test_exact_utilization_sum():
    rng = np.random.default_rng(0)
    tasks = gen_tasks(build_library(0), 0.01 * 1024, rng)
    assert math.fsum(task_utilization(t) for t in tasks) == pytest.approx(10.24, abs=1e-9)
    for t in tasks:
        assert t.slack >= t.t_star * (1 - 1e-12)


def test_generated_tasks_have_slack():
    for t in generate(GeneratorConfig(seed=1, u_off=0.1)):
        assert 0 < task_utilization(t) <= 1
        assert t.arrival == 0


def test_task_count_tracks_mean_utilization():
    counts = [len(generate(GeneratorConfig(seed=s, u_off=1.0))) for s in range(4)]
    assert abs(np.mean(counts) - 2048) / 2048 < 0.1


def test_generation_deterministic():
    cfg = GeneratorConfig.for_cluster(256, seed=5, mode="online", horizon=100)
    assert generate(cfg) == generate(cfg)
    assert generate(cfg) != generate(GeneratorConfig.for_cluster(256, seed=6, mode="online", horizon=100))


def test_arrivals_conserve_count():
    rng = np.random.default_rng(2)
    assert gen_arrivals(0, 1440, rng).sum() == 0
    for n in (1, 37, 5000):
        c = gen_arrivals(n, 1440, rng)
        assert c.sum() == n and (c >= 0).all() and len(c) == 1440


def test_arrival_rate():
    c = gen_arrivals(20000, 1440, np.random.default_rng(8))
    assert abs(c.mean() - 20000 / 1440) / (20000 / 1440) < 0.05


def test_online_stream_arrivals():
    tasks = generate(GeneratorConfig.for_cluster(256, seed=2, mode="online", horizon=50))
    stream = [t for t in tasks if t.arrival > 0]
    assert stream and all(1 <= t.arrival <= 50 and t.arrival == int(t.arrival) for t in stream)
    assert all(t.id.startswith("o") for t in stream)


def test_config_validation():
    with pytest.raises(ValidationError):
        GeneratorConfig(mode="batch")
    with pytest.raises(ValidationError):
        GeneratorConfig(u_off=0)
    with pytest.raises(ValidationError):
        GeneratorConfig(horizon=0)
    assert GeneratorConfig.for_cluster(256).baseline_pairs == 128


def test_round_trip(tmp_path):
    tasks = generate(GeneratorConfig.for_cluster(64, seed=3, mode="online", horizon=30))
    save_tasks(tmp_path / "t.jsonl", tasks)
    assert load_tasks(tmp_path / "t.jsonl") == tasks
    lib = build_library(9)
    save_library(tmp_path / "l.jsonl", lib)
    assert load_library(tmp_path / "l.jsonl") == lib


def test_missing_deadline_reports_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    rec = {"id": "x", "arrival": 0, "p0": 1, "gamma": 0, "p_star": 3, "t0": 1, "t_star": 2, "delta": 0.5}
    ok = dict(rec, deadline=10)
    path.write_text("\n".join([json.dumps({"format": "dvfsched-taskset", "version": 1}),
                               json.dumps(ok), json.dumps(rec)]) + "\n")
    with pytest.raises(ParseError) as exc:
        load_tasks(path)
    assert exc.value.line == 3
    assert "deadline" in str(exc.value)


def test_bad_header_and_values(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"format": "other", "version": 1}\n')
    with pytest.raises(ParseError):
        load_tasks(path)
    path.write_text('{"format": "dvfsched-taskset", "version": 1}\n{"id": "x", "arrival": 0, "deadline": 5, '
                    '"p0": 1, "gamma": 0, "p_star": 3, "t0": 1, "t_star": 2, "delta": 2}\n')
    with pytest.raises(ValidationError, match="delta"):
        load_tasks(path)
    path.write_text("")
    assert load_tasks(path) == []


def test_fixture_loads():
    tasks = load_tasks(FIXTURE)
    assert tasks == example_tasks()
    assert [t.deadline for t in tasks] == [50, 36, 60, 100, 300]
