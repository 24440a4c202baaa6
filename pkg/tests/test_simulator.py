"""Discrete-event scheduler: frozen traces, discipline invariants, oracles."""

import pytest

from harmonic_rta import (
    HorizonTooShort,
    Rng,
    SimConfig,
    SimTrace,
    adversarial_response,
    simulate,
    wcrt_fixed_point_jitter,
    wcrt_harmonic,
)
from conftest import mk


def test_single_task_first_job():
    ts = mk([(60, 6, 0)])
    trace = simulate(ts, SimConfig(horizon=60))
    assert trace.first_response("t1") == 6
    job = trace.jobs[0]
    assert (job.release, job.start, job.finish) == (0, 0, 6)


def test_two_hp_tasks_target_response():
    ts = mk([(8, 2, 0), (4, 2, 0), (8, 1, 0)])
    trace = simulate(ts, SimConfig(horizon=8))
    assert trace.first_response("t3") == 7


def test_adversarial_below_analytic(table1):
    cfg = SimConfig(horizon=720)
    for i in (1, 5):
        observed = adversarial_response(table1, i, cfg)
        analytic = wcrt_fixed_point_jitter(table1, i).wcrt
        assert observed <= analytic


def test_adversarial_exact_when_jitter_free():
    ts = mk([(8, 2, 0), (4, 1, 0), (16, 3, 0), (16, 1, 0)])
    for i in range(len(ts)):
        observed = adversarial_response(ts, i, SimConfig(horizon=32))
        plain, _ = wcrt_harmonic(ts, i)
        assert observed == plain.wcrt


def test_offsets_must_respect_jitter(table1):
    bad = [0] * len(table1)
    bad[0] = table1[0].jitter + 1
    with pytest.raises(ValueError):
        simulate(table1, SimConfig(horizon=720, release_offsets=tuple(bad)))
    with pytest.raises(ValueError):
        simulate(table1, SimConfig(horizon=720, release_offsets=(0,)))


def test_horizon_too_short():
    # Offset 8 packs hp releases at 0, 2, 12: the target's first job
    # finishes at 21, past the horizon.
    ts = mk([(10, 4, 8), (20, 9, 0)])
    with pytest.raises(HorizonTooShort):
        simulate(ts, SimConfig(horizon=20, release_offsets=(8, 0)))
    with pytest.raises(ValueError):
        simulate(ts, SimConfig(horizon=4))


def test_schedule_invariants_random():
    rng = Rng(424242)
    for _ in range(60):
        n = rng.randint(1, 5)
        periods = [rng.randint(2, 6)]
        for _ in range(n - 1):
            periods.append(periods[-1] * rng.randint(1, 3))
        periods.reverse()
        rows = []
        for t in periods:
            rows.append([t, rng.randint(1, max(1, t // (n + 1))),
                         rng.randint(0, t - 1)])
        ts = mk(rows, relaxed=True)
        if ts.total_utilization >= 1:
            continue
        offsets = tuple(rng.randint(0, r[2]) for r in rows)
        horizon = 4 * periods[0]
        try:
            trace = simulate(ts, SimConfig(horizon=horizon,
                                           release_offsets=offsets))
        except HorizonTooShort:
            continue
        by_task = {}
        for job in trace.jobs:
            assert job.finish - job.release >= remaining_wcet(ts, job.task_id)
            assert job.start >= job.release
            assert job.finish > job.start
            by_task.setdefault(job.task_id, []).append(job)
        for jobs in by_task.values():
            jobs.sort(key=lambda j: j.job_index)
            for a, b in zip(jobs, jobs[1:]):
                assert a.finish <= b.finish or b.release > a.release
        # Work conservation: no job may span an idle interval.
        for a, b in trace.idle_intervals:
            assert a < b
            for job in trace.jobs:
                assert job.finish <= a or job.release >= b


def remaining_wcet(ts, task_id):
    for t in ts:
        if t.id == task_id:
            return t.wcet
    raise KeyError(task_id)


def test_trace_to_tsv(table1):
    trace = simulate(table1, SimConfig(horizon=360))
    text = trace.to_tsv()
    lines = text.strip().split("\n")
    assert lines[0].split("\t") == ["task", "job", "arrival", "release",
                                    "start", "finish"]
    assert len(lines) == len(trace.jobs) + 1
    assert isinstance(trace, SimTrace)


def test_response_times_are_per_task_maxima(table1):
    trace = simulate(table1, SimConfig(horizon=360))
    for task_id, worst in trace.response_times.items():
        observed = max(j.response for j in trace.jobs if j.task_id == task_id)
        assert worst == observed


def test_simulation_matches_staged_on_critical_instant():
    rng = Rng(7777)
    for _ in range(40):
        n = rng.randint(2, 5)
        periods = [rng.randint(2, 8)]
        for _ in range(n - 1):
            periods.append(periods[-1] * rng.randint(1, 3))
        periods.reverse()
        rows = [[t, rng.randint(1, max(1, t // (n + 1))), 0] for t in periods]
        ts = mk(rows, relaxed=True)
        if ts.total_utilization >= 1:
            continue
        target = len(ts) - 1
        plain, _ = wcrt_harmonic(ts, target)
        horizon = max(periods[0], int(plain.wcrt) + 1)
        trace = simulate(ts, SimConfig(horizon=horizon))
        assert trace.first_response(ts[target].id) == plain.wcrt
