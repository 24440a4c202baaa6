"""Discrete-event preemptive fixed-priority uniprocessor simulator.

Serves as an empirical oracle: exact integer event times, synchronous
worst-case first releases, per-job response times.  Release offsets model
the worst-case early-release (jitter) pattern: task i's first job arrives at
-offset_i and is released at time 0 together with every other first job;
all later jobs of the task arrive and release at k*period - offset_i, so
consecutive releases of a task are squeezed to the minimum spacing the
jitter bound allows.  Zero offsets therefore reproduce the jitter-free
critical instant, and offsets equal to the jitters reproduce the jitter-aware
worst-case demand.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from itertools import product

from .model import TaskSet

ARRIVAL_MIN_SPACING = "min-interarrival"


class HorizonTooShort(RuntimeError):
    """A first job (the analyzed one) did not finish within the horizon."""


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters.

    `horizon` bounds the release window: jobs are released strictly before
    it (first jobs always release at 0).  `release_offsets` gives one
    non-negative offset per task, each at most that task's jitter; None means
    all zero.  `arrival_policy` fixes arrivals at minimum inter-arrival
    spacing (the only supported policy).
    """

    horizon: int
    release_offsets: tuple[int, ...] | None = None
    arrival_policy: str = ARRIVAL_MIN_SPACING


@dataclass(frozen=True)
class Job:
    task_id: str
    job_index: int
    arrival: int
    release: int
    start: int
    finish: int

    @property
    def response(self) -> int:
        return self.finish - self.release


@dataclass(frozen=True)
class SimTrace:
    """Full schedule: jobs, per-task maximum response times, preemptions."""

    jobs: tuple[Job, ...]
    response_times: dict
    preemption_count: int
    idle_intervals: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def first_response(self, task_id: str) -> int:
        for job in self.jobs:
            if job.task_id == task_id and job.job_index == 0:
                return job.response
        raise KeyError(f"no first job recorded for task {task_id!r}")

    def to_tsv(self) -> str:
        """One line per job: task, job, arrival, release, start, finish."""
        lines = ["\t".join(("task", "job", "arrival", "release", "start",
                            "finish"))]
        for j in self.jobs:
            lines.append("\t".join(str(v) for v in (
                j.task_id, j.job_index, j.arrival, j.release, j.start,
                j.finish)))
        return "\n".join(lines) + "\n"


def simulate(ts: TaskSet, cfg: SimConfig) -> SimTrace:
    """Run the schedule and return the exact trace.

    Jobs are released strictly before cfg.horizon and the event loop drains
    all of them; a job finishing past the horizon is exact for this finite
    workload (no further releases exist to preempt it).  HorizonTooShort is
    raised iff some task's first job (the analyzed one under the worst-case
    release pattern) fails to finish by the horizon.
    """
    n = len(ts)
    offsets = cfg.release_offsets if cfg.release_offsets is not None else (0,) * n
    if len(offsets) != n:
        raise ValueError(f"need {n} release offsets, got {len(offsets)}")
    for task, off in zip(ts, offsets):
        if not 0 <= off <= task.jitter:
            raise ValueError(
                f"offset {off} of task {task.id} outside [0, jitter={task.jitter}]")
        if type(task.wcet) is not int:
            raise ValueError(
                f"task {task.id}: simulation needs integer wcets, got {task.wcet!r}")
    if cfg.arrival_policy != ARRIVAL_MIN_SPACING:
        raise ValueError(f"unknown arrival policy {cfg.arrival_policy!r}")
    if cfg.horizon < max(t.period for t in ts):
        raise ValueError("horizon must be at least the largest period")

    # Lazy release stream: heap of (release, priority, task_index, job_index);
    # popping job k schedules job k+1 of the same task.
    releases: list[tuple[int, int, int, int]] = []
    for i, task in enumerate(ts):
        heapq.heappush(releases, (0, task.priority, i, 0))

    def push_next(i: int, k: int) -> None:
        rel = (k + 1) * ts[i].period - offsets[i]
        if rel < cfg.horizon:
            heapq.heappush(releases, (rel, ts[i].priority, i, k + 1))

    ready: list[tuple[int, int, int]] = []   # (priority, job_index, task_index)
    remaining: dict[tuple[int, int], int] = {}
    started: dict[tuple[int, int], int] = {}
    finished: dict[tuple[int, int], int] = {}
    job_count: dict[int, int] = {i: 0 for i in range(n)}
    now = 0
    current: tuple[int, int, int] | None = None
    preemptions = 0
    idle: list[tuple[int, int]] = []

    def admit_due() -> None:
        while releases and releases[0][0] <= now:
            rel, prio, i, k = heapq.heappop(releases)
            remaining[(i, k)] = ts[i].wcet
            job_count[i] = max(job_count[i], k + 1)
            heapq.heappush(ready, (prio, k, i))
            push_next(i, k)

    while True:
        admit_due()
        if current is None:
            if ready:
                prio, k, i = heapq.heappop(ready)
                current = (prio, k, i)
                started.setdefault((i, k), now)
            elif releases:
                nxt = releases[0][0]
                idle.append((now, nxt))
                now = nxt
                continue
            else:
                break
        prio, k, i = current
        finish_at = now + remaining[(i, k)]
        next_release = releases[0][0] if releases else None
        if next_release is not None and next_release < finish_at:
            remaining[(i, k)] -= next_release - now
            now = next_release
            admit_due()
            if ready and ready[0][0] < prio:
                heapq.heappush(ready, current)
                current = None
                preemptions += 1
        else:
            now = finish_at
            finished[(i, k)] = now
            current = None

    jobs = []
    horizon_violator = None
    for i, task in enumerate(ts):
        for k in range(job_count[i]):
            release = 0 if k == 0 else k * task.period - offsets[i]
            arrival = k * task.period - offsets[i]
            fin = finished[(i, k)]
            jobs.append(Job(task.id, k, arrival, release, started[(i, k)], fin))
            if k == 0 and fin > cfg.horizon and horizon_violator is None:
                horizon_violator = task.id
    if horizon_violator is not None:
        raise HorizonTooShort(
            f"first job of task {horizon_violator} unfinished at horizon "
            f"{cfg.horizon}")

    jobs.sort(key=lambda j: (j.release, j.finish, j.task_id))
    response_times: dict = {}
    for job in jobs:
        prev = response_times.get(job.task_id)
        if prev is None or job.response > prev:
            response_times[job.task_id] = job.response
    return SimTrace(tuple(jobs), response_times, preemptions, tuple(idle))


def adversarial_response(ts: TaskSet, target_index: int, cfg: SimConfig) -> int:
    """Largest observed target first-job response over offset corner patterns.

    Scans every combination of offset in {0, jitter} for the higher-priority
    tasks (the target's own offset shifts only its arrival, never its release
    or response, so it stays 0).  An empirical lower bound on the jitter-aware
    WCRT; exact at the critical instant for jitter-free sets.
    """
    if len(ts) > 6:
        raise ValueError("offset scan is exponential; need n <= 6")
    target = ts[target_index]
    choices = []
    for i, task in enumerate(ts):
        if i == target_index:
            choices.append((0,))
        else:
            choices.append((0, task.jitter) if task.jitter else (0,))
    best = 0
    for offsets in product(*choices):
        trace = simulate(ts, SimConfig(cfg.horizon, tuple(offsets),
                                       cfg.arrival_policy))
        best = max(best, trace.first_response(target.id))
    return best
