"""Shared fixtures: reference task sets and brute-force oracles.

The brute-force oracle scans the integer demand recurrence directly; for
integer task parameters the least fixed point is an integer, so the first t
with demand(t) <= t equals it exactly.  Every frozen expected value in the
suite was produced by this scan (or by hand-evaluating a closed form) before
the fast paths existed.
"""

import math
from fractions import Fraction

import pytest

from harmonic_rta import Task, TaskSet, validate


def mk(rows, relaxed=False) -> TaskSet:
    """Build a validated set from (period, wcet, jitter[, deadline]) rows."""
    tasks = []
    for i, row in enumerate(rows):
        period, wcet, jitter = row[:3]
        deadline = row[3] if len(row) > 3 else period
        tasks.append(Task(period=period, wcet=wcet, deadline=deadline,
                          jitter=jitter, priority=i + 1, id=f"t{i + 1}"))
    return validate(tasks, relaxed=relaxed)


def brute_wcrt(ts: TaskSet, target_index: int, jittered: bool = False,
               cap: int = 10 ** 6) -> int:
    """Least t >= 1 with C_n + sum C_i*ceil((t+J_i)/T_i) <= t, by linear scan."""
    target = ts[target_index]
    hp = ts.tasks[:target_index]
    for t in range(1, cap + 1):
        demand = target.wcet
        for task in hp:
            j = task.jitter if jittered else 0
            demand += task.wcet * math.ceil(Fraction(t + j, task.period))
        if demand <= t:
            return t
    raise AssertionError(f"no fixed point below {cap}")


@pytest.fixture(scope="session")
def table1() -> TaskSet:
    return mk([
        (60, 6, 8), (60, 8, 0), (30, 4, 9),
        (360, 13, 7), (120, 7, 3), (360, 12, 9),
    ])


TABLE1_WCRTS = (6, 14, 18, 35, 42, 72)


@pytest.fixture(scope="session")
def walkthrough() -> TaskSet:
    """Five interfering tasks whose shift system has the known solution
    m=(1,3,4,24,48) with a maximal shifted jitter of 480."""
    return mk([
        (240, 1, 167), (120, 50, 119), (120, 50, 0), (20, 1, 0), (10, 1, 0),
    ])


def write_task_file(path, ts: TaskSet) -> str:
    from harmonic_rta import save_tasks
    save_tasks(ts, str(path))
    return str(path)
