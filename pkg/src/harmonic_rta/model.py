"""Task model: domain types, validation, and the reverse-rate-monotonic ordering.

Tasks are sporadic with constrained deadlines (wcet <= deadline <= period) and
optional release jitter, scheduled by preemptive fixed priorities on one
processor.  The fast analysis paths additionally require pairwise harmonic
periods (one period of every pair divides the other).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction


class TaskModelError(ValueError):
    """Base class for task-set construction and validation failures."""


class NonPositiveParameter(TaskModelError):
    """A parameter that must be a positive (or non-negative) integer is not."""


class NonHarmonic(TaskModelError):
    """Two periods exist of which neither divides the other."""


class DeadlineViolation(TaskModelError):
    """wcet <= deadline <= period does not hold for some task."""


class UtilizationOverload(TaskModelError):
    """Total utilization is >= 1; fixed-point analyses would not converge."""


class DuplicatePriority(TaskModelError):
    """Priorities are not distinct contiguous 1..n."""


class JitterTooLarge(TaskModelError):
    """A release jitter is not in [0, period)."""


@dataclass(frozen=True)
class Task:
    """One sporadic task.  Times are integer time units; priority 1 is highest.

    `wcet` may be a Fraction only in relaxed (experiment-grade) task sets;
    strict validation requires integers throughout.  `id` is an opaque label
    used in reports, auto-derived as "t<priority>" when empty.
    """

    period: int
    wcet: int | Fraction
    deadline: int
    jitter: int = 0
    priority: int = 1
    id: str = ""

    @property
    def utilization(self) -> Fraction:
        return Fraction(self.wcet) / self.period


@dataclass(frozen=True)
class TaskSet:
    """Immutable task list ordered by strictly increasing priority index."""

    tasks: tuple[Task, ...]
    total_utilization: Fraction

    def __len__(self) -> int:
        return len(self.tasks)

    def __iter__(self):
        return iter(self.tasks)

    def __getitem__(self, index: int) -> Task:
        return self.tasks[index]


@dataclass(frozen=True)
class PiOrder:
    """Higher-priority tasks of one target, sorted by non-increasing period.

    `order` holds indices into the TaskSet; consecutive periods divide each
    other (largest first).  `cumulative_wcet[k]` / `cumulative_util[k]` are the
    exact suffix sums over the tasks strictly after position k, so the last
    entry of each is zero.
    """

    target_index: int
    order: tuple[int, ...]
    cumulative_wcet: tuple[Fraction | int, ...]
    cumulative_util: tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.order)

    def total_util(self, ts: TaskSet) -> Fraction:
        """Utilization of the whole higher-priority set."""
        if not self.order:
            return Fraction(0)
        return self.cumulative_util[0] + ts[self.order[0]].utilization

    def total_wcet(self, ts: TaskSet):
        """WCET sum of the whole higher-priority set."""
        if not self.order:
            return 0
        return self.cumulative_wcet[0] + ts[self.order[0]].wcet


def _require_int(value, what: str, task_label: str):
    if type(value) is not int:
        raise NonPositiveParameter(
            f"{what} of task {task_label} must be an integer, got {value!r}")


def validate(raw_tasks: list[Task], relaxed: bool = False) -> TaskSet:
    """Check all task and task-set invariants and return an immutable TaskSet.

    Strict mode enforces: positive integer parameters, wcet <= deadline <=
    period, 0 <= jitter < period, distinct contiguous priorities 1..n,
    pairwise harmonic periods, and total utilization < 1.

    Relaxed mode (oracle tests and experiment-grade generated sets) skips the
    harmonicity and utilization-cap checks and allows rational wcets; the
    structural per-task checks still apply.
    """
    if not raw_tasks:
        raise TaskModelError("task set is empty")

    for t in raw_tasks:
        label = t.id or f"priority {t.priority}"
        _require_int(t.period, "period", label)
        _require_int(t.deadline, "deadline", label)
        _require_int(t.jitter, "jitter", label)
        _require_int(t.priority, "priority", label)
        if not relaxed:
            _require_int(t.wcet, "wcet", label)
        if t.period <= 0 or t.deadline <= 0 or t.priority <= 0:
            raise NonPositiveParameter(
                f"task {label}: period, deadline and priority must be positive")
        if t.wcet <= 0:
            raise NonPositiveParameter(f"task {label}: wcet must be positive")
        if t.jitter < 0:
            raise NonPositiveParameter(f"task {label}: jitter must be >= 0")
        if not (t.wcet <= t.deadline <= t.period):
            raise DeadlineViolation(
                f"task {label}: need wcet <= deadline <= period, "
                f"got C={t.wcet}, D={t.deadline}, T={t.period}")
        if t.jitter >= t.period:
            raise JitterTooLarge(
                f"task {label}: jitter {t.jitter} must be < period {t.period}")

    prios = sorted(t.priority for t in raw_tasks)
    if prios != list(range(1, len(raw_tasks) + 1)):
        raise DuplicatePriority(
            f"priorities must be distinct contiguous 1..{len(raw_tasks)}, got {prios}")

    ordered = sorted(raw_tasks, key=lambda t: t.priority)
    if not relaxed:
        by_period = sorted(ordered, key=lambda t: t.period)
        for a, b in zip(by_period, by_period[1:]):
            if b.period % a.period != 0:
                raise NonHarmonic(
                    f"periods {a.period} (task {a.id or a.priority}) and "
                    f"{b.period} (task {b.id or b.priority}) do not divide")

    total_u = sum((t.utilization for t in ordered), Fraction(0))
    if not relaxed and total_u >= 1:
        raise UtilizationOverload(f"total utilization {total_u} >= 1")

    ordered = tuple(
        t if t.id else Task(t.period, t.wcet, t.deadline, t.jitter,
                            t.priority, f"t{t.priority}")
        for t in ordered)
    return TaskSet(ordered, total_u)


def pi_order(ts: TaskSet, target_index: int, tie_break: str = "jitter") -> PiOrder:
    """Sort the target's higher-priority tasks by non-increasing period.

    Period ties are broken by non-decreasing jitter (`tie_break="jitter"`, the
    default used by the WCRT iterations) or by original priority index
    (`tie_break="priority"`, used by the jitter-feasibility pipeline, which is
    the order its worked examples and windows are defined over).  Both are
    fully deterministic; for jitter-free analysis the choice is immaterial.
    """
    if not 0 <= target_index < len(ts):
        raise IndexError(f"target index {target_index} out of range")
    if tie_break not in ("jitter", "priority"):
        raise ValueError(f"unknown tie_break {tie_break!r}")

    hp = range(target_index)
    if tie_break == "jitter":
        key = lambda i: (-ts[i].period, ts[i].jitter, i)
    else:
        key = lambda i: (-ts[i].period, i)
    order = tuple(sorted(hp, key=key))

    k = len(order)
    cum_wcet: list = [0] * k
    cum_util: list = [Fraction(0)] * k
    for pos in range(k - 2, -1, -1):
        nxt = ts[order[pos + 1]]
        cum_wcet[pos] = cum_wcet[pos + 1] + nxt.wcet
        cum_util[pos] = cum_util[pos + 1] + nxt.utilization
    return PiOrder(target_index, order, tuple(cum_wcet), tuple(cum_util))


def load_tasks(path: str) -> TaskSet:
    """Read and strictly validate a task-set file.

    The file is a UTF-8 JSON document: a top-level object with "tasks", an
    array of objects with integer fields "period", "wcet", "deadline",
    "jitter" (optional, default 0) and "priority"; an optional string "id".
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise TaskModelError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise TaskModelError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: "
            f"{exc.msg}") from exc
    return tasks_from_dict(doc, where=path)


def tasks_from_dict(doc, where: str = "<input>") -> TaskSet:
    """Build a strict TaskSet from a parsed task-file document."""
    if not isinstance(doc, dict) or "tasks" not in doc:
        raise TaskModelError(f"{where}: expected an object with a 'tasks' array")
    entries = doc["tasks"]
    if not isinstance(entries, list):
        raise TaskModelError(f"{where}: 'tasks' must be an array")
    tasks = []
    for pos, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise TaskModelError(f"{where}: tasks[{pos}] is not an object")
        unknown = set(entry) - {"period", "wcet", "deadline", "jitter",
                                "priority", "id"}
        if unknown:
            raise TaskModelError(
                f"{where}: tasks[{pos}] has unknown fields {sorted(unknown)}")
        try:
            tasks.append(Task(
                period=entry["period"],
                wcet=entry["wcet"],
                deadline=entry["deadline"],
                jitter=entry.get("jitter", 0),
                priority=entry["priority"],
                id=str(entry.get("id", "")),
            ))
        except KeyError as exc:
            raise TaskModelError(
                f"{where}: tasks[{pos}] is missing field {exc.args[0]!r}") from exc
    return validate(tasks)


def tasks_to_dict(ts: TaskSet) -> dict:
    """Render a TaskSet in the task-file layout (inverse of tasks_from_dict)."""
    return {"tasks": [
        {"id": t.id, "period": t.period, "wcet": int(t.wcet),
         "deadline": t.deadline, "jitter": t.jitter, "priority": t.priority}
        for t in ts
    ]}


def save_tasks(ts: TaskSet, path: str) -> None:
    """Write a TaskSet as a deterministic task-set file."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(tasks_to_dict(ts), fh, indent=2, sort_keys=True)
        fh.write("\n")
