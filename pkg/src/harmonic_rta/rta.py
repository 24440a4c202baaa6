"""Classic fixed-point response-time analysis: the ground-truth oracle.

Iterates the processor-demand recurrence t <- C_n + sum_i C_i*ceil((t+J_i)/T_i)
over the target's higher-priority tasks until the least fixed point is
reached.  Works for any constrained-deadline set whose higher-priority
utilization is below 1; harmonicity is not required, which is what makes
this the reference the fast harmonic paths are cross-checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .model import Task, TaskSet

MAX_ITERATIONS = 10 ** 6


class NonConvergent(ArithmeticError):
    """The fixed-point iteration cannot or did not reach a fixed point."""


class DomainError(ValueError):
    """Argument outside the domain of the nested-ceiling identity."""


@dataclass(frozen=True)
class RtaResult:
    """Outcome of one WCRT computation.

    `trace` holds successive iterates for the fixed-point oracles (it then
    ends with two equal values) or the per-stage values for the staged
    harmonic methods.  `margin` is deadline slack: D - J - wcrt for
    jitter-aware methods, D - wcrt otherwise; `schedulable` is margin >= 0.
    """

    wcrt: Fraction | int
    iterations: int
    trace: tuple
    schedulable: bool
    margin: Fraction | int


def _ceil_div(num, den: int):
    """Exact ceil(num/den) for int or Fraction num and positive int den."""
    if isinstance(num, int):
        return -(-num // den)
    return math.ceil(Fraction(num, den))


def _demand(t, wcet, hp: tuple[Task, ...], jitters: tuple[int, ...]):
    total = wcet
    for task, j in zip(hp, jitters):
        total += task.wcet * _ceil_div(t + j, task.period)
    return total


def _iterate(ts: TaskSet, target_index: int, jitters: tuple[int, ...],
             start=None) -> tuple:
    target = ts[target_index]
    hp = ts.tasks[:target_index]
    u_hp = sum((t.utilization for t in hp), Fraction(0))
    if u_hp >= 1:
        raise NonConvergent(
            f"higher-priority utilization {u_hp} >= 1: no fixed point exists")

    if start is None:
        # Weighted start (C_n + sum U_i*J_i)/(1 - U_hp): a provable lower
        # bound on the least fixed point (the demand dominates the line
        # C_n + U_hp*t + sum U_i*J_i pointwise), so iteration from it is safe.
        start = (Fraction(target.wcet)
                 + sum((t.utilization * j for t, j in zip(hp, jitters)),
                       Fraction(0))) / (1 - u_hp)
        if start.denominator == 1:
            start = int(start)

    # Unreachable for admissible inputs; guards relaxed-mode misuse.
    value_cap = math.ceil(
        (Fraction(target.wcet)
         + sum((t.wcet + t.utilization * j for t, j in zip(hp, jitters)),
               Fraction(0))) / (1 - u_hp))

    trace = [start]
    cur = start
    iterations = 0
    while True:
        nxt = _demand(cur, target.wcet, hp, jitters)
        trace.append(nxt)
        iterations += 1
        if nxt == cur:
            return nxt, iterations, tuple(trace)
        if nxt > value_cap or iterations >= MAX_ITERATIONS:
            raise NonConvergent(
                f"no fixed point below {value_cap} after {iterations} steps")
        cur = nxt


def wcrt_fixed_point(ts: TaskSet, target_index: int, start=None) -> RtaResult:
    """Exact WCRT by the classic recurrence, jitters treated as zero.

    Least fixed point of t = C_n + sum_{i<n} C_i*ceil(t/T_i), iterated from
    C_n/(1 - U_hp) (or from `start` when given).  Schedulable iff
    wcrt <= deadline.
    """
    target = ts[target_index]
    if start is None:
        u_hp = sum((t.utilization for t in ts.tasks[:target_index]), Fraction(0))
        if u_hp >= 1:
            raise NonConvergent(
                f"higher-priority utilization {u_hp} >= 1: no fixed point exists")
        start = Fraction(target.wcet) / (1 - u_hp)
        if start.denominator == 1:
            start = int(start)
    zeros = (0,) * target_index
    wcrt, iterations, trace = _iterate(ts, target_index, zeros, start=start)
    margin = target.deadline - wcrt
    return RtaResult(wcrt, iterations, trace, margin >= 0, margin)


def wcrt_fixed_point_jitter(ts: TaskSet, target_index: int, start=None) -> RtaResult:
    """Exact jitter-aware WCRT by the classic recurrence.

    Least fixed point of t = C_n + sum_{i<n} C_i*ceil((t + J_i)/T_i).
    Schedulable iff wcrt <= deadline - target jitter (the response is
    measured from release; arrival-to-deadline adds the target's own jitter).
    """
    target = ts[target_index]
    jitters = tuple(t.jitter for t in ts.tasks[:target_index])
    wcrt, iterations, trace = _iterate(ts, target_index, jitters, start=start)
    margin = target.deadline - target.jitter - wcrt
    return RtaResult(wcrt, iterations, trace, margin >= 0, margin)


def nested_ceil(x, z):
    """ceil(x + (1 - x/z)*ceil(z)) for rationals 0 < x <= z; equals ceil(z).

    The identity behind collapsing one stage's ceiling into the next: the
    correction term (1 - x/z)*ceil(z) never moves the sum across an integer
    boundary as long as 0 < x <= z.
    """
    x = Fraction(x)
    z = Fraction(z)
    if x <= 0 or x > z:
        raise DomainError(f"need 0 < x <= z, got x={x}, z={z}")
    return math.ceil(x + (1 - x / z) * math.ceil(z))
